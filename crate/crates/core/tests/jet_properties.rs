use ardsym_core::catalog::{jet_point_of, CatalogFn};
use ardsym_core::jet::{Deriv, Dir, JetPoint, JetPoly, JetTerm, Monomial, VectorField};
use ardsym_core::{q, Rational};
use proptest::prelude::*;

const LOW: [Deriv; 6] = [Deriv::U, Deriv::UX, Deriv::UT, Deriv::UXX, Deriv::UXT, Deriv::UTT];

fn rational(num: i128, den: i128) -> impl Strategy<Value = Rational> {
    (-num..=num, 1..=den).prop_map(|(n, d)| q(n, d))
}

fn monomial(jets: bool) -> impl Strategy<Value = Monomial> {
    (
        -1i128..=1,
        (-4i128..=4).prop_map(|k| q(k, 2)),
        (-4i128..=4).prop_map(|k| q(k, 2)),
        proptest::collection::vec(0u8..=2, 6),
    )
        .prop_map(move |(e, xp, tp, pows)| {
            let mut m = Monomial::one();
            m.exprate = Rational::int(e);
            m.xpow = xp;
            m.tpow = tp;
            for (d, n) in LOW.iter().zip(pows) {
                if jets || *d == Deriv::U {
                    m.jet[d.index()] = n;
                }
            }
            m
        })
}

fn poly_with(jets: bool, max_terms: usize) -> impl Strategy<Value = JetPoly> {
    proptest::collection::vec((rational(5, 4), monomial(jets)), 0..=max_terms)
        .prop_map(|ts| JetPoly::from_terms(ts.into_iter().map(|(coeff, mono)| JetTerm { coeff, mono })))
}

fn poly() -> impl Strategy<Value = JetPoly> {
    poly_with(true, 4)
}

/// Coefficient functions of a vector field: no derivative variables.
fn base_poly() -> impl Strategy<Value = JetPoly> {
    poly_with(false, 3)
}

fn field() -> impl Strategy<Value = VectorField> {
    (base_poly(), base_poly(), base_poly()).prop_map(|(a, b, c)| VectorField::new(a, b, c).unwrap())
}

fn heat_point(dx: f64) -> JetPoint {
    jet_point_of(&CatalogFn::HeatKernel, 0.8 + dx, 1.7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &JetPoly::one(), a.clone());
        prop_assert!((&a * &JetPoly::zero()).is_zero());
    }

    #[test]
    fn canonical_form_is_idempotent(a in poly(), b in poly()) {
        let p = &a * &b + a.clone();
        prop_assert_eq!(p.recanonicalize(), p.clone());
        prop_assert_eq!(JetPoly::from_terms(p.to_terms()), p.clone());
        prop_assert!(p.terms().all(|(_, c)| !c.is_zero()));
    }

    #[test]
    fn total_derivatives_commute(p in poly()) {
        let xt = p.total_derivative(Dir::X).unwrap().total_derivative(Dir::T).unwrap();
        let tx = p.total_derivative(Dir::T).unwrap().total_derivative(Dir::X).unwrap();
        prop_assert_eq!(xt, tx);
    }

    #[test]
    fn leibniz(a in poly(), b in poly()) {
        for dir in [Dir::X, Dir::T] {
            let lhs = (&a * &b).total_derivative(dir).unwrap();
            let rhs = &a.total_derivative(dir).unwrap() * &b + &a * &b.total_derivative(dir).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn total_x_derivative_matches_finite_difference(p in poly()) {
        let h = 1e-4;
        let fd = (p.evaluate(&heat_point(h)).unwrap() - p.evaluate(&heat_point(-h)).unwrap()) / (2.0 * h);
        let dp = p.total_derivative(Dir::X).unwrap();
        let centre = heat_point(0.0);
        let exact = dp.evaluate(&centre).unwrap();
        let scale = dp.term_magnitude(&centre).unwrap().max(1e-300);
        prop_assert!((fd - exact).abs() <= 1e-6 * scale, "fd {fd} exact {exact} scale {scale}");
    }

    #[test]
    fn total_t_derivative_matches_finite_difference(p in poly()) {
        let h = 1e-4;
        let at = |t: f64| jet_point_of(&CatalogFn::HeatKernel, 0.8, t);
        let fd = (p.evaluate(&at(1.7 + h)).unwrap() - p.evaluate(&at(1.7 - h)).unwrap()) / (2.0 * h);
        let dp = p.total_derivative(Dir::T).unwrap();
        let exact = dp.evaluate(&at(1.7)).unwrap();
        let scale = dp.term_magnitude(&at(1.7)).unwrap().max(1e-300);
        prop_assert!((fd - exact).abs() <= 1e-6 * scale, "fd {fd} exact {exact} scale {scale}");
    }

    #[test]
    fn prolongation_is_linear(x1 in field(), x2 in field(), a in rational(4, 3), b in rational(4, 3)) {
        let y1 = x1.prolong().unwrap();
        let y2 = x2.prolong().unwrap();
        let y = VectorField::linear_combination(a, &x1, b, &x2).prolong().unwrap();
        for d in [Deriv::UX, Deriv::UT, Deriv::UXX, Deriv::UXT, Deriv::UTT] {
            let expect = y1.psi(d).unwrap().scale(a) + y2.psi(d).unwrap().scale(b);
            prop_assert_eq!(y.psi(d).unwrap(), &expect);
        }
    }
}

#[test]
fn ring_examples() {
    let xu = JetPoly::x() * JetPoly::u();
    assert!((&xu + &(-&xu)).is_zero());
    let lhs = (JetPoly::x_pow(q(1, 2)) * JetPoly::u()) * (JetPoly::x_pow(q(1, 2)) * JetPoly::var(Deriv::UX));
    assert_eq!(lhs, JetPoly::x() * JetPoly::u() * JetPoly::var(Deriv::UX));
    let k = q(3, 2);
    let e = (JetPoly::exp_t(-k) * JetPoly::u()) * (JetPoly::exp_t(k) * JetPoly::u());
    assert_eq!(e, JetPoly::u().pow(2));
}

#[test]
fn derivative_examples() {
    let x2u = JetPoly::x().pow(2) * JetPoly::u();
    let expect = (JetPoly::x() * JetPoly::u()).scale(q(2, 1)) + JetPoly::x().pow(2) * JetPoly::var(Deriv::UX);
    assert_eq!(x2u.total_derivative(Dir::X).unwrap(), expect);
    let uux = JetPoly::u() * JetPoly::var(Deriv::UX);
    let expect = JetPoly::var(Deriv::UX).pow(2) + JetPoly::u() * JetPoly::var(Deriv::UXX);
    assert_eq!(uux.total_derivative(Dir::X).unwrap(), expect);
    let k = q(-2, 3);
    let eu = JetPoly::exp_t(k) * JetPoly::u();
    let expect = eu.scale(k) + JetPoly::exp_t(k) * JetPoly::var(Deriv::UT);
    assert_eq!(eu.total_derivative(Dir::T).unwrap(), expect);
    let top = JetPoly::var(Deriv::new(4, 0).unwrap());
    assert!(top.total_derivative(Dir::X).is_err());
}

#[test]
fn prolongation_examples() {
    // X1 = d/dx + t^{-d}/l0 d/du, X0 = (d x + c0 t^{1+d}) d/dx + t d/dt
    let (d, l0, c0) = (q(7, 4), q(512, 1331), q(3, 5));
    let x1 = VectorField::new(JetPoly::one(), JetPoly::zero(), JetPoly::t_pow(-d).scale(l0.recip())).unwrap();
    let y1 = x1.prolong().unwrap();
    let one = Rational::ONE;
    assert!(y1.psi_x().is_zero() && y1.psi_xx().is_zero() && y1.psi_xt().is_zero());
    assert_eq!(y1.psi_t(), &JetPoly::t_pow(-(one + d)).scale(-d / l0));
    assert_eq!(y1.psi_tt(), &JetPoly::t_pow(-(q(2, 1) + d)).scale(d / l0 * (one + d)));

    let xi = JetPoly::x().scale(d) + JetPoly::t_pow(one + d).scale(c0);
    let y0 = VectorField::new(xi, JetPoly::t(), JetPoly::zero()).unwrap().prolong().unwrap();
    let ux = JetPoly::var(Deriv::UX);
    assert_eq!(y0.psi_x(), &ux.scale(-d));
    let expect = (JetPoly::t_pow(d) * ux.clone()).scale(-(one + d) * c0) - JetPoly::var(Deriv::UT);
    assert_eq!(y0.psi_t(), &expect);
    assert_eq!(y0.psi_xx(), &JetPoly::var(Deriv::UXX).scale(q(-2, 1) * d));

    let y = VectorField::scaling(Rational::ZERO, Rational::ZERO, one).prolong().unwrap();
    assert_eq!(y.psi_x(), &ux);
    assert_eq!(y.psi_t(), &JetPoly::var(Deriv::UT));
    assert_eq!(y.psi_xx(), &JetPoly::var(Deriv::UXX));
}
