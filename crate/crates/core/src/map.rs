//! Power-law changes of variables
//! `s = Cs t^gamma, y = Cy x^p t^q, w = Cw x^r t^s e^{Kt} u`.
//!
//! The transform works on "mixed" polynomials: explicit powers still refer to
//! the old `(x, t)` while jet slots already hold derivatives of `w` with
//! respect to `(y, s)`. After the chain rule has been applied, explicit
//! factors are rewritten through the inverse relations and the result is
//! solved for `w_s`.

use std::fmt;

use thiserror::Error;

use crate::equation::{EquationError, EvolutionEquation, Family};
use crate::flow::ScalingGenerator;
use crate::jet::{Chart, Deriv, Dir, JetError, JetPoly, JetVar, Monomial, N_JET};
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("map is not invertible: {0}")]
    NotInvertible(String),
    #[error("an e^(kt) factor requires a linear time map (gamma = 1), got gamma = {0}")]
    ExpNeedsLinearTime(Rational),
    #[error("scale constant {base}^({exp}) is not rational")]
    IrrationalScale { base: Rational, exp: Rational },
    #[error("transformed equation is not of evolution form: {0}")]
    NotEvolutionForm(String),
    #[error("scaling generators only push through maps without exponential factor")]
    NotScaling,
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Equation(#[from] EquationError),
}

pub type Result<T> = std::result::Result<T, MapError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PowerMap {
    pub gamma: Rational,
    pub p: Rational,
    pub q: Rational,
    pub r: Rational,
    pub s: Rational,
    pub k: Rational,
    pub c_sigma: Rational,
    pub c_y: Rational,
    pub c_w: Rational,
}

fn rpow(base: Rational, exp: Rational) -> Result<Rational> {
    base.pow_rational(exp).ok_or(MapError::IrrationalScale { base, exp })
}

impl PowerMap {
    pub fn new(gamma: Rational, p: Rational, q: Rational, r: Rational, s: Rational, k: Rational) -> Result<PowerMap> {
        PowerMap {
            gamma,
            p,
            q,
            r,
            s,
            k,
            c_sigma: Rational::ONE,
            c_y: Rational::ONE,
            c_w: Rational::ONE,
        }
        .validated()
    }

    pub fn with_scales(mut self, c_sigma: Rational, c_y: Rational, c_w: Rational) -> Result<PowerMap> {
        self.c_sigma = c_sigma;
        self.c_y = c_y;
        self.c_w = c_w;
        self.validated()
    }

    fn validated(self) -> Result<PowerMap> {
        if self.gamma.is_zero() {
            return Err(MapError::NotInvertible("gamma = 0".into()));
        }
        if self.p.is_zero() {
            return Err(MapError::NotInvertible("p = 0".into()));
        }
        if !self.c_sigma.is_positive() || !self.c_y.is_positive() || self.c_w.is_zero() {
            return Err(MapError::NotInvertible("scale constants must be positive (Cw nonzero)".into()));
        }
        if !self.k.is_zero() && !self.gamma.is_one() {
            return Err(MapError::ExpNeedsLinearTime(self.gamma));
        }
        Ok(self)
    }

    pub fn identity() -> PowerMap {
        let (o, z) = (Rational::ONE, Rational::ZERO);
        PowerMap::new(o, o, z, z, z, z).expect("identity is valid")
    }

    /// `s = t^{a n}, y = x^{a/2}, w = t^{(2-a) n / 2} u`.
    pub fn anomalous_to_heat(alpha: Rational, nu: Rational) -> Result<PowerMap> {
        let two = Rational::int(2);
        let z = Rational::ZERO;
        PowerMap::new(alpha * nu, alpha / two, z, z, (two - alpha) * nu / two, z)
    }

    /// `s = t^{a n} / (a n), y = (2/a) x^{a/2}, w = u`: carries the anomalous
    /// diffusion family onto `w_s = w_yy` for every `(a, n)`.
    pub fn anomalous_to_heat_scaled(alpha: Rational, nu: Rational) -> Result<PowerMap> {
        let two = Rational::int(2);
        let z = Rational::ZERO;
        PowerMap::new(alpha * nu, alpha / two, z, z, z, z)?.with_scales(
            (alpha * nu).recip(),
            two / alpha,
            Rational::ONE,
        )
    }

    /// `s = t, y = x / t^delta, w = e^{Kt} u`.
    pub fn comoving(delta: Rational, k: Rational) -> Result<PowerMap> {
        let (o, z) = (Rational::ONE, Rational::ZERO);
        PowerMap::new(o, o, -delta, z, z, k)
    }

    pub fn inverse(&self) -> Result<PowerMap> {
        let m = self;
        let g_inv = m.gamma.recip();
        let p_inv = m.p.recip();
        let q2 = -m.q / (m.p * m.gamma);
        let r2 = -m.r / m.p;
        let s2 = m.r * m.q / (m.p * m.gamma) - m.s / m.gamma;
        let k2 = -m.k / m.c_sigma;
        let cs2 = rpow(m.c_sigma, -g_inv)?;
        let cy2 = rpow(m.c_y, -p_inv)? * rpow(m.c_sigma, m.q / (m.p * m.gamma))?;
        let cw2 = m.c_w.recip()
            * rpow(m.c_y, m.r / m.p)?
            * rpow(m.c_sigma, (m.s - m.r * m.q / m.p) / m.gamma)?;
        PowerMap::new(g_inv, p_inv, q2, r2, s2, k2)?.with_scales(cs2, cy2, cw2)
    }

    /// Pushes `a x d/dx + b t d/dt + c u d/du` into the new coordinates.
    pub fn push_scaling(&self, g: ScalingGenerator) -> Result<ScalingGenerator> {
        if !self.k.is_zero() {
            return Err(MapError::NotScaling);
        }
        let a = g.a * self.p + g.b * self.q;
        let b = g.b * self.gamma;
        let c = g.a * self.r + g.b * self.s + g.c;
        ScalingGenerator::new(a, b, c).map_err(|_| MapError::NotScaling)
    }

    fn mono(&self, c: Rational, xpow: Rational, tpow: Rational) -> JetPoly {
        let mut m = Monomial::one();
        m.xpow = xpow;
        m.tpow = tpow;
        JetPoly::term(c, m)
    }

    /// Chain-rule total derivative on mixed polynomials.
    fn mixed_derivative(&self, p: &JetPoly, dir: Dir) -> Result<JetPoly> {
        let one = Rational::ONE;
        let y_x = self.mono(self.c_y * self.p, self.p - one, self.q);
        let y_t = self.mono(self.c_y * self.q, self.p, self.q - one);
        let s_t = self.mono(self.c_sigma * self.gamma, Rational::ZERO, self.gamma - one);
        let mut out = p.partial(match dir {
            Dir::X => JetVar::X,
            Dir::T => JetVar::T,
        });
        for d in p.jet_vars() {
            let dp = p.partial(JetVar::Jet(d));
            let bump = |dir| {
                d.bump(dir)
                    .map(JetPoly::var)
                    .ok_or_else(|| JetError::OrderOverflow(d.name(Chart::Adapted)))
            };
            let chain = match dir {
                Dir::X => bump(Dir::X)? * &y_x,
                Dir::T => {
                    let mut c = bump(Dir::T)? * &s_t;
                    if !self.q.is_zero() {
                        c = c + bump(Dir::X)? * &y_t;
                    }
                    c
                }
            };
            out = out + dp * chain;
        }
        Ok(out)
    }

    /// Rewrites explicit `x^a t^b e^{kt}` in terms of `(y, s)`.
    fn to_new_coords(&self, p: &JetPoly) -> Result<JetPoly> {
        let mut out = JetPoly::zero();
        for (m, c) in p.terms() {
            if !m.exprate.is_zero() && !self.gamma.is_one() {
                return Err(MapError::ExpNeedsLinearTime(self.gamma));
            }
            let ypow = m.xpow / self.p;
            let beta = m.tpow - self.q * m.xpow / self.p;
            let spow = beta / self.gamma;
            let coeff = *c * rpow(self.c_y, -ypow)? * rpow(self.c_sigma, -spow)?;
            let mut m2 = m.clone();
            m2.xpow = ypow;
            m2.tpow = spow;
            m2.exprate = m.exprate / self.c_sigma;
            out.add_term(coeff, m2);
        }
        Ok(out)
    }
}

impl fmt::Display for PowerMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gamma={} p={} q={} r={} s={} K={} c_sigma={} c_y={} c_w={}",
            self.gamma, self.p, self.q, self.r, self.s, self.k, self.c_sigma, self.c_y, self.c_w
        )
    }
}

/// Expresses `eq` in the new coordinates, solved for `w_s`.
pub fn transform(eq: &EvolutionEquation, m: &PowerMap) -> Result<EvolutionEquation> {
    // u = W w with W = Cw^{-1} x^{-r} t^{-s} e^{-Kt}
    let mut wm = Monomial::one();
    wm.xpow = -m.r;
    wm.tpow = -m.s;
    wm.exprate = -m.k;
    let u = JetPoly::term(m.c_w.recip(), wm) * JetPoly::var(Deriv::U);
    let u_x = m.mixed_derivative(&u, Dir::X)?;
    let u_t = m.mixed_derivative(&u, Dir::T)?;
    let u_xx = m.mixed_derivative(&u_x, Dir::X)?;
    let mut reps: [Option<JetPoly>; N_JET] = Default::default();
    reps[Deriv::U.index()] = Some(u);
    reps[Deriv::UX.index()] = Some(u_x);
    reps[Deriv::UXX.index()] = Some(u_xx);
    let mixed = u_t - eq.rhs().compose_jets(&reps);
    let delta = m.to_new_coords(&mixed)?;
    let (a, b) = delta
        .linear_split(Deriv::UT)
        .ok_or_else(|| MapError::NotEvolutionForm(delta.to_string()))?;
    if a.is_zero() {
        return Err(MapError::NotEvolutionForm("w_s coefficient vanishes".into()));
    }
    let inv = a
        .monomial_inverse()
        .ok_or_else(|| MapError::NotEvolutionForm(format!("w_s coefficient {a}")))?;
    let rhs = -(b * inv);
    let chart = match eq.chart() {
        Chart::Original => Chart::Adapted,
        Chart::Adapted => Chart::Original,
    };
    EvolutionEquation::with_family(rhs, Family::Custom, chart).map_err(|e| match e {
        EquationError::TimeDerivative(s) => MapError::NotEvolutionForm(s),
        other => MapError::Equation(other),
    })
}

/// Sets `w_s` (and its derivatives) to zero and divides out a power of `s`
/// shared by every term. What remains must vanish for invariant solutions.
pub fn reduce_invariant(eq: &EvolutionEquation) -> JetPoly {
    let rhs = eq.rhs().map_terms(|m, c| {
        let has_t = Deriv::all().any(|d| d.nt > 0 && m.jet_pow(d) > 0);
        (!has_t).then(|| (c, m.clone()))
    });
    let keys: Vec<(Rational, Rational)> = rhs.terms().map(|(m, _)| (m.tpow, m.exprate)).collect();
    let Some(&first) = keys.first() else { return rhs };
    if keys.iter().all(|k| *k == first) {
        let (tp, er) = first;
        rhs.map_terms(|m, c| {
            let mut m2 = m.clone();
            m2.tpow = m.tpow - tp;
            m2.exprate = m.exprate - er;
            Some((c, m2))
        })
    } else {
        rhs
    }
}

/// Groups terms by their `(s power, exponential rate)` and strips those
/// factors; each group must vanish separately for invariant solutions.
pub fn sigma_power_split(p: &JetPoly) -> Vec<(Rational, Rational, JetPoly)> {
    let mut groups: Vec<(Rational, Rational, JetPoly)> = Vec::new();
    for (m, c) in p.terms() {
        let mut m2 = m.clone();
        m2.tpow = Rational::ZERO;
        m2.exprate = Rational::ZERO;
        match groups.iter_mut().find(|g| g.0 == m.tpow && g.1 == m.exprate) {
            Some(g) => g.2.add_term(*c, m2),
            None => groups.push((m.tpow, m.exprate, JetPoly::term(*c, m2))),
        }
    }
    groups
}

/// Dense univariate polynomial over the rationals, lowest degree first.
fn poly_trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn poly_rem(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut r = a.to_vec();
    let lead = *b.last().expect("nonzero divisor");
    while r.len() >= b.len() && !r.is_empty() {
        let f = *r.last().unwrap() / lead;
        let shift = r.len() - b.len();
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= f * *bc;
        }
        r = poly_trim(r);
    }
    r
}

fn poly_gcd(a: Vec<Rational>, b: Vec<Rational>) -> Vec<Rational> {
    let (mut a, mut b) = (poly_trim(a), poly_trim(b));
    while !b.is_empty() {
        let r = poly_rem(&a, &b);
        a = b;
        b = r;
    }
    a
}

/// Exponents `m` (from `candidates`) for which `w = c y^m` with some nonzero
/// constant `c` solves every group simultaneously.
pub fn monomial_solutions(groups: &[JetPoly], candidates: &[Rational]) -> Vec<Rational> {
    let mut found = Vec::new();
    'cand: for &mexp in candidates {
        // gcd over all coefficient polynomials in c, after dividing out c^min
        let mut g: Option<Vec<Rational>> = None;
        for grp in groups {
            // y exponent -> polynomial in c
            let mut by_y: Vec<(Rational, Vec<Rational>)> = Vec::new();
            for (mono, coeff) in grp.terms() {
                if !mono.exprate.is_zero() || !mono.tpow.is_zero() {
                    continue 'cand;
                }
                let mut factor = *coeff;
                let mut deg = 0usize;
                let mut ypow = mono.xpow;
                for d in Deriv::all() {
                    let n = mono.jet_pow(d);
                    if n == 0 {
                        continue;
                    }
                    if d.nt > 0 {
                        continue 'cand;
                    }
                    let mut fall = Rational::ONE;
                    for j in 0..d.nx {
                        fall *= mexp - Rational::int(j as i128);
                    }
                    factor *= fall.powi(n as i32);
                    deg += n as usize;
                    ypow += Rational::int(n as i128) * (mexp - Rational::int(d.nx as i128));
                }
                if factor.is_zero() {
                    continue;
                }
                let slot = match by_y.iter_mut().find(|e| e.0 == ypow) {
                    Some(e) => &mut e.1,
                    None => {
                        by_y.push((ypow, Vec::new()));
                        &mut by_y.last_mut().unwrap().1
                    }
                };
                if slot.len() <= deg {
                    slot.resize(deg + 1, Rational::ZERO);
                }
                slot[deg] += factor;
            }
            for (_, poly) in by_y {
                let mut poly = poly_trim(poly);
                if poly.is_empty() {
                    continue;
                }
                let lead_zero = poly.iter().take_while(|c| c.is_zero()).count();
                poly.drain(..lead_zero);
                g = Some(match g {
                    None => poly,
                    Some(prev) => poly_gcd(prev, poly),
                });
            }
        }
        match g {
            None => found.push(mexp),
            Some(p) if p.len() > 1 => found.push(mexp),
            _ => {}
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn identity_inverse() {
        assert_eq!(PowerMap::identity().inverse().unwrap(), PowerMap::identity());
    }

    #[test]
    fn gamma_zero_rejected() {
        let z = q(0, 1);
        assert!(PowerMap::new(z, q(1, 1), z, z, z, z).is_err());
        assert!(PowerMap::new(q(2, 1), q(1, 1), z, z, z, q(1, 1)).is_err());
    }

    #[test]
    fn heat_identity_transform() {
        let eq = EvolutionEquation::heat();
        let t = transform(&eq, &PowerMap::identity()).unwrap();
        assert_eq!(t.rhs(), eq.rhs());
        assert_eq!(t.chart(), Chart::Adapted);
    }

    #[test]
    fn reduce_trivial() {
        let eq = EvolutionEquation::heat().in_chart(Chart::Adapted);
        assert_eq!(reduce_invariant(&eq), JetPoly::var(Deriv::UXX));
    }

    #[test]
    fn monomial_trial_linear() {
        // w_yy - 2 w / y^2 = 0 has w = y^2 and w = y^-1
        let g = JetPoly::var(Deriv::UXX) - (JetPoly::x_pow(q(-2, 1)) * JetPoly::u()).scale(q(2, 1));
        let cands: Vec<Rational> = (-6..=6).map(|k| q(k, 2)).collect();
        assert_eq!(monomial_solutions(&[g.clone()], &cands), vec![q(-1, 1), q(2, 1)]);
        // adding a pure w^2 group kills every nonzero solution
        assert!(monomial_solutions(&[g, JetPoly::u().pow(2)], &cands).is_empty());
    }
}
