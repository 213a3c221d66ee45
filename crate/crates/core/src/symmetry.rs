//! Exact, partial and asymptotic symmetry checks.
//!
//! A partial-symmetry chain is built as `D_{k+1} = [Y D_k]` restricted to the
//! solution manifold of the equation and reduced modulo the earlier members.
//! The reduction is exact where an earlier member is linear in some jet
//! variable with a single jet-free term as coefficient (that variable is then
//! eliminated); anything left over is tested numerically by sampling common
//! zeros of the earlier members.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::catalog::{jet_point_of, CatalogFn};
use crate::equation::EvolutionEquation;
use crate::fit::power_law_fit;
use crate::jet::{Chart, Deriv, JetError, JetPoint, JetPoly, JetVar, VectorField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymmetryError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("expression is not solvable for {0}: {1}")]
    NotSolvable(String, String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("chain length {0} exceeds the cap of 6")]
    ChainTooLong(usize),
    #[error("membership check needs a nonempty chain")]
    EmptyChain,
}

pub type Result<T> = std::result::Result<T, SymmetryError>;

/// True iff `[Y (u_t - F)]` vanishes on solutions.
pub fn is_symmetry(x: &VectorField, eq: &EvolutionEquation) -> Result<bool> {
    let y = x.prolong()?;
    let d1 = eq.restrict(&y.apply(&eq.residual())?)?;
    Ok(d1.is_zero())
}

/// Symmetry test for an arbitrary expression `p = 0` solved for `solve_for`.
pub fn is_symmetry_general(p: &JetPoly, solve_for: Deriv, x: &VectorField) -> Result<bool> {
    let rule = solve_linear(p, solve_for)
        .ok_or_else(|| SymmetryError::NotSolvable(solve_for.name(Chart::Original), p.to_string()))?;
    let y = x.prolong()?;
    let yp = y.apply(p)?;
    Ok(yp.substitute(solve_for, &rule).is_zero())
}

/// `v = -b / a` when `p = a v + b` with `a` a single jet-free term.
fn solve_linear(p: &JetPoly, v: Deriv) -> Option<JetPoly> {
    if !p.contains(v) {
        return None;
    }
    let (a, b) = p.linear_split(v)?;
    let inv = a.monomial_inverse()?;
    Some(-(b * inv))
}

/// Picks the highest-order jet variable that `p` can be solved for exactly.
fn pivot(p: &JetPoly) -> Option<(Deriv, JetPoly)> {
    let mut vars = p.jet_vars();
    vars.reverse();
    vars.into_iter().find_map(|v| solve_linear(p, v).map(|r| (v, r)))
}

fn reduce(p: &JetPoly, rules: &[(Deriv, JetPoly)]) -> JetPoly {
    let mut cur = p.clone();
    for _ in 0..=rules.len() {
        let before = cur.clone();
        for (v, r) in rules {
            cur = cur.substitute(*v, r);
        }
        if cur == before {
            break;
        }
    }
    cur
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    Exact,
    Partial { order: usize },
    Inconclusive,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Exact => write!(f, "exact"),
            Classification::Partial { order } => write!(f, "partial (order {order})"),
            Classification::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// A solution used to measure how fast chain members vanish along it.
#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    pub solution: CatalogFn,
    pub x: f64,
    pub t_values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainOptions {
    pub max_p: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub probe: Option<Probe>,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions { max_p: 4, samples: 20, seed: 1, tol: 1e-9, probe: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipStats {
    pub samples: usize,
    pub converged: usize,
    pub failures: usize,
    pub max_relative: f64,
    pub mean_relative: f64,
    pub unknowns: Vec<JetVar>,
}

impl MembershipStats {
    pub fn passes(&self, tol: f64) -> bool {
        self.converged > 0 && self.failures == 0 && self.max_relative < tol
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    /// `D_0` (the residual `u_t - F`) followed by the reduced chain members.
    pub chain: Vec<JetPoly>,
    pub classification: Classification,
    /// Membership statistics of the last member on the zeros of the
    /// preceding ones (absent when no such test was run).
    pub membership: Option<MembershipStats>,
    /// Decay exponent of each chain member along the probe solution.
    pub decay_exponents: Vec<Option<f64>>,
    pub chart: Chart,
}

impl SymmetryReport {
    /// The equation residual and the invariance condition (D0, D1) both decay along the probe.
    pub fn is_asymptotic(&self) -> bool {
        self.chain.len() >= 2
            && self.decay_exponents.len() >= 2
            && self.decay_exponents[..2].iter().all(|e| e.is_some_and(|v| v < -1e-3))
    }

    pub fn verdict(&self) -> &'static str {
        match (&self.classification, self.is_asymptotic()) {
            (Classification::Exact, _) => "exact symmetry",
            (Classification::Partial { .. }, _) => "partial symmetry",
            (Classification::Inconclusive, true) => "asymptotic partial symmetry",
            (Classification::Inconclusive, false) => "inconclusive",
        }
    }
}

impl fmt::Display for SymmetryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "classification: {}", self.classification)?;
        writeln!(f, "verdict: {}", self.verdict())?;
        for (i, d) in self.chain.iter().enumerate() {
            let kind = if d.is_zero() {
                "zero"
            } else if !d.contains_derivatives() {
                "algebraic"
            } else {
                "differential"
            };
            writeln!(f, "D{i} [{kind}] = {}", d.display(self.chart))?;
        }
        if let Some(m) = &self.membership {
            writeln!(
                f,
                "membership: samples={} converged={} failures={} max_rel={:.3e} mean_rel={:.3e}",
                m.samples, m.converged, m.failures, m.max_relative, m.mean_relative
            )?;
        }
        for (i, e) in self.decay_exponents.iter().enumerate() {
            match e {
                Some(v) => writeln!(f, "decay D{i}: {v:.10}")?,
                None => writeln!(f, "decay D{i}: n/a")?,
            }
        }
        Ok(())
    }
}

pub fn partial_symmetry_chain(x: &VectorField, eq: &EvolutionEquation, opts: &ChainOptions) -> Result<SymmetryReport> {
    if opts.max_p > 6 {
        return Err(SymmetryError::ChainTooLong(opts.max_p));
    }
    let y = x.prolong()?;
    let mut chain = vec![eq.residual()];
    let mut rules: Vec<(Deriv, JetPoly)> = Vec::new();
    let mut classification = Classification::Inconclusive;
    let mut membership = None;
    for k in 0..opts.max_p {
        let raw = eq.restrict(&y.apply(&chain[k])?)?;
        let next = reduce(&raw, &rules);
        chain.push(next.clone());
        if next.is_zero() {
            classification = if k == 0 { Classification::Exact } else { Classification::Partial { order: k + 1 } };
            break;
        }
        if k >= 1 {
            let stats = pointwise_membership_check(&chain[1..], opts.samples, opts.seed)?;
            let ok = stats.passes(opts.tol);
            membership = Some(stats);
            if ok {
                classification = Classification::Partial { order: k + 1 };
                break;
            }
        }
        if let Some(rule) = pivot(&next) {
            rules.push(rule);
        }
    }
    let decay_exponents = match &opts.probe {
        Some(pr) => chain
            .iter()
            .map(|d| decay_exponent(d, &pr.solution, pr.x, &pr.t_values).ok())
            .collect(),
        None => Vec::new(),
    };
    Ok(SymmetryReport { chain, classification, membership, decay_exponents, chart: eq.chart() })
}

/// Chooses one unknown per constraint: the highest-order jet variable of each
/// constraint not already taken, falling back to `x` and then `t` once the
/// jet variables are used up.
fn choose_unknowns(constraints: &[JetPoly]) -> Vec<Option<JetVar>> {
    let mut taken: Vec<JetVar> = Vec::new();
    constraints
        .iter()
        .map(|c| {
            let mut vars: Vec<JetVar> = c.jet_vars().into_iter().map(JetVar::Jet).collect();
            vars.reverse();
            if c.terms().any(|(m, _)| !m.xpow.is_zero()) {
                vars.push(JetVar::X);
            }
            if c.terms().any(|(m, _)| !m.tpow.is_zero() || !m.exprate.is_zero()) {
                vars.push(JetVar::T);
            }
            let v = vars.into_iter().find(|v| !taken.contains(v));
            if let Some(v) = v {
                taken.push(v);
            }
            v
        })
        .collect()
}

fn get_var(p: &JetPoint, v: JetVar) -> f64 {
    match v {
        JetVar::X => p.x,
        JetVar::T => p.t,
        JetVar::Jet(d) => p.get(d),
    }
}

fn set_var(p: &mut JetPoint, v: JetVar, val: f64) {
    match v {
        JetVar::X => p.x = val,
        JetVar::T => p.t = val,
        JetVar::Jet(d) => p.set(d, val),
    }
}

const NEWTON_STARTS: usize = 10;
const NEWTON_ITERS: usize = 60;

/// Samples common zeros of `chain[..n-1]` and reports `|chain[n-1]|` there,
/// relative to the sum of its term magnitudes.
pub fn pointwise_membership_check(chain: &[JetPoly], samples: usize, seed: u64) -> Result<MembershipStats> {
    let (target, constraints) = chain.split_last().ok_or(SymmetryError::EmptyChain)?;
    let unknowns = choose_unknowns(constraints);
    let solvable = unknowns.iter().all(Option::is_some);
    let unknowns: Vec<JetVar> = unknowns.into_iter().flatten().collect();
    let jac: Vec<Vec<JetPoly>> = constraints
        .iter()
        .map(|c| unknowns.iter().map(|v| c.partial(*v)).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut converged = 0;
    let mut failures = 0;
    let mut max_rel: f64 = 0.0;
    let mut sum_rel = 0.0;
    let mut n_rel = 0usize;
    for _ in 0..samples {
        let mut pt = JetPoint::new(rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0));
        for d in Deriv::all() {
            pt.set(d, rng.gen_range(-1.0..1.0));
        }
        if !solvable {
            failures += 1;
            continue;
        }
        let mut any = false;
        for _ in 0..NEWTON_STARTS {
            let mut p = pt.clone();
            for v in &unknowns {
                let val = match v {
                    JetVar::Jet(_) => rng.gen_range(-2.0..2.0),
                    _ => rng.gen_range(0.5..3.0),
                };
                set_var(&mut p, *v, val);
            }
            if newton(constraints, &jac, &unknowns, &mut p) {
                any = true;
                let val = target.evaluate(&p)?;
                let mag = target.term_magnitude(&p)?;
                let rel = if mag > 1e-300 { val.abs() / mag } else { 0.0 };
                max_rel = max_rel.max(rel);
                sum_rel += rel;
                n_rel += 1;
            }
        }
        if any {
            converged += 1;
        } else {
            failures += 1;
        }
    }
    Ok(MembershipStats {
        samples,
        converged,
        failures,
        max_relative: max_rel,
        mean_relative: if n_rel > 0 { sum_rel / n_rel as f64 } else { 0.0 },
        unknowns,
    })
}

fn scaled_residual(constraints: &[JetPoly], p: &JetPoint) -> Option<(Vec<f64>, f64)> {
    let mut r = Vec::with_capacity(constraints.len());
    let mut worst: f64 = 0.0;
    for c in constraints {
        let v = c.evaluate(p).ok()?;
        let m = c.term_magnitude(p).ok()?;
        if !v.is_finite() {
            return None;
        }
        worst = worst.max(if m > 1e-300 { v.abs() / m } else { 0.0 });
        r.push(v);
    }
    Some((r, worst))
}

/// Damped Newton on the unknown jet slots; returns whether it converged.
fn newton(constraints: &[JetPoly], jac: &[Vec<JetPoly>], unknowns: &[JetVar], p: &mut JetPoint) -> bool {
    let n = unknowns.len();
    if n == 0 {
        return scaled_residual(constraints, p).is_some_and(|(_, w)| w < 1e-12);
    }
    let norm = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    for _ in 0..NEWTON_ITERS {
        let Some((r, worst)) = scaled_residual(constraints, p) else { return false };
        if worst < 1e-13 {
            return true;
        }
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                match jac[i][j].evaluate(p) {
                    Ok(v) => a[i][j] = v,
                    Err(_) => return false,
                }
            }
        }
        let Some(step) = solve_dense(a, r.iter().map(|v| -v).collect()) else { return false };
        let r0 = norm(&r);
        let mut lam = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial = p.clone();
            for (k, v) in unknowns.iter().enumerate() {
                set_var(&mut trial, *v, get_var(p, *v) + lam * step[k]);
            }
            if let Some((rt, _)) = scaled_residual(constraints, &trial) {
                if norm(&rt) < r0 || norm(&rt) == 0.0 {
                    *p = trial;
                    accepted = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if !accepted {
            return scaled_residual(constraints, p).is_some_and(|(_, w)| w < 1e-11);
        }
    }
    scaled_residual(constraints, p).is_some_and(|(_, w)| w < 1e-11)
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Log-log slope of `|p|` along a catalog solution at fixed `x`.
pub fn decay_exponent(p: &JetPoly, f: &CatalogFn, x: f64, t_values: &[f64]) -> Result<f64> {
    let (lo, hi) = t_values
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &t| (lo.min(t), hi.max(t)));
    if t_values.len() < 3 || !(hi / lo >= 100.0 * (1.0 - 1e-12)) {
        return Err(SymmetryError::DegenerateFit("t values must span two decades".into()));
    }
    let mut vals = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let v = p.evaluate(&jet_point_of(f, x, t))?.abs();
        if !(v > 1e-300) || !v.is_finite() {
            return Err(SymmetryError::DegenerateFit(format!("|p| = {v} at t = {t}")));
        }
        vals.push(v);
    }
    power_law_fit(t_values, &vals)
        .map(|fit| fit.slope)
        .ok_or_else(|| SymmetryError::DegenerateFit("singular abscissa".into()))
}

/// Group action `(c1, c2) -> (e^{a+b}(c1 + b c2), e^{a+b} c2)` on the
/// coefficients of `c1 e^{-z} + c2 z e^{-z}`.
pub fn linear_front_group_action(c1: f64, c2: f64, alpha: f64, beta: f64) -> (f64, f64) {
    let g = (alpha + beta).exp();
    (g * (c1 + beta * c2), g * c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::geometric;
    use crate::rational::q;

    #[test]
    fn heat_scaling_is_symmetry() {
        let x = VectorField::scaling(q(1, 1), q(2, 1), q(-1, 1));
        assert!(is_symmetry(&x, &EvolutionEquation::heat()).unwrap());
    }

    #[test]
    fn fkpp_translations() {
        let eq = EvolutionEquation::fkpp();
        assert!(is_symmetry(&VectorField::dx(), &eq).unwrap());
        assert!(is_symmetry(&VectorField::dt(), &eq).unwrap());
        let u_du = VectorField::scaling(q(0, 1), q(0, 1), q(1, 1));
        assert!(!is_symmetry(&u_du, &eq).unwrap());
    }

    #[test]
    fn exact_chain_has_length_one() {
        let r = partial_symmetry_chain(&VectorField::dx(), &EvolutionEquation::fkpp(), &ChainOptions::default()).unwrap();
        assert_eq!(r.classification, Classification::Exact);
        assert_eq!(r.chain.len(), 2);
        assert!(r.chain[1].is_zero());
    }

    #[test]
    fn general_ode_symmetries() {
        let p = JetPoly::var(Deriv::UXX) + JetPoly::var(Deriv::UX).scale(q(2, 1)) + JetPoly::u();
        let u_du = VectorField::scaling(q(0, 1), q(0, 1), q(1, 1));
        let x_dx = VectorField::scaling(q(1, 1), q(0, 1), q(0, 1));
        assert!(is_symmetry_general(&p, Deriv::UXX, &u_du).unwrap());
        assert!(is_symmetry_general(&p, Deriv::UXX, &VectorField::dx()).unwrap());
        assert!(!is_symmetry_general(&p, Deriv::UXX, &x_dx).unwrap());
        let bad = JetPoly::u() * JetPoly::var(Deriv::UXX);
        assert!(matches!(
            is_symmetry_general(&bad, Deriv::UXX, &u_du),
            Err(SymmetryError::NotSolvable(..))
        ));
    }

    #[test]
    fn membership_controls() {
        let z = JetPoly::u() - JetPoly::u();
        let s = pointwise_membership_check(&[z], 5, 3).unwrap();
        assert_eq!(s.max_relative, 0.0);
        // constraint u_x - u = 0; target u_x - u vanishes, target + u does not
        let c = JetPoly::var(Deriv::UX) - JetPoly::u();
        let good = pointwise_membership_check(&[c.clone(), c.scale(q(3, 1))], 10, 4).unwrap();
        assert!(good.passes(1e-9), "{good:?}");
        let broken = pointwise_membership_check(&[c.clone(), c + JetPoly::u()], 10, 4).unwrap();
        assert!(broken.max_relative > 0.1);
    }

    #[test]
    fn decay_examples() {
        let ts = geometric(10.0, 1000.0, 25);
        let p = JetPoly::t_pow(q(-3, 1)) * JetPoly::u();
        let e = decay_exponent(&p, &CatalogFn::Constant(1.0), 1.0, &ts).unwrap();
        assert!((e + 3.0).abs() < 1e-12);
        assert!(matches!(
            decay_exponent(&JetPoly::zero(), &CatalogFn::Constant(1.0), 1.0, &ts),
            Err(SymmetryError::DegenerateFit(_))
        ));
    }

    #[test]
    fn group_action() {
        assert_eq!(linear_front_group_action(1.0, 0.0, 0.3, 0.2).1, 0.0);
        assert_eq!(linear_front_group_action(2.0, 5.0, 0.0, 0.0), (2.0, 5.0));
        let (a, b) = linear_front_group_action(0.0, 1.0, 0.0, 1.0);
        assert!((a - std::f64::consts::E).abs() < 1e-15 && (b - std::f64::consts::E).abs() < 1e-15);
    }
}
