//! Front position, width and scaling exponents, plus the closed-form
//! predictions they are compared against.

use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

use crate::fit::{linear_fit, power_law_fit};
use crate::rational::Rational;
use crate::solver::{num10, FieldState};

pub const DEFAULT_LEVEL: f64 = 0.5;
pub const DEFAULT_TAIL_WINDOW: (f64, f64) = (1e-6, 1e-2);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontError {
    #[error("u never crosses h = {0}")]
    NoCrossing(f64),
    #[error("u crosses h = {h} {count} times")]
    MultipleCrossings { h: f64, count: usize },
    #[error("only {found} cells in the tail window [{lo:e}, {hi:e}], need 8")]
    InsufficientTail { found: usize, lo: f64, hi: f64 },
    #[error("tail is not decaying (slope {0})")]
    NotDecaying(f64),
    #[error("fit window [{0}, {1}] spans less than a decade of the series")]
    WindowTooShort(f64, f64),
    #[error("snapshots cannot be compared: {0}")]
    GridMismatch(String),
    #[error("c0 = {c0} is below the minimal non-oscillating speed {c0_min}")]
    OscillatorySpeed { c0: f64, c0_min: f64 },
    #[error("parameter out of range: {0}")]
    BadParameter(String),
}

pub type Result<T> = std::result::Result<T, FrontError>;

/// Position where `u = h`, interpolating `ln u` linearly between the two
/// cells that bracket the single crossing.
pub fn front_position(s: &FieldState, h: f64) -> Result<f64> {
    let mut crossing = None;
    let mut count = 0;
    for i in 0..s.u.len().saturating_sub(1) {
        let (a, b) = (s.u[i], s.u[i + 1]);
        if (a >= h) != (b >= h) {
            count += 1;
            crossing = Some(i);
        }
    }
    match (count, crossing) {
        (0, _) | (_, None) => Err(FrontError::NoCrossing(h)),
        (1, Some(i)) => {
            let (a, b) = (s.u[i], s.u[i + 1]);
            let (x0, x1) = (s.x[i], s.x[i + 1]);
            if a > 0.0 && b > 0.0 {
                let (la, lb, lh) = (a.ln(), b.ln(), h.ln());
                Ok(x0 + (lh - la) / (lb - la) * (x1 - x0))
            } else {
                Ok(x0 + (h - a) / (b - a) * (x1 - x0))
            }
        }
        (count, _) => Err(FrontError::MultipleCrossings { h, count }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailFit {
    pub lambda: f64,
    /// RMS residual of the `ln u` line; large for non-exponential tails.
    pub residual_rms: f64,
    pub cells: usize,
}

/// `lambda = -1/slope` of `ln u` against `x` over cells with `u` in the window.
pub fn front_width(s: &FieldState, window: (f64, f64)) -> Result<TailFit> {
    let (lo, hi) = window;
    let (xs, ys): (Vec<f64>, Vec<f64>) = s
        .x
        .iter()
        .zip(&s.u)
        .filter(|(_, u)| **u >= lo && **u <= hi)
        .map(|(x, u)| (*x, u.ln()))
        .unzip();
    if xs.len() < 8 {
        return Err(FrontError::InsufficientTail { found: xs.len(), lo, hi });
    }
    let f = linear_fit(&xs, &ys).ok_or(FrontError::InsufficientTail { found: xs.len(), lo, hi })?;
    if !(f.slope < 0.0) {
        return Err(FrontError::NotDecaying(f.slope));
    }
    Ok(TailFit { lambda: -1.0 / f.slope, residual_rms: f.residual_rms, cells: xs.len() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrontRecord {
    pub t: f64,
    pub xh: f64,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrontSeries {
    pub level: f64,
    records: Vec<FrontRecord>,
}

impl FrontSeries {
    pub fn new(level: f64) -> FrontSeries {
        FrontSeries { level, records: Vec::new() }
    }

    /// Records with a time not after the last one are dropped.
    pub fn push(&mut self, r: FrontRecord) {
        if self.records.last().map_or(true, |l| r.t > l.t) {
            self.records.push(r);
        }
    }

    pub fn records(&self) -> &[FrontRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The record closest to `t`.
    pub fn at(&self, t: f64) -> Option<&FrontRecord> {
        self.records.iter().min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    /// Last decade of the series.
    pub fn default_window(&self) -> Option<(f64, f64)> {
        let last = self.records.last()?.t;
        Some((last / 10.0, last))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,Xh,lambda")?;
        for r in &self.records {
            writeln!(w, "{},{},{}", num10(r.t), num10(r.xh), num10(r.lambda))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    /// From the log-log slope of the width.
    pub delta_hat: f64,
    /// Log-log slope of `X_h` minus one.
    pub delta_from_position: f64,
    pub c0_hat: f64,
    pub lambda0_hat: f64,
    pub rms_lambda: f64,
    pub rms_position: f64,
    pub window: (f64, f64),
    pub points: usize,
}

impl fmt::Display for FitResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "delta_hat = {}", num10(self.delta_hat))?;
        writeln!(f, "delta_from_position = {}", num10(self.delta_from_position))?;
        writeln!(f, "c0_hat = {}", num10(self.c0_hat))?;
        writeln!(f, "lambda0_hat = {}", num10(self.lambda0_hat))?;
        writeln!(f, "rms_lambda = {}", num10(self.rms_lambda))?;
        writeln!(f, "rms_position = {}", num10(self.rms_position))?;
        writeln!(f, "t_lo = {}", num10(self.window.0))?;
        writeln!(f, "t_hi = {}", num10(self.window.1))?;
        writeln!(f, "points = {}", self.points)
    }
}

/// Fits `X_h = c0 t^{1+delta}` and `lambda = lambda0 t^delta` over `window`.
pub fn fit_scaling(series: &FrontSeries, window: (f64, f64)) -> Result<FitResult> {
    let (lo, hi) = window;
    let sel: Vec<&FrontRecord> = series
        .records
        .iter()
        .filter(|r| r.t >= lo * (1.0 - 1e-12) && r.t <= hi * (1.0 + 1e-12))
        .collect();
    let too_short = FrontError::WindowTooShort(lo, hi);
    if sel.len() < 3 || !(hi / lo >= 10.0 * (1.0 - 1e-9)) {
        return Err(too_short);
    }
    // the records must cover most of the window
    let (t0, t1) = (sel[0].t, sel[sel.len() - 1].t);
    if (t1 / t0).ln() < 0.9 * (hi / lo).ln() {
        return Err(too_short);
    }
    let ts: Vec<f64> = sel.iter().map(|r| r.t).collect();
    let xs: Vec<f64> = sel.iter().map(|r| r.xh).collect();
    let ls: Vec<f64> = sel.iter().map(|r| r.lambda).collect();
    let fl = power_law_fit(&ts, &ls).ok_or_else(|| FrontError::BadParameter("nonpositive width".into()))?;
    let fx = power_law_fit(&ts, &xs).ok_or_else(|| FrontError::BadParameter("nonpositive position".into()))?;
    Ok(FitResult {
        delta_hat: fl.slope,
        delta_from_position: fx.slope - 1.0,
        c0_hat: fx.intercept.exp(),
        lambda0_hat: fl.intercept.exp(),
        rms_lambda: fl.residual_rms,
        rms_position: fx.residual_rms,
        window,
        points: sel.len(),
    })
}

/// `delta = nu + 1/alpha - 1`.
pub fn predict_delta(alpha: Rational, nu: Rational) -> Result<Rational> {
    if alpha.is_zero() {
        return Err(FrontError::BadParameter("alpha = 0".into()));
    }
    Ok(nu + alpha.recip() - Rational::ONE)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub alpha: Rational,
    pub delta: Rational,
    /// Exact when it is rational.
    pub c0_min_exact: Option<Rational>,
    pub c0_min: f64,
    pub omega0_exact: Option<Rational>,
    pub omega0: f64,
    pub c0: Option<f64>,
    pub omega_plus: Option<f64>,
    pub omega_minus: Option<f64>,
}

impl Prediction {
    /// `c0^{2-a} w^2 - c0 (1+delta) w + 1`.
    pub fn characteristic(&self, c0: f64, omega: f64) -> f64 {
        let a = self.alpha.to_f64();
        let d = self.delta.to_f64();
        c0.powf(2.0 - a) * omega * omega - c0 * (1.0 + d) * omega + 1.0
    }
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "delta = {}", self.delta)?;
        match self.c0_min_exact {
            Some(r) => writeln!(f, "c0_min = {r}")?,
            None => writeln!(f, "c0_min = {}", num10(self.c0_min))?,
        }
        match self.omega0_exact {
            Some(r) => writeln!(f, "omega0 = {r}")?,
            None => writeln!(f, "omega0 = {}", num10(self.omega0))?,
        }
        if let (Some(c0), Some(p), Some(m)) = (self.c0, self.omega_plus, self.omega_minus) {
            writeln!(f, "c0 = {}", num10(c0))?;
            writeln!(f, "omega_plus = {}", num10(p))?;
            writeln!(f, "omega_minus = {}", num10(m))?;
        }
        Ok(())
    }
}

/// Minimal speed `c0_min = (2/(1+delta))^{2/a}`, `omega0 = (2/(1+delta))^{1-2/a}`
/// and, for a given `c0 >= c0_min`, the roots `omega_+-` of the characteristic
/// polynomial.
pub fn predict_front(alpha: Rational, delta: Rational, c0: Option<f64>) -> Result<Prediction> {
    if !alpha.is_positive() {
        return Err(FrontError::BadParameter(format!("alpha = {alpha} must be positive")));
    }
    if !(delta > -Rational::ONE) {
        return Err(FrontError::BadParameter(format!("delta = {delta} must exceed -1")));
    }
    let base = Rational::int(2) / (Rational::ONE + delta);
    let e_c = Rational::int(2) / alpha;
    let e_w = Rational::ONE - e_c;
    let c0_min_exact = base.pow_rational(e_c);
    let omega0_exact = base.pow_rational(e_w);
    let b = base.to_f64();
    let c0_min = c0_min_exact.map_or_else(|| b.powf(e_c.to_f64()), |r| r.to_f64());
    let omega0 = omega0_exact.map_or_else(|| b.powf(e_w.to_f64()), |r| r.to_f64());
    let mut p = Prediction {
        alpha,
        delta,
        c0_min_exact,
        c0_min,
        omega0_exact,
        omega0,
        c0,
        omega_plus: None,
        omega_minus: None,
    };
    if let Some(c) = c0 {
        let a = alpha.to_f64();
        let d1 = 1.0 + delta.to_f64();
        if c < c0_min * (1.0 - 1e-14) {
            return Err(FrontError::OscillatorySpeed { c0: c, c0_min });
        }
        if (c - c0_min).abs() <= 1e-14 * c0_min {
            // double root at the minimal speed
            p.omega_plus = Some(omega0);
            p.omega_minus = Some(omega0);
        } else {
            let disc = 1.0 - 4.0 / (c.powf(a) * d1 * d1);
            let plus = d1 / (2.0 * c.powf(1.0 - a)) * (1.0 + disc.sqrt());
            // the smaller root through the product of roots, free of cancellation
            p.omega_plus = Some(plus);
            p.omega_minus = Some(1.0 / (c.powf(2.0 - a) * plus));
        }
    }
    Ok(p)
}

/// Width `sqrt(D/eps)` and speed `sqrt(4 eps D)` of the dimensional FKPP front.
pub fn fkpp_dimensional(d: f64, eps: f64) -> Result<(f64, f64)> {
    if !(d > 0.0 && eps > 0.0) {
        return Err(FrontError::BadParameter(format!("D = {d}, eps = {eps} must be positive")));
    }
    Ok(((d / eps).sqrt(), (4.0 * eps * d).sqrt()))
}

/// Similarity variables `phi = t^amp u` at `zeta = x^a / t^zeta_exp`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarityForm {
    pub alpha: f64,
    pub amp: f64,
    pub zeta_exp: f64,
}

impl SimilarityForm {
    /// The naive form `u ~ t^{-nu} exp(-x^a / t^nu)` for the anomalous family.
    pub fn displayed(alpha: Rational, nu: Rational) -> SimilarityForm {
        SimilarityForm { alpha: alpha.to_f64(), amp: nu.to_f64(), zeta_exp: nu.to_f64() }
    }

    /// The pull-back of the heat kernel, `u ~ t^{-na/2} exp(-c x^a / t^{na})`.
    pub fn diffusive(alpha: Rational, nu: Rational) -> SimilarityForm {
        let na = (nu * alpha).to_f64();
        SimilarityForm { alpha: alpha.to_f64(), amp: na / 2.0, zeta_exp: na }
    }
}

const COLLAPSE_POINTS: usize = 512;

/// Collapse metric with the naive similarity form.
pub fn collapse_metric(snapshots: &[FieldState], alpha: Rational, nu: Rational) -> Result<f64> {
    collapse_metric_with(snapshots, SimilarityForm::displayed(alpha, nu))
}

/// Max over snapshot pairs of `sup |phi_1 - phi_2| / sup |phi_1|` on a common
/// `zeta` grid.
pub fn collapse_metric_with(snapshots: &[FieldState], form: SimilarityForm) -> Result<f64> {
    if snapshots.len() < 2 {
        return Err(FrontError::GridMismatch("need at least two snapshots".into()));
    }
    let scaled: Vec<(Vec<f64>, Vec<f64>)> = snapshots
        .iter()
        .map(|s| {
            let tz = s.t.powf(form.zeta_exp);
            let ta = s.t.powf(form.amp);
            let z = s.x.iter().map(|x| x.powf(form.alpha) / tz).collect();
            let p = s.u.iter().map(|u| ta * u).collect();
            (z, p)
        })
        .collect();
    let mut zlo = f64::MIN;
    let mut zhi = f64::MAX;
    for (z, _) in &scaled {
        if z.len() < 2 || z.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FrontError::GridMismatch("cell centres must be increasing".into()));
        }
        zlo = zlo.max(z[0]);
        zhi = zhi.min(z[z.len() - 1]);
    }
    if !(zhi > zlo) {
        return Err(FrontError::GridMismatch("similarity ranges do not overlap".into()));
    }
    // linear spacing resolves the bulk, logarithmic spacing the small-zeta end
    let mut grid: Vec<f64> = (0..COLLAPSE_POINTS)
        .map(|i| zlo + (zhi - zlo) * i as f64 / (COLLAPSE_POINTS - 1) as f64)
        .collect();
    if zlo > 0.0 {
        let r = (zhi / zlo).ln() / (COLLAPSE_POINTS - 1) as f64;
        grid.extend((0..COLLAPSE_POINTS).map(|i| zlo * (r * i as f64).exp()));
    }
    let sampled: Vec<Vec<f64>> = scaled.iter().map(|(z, p)| grid.iter().map(|g| interp(z, p, *g)).collect()).collect();
    let mut worst: f64 = 0.0;
    for i in 0..sampled.len() {
        let sup = sampled[i].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if sup == 0.0 {
            return Err(FrontError::GridMismatch("snapshot vanishes on the common range".into()));
        }
        for j in 0..sampled.len() {
            if i == j {
                continue;
            }
            let d = sampled[i].iter().zip(&sampled[j]).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            worst = worst.max(d / sup);
        }
    }
    Ok(worst)
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|v| *v < x);
    if k == 0 {
        return ys[0];
    }
    if k >= xs.len() {
        return ys[xs.len() - 1];
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    ys[k - 1] + (x - x0) / (x1 - x0) * (ys[k] - ys[k - 1])
}
