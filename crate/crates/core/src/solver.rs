//! 1D integrator for `u_t = t^{na-1} x^{1-a/2} d/dx[x^{1-a/2} u_x] (+ u(1-u))`.
//!
//! Finite volumes in the weighted measure `x^{a/2-1} dx`, so the discrete sum
//! of `V_i u_i` is conserved exactly by the transport step. Transport is
//! Crank-Nicolson (two Rannacher startup steps of backward Euler), reaction is
//! explicit midpoint, combined by Strang splitting.

use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::front::{front_position, front_width, FrontRecord, FrontSeries, DEFAULT_TAIL_WINDOW};
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("alpha = {0} not in (0, 2]")]
    Alpha(Rational),
    #[error("nu = {0} must be positive")]
    Nu(Rational),
    #[error("need at least 64 cells, got {0}")]
    TooFewCells(usize),
    #[error("bad domain [{0}, {1}]: need 0 < x_min < x_max")]
    Domain(f64, f64),
    #[error("bad time interval: t0 = {0}, t_end = {1}")]
    Times(f64, f64),
    #[error("cfl must be positive, got {0}")]
    Cfl(f64),
    #[error("snapshot time {0} outside [t0, t_end]")]
    Snapshot(f64),
    #[error("initial condition: {0}")]
    Initial(String),
    #[error("front level must lie in (0, 1), got {0}")]
    Level(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("step failure at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },
    #[error("domain exhausted at t = {t}: u = {tail:e} in the outer cells")]
    DomainExhausted { t: f64, tail: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    Uniform,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialCondition {
    /// `(1 - tanh((x - x_c)/width)) / 2`, zero beyond `x_c + 10 width`.
    PlateauTanh { x_c: f64, width: f64 },
    /// Normalized gaussian of standard deviation `s` centred at `x0`.
    PointMassGaussian { x0: f64, s: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub alpha: Rational,
    pub nu: Rational,
    pub reaction: bool,
    pub grid: GridKind,
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub t0: f64,
    pub t_end: f64,
    pub cfl: f64,
    pub snapshot_times: Vec<f64>,
    pub ic: InitialCondition,
    /// Level `h` for the recorded front position.
    pub front_level: f64,
    pub tail_window: (f64, f64),
}

impl SolverConfig {
    /// Defaults: log grid of 4096 cells on `[1e-2, 1e3]`, `t` from 1 to 10,
    /// `cfl = 0.4`, plateau initial data at `x_c = 1`.
    pub fn new(alpha: Rational, nu: Rational, reaction: bool) -> SolverConfig {
        SolverConfig {
            alpha,
            nu,
            reaction,
            grid: GridKind::Log,
            n: 4096,
            x_min: 1e-2,
            x_max: 1e3,
            t0: 1.0,
            t_end: 10.0,
            cfl: 0.4,
            snapshot_times: Vec::new(),
            ic: InitialCondition::PlateauTanh { x_c: 1.0, width: 0.1 },
            front_level: 0.5,
            tail_window: DEFAULT_TAIL_WINDOW,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.alpha.is_positive() || self.alpha > Rational::int(2) {
            return Err(ConfigError::Alpha(self.alpha));
        }
        if !self.nu.is_positive() {
            return Err(ConfigError::Nu(self.nu));
        }
        if self.n < 64 {
            return Err(ConfigError::TooFewCells(self.n));
        }
        if !(self.x_min > 0.0 && self.x_max > self.x_min && self.x_max.is_finite()) {
            return Err(ConfigError::Domain(self.x_min, self.x_max));
        }
        if !(self.t0 > 0.0 && self.t_end >= self.t0 && self.t_end.is_finite()) {
            return Err(ConfigError::Times(self.t0, self.t_end));
        }
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return Err(ConfigError::Cfl(self.cfl));
        }
        if let Some(&s) = self.snapshot_times.iter().find(|&&s| !(s >= self.t0 && s <= self.t_end)) {
            return Err(ConfigError::Snapshot(s));
        }
        if !(self.front_level > 0.0 && self.front_level < 1.0) {
            return Err(ConfigError::Level(self.front_level));
        }
        match self.ic {
            InitialCondition::PlateauTanh { x_c, width } => {
                if !(x_c > self.x_min && x_c < self.x_max) {
                    return Err(ConfigError::Initial(format!("x_c = {x_c} outside ({}, {})", self.x_min, self.x_max)));
                }
                if !(width > 0.0) {
                    return Err(ConfigError::Initial(format!("width = {width} must be positive")));
                }
            }
            InitialCondition::PointMassGaussian { x0, s } => {
                if !(x0 >= 0.0 && x0 < self.x_max) {
                    return Err(ConfigError::Initial(format!("x0 = {x0} outside [0, {})", self.x_max)));
                }
                if !(s > 0.0) {
                    return Err(ConfigError::Initial(format!("s = {s} must be positive")));
                }
            }
        }
        Ok(())
    }

    /// Cell edges, `n + 1` of them.
    pub fn edges(&self) -> Vec<f64> {
        let n = self.n;
        match self.grid {
            GridKind::Uniform => {
                let h = (self.x_max - self.x_min) / n as f64;
                (0..=n).map(|i| if i == n { self.x_max } else { self.x_min + h * i as f64 }).collect()
            }
            GridKind::Log => {
                let r = (self.x_max / self.x_min).ln() / n as f64;
                (0..=n)
                    .map(|i| if i == n { self.x_max } else { self.x_min * (r * i as f64).exp() })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
    pub dt: f64,
}

/// One row of the per-step diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostic {
    pub t: f64,
    pub dt: f64,
    pub mass: f64,
    /// Largest value in the outer 5% of cells.
    pub tail: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub snapshots: Vec<FieldState>,
    pub front: FrontSeries,
    pub diagnostics: Vec<Diagnostic>,
}

/// Precomputed geometry of the finite-volume transport operator.
#[derive(Clone, Debug)]
pub struct Grid {
    pub edges: Vec<f64>,
    pub centers: Vec<f64>,
    /// Cell widths in `x`.
    pub widths: Vec<f64>,
    /// `lo[i] * g(t)` couples cell `i` to `i-1`, `up[i] * g(t)` to `i+1`.
    lo: Vec<f64>,
    up: Vec<f64>,
    /// Diagonal contribution of the absorbing right boundary.
    right: f64,
}

impl Grid {
    pub fn new(cfg: &SolverConfig) -> Grid {
        let a = cfg.alpha.to_f64();
        let edges = cfg.edges();
        let n = cfg.n;
        let centers: Vec<f64> = match cfg.grid {
            GridKind::Uniform => (0..n).map(|i| 0.5 * (edges[i] + edges[i + 1])).collect(),
            GridKind::Log => (0..n).map(|i| (edges[i] * edges[i + 1]).sqrt()).collect(),
        };
        let widths: Vec<f64> = (0..n).map(|i| edges[i + 1] - edges[i]).collect();
        let half = a / 2.0;
        // exact weighted volumes of the cells
        let vol: Vec<f64> = (0..n)
            .map(|i| (edges[i + 1].powf(half) - edges[i].powf(half)) / half)
            .collect();
        // face conductances x_f^{1-a/2} / (x_{i+1} - x_i)
        let mut face = vec![0.0; n + 1];
        for i in 1..n {
            face[i] = edges[i].powf(1.0 - half) / (centers[i] - centers[i - 1]);
        }
        face[n] = edges[n].powf(1.0 - half) / (edges[n] - centers[n - 1]);
        let lo: Vec<f64> = (0..n).map(|i| face[i] / vol[i]).collect();
        let up: Vec<f64> = (0..n).map(|i| if i + 1 < n { face[i + 1] / vol[i] } else { 0.0 }).collect();
        let right = face[n] / vol[n - 1];
        Grid { edges, centers, widths, lo, up, right }
    }

    /// `(Lu)_i` without the time factor.
    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        for i in 0..n {
            let mut v = 0.0;
            if i > 0 {
                v += self.lo[i] * (u[i - 1] - u[i]);
            }
            if i + 1 < n {
                v += self.up[i] * (u[i + 1] - u[i]);
            } else {
                v -= self.right * u[i];
            }
            out[i] = v;
        }
    }

    /// Solves `(I - c L) v = rhs` in place by the Thomas algorithm.
    fn solve(&self, c: f64, rhs: &mut [f64], scratch: &mut [f64]) -> Result<(), String> {
        let n = rhs.len();
        let diag = |i: usize| {
            let mut d = 1.0;
            if i > 0 {
                d += c * self.lo[i];
            }
            d += if i + 1 < n { c * self.up[i] } else { c * self.right };
            d
        };
        let mut beta = diag(0);
        if !(beta.abs() > 1e-300) {
            return Err("singular tridiagonal system".into());
        }
        rhs[0] /= beta;
        for i in 1..n {
            // super-diagonal of row i-1 and sub-diagonal of row i
            let sup = -c * self.up[i - 1];
            let sub = -c * self.lo[i];
            scratch[i] = sup / beta;
            beta = diag(i) - sub * scratch[i];
            if !(beta.abs() > 1e-300) || !beta.is_finite() {
                return Err("singular tridiagonal system".into());
            }
            rhs[i] = (rhs[i] - sub * rhs[i - 1]) / beta;
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= scratch[i + 1] * rhs[i + 1];
        }
        Ok(())
    }
}

pub fn init(cfg: &SolverConfig) -> Result<FieldState, ConfigError> {
    cfg.validate()?;
    let grid = Grid::new(cfg);
    Ok(initial_state(cfg, &grid))
}

fn initial_state(cfg: &SolverConfig, grid: &Grid) -> FieldState {
    let u = grid
        .centers
        .iter()
        .map(|&x| match cfg.ic {
            InitialCondition::PlateauTanh { x_c, width } => {
                if x > x_c + 10.0 * width {
                    0.0
                } else {
                    0.5 * (1.0 - ((x - x_c) / width).tanh())
                }
            }
            InitialCondition::PointMassGaussian { x0, s } => {
                let z = (x - x0) / s;
                (-0.5 * z * z).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
            }
        })
        .collect();
    FieldState { x: grid.centers.clone(), u, t: cfg.t0, dt: 0.0 }
}

/// Stepping engine holding the grid and scratch buffers.
pub struct Stepper<'a> {
    cfg: &'a SolverConfig,
    grid: Grid,
    steps: usize,
    work: Vec<f64>,
    scratch: Vec<f64>,
}

const RANNACHER_STEPS: usize = 2;
const UNDERSHOOT: f64 = -1e-12;

impl<'a> Stepper<'a> {
    pub fn new(cfg: &'a SolverConfig) -> Result<Stepper<'a>, ConfigError> {
        cfg.validate()?;
        let grid = Grid::new(cfg);
        let n = cfg.n;
        Ok(Stepper { cfg, grid, steps: 0, work: vec![0.0; n], scratch: vec![0.0; n] })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn initial_state(&self) -> FieldState {
        initial_state(self.cfg, &self.grid)
    }

    /// `cfl * min(reaction limit, 0.05 t)`. Crank-Nicolson transport is
    /// unconditionally stable and adds no limit of its own.
    pub fn stable_dt(&self, s: &FieldState) -> f64 {
        let mut lim = 0.05 * s.t;
        if self.cfg.reaction {
            let lip = s.u.iter().map(|u| (1.0 - 2.0 * u).abs()).fold(0.0, f64::max).max(1e-12);
            lim = lim.min(1.0 / lip);
        }
        self.cfg.cfl * lim
    }

    fn time_factor(&self, t: f64) -> f64 {
        let e = (self.cfg.nu * self.cfg.alpha - Rational::ONE).to_f64();
        if e == 0.0 {
            1.0
        } else {
            t.powf(e)
        }
    }

    fn react(u: &mut [f64], h: f64) {
        for v in u.iter_mut() {
            let mid = *v + 0.5 * h * *v * (1.0 - *v);
            *v += h * mid * (1.0 - mid);
        }
    }

    fn transport(&mut self, u: &mut [f64], t: f64, dt: f64) -> Result<(), String> {
        if self.steps < RANNACHER_STEPS {
            for k in 0..2 {
                let g = self.time_factor(t + dt * (0.5 * k as f64 + 0.5));
                self.grid.solve(0.5 * dt * g, u, &mut self.scratch)?;
            }
        } else {
            let g = self.time_factor(t + 0.5 * dt);
            self.grid.apply(u, &mut self.work);
            for (v, l) in u.iter_mut().zip(&self.work) {
                *v += 0.5 * dt * g * l;
            }
            self.grid.solve(0.5 * dt * g, u, &mut self.scratch)?;
        }
        Ok(())
    }

    /// Advances by `dt`, or by the stable step when `dt` is `None`.
    pub fn step(&mut self, s: &FieldState, dt: Option<f64>) -> Result<FieldState, SolverError> {
        if !(s.t > 0.0) {
            return Err(SolverError::StepFailure { t: s.t, reason: "t must be positive".into() });
        }
        let dt = dt.unwrap_or_else(|| self.stable_dt(s));
        let mut u = s.u.clone();
        if self.cfg.reaction {
            Self::react(&mut u, 0.5 * dt);
        }
        self.transport(&mut u, s.t, dt).map_err(|reason| SolverError::StepFailure { t: s.t, reason })?;
        if self.cfg.reaction {
            Self::react(&mut u, 0.5 * dt);
        }
        let t = s.t + dt;
        for v in u.iter_mut() {
            if !v.is_finite() {
                return Err(SolverError::StepFailure { t, reason: "non-finite value".into() });
            }
            if *v < 0.0 {
                if *v < UNDERSHOOT {
                    return Err(SolverError::StepFailure { t, reason: format!("undershoot {v:e}") });
                }
                *v = 0.0;
            }
        }
        self.steps += 1;
        let out = FieldState { x: s.x.clone(), u, t, dt };
        let tail = tail_value(&out);
        if tail > 1e-8 {
            return Err(SolverError::DomainExhausted { t, tail });
        }
        Ok(out)
    }
}

/// One step from `state` using the stable time step.
pub fn step(state: &FieldState, cfg: &SolverConfig) -> Result<FieldState, SolverError> {
    let mut st = Stepper::new(cfg)?;
    // a lone step is not a startup step
    st.steps = RANNACHER_STEPS;
    st.step(state, None)
}

/// Largest `u` over the outer 5% of cells.
pub fn tail_value(s: &FieldState) -> f64 {
    let n = s.u.len();
    let k = (n as f64 * 0.05).ceil() as usize;
    s.u[n - k..].iter().copied().fold(0.0, f64::max)
}

pub fn run(cfg: &SolverConfig) -> Result<RunResult, SolverError> {
    let mut st = Stepper::new(cfg)?;
    let mut state = st.initial_state();
    let mut snaps_wanted: Vec<f64> = cfg.snapshot_times.clone();
    snaps_wanted.sort_by(f64::total_cmp);
    snaps_wanted.dedup();
    let mut snapshots = Vec::new();
    let mut next_snap = 0;
    while next_snap < snaps_wanted.len() && snaps_wanted[next_snap] <= state.t {
        snapshots.push(FieldState { t: snaps_wanted[next_snap], ..state.clone() });
        next_snap += 1;
    }
    let mut front = FrontSeries::new(cfg.front_level);
    let mut next_mark = cfg.t0.ln();
    let mut diagnostics = vec![Diagnostic {
        t: state.t,
        dt: 0.0,
        mass: conserved_mass(&state, cfg.alpha, cfg.nu),
        tail: tail_value(&state),
    }];
    record_front(&mut front, &state, cfg, &mut next_mark);
    while state.t < cfg.t_end {
        let mut dt = st.stable_dt(&state);
        if state.t + dt >= cfg.t_end * (1.0 - 1e-14) {
            dt = cfg.t_end - state.t;
        }
        let next = st.step(&state, Some(dt))?;
        while next_snap < snaps_wanted.len() && snaps_wanted[next_snap] <= next.t {
            let ts = snaps_wanted[next_snap];
            let w = (ts - state.t) / (next.t - state.t);
            let u = state.u.iter().zip(&next.u).map(|(a, b)| a + w * (b - a)).collect();
            snapshots.push(FieldState { x: state.x.clone(), u, t: ts, dt: next.dt });
            next_snap += 1;
        }
        diagnostics.push(Diagnostic {
            t: next.t,
            dt: next.dt,
            mass: conserved_mass(&next, cfg.alpha, cfg.nu),
            tail: tail_value(&next),
        });
        record_front(&mut front, &next, cfg, &mut next_mark);
        state = next;
        if cfg.t_end - state.t <= 1e-12 * cfg.t_end {
            state.t = cfg.t_end;
        }
    }
    if front.records().last().map_or(true, |r| r.t < state.t) {
        next_mark = state.t.ln();
        record_front(&mut front, &state, cfg, &mut next_mark);
    }
    if snaps_wanted.is_empty() {
        snapshots.push(state);
    }
    Ok(RunResult { snapshots, front, diagnostics })
}

const FRONT_DLOGT: f64 = 0.01;

fn record_front(series: &mut FrontSeries, s: &FieldState, cfg: &SolverConfig, next_mark: &mut f64) {
    let lt = s.t.ln();
    if lt + 1e-12 < *next_mark {
        return;
    }
    while *next_mark <= lt + 1e-12 {
        *next_mark += FRONT_DLOGT;
    }
    let Ok(xh) = front_position(s, cfg.front_level) else { return };
    let Ok(w) = front_width(s, cfg.tail_window) else { return };
    series.push(FrontRecord { t: s.t, xh, lambda: w.lambda });
}

/// Midpoint quadrature of `x^{a/2-1} u`, conserved by the transport with a
/// reflecting left boundary.
pub fn transport_mass(s: &FieldState, alpha: Rational) -> f64 {
    let e = alpha.to_f64() / 2.0 - 1.0;
    let n = s.x.len();
    let mut m = 0.0;
    for i in 0..n {
        let lo = if i == 0 { s.x[0] - 0.5 * (s.x[1] - s.x[0]) } else { 0.5 * (s.x[i - 1] + s.x[i]) };
        let hi = if i + 1 == n { s.x[i] + 0.5 * (s.x[i] - s.x[i - 1]) } else { 0.5 * (s.x[i] + s.x[i + 1]) };
        m += s.x[i].powf(e) * s.u[i] * (hi - lo);
    }
    m
}

/// `t^{(2-a) nu / 2}` times [`transport_mass`].
pub fn conserved_mass(s: &FieldState, alpha: Rational, nu: Rational) -> f64 {
    let p = ((Rational::int(2) - alpha) * nu / Rational::int(2)).to_f64();
    s.t.powf(p) * transport_mass(s, alpha)
}

/// Area-weighted RMS of `w_s - w_yy` for three pure-diffusion states mapped
/// through `s = t^{na}/(na)`, `y = (2/a) x^{a/2}`, `w = u`, relative to the
/// peak of the middle state.
pub fn mapped_heat_residual(states: [&FieldState; 3], alpha: Rational, nu: Rational) -> f64 {
    let a = alpha.to_f64();
    let na = (nu * alpha).to_f64();
    let [s0, s1, s2] = states;
    let sig = |t: f64| t.powf(na) / na;
    let (g0, g1, g2) = (sig(s0.t), sig(s1.t), sig(s2.t));
    let y: Vec<f64> = s1.x.iter().map(|x| 2.0 / a * x.powf(a / 2.0)).collect();
    let scale = s1.u.iter().copied().fold(0.0, f64::max);
    let n = y.len();
    let mut num = 0.0;
    let mut area = 0.0;
    for i in 1..n - 1 {
        // nonuniform three-point time derivative at s1
        let (h0, h1) = (g1 - g0, g2 - g1);
        let ws = (-h1 / (h0 * (h0 + h1))) * s0.u[i] + ((h1 - h0) / (h0 * h1)) * s1.u[i]
            + (h0 / (h1 * (h0 + h1))) * s2.u[i];
        let (dl, dr) = (y[i] - y[i - 1], y[i + 1] - y[i]);
        let wyy = 2.0 * (dl * s1.u[i + 1] - (dl + dr) * s1.u[i] + dr * s1.u[i - 1]) / (dl * dr * (dl + dr));
        let r = ws - wyy;
        let dy = 0.5 * (dl + dr);
        num += r * r * dy;
        area += dy;
    }
    (num / area).sqrt() / scale
}

fn sig6(t: f64) -> String {
    let s = format!("{:.5e}", t);
    // 6 significant digits without exponent noise for ordinary magnitudes
    let v: f64 = s.parse().unwrap_or(t);
    let mut out = format!("{}", v);
    if out.len() > 14 {
        out = s;
    }
    out
}

/// `snap_t<t>.csv` with `t` at 6 significant digits.
pub fn snapshot_file_name(t: f64) -> String {
    format!("snap_t{}.csv", sig6(t))
}

pub fn write_snapshot<W: Write>(mut w: W, s: &FieldState) -> io::Result<()> {
    writeln!(w, "x,u")?;
    for (x, u) in s.x.iter().zip(&s.u) {
        writeln!(w, "{},{}", num10(*x), num10(*u))?;
    }
    Ok(())
}

pub fn write_diagnostics<W: Write>(mut w: W, d: &[Diagnostic]) -> io::Result<()> {
    writeln!(w, "t,dt,mass,tail")?;
    for r in d {
        writeln!(w, "{},{},{},{}", num10(r.t), num10(r.dt), num10(r.mass), num10(r.tail))?;
    }
    Ok(())
}

/// Writes every snapshot and `diagnostics.csv` under `dir`; returns the paths.
pub fn write_run(dir: &Path, r: &RunResult) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for s in &r.snapshots {
        let p = dir.join(snapshot_file_name(s.t));
        write_snapshot(io::BufWriter::new(std::fs::File::create(&p)?), s)?;
        out.push(p);
    }
    let p = dir.join("diagnostics.csv");
    write_diagnostics(io::BufWriter::new(std::fs::File::create(&p)?), &r.diagnostics)?;
    out.push(p);
    Ok(out)
}

/// A number with 10 significant digits.
pub fn num10(v: f64) -> Num10 {
    Num10(v)
}

pub struct Num10(pub f64);

impl fmt::Display for Num10 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.0;
        if v == 0.0 || !v.is_finite() {
            return write!(f, "{v}");
        }
        let mag = v.abs().log10().floor() as i32;
        if (-5..15).contains(&mag) {
            let dec = (9 - mag).max(0) as usize;
            let s = format!("{v:.dec$}");
            let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
            write!(f, "{s}")
        } else {
            write!(f, "{v:.9e}")
        }
    }
}
