//! Command-line front end: parses equations, vector fields and run
//! configurations and dispatches to the core engines.

pub mod config;
pub mod parse;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use ardsym_core::catalog::CatalogFn;
use ardsym_core::equation::Family;
use ardsym_core::fit::geometric;
use ardsym_core::flow::{scaling_flow, ScalingGenerator};
use ardsym_core::front::{fit_scaling, predict_delta, predict_front, FrontRecord, FrontSeries};
use ardsym_core::map::{reduce_invariant, transform, PowerMap};
use ardsym_core::solver::{num10, run, write_run};
use ardsym_core::symmetry::{partial_symmetry_chain, ChainOptions, Probe};
use ardsym_core::{EvolutionEquation, Rational};
use clap::{Args, Parser, Subcommand};

use crate::config::{parse_rational, RunConfig};
use crate::parse::{parse_equation_with, parse_vector_field, Params};

pub const OUTPUT_DIR_ENV: &str = "ARDSYM_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "ardsym", version, about = "Symmetry analysis and front simulation for anomalous reaction-diffusion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the equation and write snapshot, diagnostics and front CSVs.
    Simulate(RunArgs),
    /// Fit front scaling exponents, from a run or an existing front CSV.
    Analyze(AnalyzeArgs),
    /// Closed-form exponent and front predictions.
    Predict(PredictArgs),
    /// Per-term exponents of a scaling flow and its limit equation.
    Flow(FlowArgs),
    /// Exact, partial and asymptotic symmetry checks.
    CheckSymmetry(SymmetryArgs),
    /// Change variables with a power map.
    Transform(TransformArgs),
    /// Drop time derivatives of an adapted-coordinate equation.
    Reduce(ReduceArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides the environment and the config file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Existing `t,Xh,lambda` CSV to fit instead of running the solver.
    #[arg(long)]
    pub series: Option<PathBuf>,
    /// Fit window `t_lo,t_hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<String>,
    /// Give delta directly instead of nu.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub c0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    /// `heat`, `fkpp`, `ad:a=..,nu=..`, `ard:a=..,nu=..` or `u_t = ...`.
    #[arg(long)]
    pub eq: String,
    /// Generator `a,b,c` of `a x d/dx + b t d/dt + c u d/du`.
    #[arg(long, allow_hyphen_values = true)]
    pub gen: String,
}

#[derive(Debug, Args)]
pub struct SymmetryArgs {
    #[arg(long)]
    pub eq: String,
    /// `xi=...; tau=...; phi=...`
    #[arg(long, allow_hyphen_values = true)]
    pub field: String,
    #[arg(long = "K", allow_hyphen_values = true)]
    pub k: Option<String>,
    #[arg(long = "d", alias = "delta", allow_hyphen_values = true)]
    pub d: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub c0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub l0: Option<String>,
    #[arg(long, default_value_t = 4)]
    pub max_p: usize,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Decay probe: `auto` (x-independent solution when K is given) or `none`.
    #[arg(long, default_value = "auto")]
    pub probe: String,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub eq: String,
    /// `heat-scaled:a=..,nu=..`, `ad-heat:a=..,nu=..`, `comoving:d=..,K=..` or
    /// `gamma=..; p=..; q=..; r=..; s=..; K=..; c_sigma=..; c_y=..; c_w=..`.
    #[arg(long, allow_hyphen_values = true)]
    pub map: String,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long)]
    pub eq: String,
    /// Optional map applied before reducing.
    #[arg(long, allow_hyphen_values = true)]
    pub map: Option<String>,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Config, parse or usage error (exit 2).
    Input(String),
    /// Domain error such as a divergent flow or a missing front (exit 1).
    Domain(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Input(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Input(m) => m,
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn domain<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Domain(e.to_string())
}

/// Runs the command line; text results go to `out`.
pub fn run_cli<I, S>(args: I, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(text) => {
            let _ = write!(out, "{text}");
            0
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

pub fn execute(cmd: &Command) -> Result<String, Failure> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
        Command::Predict(a) => predict(a),
        Command::Flow(a) => flow(a),
        Command::CheckSymmetry(a) => check_symmetry(a),
        Command::Transform(a) => transform_cmd(a),
        Command::Reduce(a) => reduce_cmd(a),
    }
}

fn output_dir(flag: &Option<PathBuf>, cfg: Option<&RunConfig>) -> PathBuf {
    if let Some(p) = flag {
        return p.clone();
    }
    if let Some(p) = std::env::var_os(OUTPUT_DIR_ENV) {
        return PathBuf::from(p);
    }
    cfg.and_then(|c| c.output_dir.clone()).unwrap_or_else(|| PathBuf::from("ardsym_out"))
}

fn simulate(a: &RunArgs) -> Result<String, Failure> {
    let cfg = RunConfig::load(&a.config).map_err(input)?;
    let sc = cfg.solver_config().map_err(input)?;
    sc.validate().map_err(input)?;
    let dir = output_dir(&a.out, Some(&cfg));
    let r = run(&sc).map_err(domain)?;
    let mut files = write_run(&dir, &r).map_err(domain)?;
    let fp = dir.join("front.csv");
    write_file(&fp, |w| r.front.write_csv(w))?;
    files.push(fp);
    let mut s = String::new();
    for f in files {
        let _ = writeln!(s, "{}", f.display());
    }
    Ok(s)
}

fn write_file(p: &Path, f: impl FnOnce(&mut dyn std::io::Write) -> std::io::Result<()>) -> Result<(), Failure> {
    let file = std::fs::File::create(p).map_err(|e| domain(format!("{}: {e}", p.display())))?;
    let mut w = std::io::BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| domain(format!("{}: {e}", p.display())))
}

fn parse_pair(s: &str) -> Result<(f64, f64), Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            let a: f64 = a.parse().map_err(|_| Failure::Input(format!("bad number `{a}`")))?;
            let b: f64 = b.parse().map_err(|_| Failure::Input(format!("bad number `{b}`")))?;
            Ok((a, b))
        }
        _ => Err(Failure::Input(format!("expected `lo,hi`, got `{s}`"))),
    }
}

fn read_series(p: &Path) -> Result<FrontSeries, Failure> {
    let text = std::fs::read_to_string(p).map_err(|e| input(format!("{}: {e}", p.display())))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("t,Xh,lambda") {
        return Err(Failure::Input(format!("{}: expected header `t,Xh,lambda`", p.display())));
    }
    let mut fs = FrontSeries::new(ardsym_core::front::DEFAULT_LEVEL);
    for (i, l) in lines.enumerate() {
        if l.trim().is_empty() {
            continue;
        }
        let v: Result<Vec<f64>, _> = l.split(',').map(|x| x.trim().parse::<f64>()).collect();
        match v.as_deref() {
            Ok([t, xh, lambda]) => fs.push(FrontRecord { t: *t, xh: *xh, lambda: *lambda }),
            _ => return Err(Failure::Input(format!("{}:{}: bad row `{l}`", p.display(), i + 2))),
        }
    }
    Ok(fs)
}

fn analyze(a: &AnalyzeArgs) -> Result<String, Failure> {
    let cfg = match &a.config {
        Some(p) => Some(RunConfig::load(p).map_err(input)?),
        None => None,
    };
    let series = match (&a.series, &cfg) {
        (Some(p), _) => read_series(p)?,
        (None, Some(c)) => {
            let sc = c.solver_config().map_err(input)?;
            sc.validate().map_err(input)?;
            run(&sc).map_err(domain)?.front
        }
        (None, None) => return Err(Failure::Input("analyze needs --config or --series".into())),
    };
    let window = match (&a.window, cfg.as_ref().and_then(|c| c.analyze.as_ref()).and_then(|s| s.window)) {
        (Some(w), _) => parse_pair(w)?,
        (None, Some([lo, hi])) => (lo, hi),
        (None, None) => series.default_window().ok_or_else(|| domain("empty front series"))?,
    };
    let fit = fit_scaling(&series, window).map_err(domain)?;
    let dir = output_dir(&a.out, cfg.as_ref());
    std::fs::create_dir_all(&dir).map_err(|e| domain(format!("{}: {e}", dir.display())))?;
    let summary = fit.to_string();
    write_file(&dir.join("fit.txt"), |w| w.write_all(summary.as_bytes()))?;
    write_file(&dir.join("front.csv"), |w| series.write_csv(w))?;
    Ok(summary)
}

fn rat(s: &str) -> Result<Rational, Failure> {
    parse_rational(s).map_err(input)
}

fn predict(a: &PredictArgs) -> Result<String, Failure> {
    let alpha = rat(&a.alpha)?;
    let delta = match (&a.nu, &a.delta) {
        (Some(nu), None) => predict_delta(alpha, rat(nu)?).map_err(input)?,
        (None, Some(d)) => rat(d)?,
        _ => return Err(Failure::Input("give exactly one of --nu and --delta".into())),
    };
    let p = predict_front(alpha, delta, a.c0).map_err(|e| match e {
        ardsym_core::front::FrontError::OscillatorySpeed { .. } => domain(e),
        _ => input(e),
    })?;
    Ok(p.to_string())
}

/// Parses `key=value` pairs separated by `sep`.
fn key_values(s: &str, sep: char) -> Result<Vec<(String, Rational)>, Failure> {
    let mut out = Vec::new();
    for part in s.split(sep).map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| Failure::Input(format!("expected key=value, got `{part}`")))?;
        out.push((k.trim().to_string(), rat(v.trim())?));
    }
    Ok(out)
}

fn alpha_nu(kv: &[(String, Rational)]) -> Result<(Rational, Rational), Failure> {
    let get = |names: &[&str]| kv.iter().find(|(k, _)| names.contains(&k.as_str())).map(|(_, v)| *v);
    let a = get(&["a", "alpha"]).ok_or_else(|| Failure::Input("missing a=".into()))?;
    let nu = get(&["nu"]).ok_or_else(|| Failure::Input("missing nu=".into()))?;
    if let Some((k, _)) = kv.iter().find(|(k, _)| !["a", "alpha", "nu"].contains(&k.as_str())) {
        return Err(Failure::Input(format!("unknown parameter `{k}`")));
    }
    Ok((a, nu))
}

/// `heat`, `fkpp`, `ad:a=..,nu=..`, `ard:a=..,nu=..` or an equation in the grammar.
pub fn equation_from_spec(spec: &str) -> Result<EvolutionEquation, Failure> {
    let spec = spec.trim();
    match spec {
        "heat" => return Ok(EvolutionEquation::heat()),
        "fkpp" => return Ok(EvolutionEquation::fkpp()),
        _ => {}
    }
    if let Some(rest) = spec.strip_prefix("ad:") {
        let (a, nu) = alpha_nu(&key_values(rest, ',')?)?;
        return EvolutionEquation::anomalous_diffusion(a, nu).map_err(input);
    }
    if let Some(rest) = spec.strip_prefix("ard:") {
        let (a, nu) = alpha_nu(&key_values(rest, ',')?)?;
        return EvolutionEquation::reaction_diffusion(a, nu).map_err(input);
    }
    parse_equation_with(spec, &Params::new()).map_err(input)
}

fn flow(a: &FlowArgs) -> Result<String, Failure> {
    let eq = equation_from_spec(&a.eq)?;
    let parts: Vec<&str> = a.gen.split(',').collect();
    let [ga, gb, gc] = parts.as_slice() else {
        return Err(Failure::Input(format!("generator needs three components, got `{}`", a.gen)));
    };
    let g = ScalingGenerator::new(rat(ga)?, rat(gb)?, rat(gc)?).map_err(input)?;
    let fr = scaling_flow(&eq, g);
    let mut s = fr.to_string();
    match ardsym_core::flow::asymptotic_limit(&fr) {
        Ok(limit) => {
            let _ = writeln!(s, "limit: {limit}");
            Ok(s)
        }
        Err(e) => Err(domain(format!("{e}\n{s}"))),
    }
}

fn symmetry_params(a: &SymmetryArgs, eq: &EvolutionEquation) -> Result<Params, Failure> {
    let mut p = Params::new();
    if let Family::AnomalousDiffusion { alpha, nu } | Family::ReactionDiffusion { alpha, nu } = eq.family() {
        for name in ["a", "alpha"] {
            p.insert(name.into(), *alpha);
        }
        p.insert("nu".into(), *nu);
        let d = predict_delta(*alpha, *nu).map_err(input)?;
        p.insert("d".into(), d);
        p.insert("delta".into(), d);
        if let Ok(pr) = predict_front(*alpha, d, None) {
            if let Some(c0) = pr.c0_min_exact {
                p.insert("c0".into(), c0);
            }
            // lambda0 = 1/omega0
            if let Some(w0) = pr.omega0_exact {
                p.insert("l0".into(), w0.recip());
            }
        }
    }
    let set = |p: &mut Params, names: &[&str], v: &Option<String>| -> Result<(), Failure> {
        if let Some(v) = v {
            let r = rat(v)?;
            for n in names {
                p.insert((*n).into(), r);
            }
        }
        Ok(())
    };
    set(&mut p, &["K"], &a.k)?;
    set(&mut p, &["d", "delta"], &a.d)?;
    set(&mut p, &["c0"], &a.c0)?;
    set(&mut p, &["l0"], &a.l0)?;
    Ok(p)
}

fn check_symmetry(a: &SymmetryArgs) -> Result<String, Failure> {
    let eq = equation_from_spec(&a.eq)?;
    let params = symmetry_params(a, &eq)?;
    let field = parse_vector_field(&a.field, &params).map_err(input)?;
    let probe = match a.probe.as_str() {
        "none" => None,
        "auto" => match (eq.family(), params.get("K")) {
            (Family::ReactionDiffusion { alpha, .. }, Some(k)) => Some(Probe {
                solution: CatalogFn::RationalU { alpha: alpha.to_f64(), k: k.to_f64() },
                x: 1.0,
                t_values: geometric(10.0, 1000.0, 13),
            }),
            _ => None,
        },
        other => return Err(Failure::Input(format!("unknown probe `{other}`"))),
    };
    let opts = ChainOptions { max_p: a.max_p, samples: a.samples, seed: a.seed, tol: a.tol, probe };
    let rep = partial_symmetry_chain(&field, &eq, &opts).map_err(domain)?;
    Ok(rep.to_string())
}

/// Parses a map spec; see [`TransformArgs::map`].
pub fn map_from_spec(spec: &str) -> Result<PowerMap, Failure> {
    let spec = spec.trim();
    let named = |prefix: &str| spec.strip_prefix(prefix);
    if let Some(rest) = named("heat-scaled:") {
        let (a, nu) = alpha_nu(&key_values(rest, ',')?)?;
        return PowerMap::anomalous_to_heat_scaled(a, nu).map_err(input);
    }
    if let Some(rest) = named("ad-heat:") {
        let (a, nu) = alpha_nu(&key_values(rest, ',')?)?;
        return PowerMap::anomalous_to_heat(a, nu).map_err(input);
    }
    if let Some(rest) = named("comoving:") {
        let kv = key_values(rest, ',')?;
        let get = |n: &str| kv.iter().find(|(k, _)| k == n).map(|(_, v)| *v);
        let d = get("d").ok_or_else(|| Failure::Input("missing d=".into()))?;
        let k = get("K").ok_or_else(|| Failure::Input("missing K=".into()))?;
        return PowerMap::comoving(d, k).map_err(input);
    }
    let kv = key_values(spec, ';')?;
    let mut vals = [Rational::ONE, Rational::ONE, Rational::ZERO, Rational::ZERO, Rational::ZERO, Rational::ZERO];
    let mut scales = [Rational::ONE; 3];
    for (k, v) in kv {
        match k.as_str() {
            "gamma" => vals[0] = v,
            "p" => vals[1] = v,
            "q" => vals[2] = v,
            "r" => vals[3] = v,
            "s" => vals[4] = v,
            "K" | "k" => vals[5] = v,
            "c_sigma" => scales[0] = v,
            "c_y" => scales[1] = v,
            "c_w" => scales[2] = v,
            other => return Err(Failure::Input(format!("unknown map parameter `{other}`"))),
        }
    }
    PowerMap::new(vals[0], vals[1], vals[2], vals[3], vals[4], vals[5])
        .and_then(|m| m.with_scales(scales[0], scales[1], scales[2]))
        .map_err(input)
}

fn transform_cmd(a: &TransformArgs) -> Result<String, Failure> {
    let eq = equation_from_spec(&a.eq)?;
    let m = map_from_spec(&a.map)?;
    let out = transform(&eq, &m).map_err(domain)?;
    Ok(format!("{out}\n"))
}

fn reduce_cmd(a: &ReduceArgs) -> Result<String, Failure> {
    let mut eq = equation_from_spec(&a.eq)?;
    if let Some(m) = &a.map {
        eq = transform(&eq, &map_from_spec(m)?).map_err(domain)?;
    }
    let r = reduce_invariant(&eq);
    Ok(format!("0 = {}\n", r.display(eq.chart())))
}

/// Number formatting shared with the reports.
pub fn fmt_num(v: f64) -> String {
    num10(v).to_string()
}
