//! TOML run configuration. Unknown keys are rejected.
//!
//! ```toml
//! output_dir = "out"
//!
//! [solver]
//! alpha = "2"            # rationals as strings ("2/3") or numbers
//! nu = "1/2"
//! reaction = true
//! grid = "uniform"       # or "log"
//! n = 4096
//! x_min = 0.01
//! x_max = 600.0
//! t0 = 1.0
//! t_end = 200.0
//! cfl = 0.4
//! snapshot_times = [100.0, 200.0]
//! front_level = 0.5
//! tail_window = [1e-6, 1e-2]
//!
//! [solver.ic]
//! kind = "plateau_tanh"  # x_c, width; or "point_mass_gaussian" with x0, s
//! x_c = 5.0
//! width = 2.0
//!
//! [analyze]
//! window = [20.0, 200.0] # default: last decade of the run
//! ```

use std::path::PathBuf;

use ardsym_core::solver::{GridKind, InitialCondition, SolverConfig};
use ardsym_core::Rational;
use serde::Deserialize;
use thiserror::Error;

use crate::parse::ParseError;

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Toml(String),
    #[error("bad rational `{0}`")]
    Rational(String),
    #[error("missing [{0}] section")]
    Missing(&'static str),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A rational written as `"p/q"`, an integer, or a decimal number.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum RationalValue {
    Text(String),
    Int(i64),
    Float(f64),
}

impl RationalValue {
    pub fn get(&self) -> Result<Rational, ConfigFileError> {
        match self {
            RationalValue::Text(s) => parse_rational(s),
            RationalValue::Int(i) => Ok(Rational::int(*i as i128)),
            RationalValue::Float(f) => parse_rational(&format!("{f}")),
        }
    }
}

/// `p/q`, an integer or a decimal, with an optional leading sign.
pub fn parse_rational(s: &str) -> Result<Rational, ConfigFileError> {
    let p = crate::parse::parse_expression(s).map_err(|_| ConfigFileError::Rational(s.to_string()))?;
    if p.is_zero() {
        return Ok(Rational::ZERO);
    }
    match p.as_monomial() {
        Some((c, m)) if m.is_jet_free() && m.xpow.is_zero() && m.tpow.is_zero() && m.exprate.is_zero() => Ok(c),
        _ => Err(ConfigFileError::Rational(s.to_string())),
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: Option<PathBuf>,
    pub solver: Option<SolverSection>,
    pub analyze: Option<AnalyzeSection>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub alpha: RationalValue,
    pub nu: RationalValue,
    pub reaction: bool,
    #[serde(default = "default_grid")]
    pub grid: GridName,
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    #[serde(default = "default_t0")]
    pub t0: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_level")]
    pub front_level: f64,
    pub tail_window: Option<[f64; 2]>,
    pub ic: IcSection,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum GridName {
    Uniform,
    Log,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IcSection {
    PlateauTanh { x_c: f64, width: f64 },
    PointMassGaussian { x0: f64, s: f64 },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSection {
    pub window: Option<[f64; 2]>,
}

fn default_grid() -> GridName {
    GridName::Log
}

fn default_t0() -> f64 {
    1.0
}

fn default_cfl() -> f64 {
    0.4
}

fn default_level() -> f64 {
    0.5
}

impl RunConfig {
    pub fn from_str(text: &str) -> Result<RunConfig, ConfigFileError> {
        toml::from_str(text).map_err(|e| ConfigFileError::Toml(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig, ConfigFileError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigFileError::Io { path: path.display().to_string(), source })?;
        RunConfig::from_str(&text)
    }

    pub fn solver_config(&self) -> Result<SolverConfig, ConfigFileError> {
        let s = self.solver.as_ref().ok_or(ConfigFileError::Missing("solver"))?;
        let mut c = SolverConfig::new(s.alpha.get()?, s.nu.get()?, s.reaction);
        c.grid = match s.grid {
            GridName::Uniform => GridKind::Uniform,
            GridName::Log => GridKind::Log,
        };
        c.n = s.n;
        c.x_min = s.x_min;
        c.x_max = s.x_max;
        c.t0 = s.t0;
        c.t_end = s.t_end;
        c.cfl = s.cfl;
        c.snapshot_times = s.snapshot_times.clone();
        c.front_level = s.front_level;
        if let Some([lo, hi]) = s.tail_window {
            c.tail_window = (lo, hi);
        }
        c.ic = match s.ic {
            IcSection::PlateauTanh { x_c, width } => InitialCondition::PlateauTanh { x_c, width },
            IcSection::PointMassGaussian { x0, s } => InitialCondition::PointMassGaussian { x0, s },
        };
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ardsym_core::q;

    const FKPP: &str = r#"
[solver]
alpha = 2
nu = "1/2"
reaction = true
grid = "uniform"
n = 4096
x_min = 0.01
x_max = 600.0
t_end = 200.0

[solver.ic]
kind = "plateau_tanh"
x_c = 5.0
width = 2.0
"#;

    #[test]
    fn parses_solver_section() {
        let c = RunConfig::from_str(FKPP).unwrap().solver_config().unwrap();
        assert_eq!((c.alpha, c.nu), (q(2, 1), q(1, 2)));
        assert_eq!(c.grid, GridKind::Uniform);
        assert_eq!(c.cfl, 0.4);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_key_is_named() {
        let text = FKPP.replace("n = 4096", "n = 4096\ncells = 3");
        let err = RunConfig::from_str(&text).unwrap_err().to_string();
        assert!(err.contains("cells"), "{err}");
        let text = format!("{FKPP}\nbogus = 1\n");
        assert!(RunConfig::from_str(&text).is_err());
    }

    #[test]
    fn rational_values() {
        assert_eq!(RationalValue::Float(0.75).get().unwrap(), q(3, 4));
        assert_eq!(RationalValue::Text("-2/3".into()).get().unwrap(), q(-2, 3));
        assert!(RationalValue::Text("x".into()).get().is_err());
    }
}
