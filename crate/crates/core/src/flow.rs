//! Scaling flows in equation space and their large-parameter limits.

use std::fmt;

use thiserror::Error;

use crate::equation::{EquationError, EvolutionEquation};
use crate::jet::{Deriv, JetPoly, JetTerm, Monomial};
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("scaling generator has all coefficients zero")]
    ZeroGenerator,
    #[error("flow diverges: term `{0}` grows along the flow")]
    NoLimit(String),
    #[error(transparent)]
    Equation(#[from] EquationError),
}

/// `X = a x d/dx + b t d/dt + c u d/du`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScalingGenerator {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
}

impl ScalingGenerator {
    pub fn new(a: Rational, b: Rational, c: Rational) -> Result<ScalingGenerator, FlowError> {
        if a.is_zero() && b.is_zero() && c.is_zero() {
            return Err(FlowError::ZeroGenerator);
        }
        Ok(ScalingGenerator { a, b, c })
    }

    /// Scaling weight of a monomial; `e^{kt}` factors carry no weight.
    pub fn weight(&self, m: &Monomial) -> Rational {
        let mut w = self.a * m.xpow + self.b * m.tpow;
        for d in Deriv::all() {
            let n = m.jet_pow(d);
            if n == 0 {
                continue;
            }
            let n = Rational::int(n as i128);
            let per = self.c - self.a * Rational::int(d.nx as i128) - self.b * Rational::int(d.nt as i128);
            w += n * per;
        }
        w
    }

    pub fn vector_field(&self) -> crate::jet::VectorField {
        crate::jet::VectorField::scaling(self.a, self.b, self.c)
    }
}

/// What an `e^{kt}` factor does along the flow `t -> lambda^b t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpBehaviour {
    None,
    /// Decays faster than any power (`b k < 0`, `b > 0`).
    Vanishes,
    /// Grows faster than any power.
    Explodes,
    /// Bounded (`b <= 0`): the power exponent alone classifies the term.
    Bounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowEntry {
    pub term: JetTerm,
    pub lambda_exponent: Rational,
    pub exp: ExpBehaviour,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowResult {
    pub generator: ScalingGenerator,
    /// `u_t` first, then the terms of `-F` in canonical order.
    pub entries: Vec<FlowEntry>,
    pub limit: Option<EvolutionEquation>,
    chart: crate::jet::Chart,
}

impl FlowResult {
    pub fn exponents(&self) -> Vec<Rational> {
        self.entries.iter().map(|e| e.lambda_exponent).collect()
    }

    pub fn is_fixed_point(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.lambda_exponent.is_zero() && matches!(e.exp, ExpBehaviour::None))
    }
}

impl fmt::Display for FlowResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "term\tlambda_exponent")?;
        for e in &self.entries {
            let p = JetPoly::term(e.term.coeff, e.term.mono.clone());
            let tag = match e.exp {
                ExpBehaviour::Vanishes => "\t(exp: vanishes)",
                ExpBehaviour::Explodes => "\t(exp: explodes)",
                ExpBehaviour::Bounded => "\t(exp: bounded)",
                ExpBehaviour::None => "",
            };
            writeln!(f, "{}\t{}{}", p.display(self.chart), e.lambda_exponent, tag)?;
        }
        Ok(())
    }
}

fn exp_behaviour(g: &ScalingGenerator, m: &Monomial) -> ExpBehaviour {
    if m.exprate.is_zero() {
        ExpBehaviour::None
    } else if !g.b.is_positive() {
        ExpBehaviour::Bounded
    } else if m.exprate.is_negative() {
        ExpBehaviour::Vanishes
    } else {
        ExpBehaviour::Explodes
    }
}

/// Per-term exponents of `e^{lambda Y}(u_t - F)`, normalized so `u_t` has
/// exponent zero.
pub fn scaling_flow(eq: &EvolutionEquation, g: ScalingGenerator) -> FlowResult {
    let ut = JetPoly::var(Deriv::UT);
    let (_, ut_mono) = ut.as_monomial().expect("single term");
    let base = g.weight(ut_mono);
    let mut entries = vec![FlowEntry {
        term: JetTerm { coeff: Rational::ONE, mono: ut_mono.clone() },
        lambda_exponent: Rational::ZERO,
        exp: ExpBehaviour::None,
    }];
    for (m, c) in eq.rhs().terms() {
        entries.push(FlowEntry {
            term: JetTerm { coeff: -*c, mono: m.clone() },
            lambda_exponent: g.weight(m) - base,
            exp: exp_behaviour(&g, m),
        });
    }
    let mut fr = FlowResult { generator: g, entries, limit: None, chart: eq.chart() };
    fr.limit = asymptotic_limit(&fr).ok();
    fr
}

/// Keeps the exponent-zero terms, drops decaying ones.
pub fn asymptotic_limit(fr: &FlowResult) -> Result<EvolutionEquation, FlowError> {
    let mut rhs = JetPoly::zero();
    for e in fr.entries.iter().skip(1) {
        let p = JetPoly::term(e.term.coeff, e.term.mono.clone());
        match e.exp {
            ExpBehaviour::Vanishes => continue,
            ExpBehaviour::Explodes => return Err(FlowError::NoLimit(p.display(fr.chart).to_string())),
            _ => {}
        }
        if e.lambda_exponent.is_positive() {
            return Err(FlowError::NoLimit(p.display(fr.chart).to_string()));
        }
        if e.lambda_exponent.is_zero() {
            rhs = rhs - p;
        }
    }
    Ok(EvolutionEquation::new(rhs)?.in_chart(fr.chart))
}
