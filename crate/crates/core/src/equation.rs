//! Evolution equations `u_t = F(x, t, u, u_x, u_xx)` and restriction of jet
//! expressions to their solution manifold.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::jet::{Chart, Deriv, Dir, JetError, JetPoly};
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquationError {
    #[error("right-hand side contains time derivatives: {0}")]
    TimeDerivative(String),
    #[error("right-hand side has derivative order {0} > 2")]
    OrderTooHigh(u8),
    #[error("parameter out of range: {0}")]
    BadParameter(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Heat,
    Fkpp,
    /// `u_t = x^{1-a/2} t^{na-1} d/dx[x^{1-a/2} u_x]`.
    AnomalousDiffusion { alpha: Rational, nu: Rational },
    /// The anomalous diffusion operator plus logistic growth `u(1-u)`.
    ReactionDiffusion { alpha: Rational, nu: Rational },
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionEquation {
    rhs: JetPoly,
    family: Family,
    chart: Chart,
}

impl EvolutionEquation {
    pub fn new(rhs: JetPoly) -> Result<EvolutionEquation, EquationError> {
        EvolutionEquation::with_family(rhs, Family::Custom, Chart::Original)
    }

    pub fn with_family(rhs: JetPoly, family: Family, chart: Chart) -> Result<EvolutionEquation, EquationError> {
        if rhs.contains_t_derivatives() {
            return Err(EquationError::TimeDerivative(rhs.to_string()));
        }
        let ord = rhs.max_order().unwrap_or(0);
        if ord > 2 {
            return Err(EquationError::OrderTooHigh(ord));
        }
        Ok(EvolutionEquation { rhs, family, chart })
    }

    pub fn heat() -> EvolutionEquation {
        EvolutionEquation {
            rhs: JetPoly::var(Deriv::UXX),
            family: Family::Heat,
            chart: Chart::Original,
        }
    }

    pub fn fkpp() -> EvolutionEquation {
        let rhs = JetPoly::var(Deriv::UXX) + JetPoly::u() - JetPoly::u().pow(2);
        EvolutionEquation { rhs, family: Family::Fkpp, chart: Chart::Original }
    }

    fn transport(alpha: Rational, nu: Rational) -> Result<JetPoly, EquationError> {
        if !alpha.is_positive() || alpha > Rational::int(2) {
            return Err(EquationError::BadParameter(format!("alpha = {alpha} not in (0, 2]")));
        }
        if !nu.is_positive() {
            return Err(EquationError::BadParameter(format!("nu = {nu} must be positive")));
        }
        let one = Rational::ONE;
        let two = Rational::int(2);
        let tp = JetPoly::t_pow(nu * alpha - one);
        let a = JetPoly::x_pow(two - alpha) * JetPoly::var(Deriv::UXX);
        let b = (JetPoly::x_pow(one - alpha) * JetPoly::var(Deriv::UX)).scale((two - alpha) / two);
        Ok(tp * (a + b))
    }

    pub fn anomalous_diffusion(alpha: Rational, nu: Rational) -> Result<EvolutionEquation, EquationError> {
        let rhs = Self::transport(alpha, nu)?;
        Ok(EvolutionEquation {
            rhs,
            family: Family::AnomalousDiffusion { alpha, nu },
            chart: Chart::Original,
        })
    }

    pub fn reaction_diffusion(alpha: Rational, nu: Rational) -> Result<EvolutionEquation, EquationError> {
        let rhs = Self::transport(alpha, nu)? + JetPoly::u() - JetPoly::u().pow(2);
        Ok(EvolutionEquation {
            rhs,
            family: Family::ReactionDiffusion { alpha, nu },
            chart: Chart::Original,
        })
    }

    pub fn rhs(&self) -> &JetPoly {
        &self.rhs
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn in_chart(mut self, chart: Chart) -> EvolutionEquation {
        self.chart = chart;
        self
    }

    /// `u_t - F`.
    pub fn residual(&self) -> JetPoly {
        JetPoly::var(Deriv::UT) - &self.rhs
    }

    /// Substitutes every time derivative by its value on solutions: `u_t -> F`,
    /// `u_xt -> D_x F`, `u_tt -> D_t F` restricted, and so on.
    pub fn restrict(&self, p: &JetPoly) -> Result<JetPoly, JetError> {
        let mut cache: HashMap<Deriv, JetPoly> = HashMap::new();
        let mut out = p.clone();
        for d in p.jet_vars() {
            if d.nt == 0 {
                continue;
            }
            let rep = self.resolved(d, &mut cache)?;
            out = out.substitute(d, &rep);
        }
        Ok(out)
    }

    fn resolved(&self, d: Deriv, cache: &mut HashMap<Deriv, JetPoly>) -> Result<JetPoly, JetError> {
        if d.nt == 0 {
            return Ok(JetPoly::var(d));
        }
        if let Some(p) = cache.get(&d) {
            return Ok(p.clone());
        }
        let val = if d.nt == 1 {
            let mut p = self.rhs.clone();
            for _ in 0..d.nx {
                p = p.total_derivative(Dir::X)?;
            }
            p
        } else {
            let prev = self.resolved(Deriv { nx: d.nx, nt: d.nt - 1 }, cache)?;
            let dt = prev.total_derivative(Dir::T)?;
            let mut out = dt.clone();
            for v in dt.jet_vars() {
                if v.nt > 0 {
                    let rep = self.resolved(v, cache)?;
                    out = out.substitute(v, &rep);
                }
            }
            out
        };
        cache.insert(d, val.clone());
        Ok(val)
    }
}

impl fmt::Display for EvolutionEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", Deriv::UT.name(self.chart), self.rhs.display(self.chart))
    }
}

pub fn restrict_to_solution_manifold(p: &JetPoly, eq: &EvolutionEquation) -> Result<JetPoly, JetError> {
    eq.restrict(p)
}
