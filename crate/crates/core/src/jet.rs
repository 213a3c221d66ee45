//! Polynomials in jet variables with rational powers of `x`, `t` and an
//! `e^{kt}` factor.
//!
//! A [`JetPoly`] is a finite sum of terms `c * e^{kt} * x^a * t^b * prod u_J^n_J`
//! where the multi-indices `J` run over derivatives of order at most
//! [`MAX_ORDER`]. Terms are kept in a `BTreeMap` keyed by [`Monomial`], so the
//! canonical form (sorted, merged, no zero coefficients) is maintained by
//! construction and equality is structural.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::rational::Rational;

pub const MAX_ORDER: u8 = 4;
/// Number of jet slots: `u` plus every derivative of order 1..=4.
pub const N_JET: usize = 15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("derivative order would exceed {MAX_ORDER} (differentiating {0})")]
    OrderOverflow(String),
    #[error("cannot evaluate {what} at x = {x}, t = {t}")]
    DomainError { what: String, x: f64, t: f64 },
    #[error("order-3 derivatives survived in prolongation coefficient psi_{0}")]
    CancellationFailure(String),
    #[error("vector field coefficient `{0}` contains derivative variables")]
    InvalidField(String),
    #[error("prolonged field acts on order <= 2, got an expression of order {0}")]
    ApplyOrder(u8),
}

pub type Result<T> = std::result::Result<T, JetError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    X,
    T,
}

/// Naming used when printing: `(x, t, u)` or the adapted `(y, s, w)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Chart {
    #[default]
    Original,
    Adapted,
}

impl Chart {
    pub fn space(self) -> &'static str {
        match self {
            Chart::Original => "x",
            Chart::Adapted => "y",
        }
    }
    pub fn time(self) -> &'static str {
        match self {
            Chart::Original => "t",
            Chart::Adapted => "s",
        }
    }
    pub fn dep(self) -> &'static str {
        match self {
            Chart::Original => "u",
            Chart::Adapted => "w",
        }
    }
}

/// A derivative `u_J` with `nx` spatial and `nt` temporal derivatives
/// (`nx = nt = 0` is `u` itself).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Deriv {
    pub nx: u8,
    pub nt: u8,
}

impl Deriv {
    pub const U: Deriv = Deriv { nx: 0, nt: 0 };
    pub const UX: Deriv = Deriv { nx: 1, nt: 0 };
    pub const UT: Deriv = Deriv { nx: 0, nt: 1 };
    pub const UXX: Deriv = Deriv { nx: 2, nt: 0 };
    pub const UXT: Deriv = Deriv { nx: 1, nt: 1 };
    pub const UTT: Deriv = Deriv { nx: 0, nt: 2 };

    pub fn new(nx: u8, nt: u8) -> Option<Deriv> {
        (nx + nt <= MAX_ORDER).then_some(Deriv { nx, nt })
    }

    pub fn order(self) -> u8 {
        self.nx + self.nt
    }

    /// Slot index; ordered by total order, then `x` before `t` in the sorted
    /// multi-index.
    pub fn index(self) -> usize {
        let o = self.order() as usize;
        o * (o + 1) / 2 + self.nt as usize
    }

    pub fn from_index(i: usize) -> Deriv {
        assert!(i < N_JET, "jet index out of range");
        let mut o = 0usize;
        while (o + 1) * (o + 2) / 2 <= i {
            o += 1;
        }
        let nt = (i - o * (o + 1) / 2) as u8;
        Deriv { nx: o as u8 - nt, nt }
    }

    pub fn bump(self, dir: Dir) -> Option<Deriv> {
        match dir {
            Dir::X => Deriv::new(self.nx + 1, self.nt),
            Dir::T => Deriv::new(self.nx, self.nt + 1),
        }
    }

    pub fn name(self, chart: Chart) -> String {
        let mut s = chart.dep().to_string();
        if self.order() > 0 {
            s.push('_');
            s.extend(std::iter::repeat(chart.space()).take(self.nx as usize));
            s.extend(std::iter::repeat(chart.time()).take(self.nt as usize));
        }
        s
    }

    pub fn all() -> impl Iterator<Item = Deriv> {
        (0..N_JET).map(Deriv::from_index)
    }
}

/// Any coordinate of the jet space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JetVar {
    X,
    T,
    Jet(Deriv),
}

/// The non-coefficient part of a term. Field order fixes the canonical
/// term order: exponential rate, x power, t power, jet exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub exprate: Rational,
    pub xpow: Rational,
    pub tpow: Rational,
    pub jet: [u8; N_JET],
}

impl Monomial {
    pub fn one() -> Monomial {
        Monomial {
            exprate: Rational::ZERO,
            xpow: Rational::ZERO,
            tpow: Rational::ZERO,
            jet: [0; N_JET],
        }
    }

    pub fn jet_pow(&self, d: Deriv) -> u8 {
        self.jet[d.index()]
    }

    pub fn jet_degree(&self) -> u32 {
        self.jet.iter().map(|&n| n as u32).sum()
    }

    pub fn is_jet_free(&self) -> bool {
        self.jet.iter().all(|&n| n == 0)
    }

    pub fn max_order(&self) -> Option<u8> {
        Deriv::all()
            .filter(|d| self.jet[d.index()] > 0)
            .map(|d| d.order())
            .max()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut jet = self.jet;
        for (a, b) in jet.iter_mut().zip(other.jet.iter()) {
            *a = a.checked_add(*b).expect("jet exponent overflow");
        }
        Monomial {
            exprate: self.exprate + other.exprate,
            xpow: self.xpow + other.xpow,
            tpow: self.tpow + other.tpow,
            jet,
        }
    }

    fn divides_jet(&self, d: Deriv) -> bool {
        self.jet[d.index()] > 0
    }
}

/// A single signed term, handed out by [`JetPoly::terms`].
#[derive(Clone, Debug, PartialEq)]
pub struct JetTerm {
    pub coeff: Rational,
    pub mono: Monomial,
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct JetPoly {
    terms: BTreeMap<Monomial, Rational>,
}

impl JetPoly {
    pub fn zero() -> JetPoly {
        JetPoly::default()
    }

    pub fn constant(c: Rational) -> JetPoly {
        JetPoly::term(c, Monomial::one())
    }

    pub fn one() -> JetPoly {
        JetPoly::constant(Rational::ONE)
    }

    pub fn term(c: Rational, mono: Monomial) -> JetPoly {
        let mut p = JetPoly::zero();
        p.add_term(c, mono);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = JetTerm>>(terms: I) -> JetPoly {
        let mut p = JetPoly::zero();
        for t in terms {
            p.add_term(t.coeff, t.mono);
        }
        p
    }

    pub fn x() -> JetPoly {
        JetPoly::x_pow(Rational::ONE)
    }

    pub fn t() -> JetPoly {
        JetPoly::t_pow(Rational::ONE)
    }

    pub fn x_pow(a: Rational) -> JetPoly {
        let mut m = Monomial::one();
        m.xpow = a;
        JetPoly::term(Rational::ONE, m)
    }

    pub fn t_pow(b: Rational) -> JetPoly {
        let mut m = Monomial::one();
        m.tpow = b;
        JetPoly::term(Rational::ONE, m)
    }

    pub fn exp_t(k: Rational) -> JetPoly {
        let mut m = Monomial::one();
        m.exprate = k;
        JetPoly::term(Rational::ONE, m)
    }

    pub fn var(d: Deriv) -> JetPoly {
        let mut m = Monomial::one();
        m.jet[d.index()] = 1;
        JetPoly::term(Rational::ONE, m)
    }

    pub fn u() -> JetPoly {
        JetPoly::var(Deriv::U)
    }

    pub fn add_term(&mut self, c: Rational, mono: Monomial) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = *e.get() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn to_terms(&self) -> Vec<JetTerm> {
        self.terms
            .iter()
            .map(|(m, c)| JetTerm { coeff: *c, mono: m.clone() })
            .collect()
    }

    /// Rebuilds the polynomial from its own terms; used to check that the
    /// stored form is already canonical.
    pub fn recanonicalize(&self) -> JetPoly {
        JetPoly::from_terms(self.to_terms())
    }

    pub fn scale(&self, c: Rational) -> JetPoly {
        if c.is_zero() {
            return JetPoly::zero();
        }
        JetPoly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), *v * c)).collect(),
        }
    }

    pub fn mul_mono(&self, c: Rational, mono: &Monomial) -> JetPoly {
        let mut out = JetPoly::zero();
        for (m, v) in &self.terms {
            out.add_term(*v * c, m.mul(mono));
        }
        out
    }

    pub fn pow(&self, n: u32) -> JetPoly {
        let mut acc = JetPoly::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// The single term if the polynomial has exactly one.
    pub fn as_monomial(&self) -> Option<(Rational, &Monomial)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(m, c)| (*c, m))
        } else {
            None
        }
    }

    /// Inverse of a single jet-free term `c e^{kt} x^a t^b`.
    pub fn monomial_inverse(&self) -> Option<JetPoly> {
        let (c, m) = self.as_monomial()?;
        if !m.is_jet_free() {
            return None;
        }
        let inv = Monomial {
            exprate: -m.exprate,
            xpow: -m.xpow,
            tpow: -m.tpow,
            jet: [0; N_JET],
        };
        Some(JetPoly::term(c.recip(), inv))
    }

    pub fn max_order(&self) -> Option<u8> {
        self.terms.keys().filter_map(Monomial::max_order).max()
    }

    pub fn contains(&self, d: Deriv) -> bool {
        self.terms.keys().any(|m| m.divides_jet(d))
    }

    pub fn degree_in(&self, d: Deriv) -> u8 {
        self.terms.keys().map(|m| m.jet_pow(d)).max().unwrap_or(0)
    }

    pub fn contains_derivatives(&self) -> bool {
        self.terms
            .keys()
            .any(|m| m.max_order().is_some_and(|o| o > 0))
    }

    pub fn contains_t_derivatives(&self) -> bool {
        Deriv::all()
            .filter(|d| d.nt > 0)
            .any(|d| self.contains(d))
    }

    pub fn is_jet_free(&self) -> bool {
        self.terms.keys().all(Monomial::is_jet_free)
    }

    /// Jet variables that occur, in canonical order.
    pub fn jet_vars(&self) -> Vec<Deriv> {
        Deriv::all().filter(|&d| self.contains(d)).collect()
    }

    pub fn map_terms<F: Fn(&Monomial, Rational) -> Option<(Rational, Monomial)>>(&self, f: F) -> JetPoly {
        let mut out = JetPoly::zero();
        for (m, c) in &self.terms {
            if let Some((c2, m2)) = f(m, *c) {
                out.add_term(c2, m2);
            }
        }
        out
    }

    /// Explicit partial derivative; `∂/∂t` also differentiates `e^{kt}`.
    pub fn partial(&self, v: JetVar) -> JetPoly {
        let mut out = JetPoly::zero();
        for (m, c) in &self.terms {
            match v {
                JetVar::X => {
                    if !m.xpow.is_zero() {
                        let mut m2 = m.clone();
                        m2.xpow = m.xpow - Rational::ONE;
                        out.add_term(*c * m.xpow, m2);
                    }
                }
                JetVar::T => {
                    if !m.tpow.is_zero() {
                        let mut m2 = m.clone();
                        m2.tpow = m.tpow - Rational::ONE;
                        out.add_term(*c * m.tpow, m2);
                    }
                    if !m.exprate.is_zero() {
                        out.add_term(*c * m.exprate, m.clone());
                    }
                }
                JetVar::Jet(d) => {
                    let n = m.jet_pow(d);
                    if n > 0 {
                        let mut m2 = m.clone();
                        m2.jet[d.index()] = n - 1;
                        out.add_term(*c * Rational::int(n as i128), m2);
                    }
                }
            }
        }
        out
    }

    /// Total derivative `D_x` or `D_t`.
    pub fn total_derivative(&self, dir: Dir) -> Result<JetPoly> {
        let base = match dir {
            Dir::X => JetVar::X,
            Dir::T => JetVar::T,
        };
        let mut out = self.partial(base);
        for d in Deriv::all() {
            if !self.contains(d) {
                continue;
            }
            let next = d
                .bump(dir)
                .ok_or_else(|| JetError::OrderOverflow(d.name(Chart::Original)))?;
            out = out + &self.partial(JetVar::Jet(d)) * &JetPoly::var(next);
        }
        Ok(out)
    }

    /// `D_x^nx D_t^nt`.
    pub fn total_derivative_multi(&self, d: Deriv) -> Result<JetPoly> {
        let mut p = self.clone();
        for _ in 0..d.nx {
            p = p.total_derivative(Dir::X)?;
        }
        for _ in 0..d.nt {
            p = p.total_derivative(Dir::T)?;
        }
        Ok(p)
    }

    /// Replaces every occurrence of `u_J` by `rep`.
    pub fn substitute(&self, d: Deriv, rep: &JetPoly) -> JetPoly {
        if !self.contains(d) {
            return self.clone();
        }
        let max = self.degree_in(d) as usize;
        let mut powers = vec![JetPoly::one()];
        for k in 1..=max {
            powers.push(&powers[k - 1] * rep);
        }
        let mut out = JetPoly::zero();
        for (m, c) in &self.terms {
            let n = m.jet_pow(d) as usize;
            if n == 0 {
                out.add_term(*c, m.clone());
            } else {
                let mut m2 = m.clone();
                m2.jet[d.index()] = 0;
                out = out + powers[n].mul_mono(*c, &m2);
            }
        }
        out
    }

    /// Simultaneous substitution: every slot with `Some(rep)` is replaced,
    /// and replacements are not re-substituted.
    pub fn compose_jets(&self, reps: &[Option<JetPoly>; N_JET]) -> JetPoly {
        let mut out = JetPoly::zero();
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let mut acc = JetPoly::one();
            for (i, rep) in reps.iter().enumerate() {
                if let Some(rep) = rep {
                    let n = m.jet[i];
                    if n > 0 {
                        rest.jet[i] = 0;
                        acc = acc * rep.pow(n as u32);
                    }
                }
            }
            out = out + acc.mul_mono(*c, &rest);
        }
        out
    }

    /// Splits `p = a * u_J + b` when `p` is at most linear in `u_J`.
    pub fn linear_split(&self, d: Deriv) -> Option<(JetPoly, JetPoly)> {
        if self.degree_in(d) > 1 {
            return None;
        }
        let mut a = JetPoly::zero();
        let mut b = JetPoly::zero();
        for (m, c) in &self.terms {
            if m.jet_pow(d) == 1 {
                let mut m2 = m.clone();
                m2.jet[d.index()] = 0;
                a.add_term(*c, m2);
            } else {
                b.add_term(*c, m.clone());
            }
        }
        Some((a, b))
    }

    /// Leading (largest) term, if any.
    pub fn leading(&self) -> Option<(Rational, &Monomial)> {
        self.terms.iter().next_back().map(|(m, c)| (*c, m))
    }

    /// True when `self = m * other` for a single jet-free term `m`.
    pub fn proportional_to(&self, other: &JetPoly) -> bool {
        if self.is_zero() || other.is_zero() {
            return self.is_zero() && other.is_zero();
        }
        let (ca, ma) = self.leading().unwrap();
        let (cb, mb) = other.leading().unwrap();
        if ma.jet != mb.jet {
            return false;
        }
        let ratio = Monomial {
            exprate: ma.exprate - mb.exprate,
            xpow: ma.xpow - mb.xpow,
            tpow: ma.tpow - mb.tpow,
            jet: [0; N_JET],
        };
        &other.mul_mono(ca / cb, &ratio) == self
    }

    pub fn evaluate(&self, pt: &JetPoint) -> Result<f64> {
        let mut s = 0.0;
        for (m, c) in &self.terms {
            s += eval_term(*c, m, pt)?;
        }
        Ok(s)
    }

    /// Sum of absolute term values; the natural scale for relative residuals.
    pub fn term_magnitude(&self, pt: &JetPoint) -> Result<f64> {
        let mut s = 0.0;
        for (m, c) in &self.terms {
            s += eval_term(*c, m, pt)?.abs();
        }
        Ok(s)
    }

    pub fn display(&self, chart: Chart) -> DisplayPoly<'_> {
        DisplayPoly { p: self, chart }
    }
}

fn pow_checked(base: f64, e: Rational, name: &str, pt: &JetPoint) -> Result<f64> {
    if e.is_zero() {
        return Ok(1.0);
    }
    if e.is_integer() {
        if base == 0.0 && e.is_negative() {
            return Err(JetError::DomainError { what: format!("{name}^{e}"), x: pt.x, t: pt.t });
        }
        return Ok(base.powi(e.numer() as i32));
    }
    if base <= 0.0 {
        return Err(JetError::DomainError { what: format!("{name}^({e})"), x: pt.x, t: pt.t });
    }
    Ok(base.powf(e.to_f64()))
}

fn eval_term(c: Rational, m: &Monomial, pt: &JetPoint) -> Result<f64> {
    let mut v = c.to_f64();
    if !m.exprate.is_zero() {
        v *= (m.exprate.to_f64() * pt.t).exp();
    }
    v *= pow_checked(pt.x, m.xpow, "x", pt)?;
    v *= pow_checked(pt.t, m.tpow, "t", pt)?;
    for (i, &n) in m.jet.iter().enumerate() {
        if n > 0 {
            v *= pt.jet[i].powi(n as i32);
        }
    }
    Ok(v)
}

impl Add for JetPoly {
    type Output = JetPoly;
    fn add(mut self, rhs: JetPoly) -> JetPoly {
        for (m, c) in rhs.terms {
            self.add_term(c, m);
        }
        self
    }
}

impl Add<&JetPoly> for JetPoly {
    type Output = JetPoly;
    fn add(mut self, rhs: &JetPoly) -> JetPoly {
        for (m, c) in &rhs.terms {
            self.add_term(*c, m.clone());
        }
        self
    }
}

impl Add for &JetPoly {
    type Output = JetPoly;
    fn add(self, rhs: &JetPoly) -> JetPoly {
        self.clone() + rhs
    }
}

impl Sub for JetPoly {
    type Output = JetPoly;
    fn sub(mut self, rhs: JetPoly) -> JetPoly {
        for (m, c) in rhs.terms {
            self.add_term(-c, m);
        }
        self
    }
}

impl Sub<&JetPoly> for JetPoly {
    type Output = JetPoly;
    fn sub(mut self, rhs: &JetPoly) -> JetPoly {
        for (m, c) in &rhs.terms {
            self.add_term(-*c, m.clone());
        }
        self
    }
}

impl Sub for &JetPoly {
    type Output = JetPoly;
    fn sub(self, rhs: &JetPoly) -> JetPoly {
        self.clone() - rhs
    }
}

impl Neg for JetPoly {
    type Output = JetPoly;
    fn neg(self) -> JetPoly {
        self.scale(-Rational::ONE)
    }
}

impl Neg for &JetPoly {
    type Output = JetPoly;
    fn neg(self) -> JetPoly {
        self.scale(-Rational::ONE)
    }
}

impl Mul for &JetPoly {
    type Output = JetPoly;
    fn mul(self, rhs: &JetPoly) -> JetPoly {
        let mut out = JetPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(*ca * *cb, ma.mul(mb));
            }
        }
        out
    }
}

impl Mul for JetPoly {
    type Output = JetPoly;
    fn mul(self, rhs: JetPoly) -> JetPoly {
        &self * &rhs
    }
}

impl Mul<&JetPoly> for JetPoly {
    type Output = JetPoly;
    fn mul(self, rhs: &JetPoly) -> JetPoly {
        &self * rhs
    }
}

impl Mul<JetPoly> for Rational {
    type Output = JetPoly;
    fn mul(self, rhs: JetPoly) -> JetPoly {
        rhs.scale(self)
    }
}

impl From<Rational> for JetPoly {
    fn from(c: Rational) -> JetPoly {
        JetPoly::constant(c)
    }
}

pub struct DisplayPoly<'a> {
    p: &'a JetPoly,
    chart: Chart,
}

fn fmt_exponent(e: Rational) -> String {
    if e.is_integer() && !e.is_negative() {
        format!("^{e}")
    } else {
        format!("^({e})")
    }
}

fn fmt_monomial(m: &Monomial, chart: Chart) -> Vec<String> {
    let mut f = Vec::new();
    if !m.exprate.is_zero() {
        f.push(format!("exp({}*{})", m.exprate, chart.time()));
    }
    for (name, e) in [(chart.space(), m.xpow), (chart.time(), m.tpow)] {
        if e.is_one() {
            f.push(name.to_string());
        } else if !e.is_zero() {
            f.push(format!("{name}{}", fmt_exponent(e)));
        }
    }
    for d in Deriv::all() {
        let n = m.jet_pow(d);
        if n == 1 {
            f.push(d.name(chart));
        } else if n > 1 {
            f.push(format!("{}^{n}", d.name(chart)));
        }
    }
    f
}

impl fmt::Display for DisplayPoly<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.p.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let a = c.abs();
            let factors = fmt_monomial(m, self.chart);
            if factors.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{a}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for JetPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display(Chart::Original).fmt(f)
    }
}

impl fmt::Debug for JetPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Numeric values for `x`, `t` and every jet slot.
#[derive(Clone, Debug, PartialEq)]
pub struct JetPoint {
    pub x: f64,
    pub t: f64,
    pub jet: [f64; N_JET],
}

impl JetPoint {
    pub fn new(x: f64, t: f64) -> JetPoint {
        JetPoint { x, t, jet: [0.0; N_JET] }
    }

    pub fn get(&self, d: Deriv) -> f64 {
        self.jet[d.index()]
    }

    pub fn set(&mut self, d: Deriv, v: f64) {
        self.jet[d.index()] = v;
    }

    pub fn with(mut self, d: Deriv, v: f64) -> JetPoint {
        self.set(d, v);
        self
    }
}

/// `X = xi d/dx + tau d/dt + phi d/du` with coefficients on `(x, t, u)` only.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    xi: JetPoly,
    tau: JetPoly,
    phi: JetPoly,
}

impl VectorField {
    pub fn new(xi: JetPoly, tau: JetPoly, phi: JetPoly) -> Result<VectorField> {
        for p in [&xi, &tau, &phi] {
            if p.contains_derivatives() {
                return Err(JetError::InvalidField(p.to_string()));
            }
        }
        Ok(VectorField { xi, tau, phi })
    }

    /// `a x d/dx + b t d/dt + c u d/du`.
    pub fn scaling(a: Rational, b: Rational, c: Rational) -> VectorField {
        VectorField {
            xi: JetPoly::x().scale(a),
            tau: JetPoly::t().scale(b),
            phi: JetPoly::u().scale(c),
        }
    }

    pub fn dx() -> VectorField {
        VectorField { xi: JetPoly::one(), tau: JetPoly::zero(), phi: JetPoly::zero() }
    }

    pub fn dt() -> VectorField {
        VectorField { xi: JetPoly::zero(), tau: JetPoly::one(), phi: JetPoly::zero() }
    }

    pub fn xi(&self) -> &JetPoly {
        &self.xi
    }
    pub fn tau(&self) -> &JetPoly {
        &self.tau
    }
    pub fn phi(&self) -> &JetPoly {
        &self.phi
    }

    pub fn linear_combination(a: Rational, x1: &VectorField, b: Rational, x2: &VectorField) -> VectorField {
        VectorField {
            xi: x1.xi.scale(a) + x2.xi.scale(b),
            tau: x1.tau.scale(a) + x2.tau.scale(b),
            phi: x1.phi.scale(a) + x2.phi.scale(b),
        }
    }

    /// Second prolongation via the characteristic `Q = phi - xi u_x - tau u_t`.
    pub fn prolong(&self) -> Result<ProlongedField> {
        let q = &self.phi
            - &(&self.xi * &JetPoly::var(Deriv::UX) + &self.tau * &JetPoly::var(Deriv::UT));
        let mut psi: Vec<JetPoly> = Vec::with_capacity(5);
        for j in PSI_SLOTS {
            let dq = q.total_derivative_multi(j)?;
            let jx = j.bump(Dir::X).expect("order <= 3");
            let jt = j.bump(Dir::T).expect("order <= 3");
            let p = dq + &self.xi * &JetPoly::var(jx) + &self.tau * &JetPoly::var(jt);
            if p.max_order().unwrap_or(0) > 2 {
                return Err(JetError::CancellationFailure(j.name(Chart::Original)[2..].to_string()));
            }
            psi.push(p);
        }
        let psi: [JetPoly; 5] = psi.try_into().expect("five slots");
        Ok(ProlongedField { base: self.clone(), psi })
    }
}

const PSI_SLOTS: [Deriv; 5] = [Deriv::UX, Deriv::UT, Deriv::UXX, Deriv::UXT, Deriv::UTT];

pub fn prolong(x: &VectorField) -> Result<ProlongedField> {
    x.prolong()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProlongedField {
    pub base: VectorField,
    psi: [JetPoly; 5],
}

impl ProlongedField {
    pub fn psi(&self, d: Deriv) -> Option<&JetPoly> {
        PSI_SLOTS.iter().position(|&s| s == d).map(|i| &self.psi[i])
    }
    pub fn psi_x(&self) -> &JetPoly {
        &self.psi[0]
    }
    pub fn psi_t(&self) -> &JetPoly {
        &self.psi[1]
    }
    pub fn psi_xx(&self) -> &JetPoly {
        &self.psi[2]
    }
    pub fn psi_xt(&self) -> &JetPoly {
        &self.psi[3]
    }
    pub fn psi_tt(&self) -> &JetPoly {
        &self.psi[4]
    }

    /// Acts on `p` as a derivation.
    pub fn apply(&self, p: &JetPoly) -> Result<JetPoly> {
        let ord = p.max_order().unwrap_or(0);
        if ord > 2 {
            return Err(JetError::ApplyOrder(ord));
        }
        let b = &self.base;
        let mut out = &b.xi * &p.partial(JetVar::X)
            + &b.tau * &p.partial(JetVar::T)
            + &b.phi * &p.partial(JetVar::Jet(Deriv::U));
        for (slot, psi) in PSI_SLOTS.iter().zip(self.psi.iter()) {
            if p.contains(*slot) {
                out = out + psi * &p.partial(JetVar::Jet(*slot));
            }
        }
        Ok(out)
    }
}

pub fn apply(y: &ProlongedField, p: &JetPoly) -> Result<JetPoly> {
    y.apply(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn ux() -> JetPoly {
        JetPoly::var(Deriv::UX)
    }

    #[test]
    fn index_roundtrip() {
        for i in 0..N_JET {
            assert_eq!(Deriv::from_index(i).index(), i);
        }
        assert_eq!(Deriv::UXX.index(), 3);
        assert_eq!(Deriv::UXT.index(), 4);
        assert_eq!(Deriv::new(0, 4).unwrap().index(), 14);
        assert!(Deriv::new(3, 2).is_none());
    }

    #[test]
    fn ring_examples() {
        let xu = JetPoly::x() * JetPoly::u();
        assert!((&xu + &(-&xu)).is_zero());
        let a = JetPoly::x_pow(q(1, 2)) * JetPoly::u();
        let b = JetPoly::x_pow(q(1, 2)) * ux();
        assert_eq!(a * b, JetPoly::x() * JetPoly::u() * ux());
        let k = q(3, 2);
        let e = JetPoly::exp_t(-k) * JetPoly::u() * (JetPoly::exp_t(k) * JetPoly::u());
        assert_eq!(e, JetPoly::u().pow(2));
    }

    #[test]
    fn total_derivative_examples() {
        let p = JetPoly::x().pow(2) * JetPoly::u();
        let want = JetPoly::x().scale(q(2, 1)) * JetPoly::u() + JetPoly::x().pow(2) * ux();
        assert_eq!(p.total_derivative(Dir::X).unwrap(), want);

        let p = JetPoly::u() * ux();
        let want = ux().pow(2) + JetPoly::u() * JetPoly::var(Deriv::UXX);
        assert_eq!(p.total_derivative(Dir::X).unwrap(), want);

        let k = q(-2, 3);
        let p = JetPoly::exp_t(k) * JetPoly::u();
        let want = (JetPoly::exp_t(k) * JetPoly::u()).scale(k) + JetPoly::exp_t(k) * JetPoly::var(Deriv::UT);
        assert_eq!(p.total_derivative(Dir::T).unwrap(), want);
    }

    #[test]
    fn order_overflow() {
        let p = JetPoly::var(Deriv::new(2, 2).unwrap());
        assert!(matches!(p.total_derivative(Dir::X), Err(JetError::OrderOverflow(_))));
    }

    #[test]
    fn u_du_prolongation() {
        let f = VectorField::new(JetPoly::zero(), JetPoly::zero(), JetPoly::u()).unwrap();
        let y = f.prolong().unwrap();
        assert_eq!(y.psi_x(), &ux());
        assert_eq!(y.psi_t(), &JetPoly::var(Deriv::UT));
        assert_eq!(y.psi_xx(), &JetPoly::var(Deriv::UXX));
    }

    #[test]
    fn invalid_field_rejected() {
        assert!(VectorField::new(ux(), JetPoly::zero(), JetPoly::zero()).is_err());
    }

    #[test]
    fn apply_rejects_high_order() {
        let y = VectorField::dx().prolong().unwrap();
        let p = JetPoly::var(Deriv::new(3, 0).unwrap());
        assert_eq!(y.apply(&p), Err(JetError::ApplyOrder(3)));
    }

    #[test]
    fn heat_scaling_weight() {
        let f = VectorField::scaling(q(1, 1), q(2, 1), q(-1, 1));
        let y = f.prolong().unwrap();
        let heat = JetPoly::var(Deriv::UT) - JetPoly::var(Deriv::UXX);
        assert_eq!(y.apply(&heat).unwrap(), heat.scale(q(-3, 1)));
    }

    #[test]
    fn evaluate_examples() {
        let p = JetPoly::x_pow(q(1, 2)) * JetPoly::u();
        let pt = JetPoint::new(4.0, 1.0).with(Deriv::U, 3.0);
        assert_eq!(p.evaluate(&pt).unwrap(), 6.0);
        assert_eq!(JetPoly::zero().evaluate(&pt).unwrap(), 0.0);
        let bad = JetPoint::new(-1.0, 1.0);
        assert!(matches!(p.evaluate(&bad), Err(JetError::DomainError { .. })));
    }

    #[test]
    fn display_forms() {
        let p = JetPoly::var(Deriv::UXX) + JetPoly::u() - JetPoly::u().pow(2);
        assert_eq!(p.to_string(), "u_xx + u - u^2");
        let p = JetPoly::x_pow(q(4, 3)) * JetPoly::var(Deriv::UXX).scale(q(-3, 2))
            + JetPoly::exp_t(q(-1, 1)) * JetPoly::t_pow(q(-1, 1));
        assert_eq!(p.display(Chart::Adapted).to_string(), "exp(-1*s)*s^(-1) - 3/2*y^(4/3)*w_yy");
    }

    #[test]
    fn proportional_check() {
        let p = JetPoly::u() + JetPoly::t() * JetPoly::u().pow(2);
        let m = JetPoly::t_pow(q(-2, 1)).scale(q(3, 1));
        assert!((&p * &m).proportional_to(&p));
        assert!(!(JetPoly::u() - JetPoly::t() * JetPoly::u().pow(2)).proportional_to(&p));
    }
}
