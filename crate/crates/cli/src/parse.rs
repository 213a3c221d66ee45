//! Text grammar for equations, expressions and vector fields.
//!
//! ```text
//! equation  := "u_t" "=" expr
//! expr      := ["-"] term (("+" | "-") term)*
//! term      := factor ("*" factor)*
//! factor    := number | rational | powfactor | param
//! powfactor := var ["^" exponent] | "exp(" rational "*t)"
//! exponent  := rational | "(" rational ")"
//! rational  := ["-"] int ["/" int]
//! ```
//!
//! Variables are `x, t, u, u_x, u_xt, ...` or, in adapted coordinates,
//! `y, s, w, w_y, w_ys, ...`; one expression may not mix the two charts.

use std::collections::BTreeMap;
use std::fmt;

use ardsym_core::equation::EquationError;
use ardsym_core::jet::{Chart, Deriv, JetError, JetPoly, VectorField};
use ardsym_core::{EvolutionEquation, Rational};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("{line}:{column}: expected {}, found {found}", expected.join(" | "))]
    Unexpected { line: usize, column: usize, expected: Vec<String>, found: String },
    #[error("{line}:{column}: {message}")]
    Invalid { line: usize, column: usize, message: String },
    #[error(transparent)]
    Equation(#[from] EquationError),
    #[error(transparent)]
    Field(#[from] JetError),
}

impl ParseError {
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            ParseError::Unexpected { line, column, .. } | ParseError::Invalid { line, column, .. } => {
                Some((*line, *column))
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eq,
    Semi,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(s) | Tok::Ident(s) => write!(f, "\"{s}\""),
            Tok::Plus => write!(f, "\"+\""),
            Tok::Minus => write!(f, "\"-\""),
            Tok::Star => write!(f, "\"*\""),
            Tok::Slash => write!(f, "\"/\""),
            Tok::Caret => write!(f, "\"^\""),
            Tok::LParen => write!(f, "\"(\""),
            Tok::RParen => write!(f, "\")\""),
            Tok::Eq => write!(f, "\"=\""),
            Tok::Semi => write!(f, "\";\""),
            Tok::End => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '=' => Some(Tok::Eq),
            ';' => Some(Tok::Semi),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned { tok, line: l0, column: c0 });
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Spanned { tok: Tok::Num(s), line: l0, column: c0 });
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Spanned { tok: Tok::Ident(s), line: l0, column: c0 });
        } else {
            return Err(ParseError::Invalid { line: l0, column: c0, message: format!("unexpected character '{c}'") });
        }
    }
    out.push(Spanned { tok: Tok::End, line, column: col });
    Ok(out)
}

/// Named rational constants usable as factors (`K`, `d`, `c0`, ...).
pub type Params = BTreeMap<String, Rational>;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Atom {
    X,
    T,
    Jet(Deriv),
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    params: &'a Params,
    chart: Option<Chart>,
    /// Vector field components may only use `x, t, u`.
    base_only: bool,
}

impl<'a> Parser<'a> {
    fn new(src: &str, params: &'a Params) -> Result<Parser<'a>, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0, params, chart: None, base_only: false })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let s = &self.toks[self.pos];
        (s.line, s.column)
    }

    fn bump(&mut self) -> Spanned {
        let s = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        s
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let (line, column) = self.here();
        ParseError::Unexpected {
            line,
            column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    fn invalid(&self, at: (usize, usize), message: String) -> ParseError {
        ParseError::Invalid { line: at.0, column: at.1, message }
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[name]))
        }
    }

    const FACTOR: &'static [&'static str] = &["number", "variable", "\"exp(\"", "\"-\""];

    fn expr(&mut self) -> Result<JetPoly, ParseError> {
        let mut neg = false;
        if *self.peek() == Tok::Minus {
            self.bump();
            neg = true;
        }
        let mut acc = self.term()?;
        if neg {
            acc = -acc;
        }
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc + self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<JetPoly, ParseError> {
        let mut acc = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = acc * self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<JetPoly, ParseError> {
        match self.peek().clone() {
            Tok::Num(_) | Tok::Minus => Ok(JetPoly::constant(self.rational()?)),
            Tok::Ident(name) => {
                let at = self.here();
                if name == "exp" {
                    return self.exp_factor();
                }
                if let Some(v) = self.params.get(&name) {
                    self.bump();
                    return Ok(JetPoly::constant(*v));
                }
                let atom = self.atom(&name, at)?;
                self.bump();
                let e = if *self.peek() == Tok::Caret {
                    self.bump();
                    self.exponent()?
                } else {
                    Rational::ONE
                };
                self.power(atom, e, at)
            }
            _ => Err(self.unexpected(Self::FACTOR)),
        }
    }

    fn power(&self, atom: Atom, e: Rational, at: (usize, usize)) -> Result<JetPoly, ParseError> {
        match atom {
            Atom::X => Ok(JetPoly::x_pow(e)),
            Atom::T => Ok(JetPoly::t_pow(e)),
            Atom::Jet(d) => {
                if !e.is_integer() || e.is_negative() {
                    return Err(self.invalid(at, format!("jet variables take nonnegative integer powers, got {e}")));
                }
                let n = e.numer();
                if n > 64 {
                    return Err(self.invalid(at, format!("power {n} too large")));
                }
                Ok(JetPoly::var(d).pow(n as u32))
            }
        }
    }

    fn set_chart(&mut self, c: Chart, at: (usize, usize)) -> Result<(), ParseError> {
        match self.chart {
            Some(old) if old != c => Err(self.invalid(at, "mixes (x, t, u) and (y, s, w) names".into())),
            _ => {
                self.chart = Some(c);
                Ok(())
            }
        }
    }

    fn atom(&mut self, name: &str, at: (usize, usize)) -> Result<Atom, ParseError> {
        let charts = [Chart::Original, Chart::Adapted];
        for c in charts {
            let (sx, st, su) = (c.space(), c.time(), c.dep());
            if name == sx {
                self.set_chart(c, at)?;
                return Ok(Atom::X);
            }
            if name == st {
                self.set_chart(c, at)?;
                return Ok(Atom::T);
            }
            if name == su {
                self.set_chart(c, at)?;
                return Ok(Atom::Jet(Deriv::U));
            }
            if let Some(rest) = name.strip_prefix(&format!("{su}_")) {
                let (mut nx, mut nt) = (0u8, 0u8);
                for ch in rest.chars() {
                    if ch.to_string() == sx {
                        nx += 1;
                    } else if ch.to_string() == st {
                        nt += 1;
                    } else {
                        return Err(self.invalid(at, format!("bad derivative name `{name}`")));
                    }
                }
                if rest.is_empty() || nx + nt > 4 {
                    return Err(self.invalid(at, format!("derivative `{name}` must have order 1 to 4")));
                }
                if self.base_only {
                    return Err(self.invalid(at, format!("vector field components cannot contain `{name}`")));
                }
                self.set_chart(c, at)?;
                let d = Deriv::new(nx, nt).ok_or_else(|| self.invalid(at, format!("bad derivative `{name}`")))?;
                return Ok(Atom::Jet(d));
            }
        }
        Err(self.invalid(at, format!("unknown name `{name}`")))
    }

    fn exp_factor(&mut self) -> Result<JetPoly, ParseError> {
        self.bump();
        self.expect(Tok::LParen, "\"(\"")?;
        let k = self.rational()?;
        self.expect(Tok::Star, "\"*\"")?;
        let tat = self.here();
        match self.peek().clone() {
            Tok::Ident(n) => {
                match self.atom(&n, tat)? {
                    Atom::T => {}
                    _ => return Err(self.invalid(tat, "exp takes a multiple of the time variable".into())),
                }
                self.bump();
            }
            _ => return Err(self.unexpected(&["time variable"])),
        }
        self.expect(Tok::RParen, "\")\"")?;
        Ok(JetPoly::exp_t(k))
    }

    fn exponent(&mut self) -> Result<Rational, ParseError> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let r = self.rational()?;
            self.expect(Tok::RParen, "\")\"")?;
            Ok(r)
        } else {
            self.rational()
        }
    }

    fn int_or_decimal(&mut self) -> Result<Rational, ParseError> {
        let at = self.here();
        match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                parse_decimal(&s).ok_or_else(|| self.invalid(at, format!("bad number `{s}`")))
            }
            _ => Err(self.unexpected(&["number"])),
        }
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let mut r = self.int_or_decimal()?;
        if *self.peek() == Tok::Slash {
            self.bump();
            let at = self.here();
            let d = self.int_or_decimal()?;
            if d.is_zero() {
                return Err(self.invalid(at, "zero denominator".into()));
            }
            r = r / d;
        }
        Ok(if neg { -r } else { r })
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            Err(self.unexpected(&["\"+\"", "\"-\"", "\"*\"", "end of input"]))
        }
    }
}

/// Exact value of `123`, `0.25` or `1.5`.
fn parse_decimal(s: &str) -> Option<Rational> {
    let (int, frac) = match s.split_once('.') {
        Some((a, b)) => (a, b),
        None => (s, ""),
    };
    if (int.is_empty() && frac.is_empty()) || frac.contains('.') || frac.len() > 30 {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: i128 = digits.parse().ok()?;
    let d = 10i128.checked_pow(frac.len() as u32)?;
    Some(Rational::new(n, d))
}

/// Parses either a bare expression or `u_t = expr` (returning the right-hand side).
pub fn parse_expression(src: &str) -> Result<JetPoly, ParseError> {
    parse_expression_with(src, &Params::new()).map(|(p, _)| p)
}

/// Like [`parse_expression`] with named constants; also reports the chart.
pub fn parse_expression_with(src: &str, params: &Params) -> Result<(JetPoly, Chart), ParseError> {
    let mut p = Parser::new(src, params)?;
    let is_equation = matches!(p.peek(), Tok::Ident(n) if n == "u_t" || n == "w_s")
        && p.toks.get(p.pos + 1).is_some_and(|s| s.tok == Tok::Eq);
    if is_equation {
        let at = p.here();
        let Tok::Ident(n) = p.bump().tok else { unreachable!() };
        let c = if n == "u_t" { Chart::Original } else { Chart::Adapted };
        p.set_chart(c, at)?;
        p.bump();
    }
    let e = p.expr()?;
    p.finish()?;
    Ok((e, p.chart.unwrap_or(Chart::Original)))
}

pub fn parse_equation(src: &str) -> Result<EvolutionEquation, ParseError> {
    parse_equation_with(src, &Params::new())
}

pub fn parse_equation_with(src: &str, params: &Params) -> Result<EvolutionEquation, ParseError> {
    let mut p = Parser::new(src, params)?;
    let at = p.here();
    let chart = match p.peek() {
        Tok::Ident(n) if n == "u_t" => Chart::Original,
        Tok::Ident(n) if n == "w_s" => Chart::Adapted,
        _ => return Err(p.unexpected(&["\"u_t\""])),
    };
    p.bump();
    p.set_chart(chart, at)?;
    p.expect(Tok::Eq, "\"=\"")?;
    let rhs = p.expr()?;
    p.finish()?;
    Ok(EvolutionEquation::new(rhs)?.in_chart(chart))
}

/// `xi=...; tau=...; phi=...` with components in `x, t, u`. Missing
/// components are zero.
pub fn parse_vector_field(src: &str, params: &Params) -> Result<VectorField, ParseError> {
    let mut p = Parser::new(src, params)?;
    p.base_only = true;
    let mut comps: [Option<JetPoly>; 3] = [None, None, None];
    loop {
        if *p.peek() == Tok::End {
            break;
        }
        let at = p.here();
        let idx = match p.peek() {
            Tok::Ident(n) if n == "xi" => 0,
            Tok::Ident(n) if n == "tau" => 1,
            Tok::Ident(n) if n == "phi" => 2,
            _ => return Err(p.unexpected(&["\"xi\"", "\"tau\"", "\"phi\""])),
        };
        if comps[idx].is_some() {
            return Err(p.invalid(at, "component given twice".into()));
        }
        p.bump();
        p.expect(Tok::Eq, "\"=\"")?;
        comps[idx] = Some(p.expr()?);
        match p.peek() {
            Tok::Semi => {
                p.bump();
            }
            Tok::End => break,
            _ => return Err(p.unexpected(&["\";\"", "\"+\"", "\"-\"", "\"*\"", "end of input"])),
        }
    }
    if p.chart == Some(Chart::Adapted) {
        let (line, column) = p.here();
        return Err(ParseError::Invalid { line, column, message: "vector fields use x, t, u".into() });
    }
    let [xi, tau, phi] = comps.map(|c| c.unwrap_or_else(JetPoly::zero));
    Ok(VectorField::new(xi, tau, phi)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ardsym_core::q;

    #[test]
    fn fkpp() {
        let e = parse_equation("u_t = u_xx + u - u^2").unwrap();
        assert_eq!(e.rhs(), EvolutionEquation::fkpp().rhs());
        assert_eq!(parse_expression("u_t = u_xx + u - u^2").unwrap(), *EvolutionEquation::fkpp().rhs());
    }

    #[test]
    fn zero_time_power() {
        let p = parse_expression("u_t = x^(4/3)*t^0*u_xx").unwrap();
        assert_eq!(p, JetPoly::x_pow(q(4, 3)) * JetPoly::var(Deriv::UXX));
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn double_plus_is_rejected() {
        let err = parse_expression("u_t = u_xx + + u").unwrap_err();
        match err {
            ParseError::Unexpected { line, column, found, .. } => {
                assert_eq!((line, column), (1, 14));
                assert_eq!(found, "\"+\"");
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn rationals_and_decimals() {
        let p = parse_expression("0.5*u - 3/2*x^-1 + exp(-3/2*t)*t^(1/2)").unwrap();
        let want = JetPoly::u().scale(q(1, 2)) - JetPoly::x_pow(q(-1, 1)).scale(q(3, 2))
            + JetPoly::exp_t(q(-3, 2)) * JetPoly::t_pow(q(1, 2));
        assert_eq!(p, want);
        assert_eq!(parse_expression("u_tx").unwrap(), JetPoly::var(Deriv::UXT));
    }

    #[test]
    fn adapted_chart() {
        let (p, c) = parse_expression_with("w_s = exp(-1*s)*s^(-1) - 3/2*y^(4/3)*w_yy", &Params::new()).unwrap();
        assert_eq!(c, Chart::Adapted);
        assert_eq!(p.display(Chart::Adapted).to_string(), "exp(-1*s)*s^(-1) - 3/2*y^(4/3)*w_yy");
        assert!(parse_expression("x*y").is_err());
    }

    #[test]
    fn multiline_positions() {
        let err = parse_expression("u_xx +\n  u ^ ^").unwrap_err();
        assert_eq!(err.position(), Some((2, 7)));
    }

    #[test]
    fn vector_fields() {
        let mut params = Params::new();
        params.insert("K".into(), q(3, 2));
        params.insert("d".into(), q(1, 2));
        let v = parse_vector_field("xi=d*x; tau=t; phi=-K*t*u", &params).unwrap();
        assert_eq!(v.xi(), &JetPoly::x().scale(q(1, 2)));
        assert_eq!(v.phi(), &(JetPoly::t() * JetPoly::u()).scale(q(-3, 2)));
        assert!(parse_vector_field("xi=u_x", &params).is_err());
        assert!(parse_vector_field("xi=x; xi=t", &params).is_err());
        assert!(parse_vector_field("xi=K*x", &Params::new()).is_err());
    }
}
