//! Exact rational numbers used for every coefficient and exponent in the
//! jet algebra.
//!
//! `Rational` is a `Copy` wrapper around `Ratio<i128>`; it is always kept in
//! lowest terms with a positive denominator. Arithmetic is checked and
//! panics on `i128` overflow instead of wrapping silently, which in practice
//! only happens for pathological parameter choices.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(Ratio<i128>);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RationalParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid integer `{0}` in rational literal")]
    BadInteger(String),
    #[error("zero denominator in rational literal")]
    ZeroDenominator,
}

impl Rational {
    pub const ZERO: Rational = Rational(Ratio::new_raw(0, 1));
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));

    /// Builds `n/d` in lowest terms. Panics when `d == 0`.
    pub fn new(n: i128, d: i128) -> Self {
        assert!(d != 0, "rational with zero denominator");
        Rational(Ratio::new(n, d))
    }

    pub fn int(n: i128) -> Self {
        Rational(Ratio::from_integer(n))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rational(self.0.recip())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Integer power; negative exponents invert.
    pub fn powi(&self, e: i32) -> Self {
        let mut acc = Rational::ONE;
        let base = if e < 0 { self.recip() } else { *self };
        for _ in 0..e.unsigned_abs() {
            acc = acc * base;
        }
        acc
    }

    /// `self^e` when the result is itself rational (e.g. `(4/9)^(3/2) = 8/27`).
    /// Returns `None` for irrational results or for even roots of negatives.
    pub fn pow_rational(&self, e: Rational) -> Option<Rational> {
        if e.is_zero() {
            return Some(Rational::ONE);
        }
        if self.is_zero() {
            return if e.is_positive() { Some(Rational::ZERO) } else { None };
        }
        let root = e.denom();
        let num = integer_root(self.numer(), root)?;
        let den = integer_root(self.denom(), root)?;
        let base = Rational::new(num, den);
        let p = i32::try_from(e.numer()).ok()?;
        Some(base.powi(p))
    }

    /// Approximates `x` by a rational with denominator at most `max_den`
    /// (continued fractions). Used only to turn user-supplied floats into
    /// exact parameters.
    pub fn approximate(x: f64, max_den: i128) -> Option<Rational> {
        if !x.is_finite() {
            return None;
        }
        let (mut h0, mut h1) = (0i128, 1i128);
        let (mut k0, mut k1) = (1i128, 0i128);
        let mut r = x;
        for _ in 0..64 {
            let a = r.floor();
            if a.abs() > 1e18 {
                break;
            }
            let a_i = a as i128;
            let h2 = a_i.checked_mul(h1)?.checked_add(h0)?;
            let k2 = a_i.checked_mul(k1)?.checked_add(k0)?;
            if k2 > max_den {
                break;
            }
            (h0, h1, k0, k1) = (h1, h2, k1, k2);
            let frac = r - a;
            if frac.abs() < 1e-15 {
                break;
            }
            r = 1.0 / frac;
        }
        if k1 == 0 {
            None
        } else {
            Some(Rational::new(h1, k1))
        }
    }
}

/// Exact `n^(1/k)` for integers, `None` if `n` is not a perfect k-th power.
fn integer_root(n: i128, k: i128) -> Option<i128> {
    if k == 1 {
        return Some(n);
    }
    if n < 0 {
        if k % 2 == 0 {
            return None;
        }
        return integer_root(-n, k).map(|r| -r);
    }
    let k32 = u32::try_from(k).ok()?;
    let guess = (n as f64).powf(1.0 / k as f64).round() as i128;
    for cand in (guess - 2).max(0)..=guess + 2 {
        if cand.checked_pow(k32) == Some(n) {
            return Some(cand);
        }
    }
    None
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = RationalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(RationalParseError::Empty);
        }
        let parse_int = |p: &str| {
            p.trim()
                .parse::<i128>()
                .map_err(|_| RationalParseError::BadInteger(p.trim().to_string()))
        };
        match s.split_once('/') {
            Some((n, d)) => {
                let (n, d) = (parse_int(n)?, parse_int(d)?);
                if d == 0 {
                    return Err(RationalParseError::ZeroDenominator);
                }
                Ok(Rational::new(n, d))
            }
            None => Ok(Rational::int(parse_int(s)?)),
        }
    }
}

impl From<i128> for Rational {
    fn from(n: i128) -> Self {
        Rational::int(n)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::int(n as i128)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Rational::int(n as i128)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0.checked_add(&rhs.0).expect("rational overflow in add"))
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0.checked_sub(&rhs.0).expect("rational overflow in sub"))
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0.checked_mul(&rhs.0).expect("rational overflow in mul"))
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational(self.0.checked_div(&rhs.0).expect("rational overflow in div"))
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = *self + rhs;
    }
}

impl SubAssign for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        *self = *self - rhs;
    }
}

impl MulAssign for Rational {
    fn mul_assign(&mut self, rhs: Rational) {
        *self = *self * rhs;
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |a, b| a + b)
    }
}

impl Rational {
    pub fn min(self, other: Rational) -> Rational {
        if self.cmp(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Rational) -> Rational {
        if self.cmp(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn gcd_denominators(a: Rational, b: Rational) -> i128 {
        a.denom().lcm(&b.denom())
    }
}

/// Shorthand used throughout tests and constructors.
pub fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_and_sign() {
        let r = Rational::new(6, -4);
        assert_eq!(r.numer(), -3);
        assert_eq!(r.denom(), 2);
        assert_eq!(r.to_string(), "-3/2");
    }

    #[test]
    fn parse_forms() {
        assert_eq!("3/2".parse::<Rational>().unwrap(), q(3, 2));
        assert_eq!("-7".parse::<Rational>().unwrap(), q(-7, 1));
        assert_eq!(" -1 / 3 ".parse::<Rational>().unwrap(), q(-1, 3));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("a".parse::<Rational>().is_err());
    }

    #[test]
    fn rational_powers() {
        assert_eq!(q(4, 9).pow_rational(q(3, 2)), Some(q(8, 27)));
        assert_eq!(q(2, 1).pow_rational(q(1, 2)), None);
        assert_eq!(q(-8, 27).pow_rational(q(1, 3)), Some(q(-2, 3)));
        assert_eq!(q(-4, 1).pow_rational(q(1, 2)), None);
        assert_eq!(q(3, 1).pow_rational(q(-2, 1)), Some(q(1, 9)));
    }

    #[test]
    fn approximate_recovers_simple_fractions() {
        assert_eq!(Rational::approximate(0.5, 1000), Some(q(1, 2)));
        assert_eq!(Rational::approximate(2.0 / 3.0, 1000), Some(q(2, 3)));
        assert_eq!(Rational::approximate(-1.25, 1000), Some(q(-5, 4)));
    }
}
