//! Arithmetic modes for the correction series.
//!
//! Values are either exact rationals or extended-precision binary floats whose
//! precision is specified in decimal digits. The recursion code is written once
//! against [`Field`] and runs in either mode.

use std::cmp::Ordering;
use std::fmt;

use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default working precision in decimal digits.
pub const DEFAULT_DIGITS: u32 = 100;

/// Guard bits carried on top of the requested decimal precision.
const GUARD_BITS: u32 = 32;

/// Binary precision used for a requested number of decimal digits.
/// Nearest `f64` to `q` (`Rational::to_f64` truncates toward zero).
pub fn rational_to_f64(q: &Rational) -> f64 {
    Float::with_val(53, q).to_f64()
}

pub fn bits_for_digits(digits: u32) -> u32 {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32 + GUARD_BITS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ArithMode {
    Exact,
    Extended { digits: u32 },
}

impl ArithMode {
    pub fn is_exact(self) -> bool {
        matches!(self, ArithMode::Exact)
    }
}

/// Requested precision: decimal digits for float mode, and whether exact
/// rational arithmetic may be chosen when every input is rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision {
    pub digits: u32,
    pub allow_exact: bool,
}

impl Precision {
    pub fn extended(digits: u32) -> Self {
        Precision {
            digits,
            allow_exact: false,
        }
    }

    pub fn bits(&self) -> u32 {
        bits_for_digits(self.digits)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            digits: DEFAULT_DIGITS,
            allow_exact: true,
        }
    }
}

/// Minimal field interface shared by both arithmetic modes.
///
/// Constructors take `&self` so float values inherit the precision of an
/// existing operand.
pub trait Field: Clone + Send + Sync + fmt::Debug {
    fn lift(&self, q: &Rational) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn div(&self, rhs: &Self) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// Relative rounding unit of one operation (0 for exact arithmetic).
    fn unit_roundoff(&self) -> f64;
    fn into_scalar(self) -> Scalar;
    /// `|self|` as a 53-bit float (wide exponent range, for error bookkeeping).
    fn magnitude(&self) -> Float;

    fn lift_int(&self, v: i64) -> Self {
        self.lift(&Rational::from(v))
    }

    fn zero(&self) -> Self {
        self.lift_int(0)
    }

    fn neg(&self) -> Self {
        self.zero().sub(self)
    }
}

impl Field for Rational {
    fn lift(&self, q: &Rational) -> Self {
        q.clone()
    }
    fn add(&self, rhs: &Self) -> Self {
        Rational::from(self + rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Rational::from(self - rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Rational::from(self * rhs)
    }
    fn div(&self, rhs: &Self) -> Self {
        Rational::from(self / rhs)
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == Ordering::Equal
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn unit_roundoff(&self) -> f64 {
        0.0
    }
    fn into_scalar(self) -> Scalar {
        Scalar::Exact(self)
    }
    fn magnitude(&self) -> Float {
        Float::with_val(53, self).abs()
    }
}

impl Field for Float {
    fn lift(&self, q: &Rational) -> Self {
        Float::with_val(self.prec(), q)
    }
    fn add(&self, rhs: &Self) -> Self {
        Float::with_val(self.prec(), self + rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Float::with_val(self.prec(), self - rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Float::with_val(self.prec(), self * rhs)
    }
    fn div(&self, rhs: &Self) -> Self {
        Float::with_val(self.prec(), self / rhs)
    }
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        Float::to_f64(self)
    }
    fn unit_roundoff(&self) -> f64 {
        2f64.powi(-(self.prec() as i32))
    }
    fn into_scalar(self) -> Scalar {
        Scalar::Extended(self)
    }
    fn magnitude(&self) -> Float {
        Float::with_val(53, self).abs()
    }
}

/// A value in one of the two arithmetic modes.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Extended(Float),
}

impl Scalar {
    pub fn mode(&self) -> ArithMode {
        match self {
            Scalar::Exact(_) => ArithMode::Exact,
            Scalar::Extended(f) => ArithMode::Extended {
                digits: digits_for_bits(f.prec()),
            },
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => rational_to_f64(q),
            Scalar::Extended(f) => f.to_f64(),
        }
    }

    /// The value as a float of the given binary precision.
    pub fn to_float(&self, prec: u32) -> Float {
        match self {
            Scalar::Exact(q) => Float::with_val(prec, q),
            Scalar::Extended(f) => Float::with_val(prec, f),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Extended(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.cmp0() == Ordering::Equal,
            Scalar::Extended(f) => f.is_zero(),
        }
    }

    pub fn signum(&self) -> i32 {
        let ord = match self {
            Scalar::Exact(q) => q.cmp0(),
            Scalar::Extended(f) => f.cmp0().unwrap_or(Ordering::Equal),
        };
        match ord {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    /// Compares magnitudes without rounding.
    pub fn cmp_abs(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp_abs(b),
            _ => {
                let prec = self.working_prec().max(other.working_prec());
                let a = self.to_float(prec).abs();
                let b = other.to_float(prec).abs();
                a.partial_cmp(&b).unwrap_or(Ordering::Equal)
            }
        }
    }

    fn working_prec(&self) -> u32 {
        match self {
            Scalar::Exact(_) => bits_for_digits(DEFAULT_DIGITS),
            Scalar::Extended(f) => f.prec(),
        }
    }

    /// Serialized form: `"p/q"` (or an integer) for exact values, a decimal
    /// string carrying enough digits to round-trip for floats.
    pub fn to_json_string(&self) -> String {
        match self {
            Scalar::Exact(q) => q.to_string(),
            Scalar::Extended(f) => f.to_string_radix(10, None),
        }
    }

    /// Parses a value written by [`Scalar::to_json_string`]. `digits` selects
    /// float mode; `None` means the string is an exact rational.
    pub fn parse(s: &str, digits: Option<u32>) -> Result<Scalar> {
        match digits {
            None => parse_rational(s).map(Scalar::Exact),
            Some(d) => {
                let parsed = Float::parse(s).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
                Ok(Scalar::Extended(Float::with_val(
                    bits_for_digits(d),
                    parsed,
                )))
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => write!(f, "{q}"),
            Scalar::Extended(x) => write!(f, "{}", x.to_f64()),
        }
    }
}

/// Inverse of [`bits_for_digits`].
pub fn digits_for_bits(bits: u32) -> u32 {
    let raw = f64::from(bits.saturating_sub(GUARD_BITS)) / std::f64::consts::LOG2_10;
    raw.floor() as u32
}

/// Parses `p/q`, an integer, or a decimal literal (with optional exponent)
/// into an exact rational. `0.1` becomes exactly `1/10`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a number: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = t.split_once('/') {
        let n = parse_rational(num)?;
        let d = parse_rational(den)?;
        if d.cmp0() == Ordering::Equal {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(n / d);
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = t[pos + 1..].parse().map_err(|_| bad())?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let joined = format!("{int_part}{frac_part}");
    let mut value = Rational::from(joined.parse::<Integer>().map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from(10);
    if scale >= 0 {
        value *= Rational::from(Pow::pow(&ten, scale as u32));
    } else {
        value /= Rational::from(Pow::pow(&ten, (-scale) as u32));
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// by continued fractions.
pub fn best_rational(x: &Float, max_den: &Integer) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let prec = x.prec();
    let mut rem = x.clone();
    let (mut p0, mut q0) = (Integer::from(0), Integer::from(1));
    let (mut p1, mut q1) = (Integer::from(1), Integer::from(0));
    for _ in 0..200 {
        let (a, _) = rem.to_integer_round(Round::Down)?;
        let p2 = Integer::from(&a * &p1) + &p0;
        let q2 = Integer::from(&a * &q1) + &q0;
        if &q2 > max_den {
            break;
        }
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = Float::with_val(prec, &rem - &a);
        if frac.is_zero() || frac.clone().abs() < Float::with_val(prec, 1) >> (prec as i32 - 8) {
            break;
        }
        rem = Float::with_val(prec, 1) / frac;
    }
    if q1 == 0 {
        return None;
    }
    Some(Rational::from((p1, q1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_decimals() {
        assert_eq!(parse_rational("1/3").unwrap(), Rational::from((1, 3)));
        assert_eq!(parse_rational("8/15").unwrap(), Rational::from((8, 15)));
        assert_eq!(parse_rational("0.1").unwrap(), Rational::from((1, 10)));
        assert_eq!(parse_rational("-2.5e2").unwrap(), Rational::from(-250));
        assert_eq!(parse_rational("1e-3").unwrap(), Rational::from((1, 1000)));
        assert_eq!(parse_rational("100").unwrap(), Rational::from(100));
        assert_eq!(parse_rational(".5").unwrap(), Rational::from((1, 2)));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn digits_bits_roundtrip() {
        for d in [20, 50, 100, 140] {
            assert_eq!(digits_for_bits(bits_for_digits(d)), d);
        }
    }

    #[test]
    fn recognizes_rational_roots() {
        let x = Float::with_val(200, 2) / 3u32;
        let q = best_rational(&x, &Integer::from(1000)).unwrap();
        assert_eq!(q, Rational::from((2, 3)));
        let sqrt2 = Float::with_val(200, 2).sqrt();
        let q = best_rational(&sqrt2, &Integer::from(1000)).unwrap();
        assert!(q.denom() <= &Integer::from(1000));
        assert_ne!(Float::with_val(200, &q), sqrt2);
    }

    #[test]
    fn float_strings_roundtrip() {
        let x = Float::with_val(bits_for_digits(60), 1) / 7u32;
        let s = Scalar::Extended(x.clone()).to_json_string();
        let back = Scalar::parse(&s, Some(60)).unwrap();
        assert_eq!(back, Scalar::Extended(x));
    }

    #[test]
    fn cmp_abs_mixed_modes() {
        let a = Scalar::Exact(Rational::from((-3, 256)));
        let b = Scalar::Extended(Float::with_val(200, 0.01));
        assert_eq!(a.cmp_abs(&b), Ordering::Greater);
        assert_eq!(b.cmp_abs(&a), Ordering::Less);
    }
}
