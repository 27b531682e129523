//! Scalar backends.
//!
//! Every numeric routine in the crate is generic over [`Scalar`], implemented
//! for exact rationals ([`Rational`]) and for `f64`. Exact arithmetic turns
//! every "≈ 0" decision into an equality test; the float backend compares
//! against a caller-supplied tolerance instead.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::FormatError;

/// Arbitrary precision rational number used by the exact backend.
pub type Rational = num_rational::BigRational;

/// Backend selector used by the CLI and the file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Exact,
    Float,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Exact => "rational",
            Backend::Float => "float",
        }
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" | "rational" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            other => Err(format!("unknown backend `{other}` (expected exact|float)")),
        }
    }
}

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
    const BACKEND: Backend;

    fn from_rational(r: &Rational) -> Self;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(v)))
    }

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn to_f64(&self) -> f64;

    /// Lossless for floats, exact binary expansion for rationals.
    fn from_f64(v: f64) -> Self;

    /// Zero test: exact equality for rationals, `|x| <= tol` for floats.
    fn is_negligible(&self, tol: f64) -> bool;

    fn is_positive(&self, tol: f64) -> bool {
        !self.is_negligible(tol) && self.to_f64() > 0.0
    }

    fn abs(&self) -> Self;

    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self, FormatError>;
}

/// Parses `"p/q"`, `"p"` or a plain decimal such as `"-0.25"` into a rational.
pub fn parse_rational(s: &str) -> Result<Rational, FormatError> {
    let s = s.trim();
    let bad = || FormatError::BadScalar(s.to_string());
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Ok(p) = BigInt::from_str(s) {
        return Ok(Rational::from_integer(p));
    }
    // decimal literal without exponent
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').ok_or_else(bad)?;
    if frac.is_empty() && int.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let num = BigInt::from_str(&digits).map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = Rational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Canonical `"p/q"` rendering (denominator always written, even when 1).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Exact;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64(v: f64) -> Self {
        Rational::from_float(v).unwrap_or_else(Rational::zero)
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }

    fn from_json(v: &Value) -> Result<Self, FormatError> {
        match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(BigInt::from(
                n.as_i64().expect("checked"),
            ))),
            Value::Number(n) if n.is_u64() => Ok(Rational::from_integer(BigInt::from(
                n.as_u64().expect("checked"),
            ))),
            other => Err(FormatError::BadScalar(format!(
                "{other} (rational backend needs \"p/q\" strings)"
            ))),
        }
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn is_negligible(&self, tol: f64) -> bool {
        f64::abs(*self) <= tol
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }

    fn from_json(v: &Value) -> Result<Self, FormatError> {
        match v {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| FormatError::BadScalar(n.to_string())),
            Value::String(s) => parse_rational(s).map(|r| <f64 as Scalar>::from_rational(&r)),
            other => Err(FormatError::BadScalar(other.to_string())),
        }
    }
}
