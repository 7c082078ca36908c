//! Scalar fields for operator entries.
//!
//! Two fields are supported: [`Surd`](crate::surd::Surd), an exact field of
//! rational combinations of square roots, and `Complex64`. Every operator
//! constructor is generic over [`Field`], so the same code builds an exact
//! realization (identities verify to zero) or a floating one.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Which field an operator carries; serialized as `"rational"` / `"complex"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Rational,
    Complex,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::Rational => "rational",
            FieldKind::Complex => "complex",
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const KIND: FieldKind;

    fn from_rational(r: &BigRational) -> Self;

    /// Square root of a non-negative rational; `None` for a negative radicand.
    fn sqrt_of(r: &BigRational) -> Option<Self>;

    fn conj(&self) -> Self;

    fn magnitude(&self) -> f64;

    /// Multiplicative inverse, when the field can represent it.
    fn recip(&self) -> Option<Self>;

    fn to_complex(&self) -> Complex64;

    /// Embeds a complex value; `None` for exact fields, which cannot hold
    /// floating-point data.
    fn from_complex(z: Complex64) -> Option<Self>;

    fn to_json(&self) -> Value;

    fn from_json(value: &Value) -> Result<Self>;

    fn from_int(v: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    fn is_exact() -> bool {
        Self::KIND == FieldKind::Rational
    }
}

impl Field for Complex64 {
    const KIND: FieldKind = FieldKind::Complex;

    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(rational_to_f64(r), 0.0)
    }

    fn sqrt_of(r: &BigRational) -> Option<Self> {
        if r.is_negative() {
            None
        } else {
            Some(Complex64::new(rational_to_f64(r).sqrt(), 0.0))
        }
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.inv())
        }
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }

    fn from_complex(z: Complex64) -> Option<Self> {
        Some(z)
    }

    fn to_json(&self) -> Value {
        serde_json::json!([self.re, self.im])
    }

    fn from_json(value: &Value) -> Result<Self> {
        let pair = value
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::Parse(format!("complex entry must be [re, im], got {value}")))?;
        let part = |v: &Value| {
            v.as_f64()
                .ok_or_else(|| Error::Parse(format!("not a number: {v}")))
        };
        Ok(Complex64::new(part(&pair[0])?, part(&pair[1])?))
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p/q"` or an integer.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("expected an integer or p/q, got {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(BigRational::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(p))
        }
    }
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
