//! Exact arithmetic in the field generated by the rationals and square roots
//! of integers.
//!
//! A [`Surd`] is a finite sum `Σ cᵢ √sᵢ` with rational `cᵢ` and distinct
//! square-free `sᵢ ≥ 1`. Square roots of distinct square-free integers are
//! linearly independent over ℚ, so this representation is canonical and
//! equality is structural. Products stay in the form because
//! `√a √b = g √(ab/g²)` with `g = gcd(a, b)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::{format_rational, parse_rational, rational_to_f64, Field, FieldKind};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Surd {
    // square-free radicand -> non-zero coefficient
    terms: BTreeMap<u128, BigRational>,
}

impl Surd {
    pub fn rational(r: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(1, r);
        }
        Surd { terms }
    }

    /// `coeff · √radicand` for any positive integer radicand.
    pub fn term(coeff: BigRational, radicand: u128) -> Self {
        assert!(radicand > 0, "radicand must be positive");
        let (root, free) = squarefree_split(radicand);
        let mut terms = BTreeMap::new();
        let c = coeff * BigRational::from_integer(BigInt::from(root));
        if !c.is_zero() {
            terms.insert(free, c);
        }
        Surd { terms }
    }

    /// The rational value, if there are no irrational terms.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u128, &BigRational)> {
        self.terms.iter().map(|(s, c)| (*s, c))
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(s, c)| rational_to_f64(c) * (*s as f64).sqrt())
            .sum()
    }

    fn accumulate(terms: &mut BTreeMap<u128, BigRational>, radicand: u128, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let slot = terms.entry(radicand).or_insert_with(BigRational::zero);
        *slot += coeff;
        if slot.is_zero() {
            terms.remove(&radicand);
        }
    }
}

/// Splits `m = root² · free` with `free` square-free.
pub(crate) fn squarefree_split(m: u128) -> (u128, u128) {
    let mut rest = m;
    let mut root: u128 = 1;
    let mut free: u128 = 1;
    let mut d: u128 = 2;
    // once d³ > rest, rest is 1, p, p² or pq with primes p, q > d
    while d.checked_pow(3).is_some_and(|c| c <= rest) {
        let mut e = 0u32;
        while rest.is_multiple_of(d) {
            rest /= d;
            e += 1;
        }
        root *= d.pow(e / 2);
        if e % 2 == 1 {
            free *= d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        let r = rest.isqrt();
        if r * r == rest {
            root *= r;
        } else {
            free *= rest;
        }
    }
    (root, free)
}

fn to_u128(b: &BigInt) -> u128 {
    b.to_u128()
        .expect("surd radicand does not fit in 128 bits")
}

impl Zero for Surd {
    fn zero() -> Self {
        Surd::default()
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Surd {
    fn one() -> Self {
        Surd::rational(BigRational::one())
    }
}

impl Add for Surd {
    type Output = Surd;

    fn add(mut self, rhs: Surd) -> Surd {
        for (s, c) in rhs.terms {
            Surd::accumulate(&mut self.terms, s, c);
        }
        self
    }
}

impl Neg for Surd {
    type Output = Surd;

    fn neg(mut self) -> Surd {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Sub for Surd {
    type Output = Surd;

    fn sub(self, rhs: Surd) -> Surd {
        self + (-rhs)
    }
}

impl Mul for Surd {
    type Output = Surd;

    fn mul(self, rhs: Surd) -> Surd {
        let mut terms = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let g = a.gcd(b);
                let radicand = (a / g)
                    .checked_mul(b / g)
                    .expect("surd radicand overflow");
                let coeff = ca * cb * BigRational::from_integer(BigInt::from(g));
                Surd::accumulate(&mut terms, radicand, coeff);
            }
        }
        Surd { terms }
    }
}

impl Field for Surd {
    const KIND: FieldKind = FieldKind::Rational;

    fn from_rational(r: &BigRational) -> Self {
        Surd::rational(r.clone())
    }

    fn sqrt_of(r: &BigRational) -> Option<Self> {
        if r.is_negative() {
            return None;
        }
        if r.is_zero() {
            return Some(Surd::zero());
        }
        // √(p/q) = (tp / (tq·sq)) · √(sp·sq), and gcd(sp, sq) = 1
        let (tp, sp) = squarefree_split(to_u128(r.numer()));
        let (tq, sq) = squarefree_split(to_u128(r.denom()));
        let coeff = BigRational::new(BigInt::from(tp), BigInt::from(tq) * BigInt::from(sq));
        let mut terms = BTreeMap::new();
        terms.insert(sp * sq, coeff);
        Some(Surd { terms })
    }

    fn conj(&self) -> Self {
        self.clone()
    }

    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.to_f64().abs()
        }
    }

    fn recip(&self) -> Option<Self> {
        // only single-term elements are inverted: (c√s)⁻¹ = √s / (c s)
        if self.terms.len() != 1 {
            return None;
        }
        let (s, c) = self.terms.iter().next()?;
        let mut terms = BTreeMap::new();
        terms.insert(*s, (c * BigRational::from_integer(BigInt::from(*s))).recip());
        Some(Surd { terms })
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(self.to_f64(), 0.0)
    }

    fn from_complex(_: Complex64) -> Option<Self> {
        None
    }

    fn to_json(&self) -> Value {
        serde_json::json!([self.to_string()])
    }

    fn from_json(value: &Value) -> Result<Self> {
        let text = value
            .as_array()
            .filter(|a| a.len() == 1)
            .and_then(|a| a[0].as_str())
            .ok_or_else(|| Error::Parse(format!("rational entry must be [\"p/q\"], got {value}")))?;
        text.parse()
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (s, c)) in self.terms.iter().enumerate() {
            let shown = if i == 0 {
                c.clone()
            } else if c.is_negative() {
                f.write_str(" - ")?;
                -c.clone()
            } else {
                f.write_str(" + ")?;
                c.clone()
            };
            if *s == 1 {
                write!(f, "{}", format_rational(&shown))?;
            } else {
                write!(f, "{}*sqrt({s})", format_rational(&shown))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Surd {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.trim().replace(" - ", " + -");
        let mut out = Surd::zero();
        for piece in normalized.split(" + ") {
            let piece = piece.trim();
            let term = match piece.split_once("*sqrt(") {
                Some((c, rest)) => {
                    let radicand = rest
                        .strip_suffix(')')
                        .and_then(|r| r.parse::<u128>().ok())
                        .filter(|r| *r > 0)
                        .ok_or_else(|| Error::Parse(format!("bad radical in {piece:?}")))?;
                    Surd::term(parse_rational(c)?, radicand)
                }
                None => Surd::rational(parse_rational(piece)?),
            };
            out = out + term;
        }
        Ok(out)
    }
}
