//! Truncated Fock-space matrix calculus.
//!
//! The space keeps the number states `|0⟩ … |N−1⟩`. Truncation breaks operator
//! identities only near the top of the space: an identity whose terms shift
//! `n` by at most `s` holds exactly on the leading block of size `N − s`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use num_traits::Zero;
#[cfg(test)]
use num_traits::One;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::{int, Field, FieldKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FockSpace {
    dim: usize,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(FockSpace { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// A dense square matrix over a truncated Fock space, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<T> {
    dim: usize,
    entries: Vec<T>,
}

impl<T: Field> Operator<T> {
    pub fn zeros(space: FockSpace) -> Self {
        Operator {
            dim: space.dim,
            entries: vec![T::zero(); space.dim * space.dim],
        }
    }

    pub fn identity(space: FockSpace) -> Self {
        Self::from_diagonal(space, vec![T::one(); space.dim])
    }

    pub fn from_diagonal(space: FockSpace, diagonal: Vec<T>) -> Self {
        assert_eq!(diagonal.len(), space.dim, "diagonal length must equal dim");
        let mut op = Self::zeros(space);
        for (n, v) in diagonal.into_iter().enumerate() {
            op.set(n, n, v);
        }
        op
    }

    pub fn from_fn(space: FockSpace, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let dim = space.dim;
        let entries = (0..dim * dim).map(|i| f(i / dim, i % dim)).collect();
        Operator { dim, entries }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let space = FockSpace::new(rows.len())?;
        if let Some(bad) = rows.iter().find(|r| r.len() != space.dim) {
            return Err(Error::DimensionMismatch {
                left: space.dim,
                right: bad.len(),
            });
        }
        Ok(Operator {
            dim: space.dim,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn space(&self) -> FockSpace {
        FockSpace { dim: self.dim }
    }

    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|n| self.get(n, n).clone()).collect()
    }

    /// Hermitian adjoint with respect to the orthonormal Fock basis.
    pub fn adjoint(&self) -> Self {
        Operator::from_fn(self.space(), |r, c| self.get(c, r).conj())
    }

    pub fn scaled(&self, factor: &T) -> Self {
        self.map(|v| factor.clone() * v.clone())
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> Operator<U> {
        Operator {
            dim: self.dim,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn to_complex(&self) -> Operator<Complex64> {
        self.map(T::to_complex)
    }

    pub fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        }
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        let dim = self.dim;
        let mut out = Self::zeros(self.space());
        for i in 0..dim {
            for k in 0..dim {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..dim {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * dim + j;
                    let acc = std::mem::replace(&mut out.entries[idx], T::zero());
                    out.entries[idx] = acc + a.clone() * b.clone();
                }
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(&self.try_matmul(other)? - &other.try_matmul(self)?)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.space());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(T::magnitude).fold(0.0, f64::max)
    }

    /// Max magnitude over entries whose row and column both lie in `indices`.
    pub fn max_abs_on(&self, indices: &[usize]) -> f64 {
        let mut m = 0.0f64;
        for &r in indices {
            for &c in indices {
                m = m.max(self.get(r, c).magnitude());
            }
        }
        m
    }

    /// Leading principal block `0..size`.
    pub fn max_abs_leading(&self, size: usize) -> f64 {
        let idx: Vec<usize> = (0..size.min(self.dim)).collect();
        self.max_abs_on(&idx)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        (self - &self.adjoint()).max_abs()
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "dim": self.dim,
            "field": T::KIND.as_str(),
            "entries": self.entries.iter().map(T::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let dim = value
            .get("dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("operator needs an integer \"dim\"".into()))?
            as usize;
        let field = value.get("field").and_then(Value::as_str).unwrap_or("");
        if field != T::KIND.as_str() {
            return Err(Error::Parse(format!(
                "operator field is {field:?}, expected {:?}",
                T::KIND.as_str()
            )));
        }
        let raw = value
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("operator needs an \"entries\" array".into()))?;
        let space = FockSpace::new(dim)?;
        if raw.len() != dim * dim {
            return Err(Error::Parse(format!(
                "expected {} entries, got {}",
                dim * dim,
                raw.len()
            )));
        }
        let entries = raw.iter().map(T::from_json).collect::<Result<Vec<_>>>()?;
        Ok(Operator {
            dim: space.dim,
            entries,
        })
    }
}

impl<T: Field> Serialize for Operator<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de, T: Field> Deserialize<'de> for Operator<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        Operator::from_json(&value).map_err(D::Error::custom)
    }
}

impl<T: Field> Add for &Operator<T> {
    type Output = Operator<T>;

    fn add(self, rhs: &Operator<T>) -> Operator<T> {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<T: Field> Sub for &Operator<T> {
    type Output = Operator<T>;

    fn sub(self, rhs: &Operator<T>) -> Operator<T> {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<T: Field> Mul for &Operator<T> {
    type Output = Operator<T>;

    fn mul(self, rhs: &Operator<T>) -> Operator<T> {
        self.try_matmul(rhs).expect("operator dimension mismatch")
    }
}

impl<T: Field> Neg for &Operator<T> {
    type Output = Operator<T>;

    fn neg(self) -> Operator<T> {
        self.map(|v| -v.clone())
    }
}

/// `a|n⟩ = √n |n−1⟩`.
pub fn annihilation<T: Field>(space: FockSpace) -> Operator<T> {
    let mut op = Operator::zeros(space);
    for n in 1..space.dim {
        op.set(n - 1, n, T::sqrt_of(&int(n as i64)).expect("non-negative"));
    }
    op
}

/// `a⁺|n⟩ = √(n+1) |n+1⟩`.
pub fn creation<T: Field>(space: FockSpace) -> Operator<T> {
    let mut op = Operator::zeros(space);
    for n in 0..space.dim - 1 {
        op.set(n + 1, n, T::sqrt_of(&int(n as i64 + 1)).expect("non-negative"));
    }
    op
}

pub fn number<T: Field>(space: FockSpace) -> Operator<T> {
    Operator::from_diagonal(space, (0..space.dim).map(|n| T::from_int(n as i64)).collect())
}

/// `diag(f(0), …, f(N−1))`. Entries where `f` returns `None` are stored as
/// zero and flagged `false` in the returned mask.
pub fn diagonal_function<T: Field>(
    space: FockSpace,
    f: impl Fn(usize) -> Option<T>,
) -> (Operator<T>, Vec<bool>) {
    let values: Vec<Option<T>> = (0..space.dim).map(f).collect();
    let mask = values.iter().map(Option::is_some).collect();
    let diagonal = values.into_iter().map(|v| v.unwrap_or_else(T::zero)).collect();
    (Operator::from_diagonal(space, diagonal), mask)
}

/// Rising factorial `(q)_n = q (q+1) ⋯ (q+n−1)`, `(q)_0 = 1`.
pub fn pochhammer<T: Field>(q: &T, n: usize) -> T {
    (0..n).fold(T::one(), |acc, i| acc * (q.clone() + T::from_int(i as i64)))
}

/// The diagonal operator `(q)_n̂`.
pub fn pochhammer_operator<T: Field>(space: FockSpace, q: &T) -> Operator<T> {
    let mut diagonal = Vec::with_capacity(space.dim);
    let mut acc = T::one();
    for n in 0..space.dim {
        diagonal.push(acc.clone());
        acc = acc * (q.clone() + T::from_int(n as i64));
    }
    Operator::from_diagonal(space, diagonal)
}

/// `X = (a + a⁺)/√2`.
pub fn position(space: FockSpace) -> Operator<Complex64> {
    let a = annihilation::<Complex64>(space);
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    (&a + &a.adjoint()).scaled(&s)
}

/// `P = −i (a − a⁺)/√2`.
pub fn momentum(space: FockSpace) -> Operator<Complex64> {
    let a = annihilation::<Complex64>(space);
    let s = Complex64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2);
    (&a - &a.adjoint()).scaled(&s)
}

/// Eigendecomposition of a Hermitian matrix: `H = V diag(λ) V†`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: Operator<Complex64>,
}

impl HermitianEigen {
    /// `V diag(f(λ)) V†`.
    pub fn apply(&self, f: impl Fn(f64) -> Complex64) -> Operator<Complex64> {
        let dim = self.vectors.dim();
        let weights: Vec<Complex64> = self.values.iter().map(|&l| f(l)).collect();
        Operator::from_fn(self.vectors.space(), |r, c| {
            (0..dim)
                .map(|k| self.vectors.get(r, k) * weights[k] * self.vectors.get(c, k).conj())
                .sum()
        })
    }

    /// Orthonormal columns whose eigenvalue satisfies `keep`.
    pub fn select(&self, keep: impl Fn(f64) -> bool) -> Vec<Vec<Complex64>> {
        let dim = self.vectors.dim();
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &l)| keep(l))
            .map(|(k, _)| (0..dim).map(|r| *self.vectors.get(r, k)).collect())
            .collect()
    }
}

fn hermitian_tolerance(h: &Operator<Complex64>) -> f64 {
    1e-12 * h.max_abs().max(1.0)
}

pub fn hermitian_eigen(h: &Operator<Complex64>) -> Result<HermitianEigen> {
    let deviation = h.hermitian_deviation();
    if deviation > hermitian_tolerance(h) {
        return Err(Error::NonHermitian { deviation });
    }
    let dim = h.dim();
    let m = DMatrix::from_fn(dim, dim, |r, c| *h.get(r, c));
    let eig = SymmetricEigen::new(m);
    let vectors = Operator::from_fn(h.space(), |r, c| eig.eigenvectors[(r, c)]);
    Ok(HermitianEigen {
        values: eig.eigenvalues.iter().copied().collect(),
        vectors,
    })
}

/// `exp(iθH)` for Hermitian `H`, via eigendecomposition.
pub fn unitary_exp(h: &Operator<Complex64>, theta: f64) -> Result<Operator<Complex64>> {
    let eig = hermitian_eigen(h)?;
    Ok(eig.apply(|l| Complex64::from_polar(1.0, theta * l)))
}

/// Principal square root of a positive-semidefinite Hermitian matrix.
/// Eigenvalues in `[−1e−8‖R‖, 0)` are clamped to zero; anything more negative
/// is an error.
pub fn sqrt_psd(r: &Operator<Complex64>) -> Result<Operator<Complex64>> {
    let eig = hermitian_eigen(r)?;
    let floor = -1e-8 * r.max_abs();
    if let Some(&worst) = eig.values.iter().find(|&&l| l < floor) {
        return Err(Error::NotPositiveSemidefinite { eigenvalue: worst });
    }
    Ok(eig.apply(|l| Complex64::new(l.max(0.0).sqrt(), 0.0)))
}

/// Square root of the positive part `max(R, 0)` of a Hermitian matrix, with
/// the number of strictly positive eigenvalues.
pub fn sqrt_positive_part(r: &Operator<Complex64>) -> Result<(Operator<Complex64>, usize)> {
    let eig = hermitian_eigen(r)?;
    let positive = eig.values.iter().filter(|&&l| l > 0.0).count();
    Ok((eig.apply(|l| Complex64::new(l.max(0.0).sqrt(), 0.0)), positive))
}

impl Operator<Complex64> {
    /// `max |V† M V|` over an orthonormal set of column vectors.
    pub fn max_abs_projected(&self, basis: &[Vec<Complex64>]) -> f64 {
        let dim = self.dim;
        let images: Vec<Vec<Complex64>> = basis
            .iter()
            .map(|v| {
                (0..dim)
                    .map(|r| (0..dim).map(|c| self.get(r, c) * v[c]).sum())
                    .collect()
            })
            .collect();
        let mut m = 0.0f64;
        for u in basis {
            for w in &images {
                let z: Complex64 = u.iter().zip(w).map(|(a, b)| a.conj() * b).sum();
                m = m.max(z.norm());
            }
        }
        m
    }
}

impl<T: Field> Operator<T> {
    pub fn kind(&self) -> FieldKind {
        T::KIND
    }

    pub fn column(&self, col: usize) -> Vec<T> {
        (0..self.dim).map(|r| self.get(r, col).clone()).collect()
    }
}
