//! The Higgs algebra `[J₊, J₋] = C₁J₃ + C₃J₃³`, `[J₃, J±] = ±J±`: structure
//! constants, the Casimir invariant, the finite unitary representation in the
//! displaced label `n = j − m`, and admissible ranges of `n`.

use std::fmt;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{format_rational, int, parse_rational, ratio, rational_to_f64, Field};
use crate::fock::Operator;
use crate::realizations::Realization;

/// The structure constants `C₁`, `C₃`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraParams {
    pub c1: BigRational,
    pub c3: BigRational,
}

impl AlgebraParams {
    pub fn new(c1: BigRational, c3: BigRational) -> Self {
        AlgebraParams { c1, c3 }
    }

    pub fn from_ints(c1: i64, c3: i64) -> Self {
        Self::new(int(c1), int(c3))
    }

    /// `(C₁, C₃) = (2, 0)`.
    pub fn su2() -> Self {
        Self::from_ints(2, 0)
    }

    /// `(C₁, C₃) = (−2, 0)`.
    pub fn su11() -> Self {
        Self::from_ints(-2, 0)
    }

    pub fn parse(c1: &str, c3: &str) -> Result<Self> {
        Ok(Self::new(parse_rational(c1)?, parse_rational(c3)?))
    }

    pub fn c1_f64(&self) -> f64 {
        rational_to_f64(&self.c1)
    }

    pub fn c3_f64(&self) -> f64 {
        rational_to_f64(&self.c3)
    }
}

impl fmt::Display for AlgebraParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "C1={} C3={}",
            format_rational(&self.c1),
            format_rational(&self.c3)
        )
    }
}

/// A non-negative half-integer `j`, stored as `2j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin(u32);

impl Spin {
    pub fn from_twice(j2: u32) -> Self {
        Spin(j2)
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> BigRational {
        ratio(self.0 as i64, 2)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

fn nat(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `C₁ j(j+1) + ½ C₃ j²(j+1)²`.
pub fn casimir_eigenvalue(params: &AlgebraParams, spin: Spin) -> BigRational {
    let j = spin.value();
    let jj1 = &j * (&j + int(1));
    &params.c1 * &jj1 + &params.c3 * &jj1 * &jj1 / int(2)
}

/// `n(2j−n+1){2C₁ + C₃[2j² − (n−1)(2j−n)]}`, four times `⟨n−1|J₊|n⟩²`.
pub fn plus_radicand(params: &AlgebraParams, spin: Spin, n: usize) -> BigRational {
    let j = spin.value();
    let two_j = int(spin.twice() as i64);
    let n = nat(n);
    let brace = int(2) * &params.c1
        + &params.c3 * (int(2) * &j * &j - (&n - int(1)) * (&two_j - &n));
    &n * (&two_j - &n + int(1)) * brace
}

/// `(n+1)(2j−n){2C₁ + C₃[2j² − n(2j−n−1)]}`, four times `⟨n+1|J₋|n⟩²`.
pub fn minus_radicand(params: &AlgebraParams, spin: Spin, n: usize) -> BigRational {
    let j = spin.value();
    let two_j = int(spin.twice() as i64);
    let n = nat(n);
    let brace =
        int(2) * &params.c1 + &params.c3 * (int(2) * &j * &j - &n * (&two_j - &n - int(1)));
    (&n + int(1)) * (&two_j - &n) * brace
}

/// Matrix elements of the representation at label `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct RepElements {
    pub n: usize,
    /// `j − n`
    pub j3: BigRational,
    /// `⟨n−1|J₊|n⟩²`
    pub plus_squared: BigRational,
    /// `⟨n+1|J₋|n⟩²`
    pub minus_squared: BigRational,
}

impl RepElements {
    /// `⟨n−1|J₊|n⟩`, or `None` when the radicand is negative.
    pub fn plus(&self) -> Option<f64> {
        real_root(&self.plus_squared)
    }

    /// `⟨n+1|J₋|n⟩`, or `None` when the radicand is negative.
    pub fn minus(&self) -> Option<f64> {
        real_root(&self.minus_squared)
    }

    pub fn admissible(&self) -> bool {
        !self.plus_squared.is_negative() && !self.minus_squared.is_negative()
    }
}

fn real_root(r: &BigRational) -> Option<f64> {
    (!r.is_negative()).then(|| rational_to_f64(r).sqrt())
}

pub fn rep_elements(params: &AlgebraParams, spin: Spin, n: usize) -> RepElements {
    RepElements {
        n,
        j3: spin.value() - nat(n),
        plus_squared: plus_radicand(params, spin, n) / int(4),
        minus_squared: minus_radicand(params, spin, n) / int(4),
    }
}

/// Roots `Z± = j − ½ ± ½√(2 − (2j+1)² − 8C₁/C₃)` of the quadratic factor of
/// the lowering radicand.
#[derive(Clone, Debug, PartialEq)]
pub struct ZBoundaries {
    pub discriminant: BigRational,
    pub minus: f64,
    pub plus: f64,
}

impl ZBoundaries {
    pub fn discriminant(params: &AlgebraParams, spin: Spin) -> Result<BigRational> {
        if params.c3.is_zero() {
            return Err(Error::UndefinedBoundaries);
        }
        let two_j1 = int(spin.twice() as i64 + 1);
        Ok(int(2) - &two_j1 * &two_j1 - int(8) * &params.c1 / &params.c3)
    }
}

/// `Ok(None)` when the boundaries are complex.
pub fn z_boundaries(params: &AlgebraParams, spin: Spin) -> Result<Option<ZBoundaries>> {
    let discriminant = ZBoundaries::discriminant(params, spin)?;
    if discriminant.is_negative() {
        return Ok(None);
    }
    let centre = spin.to_f64() - 0.5;
    let half_width = 0.5 * rational_to_f64(&discriminant).sqrt();
    Ok(Some(ZBoundaries {
        discriminant,
        minus: centre - half_width,
        plus: centre + half_width,
    }))
}

/// Admissible labels `n ∈ 0..=2j`: both radicands non-negative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdmissibleChain {
    /// The maximal contiguous run starting at `n = 0` (possibly empty).
    pub chain: Vec<usize>,
    /// Every other maximal run.
    pub segments: Vec<Vec<usize>>,
}

pub fn admissible_chain(params: &AlgebraParams, spin: Spin) -> AdmissibleChain {
    let mut runs: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for n in 0..=spin.twice() as usize {
        if rep_elements(params, spin, n).admissible() {
            current.push(n);
        } else if !current.is_empty() {
            runs.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }
    let chain = match runs.first() {
        Some(first) if first[0] == 0 => runs.remove(0),
        _ => Vec::new(),
    };
    AdmissibleChain {
        chain,
        segments: runs,
    }
}

/// Sign scan of the lowering radicand over `n ∈ 0..=2j`; entry `n` is `true`
/// when the square root linking `|n⟩` and `|n+1⟩` is real.
pub fn radicand_sign_scan(params: &AlgebraParams, spin: Spin) -> Vec<bool> {
    (0..=spin.twice() as usize)
        .map(|n| !minus_radicand(params, spin, n).is_negative())
        .collect()
}

/// Admissibility of label `n` predicted from the `Z±` boundaries, or `None`
/// when `n` is a root of the radicand (where the boundary rule is ambiguous).
///
/// For `C₃ > 0` the admissible labels lie outside `(Z₋, Z₊)`, for `C₃ < 0`
/// inside it.
pub fn boundary_prediction(
    params: &AlgebraParams,
    spin: Spin,
    bounds: &ZBoundaries,
    n: usize,
) -> Option<bool> {
    if minus_radicand(params, spin, n).is_zero() {
        return None;
    }
    let x = n as f64;
    let outside = x > bounds.plus || x < bounds.minus;
    Some(if params.c3.is_positive() { outside } else { !outside })
}

/// The Casimir operator in the form
/// `2J₋J₊ + C₁J₃ + (C₁ + ½C₃)J₃² + C₃J₃³ + ½C₃J₃⁴`.
pub fn casimir<T: Field>(r: &Realization<T>) -> Result<Operator<T>> {
    r.jp.check_same_space(&r.jm)?;
    r.jp.check_same_space(&r.j3)?;
    let (c1, c3) = field_params::<T>(&r.params);
    let half = T::from_rational(&ratio(1, 2));
    let j3_2 = r.j3.try_matmul(&r.j3)?;
    let j3_3 = j3_2.try_matmul(&r.j3)?;
    let j3_4 = j3_3.try_matmul(&r.j3)?;
    let mut out = r.jm.try_matmul(&r.jp)?.scaled(&T::from_int(2));
    out = &out + &r.j3.scaled(&c1);
    out = &out + &j3_2.scaled(&(c1 + c3.clone() * half.clone()));
    out = &out + &j3_3.scaled(&c3);
    out = &out + &j3_4.scaled(&(c3 * half));
    Ok(out)
}

/// The symmetric form `J₊J₋ + J₋J₊ + (C₁ + ½C₃)J₃² + ½C₃J₃⁴`.
pub fn casimir_symmetric<T: Field>(r: &Realization<T>) -> Result<Operator<T>> {
    r.jp.check_same_space(&r.jm)?;
    r.jp.check_same_space(&r.j3)?;
    let (c1, c3) = field_params::<T>(&r.params);
    let half = T::from_rational(&ratio(1, 2));
    let j3_2 = r.j3.try_matmul(&r.j3)?;
    let j3_4 = j3_2.try_matmul(&j3_2)?;
    let mut out = &r.jp.try_matmul(&r.jm)? + &r.jm.try_matmul(&r.jp)?;
    out = &out + &j3_2.scaled(&(c1 + c3.clone() * half.clone()));
    out = &out + &j3_4.scaled(&(c3 * half));
    Ok(out)
}

pub(crate) fn field_params<T: Field>(params: &AlgebraParams) -> (T, T) {
    (T::from_rational(&params.c1), T::from_rational(&params.c3))
}

/// Max-norm residuals of the three defining relations on a realization's
/// check block.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosureResiduals {
    /// `‖[J₊,J₋] − C₁J₃ − C₃J₃³‖`
    pub raise_lower: f64,
    /// `‖[J₃,J₊] − J₊‖`
    pub j3_raise: f64,
    /// `‖[J₃,J₋] + J₋‖`
    pub j3_lower: f64,
    pub block_size: usize,
}

pub fn commutator_residual<T: Field>(r: &Realization<T>) -> Result<ClosureResiduals> {
    let block = r.block()?;
    let (c1, c3) = field_params::<T>(&r.params);
    let j3_3 = r.j3.pow(3);
    let rl = &(&r.jp.commutator(&r.jm)? - &r.j3.scaled(&c1)) - &j3_3.scaled(&c3);
    let raise = &r.j3.commutator(&r.jp)? - &r.jp;
    let lower = &r.j3.commutator(&r.jm)? + &r.jm;
    Ok(ClosureResiduals {
        raise_lower: block.max_abs(&rl),
        j3_raise: block.max_abs(&raise),
        j3_lower: block.max_abs(&lower),
        block_size: block.size(),
    })
}

/// One row of a [`RepresentationTable`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub n: usize,
    pub j3: f64,
    pub plus: Option<f64>,
    pub minus: Option<f64>,
    pub admissible: bool,
}

/// Matrix elements of the representation for every `n ∈ 0..=2j`.
#[derive(Clone, Debug, PartialEq)]
pub struct RepresentationTable {
    pub spin: Spin,
    pub params: AlgebraParams,
    pub chain: AdmissibleChain,
    pub elements: Vec<RepElements>,
}

impl RepresentationTable {
    pub fn new(params: &AlgebraParams, spin: Spin) -> Self {
        RepresentationTable {
            spin,
            params: params.clone(),
            chain: admissible_chain(params, spin),
            elements: (0..=spin.twice() as usize)
                .map(|n| rep_elements(params, spin, n))
                .collect(),
        }
    }

    pub fn rows(&self) -> Vec<TableRow> {
        self.elements
            .iter()
            .map(|e| TableRow {
                n: e.n,
                j3: rational_to_f64(&e.j3),
                plus: e.plus(),
                minus: e.minus(),
                admissible: e.admissible(),
            })
            .collect()
    }

    /// CSV with `#` comment lines carrying C1, C3 and j, then
    /// `n,j3,plus,minus,admissible`. Inadmissible elements are written `nan`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# C1={}", format_rational(&self.params.c1))?;
        writeln!(out, "# C3={}", format_rational(&self.params.c3))?;
        writeln!(out, "# j={}", self.spin)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "j3", "plus", "minus", "admissible"])?;
        let show = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |x| format!("{x}"));
        for row in self.rows() {
            w.write_record([
                row.n.to_string(),
                format!("{}", row.j3),
                show(row.plus),
                show(row.minus),
                u8::from(row.admissible).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
