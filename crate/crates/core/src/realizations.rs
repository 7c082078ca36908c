//! Single-mode boson realizations of the Higgs algebra.
//!
//! Shift-type realizations have the form `J₊ = f₁(n̂) aᵏ`, `J₋ = (a⁺)ᵏ f₂(n̂)`,
//! `J₃ = j − n̂`, with the product `F = f₁ f₂` fixed by the difference
//! equation
//!
//! ```text
//! ∏ᵢ(n+i) F(n) − ∏ᵢ(n−i+1) F(n−k) = C₁(j−n) + C₃(j−n)³,   i = 1..k.
//! ```
//!
//! Unitary (Holstein-Primakoff-like) kinds split `F` symmetrically under a
//! square root; Dyson-like kinds take `f₂ = 1` and need no root. The
//! Villain-like kinds act through the phase operator `e^{iX}` and a function
//! of the momentum `P`.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::algebra::{casimir_eigenvalue, casimir_symmetric, AlgebraParams, Spin};
use crate::error::{Error, Result};
use crate::field::{format_rational, int, parse_rational, ratio, rational_to_f64, Field};
use crate::fock::{
    hermitian_eigen, momentum, position, sqrt_positive_part, unitary_exp, FockSpace, Operator,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RealizationKind {
    HP,
    Dyson,
    VillainForm1,
    VillainForm2,
    GenericUnitary,
    GenericDyson,
}

impl RealizationKind {
    pub const ALL: [RealizationKind; 6] = [
        RealizationKind::HP,
        RealizationKind::Dyson,
        RealizationKind::VillainForm1,
        RealizationKind::VillainForm2,
        RealizationKind::GenericUnitary,
        RealizationKind::GenericDyson,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RealizationKind::HP => "HP",
            RealizationKind::Dyson => "Dyson",
            RealizationKind::VillainForm1 => "VillainForm1",
            RealizationKind::VillainForm2 => "VillainForm2",
            RealizationKind::GenericUnitary => "GenericUnitary",
            RealizationKind::GenericDyson => "GenericDyson",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown realization kind {s:?}")))
    }

    /// `J₋ = J₊†` by construction.
    pub fn is_unitary(self) -> bool {
        !matches!(self, RealizationKind::Dyson | RealizationKind::GenericDyson)
    }

    pub fn is_villain(self) -> bool {
        matches!(self, RealizationKind::VillainForm1 | RealizationKind::VillainForm2)
    }
}

impl fmt::Display for RealizationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether the square root in a unitary realization is taken, or `f₂ = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Unitary,
    Dyson,
}

/// The subspace on which identities of a realization are checked.
#[derive(Clone, Debug, PartialEq)]
pub enum CheckBlock {
    /// Number states `|n⟩`; the principal submatrix on these labels.
    Indices(Vec<usize>),
    /// An orthonormal set of vectors; the compression `V† M V`.
    Window(Vec<Vec<Complex64>>),
}

impl CheckBlock {
    pub fn size(&self) -> usize {
        match self {
            CheckBlock::Indices(i) => i.len(),
            CheckBlock::Window(v) => v.len(),
        }
    }

    pub fn max_abs<T: Field>(&self, m: &Operator<T>) -> f64 {
        match self {
            CheckBlock::Indices(i) => m.max_abs_on(i),
            CheckBlock::Window(v) => m.to_complex().max_abs_projected(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Realization<T> {
    pub kind: RealizationKind,
    /// Mode shift `k` of the ladder part.
    pub step: usize,
    pub spin: Spin,
    pub params: AlgebraParams,
    pub jp: Operator<T>,
    pub jm: Operator<T>,
    pub j3: Operator<T>,
    /// `admissible[n]` is false where a square root had a negative radicand
    /// and the element was set to zero.
    pub admissible: Vec<bool>,
    /// The constant `g` of a Villain-like realization.
    pub villain_g: Option<f64>,
}

impl<T: Field> Realization<T> {
    pub fn dim(&self) -> usize {
        self.jp.dim()
    }

    pub fn space(&self) -> FockSpace {
        self.jp.space()
    }

    /// Labels `n < N − 2k` whose own and lower neighbour's elements are
    /// admissible; truncation does not reach these rows.
    pub fn check_indices(&self) -> Vec<usize> {
        let k = self.step;
        let limit = self.dim().saturating_sub(2 * k);
        (0..limit)
            .filter(|&n| self.admissible[n] && (n < k || self.admissible[n - k]))
            .collect()
    }

    /// Indices for shift realizations; for Villain kinds, the momentum
    /// eigenvectors `|p⟩` with both `R(p) ≥ 0` and `R(p−1) ≥ 0`.
    pub fn block(&self) -> Result<CheckBlock> {
        match self.kind {
            RealizationKind::VillainForm1 | RealizationKind::VillainForm2 => {
                let g = self.villain_g.unwrap_or(f64::NAN);
                let form = if self.kind == RealizationKind::VillainForm1 { 1 } else { 2 };
                let r = villain_radicand(form, &self.params, g);
                let eig = hermitian_eigen(&self.j3.to_complex())?;
                Ok(CheckBlock::Window(eig.select(|p| r(p) >= 0.0 && r(p - 1.0) >= 0.0)))
            }
            _ => Ok(CheckBlock::Indices(self.check_indices())),
        }
    }

    /// Deterministic text summary: kind, parameters and closure residuals.
    pub fn summary(&self) -> Result<String> {
        let res = crate::algebra::commutator_residual(self)?;
        let admitted = self.admissible.iter().filter(|&&a| a).count();
        let mut out = format!(
            "kind={} k={} j={} C1={} C3={} dim={} field={}\n",
            self.kind,
            self.step,
            self.spin,
            format_rational(&self.params.c1),
            format_rational(&self.params.c3),
            self.dim(),
            T::KIND
        );
        if let Some(g) = self.villain_g {
            out.push_str(&format!("g={g:.12}\n"));
        }
        out.push_str(&format!(
            "admissible={admitted}/{}\nblock={}\nraise-lower={:.6e}\nj3-raise={:.6e}\nj3-lower={:.6e}\n",
            self.dim(),
            res.block_size,
            res.raise_lower,
            res.j3_raise,
            res.j3_lower
        ));
        Ok(out)
    }

    pub fn to_complex(&self) -> Realization<Complex64> {
        Realization {
            kind: self.kind,
            step: self.step,
            spin: self.spin,
            params: self.params.clone(),
            jp: self.jp.to_complex(),
            jm: self.jm.to_complex(),
            j3: self.j3.to_complex(),
            admissible: self.admissible.clone(),
            villain_g: self.villain_g,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "kind": self.kind.as_str(),
            "k": self.step,
            "j2": self.spin.twice(),
            "c1": format_rational(&self.params.c1),
            "c3": format_rational(&self.params.c3),
            "dim": self.dim(),
            "jp": self.jp.to_json(),
            "jm": self.jm.to_json(),
            "j3": self.j3.to_json(),
            "mask": self.admissible,
        });
        if let Some(g) = self.villain_g {
            v["g"] = json!(g);
        }
        v
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let field = |name: &str| {
            value
                .get(name)
                .ok_or_else(|| Error::Parse(format!("realization is missing {name:?}")))
        };
        let text = |name: &str| -> Result<String> {
            field(name)?
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::Parse(format!("{name:?} must be a string")))
        };
        let uint = |name: &str| -> Result<u64> {
            field(name)?
                .as_u64()
                .ok_or_else(|| Error::Parse(format!("{name:?} must be a non-negative integer")))
        };
        let kind = RealizationKind::parse(&text("kind")?)?;
        let jp = Operator::from_json(field("jp")?)?;
        let jm = Operator::from_json(field("jm")?)?;
        let j3 = Operator::from_json(field("j3")?)?;
        jp.check_same_space(&jm)?;
        jp.check_same_space(&j3)?;
        let dim = uint("dim")? as usize;
        if dim != jp.dim() {
            return Err(Error::DimensionMismatch { left: dim, right: jp.dim() });
        }
        let admissible: Vec<bool> = field("mask")?
            .as_array()
            .and_then(|a| a.iter().map(Value::as_bool).collect())
            .ok_or_else(|| Error::Parse("\"mask\" must be a list of booleans".into()))?;
        if admissible.len() != dim {
            return Err(Error::DimensionMismatch { left: admissible.len(), right: dim });
        }
        Ok(Realization {
            kind,
            step: uint("k")? as usize,
            spin: Spin::from_twice(uint("j2")? as u32),
            params: AlgebraParams::new(parse_rational(&text("c1")?)?, parse_rational(&text("c3")?)?),
            jp,
            jm,
            j3,
            admissible,
            villain_g: value.get("g").and_then(Value::as_f64),
        })
    }
}

/// The coefficient of `F(n)` in the difference equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LadderCoefficient {
    /// `(n+1) ∏_{i=2}^{k} (n + 2^{i−2} + 1)`.
    Printed,
    /// `∏_{i=1}^{k} (n+i)`, the diagonal of `aᵏ(a⁺)ᵏ`.
    Derived,
}

impl LadderCoefficient {
    /// The printed product equals the derived one exactly when `k ≤ 3`.
    pub fn printed_is_exact(k: usize) -> bool {
        k <= 3
    }

    /// The printed form where it is exact, otherwise the derived one.
    pub fn for_step(k: usize) -> Self {
        if Self::printed_is_exact(k) {
            LadderCoefficient::Printed
        } else {
            LadderCoefficient::Derived
        }
    }

    pub fn eval(self, k: usize, n: usize) -> BigRational {
        let n = BigInt::from(n);
        let product: BigInt = match self {
            LadderCoefficient::Printed => {
                (2..=k).fold(&n + 1, |acc, i| acc * (&n + (BigInt::one() << (i - 2)) + 1))
            }
            LadderCoefficient::Derived => (1..=k).fold(BigInt::one(), |acc, i| acc * (&n + i)),
        };
        BigRational::from_integer(product)
    }
}

/// `∏_{i=1}^{k} (n+i)`.
pub fn ladder_upper(k: usize, n: usize) -> BigRational {
    LadderCoefficient::Derived.eval(k, n)
}

/// `∏_{i=1}^{k} (n−i+1)`; zero for `n < k`.
pub fn ladder_lower(k: usize, n: usize) -> BigRational {
    let n = n as i64;
    (1..=k as i64).fold(int(1), |acc, i| acc * int(n - i + 1))
}

/// `C₁(j−n) + C₃(j−n)³`.
pub fn source_term(params: &AlgebraParams, spin: Spin, n: usize) -> BigRational {
    let m = spin.value() - int(n as i64);
    &params.c1 * &m + &params.c3 * &m * &m * &m
}

/// `F(0..=n_max)` for a step-`k` realization.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductSequence {
    pub k: usize,
    pub params: AlgebraParams,
    pub spin: Spin,
    pub coefficient: LadderCoefficient,
    pub values: Vec<BigRational>,
}

impl ProductSequence {
    pub fn get(&self, n: usize) -> Option<&BigRational> {
        self.values.get(n)
    }
}

/// Solves the difference equation with the printed ladder coefficient.
///
/// The term in `F(n−k)` vanishes for `n < k`, so the first `k` values are
/// fixed by the equation itself: `F(l) = [C₁(j−l) + C₃(j−l)³] / ∏ᵢ(l+i)`.
pub fn product_recurrence(
    k: usize,
    params: &AlgebraParams,
    spin: Spin,
    n_max: usize,
) -> Result<ProductSequence> {
    product_recurrence_with(LadderCoefficient::Printed, k, params, spin, n_max)
}

pub fn product_recurrence_with(
    coefficient: LadderCoefficient,
    k: usize,
    params: &AlgebraParams,
    spin: Spin,
    n_max: usize,
) -> Result<ProductSequence> {
    if k == 0 {
        return Err(Error::InvalidStep { k, dim: n_max + 1 });
    }
    if n_max < k {
        return Err(Error::SequenceTooShort { k, n_max });
    }
    let mut values: Vec<BigRational> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let carried = if n >= k {
            ladder_lower(k, n) * &values[n - k]
        } else {
            BigRational::zero()
        };
        values.push((source_term(params, spin, n) + carried) / coefficient.eval(k, n));
    }
    Ok(ProductSequence {
        k,
        params: params.clone(),
        spin,
        coefficient,
        values,
    })
}

/// `F₁(n) = ¼(2j−n){2C₁ + C₃[2j² − (2j−n−1)n]}`.
pub fn simple_product(params: &AlgebraParams, spin: Spin, n: usize) -> BigRational {
    let j = spin.value();
    let two_j = int(spin.twice() as i64);
    let n = int(n as i64);
    let brace = int(2) * &params.c1
        + &params.c3 * (int(2) * &j * &j - (&two_j - &n - int(1)) * &n);
    (&two_j - &n) * brace / int(4)
}

/// The braced expression `G(n)` of the quadratic realization, equal to
/// `16(n+1)(n+2) F₂(n)`.
pub fn quadratic_brace(params: &AlgebraParams, spin: Spin, n: usize) -> BigRational {
    let j = spin.value();
    let two_j = int(spin.twice() as i64);
    let parity = if n.is_multiple_of(2) { int(1) } else { int(-1) };
    let n = int(n as i64);
    let linear = &parity * (&two_j + int(1)) - (&n + int(1)) + (&two_j - &n) * (int(2) * &n + int(3));
    let cubic = int(1)
        + int(6) * &j * &j * (&two_j - int(1))
        + &parity * (&two_j + int(1)) * (int(2) * &j * &j + &two_j - int(1))
        + int(2) * &n * (&two_j - &n - int(2)) * (int(2) * &j * &j - (&two_j - &n) * (&n + int(2)));
    int(2) * &params.c1 * linear + &params.c3 * cubic
}

/// `F₂(n) = G(n) / (16 (n+1)(n+2))`.
pub fn quadratic_product(params: &AlgebraParams, spin: Spin, n: usize) -> BigRational {
    quadratic_brace(params, spin, n) / int(16 * (n as i64 + 1) * (n as i64 + 2))
}

/// Assembles `J₊ = g(n̂) aᵏ` from the product `F`; `g = √F` (masked where
/// `F < 0`) in unitary mode, `g = F` with `J₋ = (a⁺)ᵏ` in Dyson mode.
fn shift_realization<T: Field>(
    space: FockSpace,
    kind: RealizationKind,
    k: usize,
    params: &AlgebraParams,
    spin: Spin,
    mode: Mode,
    product: impl Fn(usize) -> BigRational,
) -> Realization<T> {
    let dim = space.dim();
    let mut jp = Operator::zeros(space);
    let mut jm = Operator::zeros(space);
    let mut admissible = vec![true; dim];
    #[allow(clippy::needless_range_loop)]
    for n in 0..dim {
        let f = product(n);
        if mode == Mode::Unitary && f.is_negative() {
            admissible[n] = false;
        }
        if n + k >= dim {
            continue;
        }
        let ladder = ladder_upper(k, n);
        match mode {
            Mode::Unitary => {
                if let Some(v) = T::sqrt_of(&(f * ladder)) {
                    jm.set(n + k, n, v.conj());
                    jp.set(n, n + k, v);
                }
            }
            Mode::Dyson => {
                let root = T::sqrt_of(&ladder).expect("ladder product is positive");
                jp.set(n, n + k, T::from_rational(&f) * root.clone());
                jm.set(n + k, n, root);
            }
        }
    }
    let j = spin.value();
    let j3 = Operator::from_diagonal(
        space,
        (0..dim).map(|n| T::from_rational(&(&j - int(n as i64)))).collect(),
    );
    Realization {
        kind,
        step: k,
        spin,
        params: params.clone(),
        jp,
        jm,
        j3,
        admissible,
        villain_g: None,
    }
}

/// `J₊ = √F₁(n̂) a`, `J₋ = J₊†`, `J₃ = j − n̂`.
pub fn hp_simple<T: Field>(space: FockSpace, params: &AlgebraParams, spin: Spin) -> Realization<T> {
    shift_realization(space, RealizationKind::HP, 1, params, spin, Mode::Unitary, |n| {
        simple_product(params, spin, n)
    })
}

/// `J₊ = ¼[(n̂+1)(n̂+2)]^{−1/2} √G(n̂) a²`, `J₋ = J₊†`, `J₃ = j − n̂`.
pub fn hp_quadratic<T: Field>(space: FockSpace, params: &AlgebraParams, spin: Spin) -> Realization<T> {
    shift_realization(space, RealizationKind::HP, 2, params, spin, Mode::Unitary, |n| {
        quadratic_product(params, spin, n)
    })
}

/// `J₊ = F₁(n̂) a`, `J₋ = a⁺`, `J₃ = j − n̂`.
pub fn dyson_simple<T: Field>(space: FockSpace, params: &AlgebraParams, spin: Spin) -> Realization<T> {
    shift_realization(space, RealizationKind::Dyson, 1, params, spin, Mode::Dyson, |n| {
        simple_product(params, spin, n)
    })
}

/// `J₊ = F₂(n̂) a²`, `J₋ = (a⁺)²`, `J₃ = j − n̂`.
pub fn dyson_quadratic<T: Field>(space: FockSpace, params: &AlgebraParams, spin: Spin) -> Realization<T> {
    shift_realization(space, RealizationKind::Dyson, 2, params, spin, Mode::Dyson, |n| {
        quadratic_product(params, spin, n)
    })
}

/// Step-`k` realization with `F` from the difference equation. The printed
/// ladder coefficient is used where it is exact (`k ≤ 3`), the derived one
/// beyond.
pub fn generic_realization<T: Field>(
    space: FockSpace,
    k: usize,
    params: &AlgebraParams,
    spin: Spin,
    mode: Mode,
) -> Result<Realization<T>> {
    generic_realization_with(LadderCoefficient::for_step(k), space, k, params, spin, mode)
}

pub fn generic_realization_with<T: Field>(
    coefficient: LadderCoefficient,
    space: FockSpace,
    k: usize,
    params: &AlgebraParams,
    spin: Spin,
    mode: Mode,
) -> Result<Realization<T>> {
    if k == 0 || space.dim() <= 2 * k {
        return Err(Error::InvalidStep { k, dim: space.dim() });
    }
    let seq = product_recurrence_with(coefficient, k, params, spin, space.dim() - 1)?;
    let kind = match mode {
        Mode::Unitary => RealizationKind::GenericUnitary,
        Mode::Dyson => RealizationKind::GenericDyson,
    };
    Ok(shift_realization(space, kind, k, params, spin, mode, |n| seq.values[n].clone()))
}

/// The printed constants `g₁ = √(½C₁(j+½)² + ¼C₃j²(j+1)²)` and
/// `g₂ = ½√(½C₁² + C₁C₃j(j+1) + ½C₃²j²(j+1)²)`, positive branch.
pub fn g_constant(params: &AlgebraParams, spin: Spin, form: u8) -> Result<f64> {
    let j = spin.value();
    let jj1 = &j * (&j + int(1));
    let (c1, c3) = (&params.c1, &params.c3);
    let squared = match form {
        1 => {
            let jh = &j + ratio(1, 2);
            c1 * &jh * &jh / int(2) + c3 * &jj1 * &jj1 / int(4)
        }
        2 => {
            let inner = c1 * c1 / int(2) + c1 * c3 * &jj1 + c3 * c3 * &jj1 * &jj1 / int(2);
            if inner.is_negative() {
                return Err(Error::NoRealG { form });
            }
            return Ok(0.5 * rational_to_f64(&inner).sqrt());
        }
        _ => return Err(Error::InvalidForm(form)),
    };
    if squared.is_negative() {
        return Err(Error::NoRealG { form });
    }
    Ok(rational_to_f64(&squared).sqrt())
}

/// `g₂ = |C₁ + C₃ j(j+1)|`, the value for which the second Villain form
/// carries the Casimir eigenvalue `C₁j(j+1) + ½C₃j²(j+1)²`.
pub fn g2_casimir_consistent(params: &AlgebraParams, spin: Spin) -> f64 {
    let j = spin.value();
    let v = &params.c1 + &params.c3 * &j * (&j + int(1));
    rational_to_f64(&v.abs())
}

/// The radicand `R(p)` with `J₋J₊ = R(P)`:
/// form 1 `g² − ¼C₃[p(p+1)]² − ½C₁(p+½)²`,
/// form 2 `[g² − (C₃p² + C₃p + C₁)²] / (4C₃)`.
pub fn villain_radicand(form: u8, params: &AlgebraParams, g: f64) -> impl Fn(f64) -> f64 {
    let (c1, c3) = (params.c1_f64(), params.c3_f64());
    move |p: f64| {
        if form == 1 {
            let q = p * (p + 1.0);
            g * g - 0.25 * c3 * q * q - 0.5 * c1 * (p + 0.5) * (p + 0.5)
        } else {
            let s = c3 * p * p + c3 * p + c1;
            (g * g - s * s) / (4.0 * c3)
        }
    }
}

/// The constant used to build a Villain realization: `g₁` for form 1,
/// [`g2_casimir_consistent`] for form 2.
pub fn villain_g(params: &AlgebraParams, spin: Spin, form: u8) -> Result<f64> {
    match form {
        1 => g_constant(params, spin, 1),
        2 => Ok(g2_casimir_consistent(params, spin)),
        _ => Err(Error::InvalidForm(form)),
    }
}

/// `J₃ = P`, `J₊ = e^{iX} √R(P)`, `J₋ = J₊†`.
///
/// On a truncated space `R(P)` is never positive semidefinite (the spectrum
/// of `P` is unbounded in the limit), so the root is taken of its positive
/// part. The algebra closes only asymptotically in the dimension, on the
/// momentum window returned by [`Realization::block`].
pub fn villain_boson(
    space: FockSpace,
    form: u8,
    params: &AlgebraParams,
    spin: Spin,
) -> Result<Realization<Complex64>> {
    validate_form(form, params)?;
    let g = villain_g(params, spin, form)?;
    villain_boson_with_g(space, form, params, spin, g)
}

fn validate_form(form: u8, params: &AlgebraParams) -> Result<()> {
    match form {
        1 => Ok(()),
        2 if params.c3.is_positive() => Ok(()),
        2 => Err(Error::Form2RequiresPositiveC3),
        _ => Err(Error::InvalidForm(form)),
    }
}

/// [`villain_boson`] with an explicit `g`.
pub fn villain_boson_with_g(
    space: FockSpace,
    form: u8,
    params: &AlgebraParams,
    spin: Spin,
    g: f64,
) -> Result<Realization<Complex64>> {
    validate_form(form, params)?;
    let p = momentum(space);
    let eig = hermitian_eigen(&p)?;
    let r = villain_radicand(form, params, g);
    let radicand = eig.apply(|x| Complex64::new(r(x), 0.0));
    let (root, positive) = sqrt_positive_part(&radicand)?;
    if positive == 0 {
        return Err(Error::InadmissibleParameters(format!(
            "radicand has no positive eigenvalue at dim {}",
            space.dim()
        )));
    }
    let phase = unitary_exp(&position(space), 1.0)?;
    let jp = phase.try_matmul(&root)?;
    let jm = jp.adjoint();
    Ok(Realization {
        kind: if form == 1 {
            RealizationKind::VillainForm1
        } else {
            RealizationKind::VillainForm2
        },
        step: 1,
        spin,
        params: params.clone(),
        jp,
        jm,
        j3: p,
        admissible: vec![true; space.dim()],
        villain_g: Some(g),
    })
}

/// Deviation of the symmetric Casimir from its eigenvalue on the momentum
/// window.
#[derive(Clone, Debug, PartialEq)]
pub struct VillainCasimir {
    pub deviation: f64,
    pub target: f64,
    pub block_size: usize,
}

pub fn villain_casimir_check(r: &Realization<Complex64>) -> Result<VillainCasimir> {
    let target = rational_to_f64(&casimir_eigenvalue(&r.params, r.spin));
    let c = casimir_symmetric(r)?;
    let shifted = &c - &Operator::identity(r.space()).scaled(&Complex64::new(target, 0.0));
    let block = r.block()?;
    Ok(VillainCasimir {
        deviation: block.max_abs(&shifted),
        target,
        block_size: block.size(),
    })
}

/// Residuals of one Villain realization at one truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderPoint {
    pub dim: usize,
    pub block_size: usize,
    /// `‖[J₊,J₋] − C₁J₃ − C₃J₃³‖`
    pub raise_lower: f64,
    /// `‖[J₃,J₊] − J₊‖`
    pub j3_raise: f64,
    pub casimir_deviation: f64,
    /// `‖J₊ − J₋†‖` over the whole space.
    pub adjointness: f64,
}

/// Builds the Villain realization at each dimension and records its
/// residuals. `g` overrides the default constant (for negative controls).
pub fn villain_ladder(
    form: u8,
    params: &AlgebraParams,
    spin: Spin,
    dims: &[usize],
    g: Option<f64>,
) -> Result<Vec<LadderPoint>> {
    dims.iter()
        .map(|&dim| {
            let space = FockSpace::new(dim)?;
            let r = match g {
                Some(g) => villain_boson_with_g(space, form, params, spin, g)?,
                None => villain_boson(space, form, params, spin)?,
            };
            let closure = crate::algebra::commutator_residual(&r)?;
            let casimir = villain_casimir_check(&r)?;
            Ok(LadderPoint {
                dim,
                block_size: closure.block_size,
                raise_lower: closure.raise_lower,
                j3_raise: closure.j3_raise,
                casimir_deviation: casimir.deviation,
                adjointness: (&r.jp - &r.jm.adjoint()).max_abs(),
            })
        })
        .collect()
}

/// Which constructor to run; the unit a sweep or CLI request maps to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Hp,
    Dyson,
    Villain,
    GenericUnitary,
    GenericDyson,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Hp => "hp",
            Family::Dyson => "dyson",
            Family::Villain => "villain",
            Family::GenericUnitary => "generic-unitary",
            Family::GenericDyson => "generic-dyson",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [Family::Hp, Family::Dyson, Family::Villain, Family::GenericUnitary, Family::GenericDyson]
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown kind {s:?}")))
    }
}

/// A constructor choice: family, step `k` (shift kinds) and Villain form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Recipe {
    pub family: Family,
    pub k: usize,
    pub form: u8,
}

impl Recipe {
    pub fn new(family: Family, k: usize) -> Self {
        Recipe { family, k, form: 1 }
    }

    pub fn villain(form: u8) -> Self {
        Recipe { family: Family::Villain, k: 1, form }
    }

    /// Short label such as `hp/k=1` or `villain/form=2`.
    pub fn label(&self) -> String {
        match self.family {
            Family::Villain => format!("villain/form={}", self.form),
            f => format!("{}/k={}", f.as_str(), self.k),
        }
    }

    /// Builds the realization. `hp`/`dyson` with `k ≥ 3` fall through to the
    /// generic constructors; Villain kinds need the float field.
    pub fn build<T: Field>(
        &self,
        space: FockSpace,
        params: &AlgebraParams,
        spin: Spin,
    ) -> Result<Realization<T>> {
        match (self.family, self.k) {
            (Family::Hp | Family::Dyson | Family::GenericUnitary | Family::GenericDyson, 0) => {
                Err(Error::InvalidStep { k: 0, dim: space.dim() })
            }
            (Family::Hp, 1) => Ok(hp_simple(space, params, spin)),
            (Family::Hp, 2) => Ok(hp_quadratic(space, params, spin)),
            (Family::Dyson, 1) => Ok(dyson_simple(space, params, spin)),
            (Family::Dyson, 2) => Ok(dyson_quadratic(space, params, spin)),
            (Family::Hp | Family::GenericUnitary, k) => {
                generic_realization(space, k, params, spin, Mode::Unitary)
            }
            (Family::Dyson | Family::GenericDyson, k) => {
                generic_realization(space, k, params, spin, Mode::Dyson)
            }
            (Family::Villain, _) => {
                if T::is_exact() {
                    return Err(Error::FloatOnly("Villain"));
                }
                let r = villain_boson(space, self.form, params, spin)?;
                let cast = |m: &Operator<Complex64>| {
                    m.map(|z| T::from_complex(*z).expect("float field"))
                };
                Ok(Realization {
                    kind: r.kind,
                    step: r.step,
                    spin: r.spin,
                    params: r.params.clone(),
                    jp: cast(&r.jp),
                    jm: cast(&r.jm),
                    j3: cast(&r.j3),
                    admissible: r.admissible,
                    villain_g: r.villain_g,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::commutator_residual;
    use crate::fock::creation;
    use crate::surd::Surd;

    fn p(c1: i64, c3: i64) -> AlgebraParams {
        AlgebraParams::from_ints(c1, c3)
    }

    fn space(dim: usize) -> FockSpace {
        FockSpace::new(dim).unwrap()
    }

    #[test]
    fn recurrence_reproduces_simple_closed_form() {
        for (c1, c3) in [(2, 0), (1, 1), (3, -1), (-2, 1), (0, 2)] {
            for j2 in 0..7 {
                let s = Spin::from_twice(j2);
                let seq = product_recurrence(1, &p(c1, c3), s, 40).unwrap();
                for n in 0..=40 {
                    assert_eq!(seq.values[n], simple_product(&p(c1, c3), s, n));
                }
                assert_eq!(seq.values[0], source_term(&p(c1, c3), s, 0));
            }
        }
    }

    #[test]
    fn recurrence_reproduces_quadratic_closed_form() {
        for (c1, c3) in [(2, 0), (1, 2), (3, -1), (-2, 1)] {
            for j2 in 0..7 {
                let s = Spin::from_twice(j2);
                let seq = product_recurrence(2, &p(c1, c3), s, 40).unwrap();
                for n in 0..=40 {
                    assert_eq!(seq.values[n], quadratic_product(&p(c1, c3), s, n), "n={n}");
                }
            }
        }
    }

    #[test]
    fn recurrence_preconditions() {
        assert!(matches!(
            product_recurrence(3, &p(1, 1), Spin::from_twice(2), 2),
            Err(Error::SequenceTooShort { k: 3, n_max: 2 })
        ));
        assert!(product_recurrence(0, &p(1, 1), Spin::from_twice(2), 5).is_err());
    }

    #[test]
    fn printed_ladder_coefficient_is_exact_up_to_three() {
        for k in 1..=6 {
            let same = (0..30).all(|n| {
                LadderCoefficient::Printed.eval(k, n) == LadderCoefficient::Derived.eval(k, n)
            });
            assert_eq!(same, LadderCoefficient::printed_is_exact(k), "k={k}");
        }
    }

    #[test]
    fn hp_simple_su2_element() {
        let r: Realization<Complex64> = hp_simple(space(4), &AlgebraParams::su2(), Spin::from_twice(2));
        assert!((r.jp.get(0, 1).re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.jm, r.jp.adjoint());
    }

    #[test]
    fn hp_simple_spin_zero_is_trivial_on_chain() {
        let r: Realization<Surd> = hp_simple(space(6), &p(1, 1), Spin::from_twice(0));
        assert!(r.jp.get(0, 1).is_zero());
    }

    #[test]
    fn hp_simple_closes_exactly() {
        let r: Realization<Surd> = hp_simple(space(32), &p(1, 1), Spin::from_twice(4));
        let res = commutator_residual(&r).unwrap();
        assert_eq!((res.raise_lower, res.j3_raise, res.j3_lower), (0.0, 0.0, 0.0));
        let f: Realization<Complex64> = hp_simple(space(32), &p(1, 1), Spin::from_twice(4));
        let res = commutator_residual(&f).unwrap();
        assert!(res.raise_lower <= 1e-12 * 32.0 * 1e3, "{res:?}");
    }

    #[test]
    fn hp_quadratic_squared_elements_match_recurrence() {
        let params = p(2, 1);
        let s = Spin::from_twice(5);
        let r: Realization<Surd> = hp_quadratic(space(20), &params, s);
        let seq = product_recurrence(2, &params, s, 19).unwrap();
        for n in 0..18 {
            let v = r.jp.get(n, n + 2).clone();
            let expect = ladder_upper(2, n) * &seq.values[n];
            if r.admissible[n] {
                assert_eq!(v.clone() * v, Surd::rational(expect));
            } else {
                assert!(v.is_zero());
            }
        }
    }

    #[test]
    fn quadratic_kinds_preserve_parity() {
        let r: Realization<Complex64> = hp_quadratic(space(12), &p(2, 0), Spin::from_twice(3));
        for row in 0..12 {
            for col in 0..12 {
                if (row + col) % 2 == 1 {
                    assert_eq!(*r.jp.get(row, col), Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn dyson_simple_su2_and_lowering() {
        let s = Spin::from_twice(3);
        let r: Realization<Surd> = dyson_simple(space(8), &AlgebraParams::su2(), s);
        for n in 0..7 {
            let expect = Surd::rational(int(3 - n as i64)) * Surd::sqrt_of(&int(n as i64 + 1)).unwrap();
            assert_eq!(r.jp.get(n, n + 1), &expect);
        }
        assert_eq!(r.jm, creation::<Surd>(space(8)));
        assert_ne!(r.jp, r.jm.adjoint());
    }

    #[test]
    fn dyson_kinds_close_exactly() {
        let r: Realization<Surd> = dyson_simple(space(24), &p(3, -1), Spin::from_twice(4));
        let res = commutator_residual(&r).unwrap();
        assert_eq!(res.raise_lower, 0.0);
        assert_eq!(res.j3_raise, 0.0);
        let q: Realization<Surd> = dyson_quadratic(space(24), &p(1, 2), Spin::from_twice(5));
        assert_eq!(q.jm, creation::<Surd>(space(24)).pow(2));
        assert_eq!(commutator_residual(&q).unwrap().raise_lower, 0.0);
    }

    #[test]
    fn generic_matches_closed_form_constructors() {
        let params = p(2, 1);
        let s = Spin::from_twice(3);
        let a: Realization<Surd> = generic_realization(space(16), 1, &params, s, Mode::Unitary).unwrap();
        assert_eq!(a.jp, hp_simple::<Surd>(space(16), &params, s).jp);
        let b: Realization<Surd> = generic_realization(space(16), 2, &params, s, Mode::Dyson).unwrap();
        assert_eq!(b.jp, dyson_quadratic::<Surd>(space(16), &params, s).jp);
        assert!(matches!(
            generic_realization::<Surd>(space(6), 3, &params, s, Mode::Dyson),
            Err(Error::InvalidStep { k: 3, dim: 6 })
        ));
    }

    #[test]
    fn printed_coefficient_breaks_closure_at_k4() {
        let params = p(2, 1);
        let s = Spin::from_twice(6);
        let printed: Realization<Surd> =
            generic_realization_with(LadderCoefficient::Printed, space(20), 4, &params, s, Mode::Dyson).unwrap();
        let derived: Realization<Surd> =
            generic_realization_with(LadderCoefficient::Derived, space(20), 4, &params, s, Mode::Dyson).unwrap();
        assert!(commutator_residual(&printed).unwrap().raise_lower > 0.0);
        assert_eq!(commutator_residual(&derived).unwrap().raise_lower, 0.0);
    }

    #[test]
    fn g_constant_examples() {
        for j2 in 0..8 {
            let s = Spin::from_twice(j2);
            let g = g_constant(&AlgebraParams::su2(), s, 1).unwrap();
            assert!((g - (s.to_f64() + 0.5)).abs() < 1e-14);
        }
        assert!((g_constant(&p(0, 2), Spin::from_twice(2), 1).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let g2 = g_constant(&p(0, 3), Spin::from_twice(2), 2).unwrap();
        assert!((g2 - 1.5 * 2.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!(matches!(g_constant(&p(-4, 0), Spin::from_twice(2), 1), Err(Error::NoRealG { form: 1 })));
    }

    #[test]
    fn villain_forms_share_the_radicand() {
        // with the Casimir-consistent g₂ the two forms are the same function of p
        for (c1, c3, j2) in [(1, 1, 4), (0, 2, 3), (2, 1, 2)] {
            let params = p(c1, c3);
            let s = Spin::from_twice(j2);
            let r1 = villain_radicand(1, &params, villain_g(&params, s, 1).unwrap());
            let r2 = villain_radicand(2, &params, villain_g(&params, s, 2).unwrap());
            for i in -20..20 {
                let x = i as f64 * 0.37;
                assert!((r1(x) - r2(x)).abs() <= 1e-9 * (1.0 + r1(x).abs()));
            }
        }
    }

    #[test]
    fn villain_form2_validation() {
        assert!(matches!(
            villain_boson(space(8), 2, &p(1, -1), Spin::from_twice(2)),
            Err(Error::Form2RequiresPositiveC3)
        ));
        assert!(matches!(
            villain_boson(space(8), 3, &p(1, 1), Spin::from_twice(2)),
            Err(Error::InvalidForm(3))
        ));
    }

    #[test]
    fn villain_su2_uses_half_integer_shift() {
        let r = villain_boson(space(16), 1, &AlgebraParams::su2(), Spin::from_twice(4)).unwrap();
        assert_eq!(r.villain_g, Some(2.5));
        assert_eq!(r.jm, r.jp.adjoint());
    }

    #[test]
    fn villain_residual_shrinks_with_dim() {
        let points = villain_ladder(1, &p(1, 1), Spin::from_twice(4), &[32, 128], None).unwrap();
        assert!(points[1].j3_raise < points[0].j3_raise);
        assert!(points[1].casimir_deviation < points[0].casimir_deviation);
    }

    #[test]
    fn recipe_rejects_exact_villain() {
        let r = Recipe::villain(1).build::<Surd>(space(8), &p(1, 1), Spin::from_twice(2));
        assert!(matches!(r, Err(Error::FloatOnly(_))));
    }

    #[test]
    fn json_round_trip() {
        let r: Realization<Surd> = hp_simple(space(5), &p(3, -1), Spin::from_twice(3));
        let back = Realization::<Surd>::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let v = villain_boson(space(6), 1, &p(1, 1), Spin::from_twice(2)).unwrap();
        let back = Realization::<Complex64>::from_json(&v.to_json()).unwrap();
        assert_eq!(back, v);
    }
}
