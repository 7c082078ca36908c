//! Diagonal similarity transforms taking Dyson-like realizations to
//! Holstein-Primakoff-like ones, `S J^D S⁻¹ = J^HP`, and the unitarization
//! `U = S†S` under which `U⁻¹ (J₋^D)† U = J₊^D`.
//!
//! For the simple type the diagonal of `S₁` obeys
//! `S(n)² = ¼(2j−n+1){2C₁ + C₃[2j² − (2j−n)(n−1)]} S(n−1)²`, with the closed
//! form `S(n)² = q (−C₃/4)ⁿ (−2j)ₙ (−Z₊)ₙ (−Z₋)ₙ`. The convention here is
//! `S(0) = q₀`, so `q = q₀²`.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::algebra::{z_boundaries, AlgebraParams, Spin};
use crate::error::{Error, Result};
use crate::field::{format_rational, int, rational_to_f64, Field};
use crate::fock::{pochhammer_operator, FockSpace, Operator};
use crate::realizations::{simple_product, Realization};

/// A diagonal operator `S = diag(s₀, s₁, …)` with positive entries on its
/// valid mask.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalTransform<T> {
    pub q0: BigRational,
    pub entries: Vec<T>,
    /// `false` from the first label where the recurrence factor stopped
    /// being positive; entries there are zero.
    pub mask: Vec<bool>,
}

impl<T: Field> DiagonalTransform<T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn valid_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&n| self.mask[n]).collect()
    }

    pub fn to_operator(&self) -> Result<Operator<T>> {
        Ok(Operator::from_diagonal(FockSpace::new(self.len())?, self.entries.clone()))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "q0": format_rational(&self.q0),
            "entries": self.entries.iter().map(T::to_json).collect::<Vec<_>>(),
            "mask": self.mask,
        })
    }
}

fn check_q0(q0: &BigRational) -> Result<()> {
    if q0.is_positive() {
        Ok(())
    } else {
        Err(Error::NonPositiveQ0)
    }
}

/// `¼(2j−n+1){2C₁ + C₃[2j² − (2j−n)(n−1)]}`, the ratio `S(n)²/S(n−1)²`.
pub fn s1_factor(params: &AlgebraParams, spin: Spin, n: usize) -> BigRational {
    debug_assert!(n >= 1);
    simple_product(params, spin, n - 1)
}

/// Exact `S₁(n)²` for `n ≤ n_max`, zero past the valid mask.
pub fn s1_squared(
    params: &AlgebraParams,
    spin: Spin,
    q0: &BigRational,
    n_max: usize,
) -> Result<(Vec<BigRational>, Vec<bool>)> {
    check_q0(q0)?;
    let mut squares = vec![q0 * q0];
    let mut mask = vec![true];
    let mut valid = true;
    for n in 1..=n_max {
        let factor = s1_factor(params, spin, n);
        valid = valid && factor.is_positive();
        mask.push(valid);
        squares.push(if valid {
            &squares[n - 1] * factor
        } else {
            BigRational::zero()
        });
    }
    Ok((squares, mask))
}

/// `S₁` from its recurrence, positive branch.
pub fn s1_recurrence<T: Field>(
    params: &AlgebraParams,
    spin: Spin,
    q0: &BigRational,
    n_max: usize,
) -> Result<DiagonalTransform<T>> {
    let (squares, mask) = s1_squared(params, spin, q0, n_max)?;
    let entries = squares
        .iter()
        .map(|s| T::sqrt_of(s).expect("squares are non-negative"))
        .collect();
    Ok(DiagonalTransform {
        q0: q0.clone(),
        entries,
        mask,
    })
}

/// `S₁` from the Pochhammer closed form; requires `C₃ ≠ 0` and real `Z±`.
pub fn s1_closed_form(
    params: &AlgebraParams,
    spin: Spin,
    q0: &BigRational,
    n_max: usize,
) -> Result<DiagonalTransform<Complex64>> {
    check_q0(q0)?;
    let z = z_boundaries(params, spin)?.ok_or(Error::ComplexBoundaries)?;
    let space = FockSpace::new(n_max + 1)?;
    let re = |x: f64| Complex64::new(x, 0.0);
    let two_j = re(-(spin.twice() as f64));
    let pz = pochhammer_operator(space, &re(-z.plus)).diagonal();
    let mz = pochhammer_operator(space, &re(-z.minus)).diagonal();
    let pj = pochhammer_operator(space, &two_j).diagonal();
    let q = rational_to_f64(&(q0 * q0));
    let base = -params.c3_f64() / 4.0;
    let squares: Vec<f64> = (0..=n_max)
        .map(|n| q * base.powi(n as i32) * (pj[n] * pz[n] * mz[n]).re)
        .collect();
    let mut mask = vec![true];
    let mut valid = true;
    for n in 1..=n_max {
        valid = valid && squares[n] > 1e-12 * squares[n - 1].abs();
        mask.push(valid);
    }
    let entries = squares
        .iter()
        .zip(&mask)
        .map(|(&s, &ok)| re(if ok { s.sqrt() } else { 0.0 }))
        .collect();
    Ok(DiagonalTransform {
        q0: q0.clone(),
        entries,
        mask,
    })
}

fn check_len<T: Field>(r: &Realization<T>, s: &DiagonalTransform<T>) -> Result<()> {
    if s.len() == r.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            left: r.dim(),
            right: s.len(),
        })
    }
}

/// `(S J₊ S⁻¹, S J₋ S⁻¹, J₃)` restricted to the transform's valid mask;
/// entries outside it are zero and the mask is folded into `admissible`.
pub fn conjugate<T: Field>(r: &Realization<T>, s: &DiagonalTransform<T>) -> Result<Realization<T>> {
    check_len(r, s)?;
    let dim = r.dim();
    let mut inverse = Vec::with_capacity(dim);
    for n in 0..dim {
        inverse.push(if s.mask[n] {
            Some(s.entries[n].recip().ok_or(Error::SingularTransform { n })?)
        } else {
            None
        });
    }
    let apply = |m: &Operator<T>| {
        Operator::from_fn(m.space(), |a, b| match (&inverse[a], &inverse[b]) {
            (Some(_), Some(inv)) => s.entries[a].clone() * m.get(a, b).clone() * inv.clone(),
            _ => T::zero(),
        })
    };
    let mut out = r.clone();
    out.jp = apply(&r.jp);
    out.jm = apply(&r.jm);
    out.admissible = r.admissible.iter().zip(&s.mask).map(|(a, b)| *a && *b).collect();
    Ok(out)
}

/// Max-norm residual on a set of labels.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskedResidual {
    pub residual: f64,
    pub block_size: usize,
}

/// `‖U⁻¹ (J₋^D)† U − J₊^D‖` with `U = S†S`, on the valid mask.
pub fn unitarization_check<T: Field>(
    dyson: &Realization<T>,
    s: &DiagonalTransform<T>,
) -> Result<MaskedResidual> {
    check_len(dyson, s)?;
    let idx = s.valid_indices();
    let u: Vec<T> = s.entries.iter().map(|e| e.conj() * e.clone()).collect();
    let mut residual = 0.0f64;
    for &a in &idx {
        let u_inv = u[a].recip().ok_or(Error::SingularTransform { n: a })?;
        for &b in &idx {
            let lhs = u_inv.clone() * dyson.jm.get(b, a).conj() * u[b].clone();
            residual = residual.max((lhs - dyson.jp.get(a, b).clone()).magnitude());
        }
    }
    Ok(MaskedResidual {
        residual,
        block_size: idx.len(),
    })
}

/// The diagonal `S` with `S D S⁻¹ = H` for two step-`k` realizations, from
/// `S(n+k) = S(n) · D(n, n+k) / H(n, n+k)` along each residue class mod `k`,
/// starting from `S = q₀` on each. Used for the quadratic transform `S₂`.
pub fn matching_transform<T: Field>(
    dyson: &Realization<T>,
    hp: &Realization<T>,
    q0: &BigRational,
) -> Result<DiagonalTransform<T>> {
    check_q0(q0)?;
    dyson.jp.check_same_space(&hp.jp)?;
    let k = dyson.step;
    let dim = dyson.dim();
    let mut entries = vec![T::zero(); dim];
    let mut mask = vec![false; dim];
    for n in 0..dim {
        if n < k {
            entries[n] = T::from_rational(q0);
            mask[n] = true;
            continue;
        }
        let (d, h) = (dyson.jp.get(n - k, n), hp.jp.get(n - k, n));
        if !mask[n - k] || !hp.admissible[n - k] || h.is_zero() {
            continue;
        }
        let next = entries[n - k].clone() * d.clone() * h.recip().ok_or(Error::SingularTransform { n })?;
        if next.to_complex().re > 0.0 {
            entries[n] = next;
            mask[n] = true;
        }
    }
    Ok(DiagonalTransform {
        q0: q0.clone(),
        entries,
        mask,
    })
}

/// `S(n)² / S(n−1)²` computed from a transform's entries, for `n ≥ 1` on the
/// valid mask.
pub fn squared_ratios<T: Field>(s: &DiagonalTransform<T>) -> Vec<(usize, T)> {
    (1..s.len())
        .filter(|&n| s.mask[n])
        .filter_map(|n| {
            let prev = s.entries[n - 1].clone() * s.entries[n - 1].clone();
            prev.recip()
                .map(|inv| (n, s.entries[n].clone() * s.entries[n].clone() * inv))
        })
        .collect()
}

/// `q₀ = 1`.
pub fn default_q0() -> BigRational {
    int(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ratio;
    use crate::fock::FockSpace;
    use crate::realizations::{dyson_quadratic, dyson_simple, hp_quadratic, hp_simple};
    use crate::surd::Surd;

    fn p(c1: i64, c3: i64) -> AlgebraParams {
        AlgebraParams::from_ints(c1, c3)
    }

    fn factorial_ratio(two_j: i64, n: i64) -> BigRational {
        ((two_j - n + 1)..=two_j).fold(int(1), |acc, m| acc * int(m))
    }

    #[test]
    fn su2_transform_is_falling_factorial() {
        for j2 in 0..7u32 {
            let (sq, mask) = s1_squared(&AlgebraParams::su2(), Spin::from_twice(j2), &int(1), 10).unwrap();
            for n in 0..=10usize {
                if n <= j2 as usize {
                    assert!(mask[n]);
                    assert_eq!(sq[n], factorial_ratio(j2 as i64, n as i64));
                } else {
                    assert!(!mask[n]);
                }
            }
        }
    }

    #[test]
    fn first_entry_is_q0() {
        let s: DiagonalTransform<Surd> = s1_recurrence(&p(1, 1), Spin::from_twice(3), &ratio(3, 2), 5).unwrap();
        assert_eq!(s.entries[0], Surd::rational(ratio(3, 2)));
        assert!(matches!(
            s1_recurrence::<Surd>(&p(1, 1), Spin::from_twice(3), &int(0), 5),
            Err(Error::NonPositiveQ0)
        ));
    }

    #[test]
    fn closed_form_matches_recurrence() {
        let params = p(-2, 1);
        let s = Spin::from_twice(2);
        let rec: DiagonalTransform<Complex64> = s1_recurrence(&params, s, &int(1), 8).unwrap();
        let closed = s1_closed_form(&params, s, &int(1), 8).unwrap();
        assert_eq!(rec.mask, closed.mask);
        for n in rec.valid_indices() {
            assert!((rec.entries[n] - closed.entries[n]).norm() < 1e-12);
        }
        assert_eq!(closed.entries[0], Complex64::new(1.0, 0.0));
        assert!(matches!(
            s1_closed_form(&p(2, 1), s, &int(1), 8),
            Err(Error::ComplexBoundaries)
        ));
    }

    #[test]
    fn ratios_reproduce_factor() {
        let params = p(3, -1);
        let s = Spin::from_twice(4);
        let t: DiagonalTransform<Surd> = s1_recurrence(&params, s, &int(1), 6).unwrap();
        for (n, r) in squared_ratios(&t) {
            assert_eq!(r, Surd::rational(s1_factor(&params, s, n)));
        }
    }

    #[test]
    fn conjugation_maps_dyson_to_hp_exactly() {
        let params = p(2, 1);
        let s = Spin::from_twice(3);
        let space = FockSpace::new(12).unwrap();
        let d: Realization<Surd> = dyson_simple(space, &params, s);
        let h: Realization<Surd> = hp_simple(space, &params, s);
        let t = s1_recurrence(&params, s, &int(1), 11).unwrap();
        let c = conjugate(&d, &t).unwrap();
        let idx = t.valid_indices();
        assert!(idx.len() >= 3);
        assert_eq!((&c.jp - &h.jp).max_abs_on(&idx), 0.0);
        assert_eq!((&c.jm - &h.jm).max_abs_on(&idx), 0.0);
        assert_eq!(c.j3, d.j3);
    }

    #[test]
    fn identity_transform_is_neutral() {
        let space = FockSpace::new(6).unwrap();
        let d: Realization<Surd> = dyson_simple(space, &p(1, 1), Spin::from_twice(2));
        let t = DiagonalTransform {
            q0: int(1),
            entries: vec![Surd::rational(int(1)); 6],
            mask: vec![true; 6],
        };
        assert_eq!(conjugate(&d, &t).unwrap(), d);
    }

    #[test]
    fn singular_transform_is_rejected() {
        let space = FockSpace::new(4).unwrap();
        let d: Realization<Surd> = dyson_simple(space, &p(1, 1), Spin::from_twice(2));
        let mut entries = vec![Surd::rational(int(1)); 4];
        entries[2] = Surd::rational(int(0));
        let t = DiagonalTransform { q0: int(1), entries, mask: vec![true; 4] };
        assert!(matches!(conjugate(&d, &t), Err(Error::SingularTransform { n: 2 })));
    }

    #[test]
    fn unitarization_and_negative_control() {
        let params = p(1, 1);
        let s = Spin::from_twice(4);
        let space = FockSpace::new(32).unwrap();
        let d: Realization<Complex64> = dyson_simple(space, &params, s);
        let t: DiagonalTransform<Complex64> = s1_recurrence(&params, s, &int(1), 31).unwrap();
        assert!(unitarization_check(&d, &t).unwrap().residual <= 1e-10);
        let mut wrong = t.clone();
        for (n, e) in wrong.entries.iter_mut().enumerate() {
            *e *= (n + 1) as f64;
        }
        assert!(unitarization_check(&d, &wrong).unwrap().residual > 1e-3);
    }

    #[test]
    fn matching_reproduces_s1_for_simple_type() {
        let params = p(1, 2);
        let s = Spin::from_twice(5);
        let space = FockSpace::new(10).unwrap();
        let d: Realization<Surd> = dyson_simple(space, &params, s);
        let h: Realization<Surd> = hp_simple(space, &params, s);
        let m = matching_transform(&d, &h, &int(1)).unwrap();
        let t: DiagonalTransform<Surd> = s1_recurrence(&params, s, &int(1), 9).unwrap();
        for n in t.valid_indices() {
            assert_eq!(m.entries[n], t.entries[n]);
        }
    }

    #[test]
    fn quadratic_transform_conjugates() {
        let params = p(2, 1);
        let s = Spin::from_twice(5);
        let space = FockSpace::new(14).unwrap();
        let d: Realization<Surd> = dyson_quadratic(space, &params, s);
        let h: Realization<Surd> = hp_quadratic(space, &params, s);
        let m = matching_transform(&d, &h, &int(1)).unwrap();
        let c = conjugate(&d, &m).unwrap();
        let idx: Vec<usize> = m.valid_indices();
        assert!(idx.len() >= 4);
        assert_eq!((&c.jp - &h.jp).max_abs_on(&idx), 0.0);
    }
}
