//! Single-mode boson realizations of the Higgs algebra
//!
//! ```text
//! [J₊, J₋] = C₁J₃ + C₃J₃³,   [J₃, J±] = ±J±
//! ```
//!
//! on truncated Fock space: Holstein-Primakoff-like, Dyson-like and
//! Villain-like realizations, the diagonal similarity transform between the
//! first two, and a verification engine that checks the defining relations
//! and the Casimir invariant either exactly (over `ℚ(√2, √3, …)`) or in
//! floating point.
//!
//! ```
//! use higgsalg::{hp_simple, commutator_residual, AlgebraParams, FockSpace, Spin, Surd};
//!
//! let params = AlgebraParams::from_ints(1, 1);
//! let r = hp_simple::<Surd>(FockSpace::new(16)?, &params, Spin::from_twice(4));
//! let res = commutator_residual(&r)?;
//! assert_eq!(res.raise_lower, 0.0);
//! # Ok::<(), higgsalg::Error>(())
//! ```

pub mod algebra;
pub mod cli;
pub mod error;
pub mod field;
pub mod fock;
pub mod realizations;
pub mod similarity;
pub mod surd;
pub mod verify;

pub use algebra::{
    admissible_chain, boundary_prediction, casimir, casimir_eigenvalue, casimir_symmetric,
    commutator_residual, radicand_sign_scan, rep_elements, z_boundaries, AdmissibleChain,
    AlgebraParams, ClosureResiduals, RepElements, RepresentationTable, Spin, ZBoundaries,
};
pub use error::{Error, Result};
pub use field::{Field, FieldKind};
pub use fock::{
    annihilation, creation, hermitian_eigen, momentum, number, pochhammer_operator, position,
    sqrt_psd, unitary_exp, FockSpace, Operator,
};
pub use realizations::{
    dyson_quadratic, dyson_simple, g_constant, generic_realization, hp_quadratic, hp_simple,
    product_recurrence, villain_boson, villain_casimir_check, Family, Mode, ProductSequence,
    Realization, RealizationKind, Recipe,
};
pub use similarity::{
    conjugate, s1_closed_form, s1_recurrence, unitarization_check, DiagonalTransform,
};
pub use surd::Surd;
pub use verify::{sweep, verify_realization, VerificationReport, VerifyConfig};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/fock-space.md")]
    mod fock_space {}
    #[doc = include_str!("../../../book/src/higgs-algebra.md")]
    mod higgs_algebra {}
    #[doc = include_str!("../../../book/src/realizations.md")]
    mod realizations {}
    #[doc = include_str!("../../../book/src/similarity.md")]
    mod similarity {}
    #[doc = include_str!("../../../book/src/villain.md")]
    mod villain {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
