use thiserror::Error;

/// Errors raised by operator construction and verification.
#[derive(Debug, Error)]
pub enum Error {
    #[error("Fock space dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("boundaries undefined; SU(2)-type radicand is linear (C3 = 0)")]
    UndefinedBoundaries,

    #[error("Z boundaries are complex for these parameters; use the recurrence")]
    ComplexBoundaries,

    #[error("step k must be at least 1 and the space must hold more than 2k states (k = {k}, dim = {dim})")]
    InvalidStep { k: usize, dim: usize },

    #[error("n_max = {n_max} must be at least k = {k}")]
    SequenceTooShort { k: usize, n_max: usize },

    #[error("no real g for these params (form {form})")]
    NoRealG { form: u8 },

    #[error("form 2 requires C3 > 0")]
    Form2RequiresPositiveC3,

    #[error("Villain form must be 1 or 2, got {0}")]
    InvalidForm(u8),

    #[error("inadmissible parameters at this truncation: {0}")]
    InadmissibleParameters(String),

    #[error("q0 must be positive")]
    NonPositiveQ0,

    #[error("singular transform: zero diagonal entry at n = {n}")]
    SingularTransform { n: usize },

    #[error("the {0} realization requires the float field")]
    FloatOnly(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
