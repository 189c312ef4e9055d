//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Summary of a failed numerical integration, including whatever part of the
/// trajectory was computed before the failure.
#[derive(Debug, Clone)]
pub struct IntegrationFailure {
    pub kind: IntegrationFailureKind,
    /// Time reached before the failure.
    pub time_reached: f64,
    /// Accepted steps taken before the failure.
    pub steps_taken: usize,
    /// Decimated partial trajectory of `(time, flattened state)` samples.
    pub partial: Vec<(f64, Vec<nalgebra::DMatrix<f64>>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrationFailureKind {
    MaxStepsExceeded,
    NonFiniteState,
    StepSizeUnderflow,
    NonPositiveDeterminant,
}

impl std::fmt::Display for IntegrationFailureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::MaxStepsExceeded => "maximum step count exceeded",
            Self::NonFiniteState => "state became non-finite",
            Self::StepSizeUnderflow => "adaptive step size underflow",
            Self::NonPositiveDeterminant => "group state determinant not positive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}x{expected}, found {found}x{found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("algebra tag mismatch: {left} vs {right}")]
    TagMismatch { left: String, right: String },

    #[error("arity mismatch: expected {expected} arguments, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("invalid construction: {0}")]
    Invalid(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("empty basis")]
    EmptyBasis,

    #[error("empty probe set")]
    EmptyProbes,

    #[error("singular group element (|det| = {det:e})")]
    SingularGroupElement { det: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("integration failed at t = {}: {} ({} steps)", .0.time_reached, .0.kind, .0.steps_taken)]
    Integration(Box<IntegrationFailure>),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
