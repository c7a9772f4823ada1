//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M - M\u{2020}| = {defect:.3e}")]
    NotHermitian { defect: f64 },

    #[error("matrix is not unitary: max |U\u{2020}U - 1| = {defect:.3e}")]
    NotUnitary { defect: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("outcome {index} has probability {probability:.3e}; cannot project onto a null branch")]
    ZeroProbabilityOutcome { index: usize, probability: f64 },

    #[error("|d\u{3c8}\u{27e9} is not orthogonal to |\u{3c8}\u{27e9}: |\u{27e8}\u{3c8}|d\u{3c8}\u{27e9}| = {overlap:.3e}")]
    NotOrthogonal { overlap: f64 },

    #[error(
        "integration step rejected at t = {time}: pre-normalization norm deviated from 1 by {defect:.3e} (dt too large)"
    )]
    StepRejected { defect: f64, time: f64 },

    #[error("density matrix lost positivity at t = {time}: min eigenvalue = {min_eigenvalue:.3e}")]
    PositivityLost { min_eigenvalue: f64, time: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid projector: {0}")]
    InvalidProjector(String),

    #[error("projector family does not resolve the identity: max |\u{3a3}E - 1| = {defect:.3e}")]
    IncompleteFamily { defect: f64 },

    #[error("{unresolved} of {total} trajectories unresolved; outcome statistics require a fully resolved ensemble")]
    UnresolvedPresent { unresolved: usize, total: usize },

    #[error("insufficient resolved trajectories: {0}")]
    InsufficientResolved(String),

    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error("scenario validation failed:\n{0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
