//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix entries must be finite")]
    NonFiniteEntry,

    #[error("matrix data length {len} does not match dim {dim}")]
    BadShape { dim: usize, len: usize },

    #[error("operator is not Hermitian (max |A - A'| entry = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("operator is not unitary (max |U'U - I| entry = {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal {off_diag:.3e})")]
    EigenConvergence { sweeps: usize, off_diag: f64 },

    #[error("spectral reconstruction defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    SpectralReconstruction { defect: f64, tol: f64 },

    #[error("not a density matrix: {reason}")]
    InvalidDensityMatrix { reason: String },

    #[error("not an effect: spectrum [{min:.6e}, {max:.6e}] leaves [0, 1]")]
    InvalidEffect { min: f64, max: f64 },

    #[error("projector family incomplete (max |sum - I| entry = {defect:.3e})")]
    IncompleteFamily { defect: f64 },

    #[error("projector family not orthogonal (max defect = {defect:.3e})")]
    NonOrthogonalFamily { defect: f64 },

    #[error("eigenvalue list must be strictly increasing")]
    UnsortedEigenvalues,

    #[error("schedule must contain at least one segment")]
    EmptySchedule,

    #[error("segment duration must be nonnegative (got {0})")]
    NegativeDuration(f64),

    #[error("event sequence must contain at least one effect")]
    EmptySequence,

    #[error("invalid event reordering: {0}")]
    BadPermutation(String),

    #[error("detector simulation and closed formula disagree (defect {defect:.3e})")]
    DetectorMismatch { defect: f64 },

    #[error("detector initial state has no coherence between the coupled levels")]
    ZeroDetectorCoherence,

    #[error("operational characteristic function disagrees with the distribution sum (defect {defect:.3e})")]
    FourierMismatch { defect: f64 },

    #[error("distribution weights sum to {sum} instead of 1")]
    NotNormalized { sum: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}
