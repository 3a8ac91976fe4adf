//! Error type shared by all modules.

/// Errors raised by structure construction, dynamics, alignment and
/// clustering routines.
#[derive(Debug, Clone, thiserror::Error)]
pub enum CoreError {
    #[error("sites {i} and {j} coincide: distance {dist:e} is below the floor {floor:e}")]
    CoincidentSites {
        i: usize,
        j: usize,
        dist: f64,
        floor: f64,
    },

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error(
        "eigensolver did not converge: off-diagonal norm {off_norm:e} after {sweeps} sweeps"
    )]
    EigenNonConvergence { off_norm: f64, sweeps: usize },

    #[error("structures have different site counts ({a} vs {b})")]
    SizeMismatch { a: usize, b: usize },

    #[error("no edge candidates")]
    EmptyCandidates,

    #[error("MCL did not converge after {iterations} iterations (last delta {last_delta:e})")]
    MclNonConvergence { iterations: usize, last_delta: f64 },

    #[error(
        "ambiguous eigenvector localization: {found} backbone-localized states for a backbone \
         of {expected} sites (weights: {weights:?})"
    )]
    AmbiguousLocalization {
        found: usize,
        expected: usize,
        weights: Vec<f64>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
