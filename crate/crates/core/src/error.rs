use thiserror::Error;

/// Errors raised by the spin measurement library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spin quantum number {0}: 2s must be a positive integer")]
    InvalidSpin(f64),

    #[error("m = {m} is not an eigenvalue of n.S for spin {s}")]
    NotInSpectrum { m: f64, s: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("not a density matrix: {0}")]
    InvalidDensity(String),

    #[error("completeness violated: max deviation from identity {deviation:.3e}")]
    Incomplete { deviation: f64 },

    #[error("effect {index} is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { index: usize, min_eigenvalue: f64 },

    #[error("g-function violates the kernel condition: max deviation {deviation:.3e}")]
    KernelCondition { deviation: f64 },

    #[error("region has probability {0:.3e}, too small to condition on")]
    ZeroProbability(f64),

    #[error("empty region")]
    EmptyRegion,

    #[error("node index {index} out of range for a grid of {len} nodes")]
    NodeOutOfRange { index: usize, len: usize },

    #[error("ill-posed inversion: smallest singular value {0:.3e}")]
    IllPosed(f64),

    #[error("POVM is not informationally complete: design rank {rank} < {required}")]
    NotInformationallyComplete { rank: usize, required: usize },

    #[error("invalid radial profile: {0}")]
    InvalidProfile(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
