use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid subsystem dimensions: {0}")]
    InvalidDims(String),

    #[error("matrix is not Hermitian (max |h - h^dag| = {0:e})")]
    NotHermitian(f64),

    #[error("trace deviates from 1 by {0:e}")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("state vector is not normalized (|norm - 1| = {0:e})")]
    NotNormalized(f64),

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("cannot trace out everything")]
    EmptyKeep,

    #[error("expected {expected} subsystems, found {found}")]
    SubsystemCount { expected: usize, found: usize },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("unsupported dimension {0} for the measured party (qubit or qutrit only)")]
    UnsupportedDimension(usize),

    #[error("squashed global value undefined for mixed states")]
    SquashedOnMixed,

    #[error("PPT not decisive: {0}")]
    PptNotDecisive(String),

    #[error("state `{name}` failed validation: {source}")]
    Transcription { name: String, source: Box<Error> },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
