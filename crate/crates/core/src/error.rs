use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("normalization mismatch: {0}")]
    Normalization(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("outcome probabilities sum to {0}, expected 1")]
    ProbabilityMass(f64),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("unknown gate label `{0}`")]
    UnknownLabel(String),

    #[error("clifford block on wires {wires:?} straddles the subsystem boundary")]
    StraddlingBlock { wires: Vec<usize> },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
