use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("division by zero polynomial")]
    ZeroDenominator,
    #[error("non-rational pole: irreducible factor {factor}")]
    NonRationalPole { factor: String },
    #[error("invalid arrangement: {0}")]
    InvalidArrangement(String),
    #[error("not an edge of the arrangement: {0}")]
    NotAnEdge(String),
    #[error("hypotheses not met: {0}")]
    Hypothesis(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no good tuple exists at this edge")]
    NoGoodTuple,
    #[error("no candidate edge realises the pole {0}")]
    NotACandidate(String),
    #[error("not converged: {message}")]
    NotConverged {
        message: String,
        trace: Vec<(f64, f64)>,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
