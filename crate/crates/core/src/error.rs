use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("predicate `{predicate}` used with arity {found} at line {line}, previously declared with arity {expected}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
        line: usize,
    },

    #[error("fact `{fact}` at line {line} is not ground")]
    NonGroundFact { fact: String, line: usize },

    #[error("chase did not reach a fixpoint within {max_rounds} rounds")]
    RoundCapExceeded { max_rounds: usize },

    #[error("brute-force enumeration is limited to {limit} facts, got {found}")]
    TooManyFacts { limit: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("repair {label} has zero similarity to every other repair")]
    IsolatedVertex { label: String },

    #[error("scope must contain at least one repair")]
    EmptyScope,

    #[error("unknown repair `{0}`")]
    UnknownRepair(String),

    #[error("unsupported session file version {found} (this build reads version {supported})")]
    VersionMismatch { found: u32, supported: u32 },

    #[error("malformed session document: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
