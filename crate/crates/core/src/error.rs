use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("insufficient precision: digit {index} cannot be certified at {bits} bits")]
    UncertifiedDigit { index: usize, bits: u32 },

    #[error("undecided at truncation: length {requested} exceeds certified horizon {horizon}")]
    HorizonExceeded { requested: usize, horizon: usize },

    #[error("enumeration of length {requested} exceeds cap {cap}; use count_language instead")]
    EnumerationCap { requested: usize, cap: usize },

    #[error("word {0} is not in the language")]
    NotAdmissible(String),

    #[error("empty collection")]
    EmptyCollection,

    #[error("prefix of length {have} is too short, need {need}")]
    PrefixTooShort { have: usize, need: usize },

    #[error("measure depth {have} is insufficient, need {need}")]
    DepthInsufficient { have: usize, need: usize },

    #[error("non-mixing presentation: {0}")]
    NonMixing(String),

    #[error("representative tail is inadmissible after {0}")]
    InadmissibleTail(String),

    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
