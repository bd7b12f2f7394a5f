use std::fmt;

use thiserror::Error;

/// A syntax or reference error in model, formula or reduction-input text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),

    #[error("invalid model: {}", .0.join("; "))]
    InvalidModel(Vec<String>),

    #[error("invalid path prefix: {0}")]
    InvalidPrefix(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("unknown agent `{0}`")]
    UnknownAgent(String),

    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),

    #[error("observation `{symbol}` of agent `{agent}` has probability zero at time {time}")]
    ZeroMassObservation {
        agent: String,
        time: usize,
        symbol: String,
    },

    #[error("observation history of agent `{0}` has probability zero")]
    ZeroMassHistory(String),

    #[error("unbounded until outside the supported qualitative forms: {0}")]
    UnsupportedUnbounded(String),

    #[error("horizon {given} is too small, evaluation needs {needed}")]
    HorizonTooSmall { needed: usize, given: usize },

    #[error("set variables are not supported by the evaluator")]
    UnsupportedSecondOrder,

    #[error("formula quantifies over time but no bound was given")]
    UnboundedQuantifier,

    #[error("run enumeration would exceed {0} runs")]
    TooManyRuns(usize),

    #[error("words must be nonempty")]
    EmptyWord,

    #[error("unknown letter `{0}`")]
    UnknownLetter(String),

    #[error("the zero polynomial has no meaningful encoding")]
    ZeroPolynomial,

    #[error("invalid automaton: {0}")]
    InvalidPfa(String),

    #[error("invalid recurrence: {0}")]
    InvalidLrs(String),

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
