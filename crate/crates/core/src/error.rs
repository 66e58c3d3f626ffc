use thiserror::Error;

use crate::structures::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0}")]
    Violation(Violation),
    #[error("node {0} is not a leaf of the host tree")]
    NotALeaf(u32),
    #[error("node id {0} occurs in both trees")]
    IdCollision(u32),
    #[error("node {0} is not present")]
    MissingNode(u32),
    #[error("node budget of {budget} exceeded")]
    BudgetExceeded { budget: usize },
    #[error("structure kinds differ: {0} vs {1}")]
    KindMismatch(&'static str, &'static str),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("program load error on line {line}: {msg}")]
    Load { line: usize, msg: String },
    #[error("invariant breach: {0}")]
    InvariantBreach(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("g undefined on atom {0}")]
    Defer(String),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("a {0}-cycle is already installed")]
    DuplicatePrime(u64),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("{what} ran out of fuel (budget {budget})")]
    OutOfFuel { what: String, budget: u64 },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<Violation> for Error {
    fn from(v: Violation) -> Self {
        Error::Violation(v)
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
