use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("variable count mismatch: {left} vs {right}")]
    VarCountMismatch { left: usize, right: usize },
    #[error("variable index {index} out of range for {nvars} variables")]
    VarOutOfRange { index: usize, nvars: usize },
    #[error("truncation mismatch: K={left} vs K={right}")]
    TruncMismatch { left: usize, right: usize },
    #[error("rank mismatch: operator has rank {expected}, got {got} arguments")]
    RankMismatch { expected: usize, got: usize },
    #[error("slot {slot} out of range for rank {rank}")]
    SlotOutOfRange { slot: usize, rank: usize },
    #[error("multiplicative set mismatch: '{left}' vs '{right}'")]
    SetMismatch { left: String, right: String },
    #[error("denominator {0} is not in the multiplicative set")]
    NotInSet(String),
    #[error("leading coefficient {0} is not a unit")]
    NotUnit(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not divisible by {1}")]
    NotDivisible(String, String),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("invalid multiplicative set: {0}")]
    InvalidSet(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("star product axiom violated: {0}")]
    StarAxiom(String),
    #[error("invalid equivalence transform: {0}")]
    InvalidTransform(String),
    #[error("star product needs order {needed} but is only given up to {available}")]
    StarTooShort { needed: usize, available: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("missing jet entry for k={0}")]
    MissingJet(usize),
    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("json: {0}")]
    Json(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
