use thiserror::Error;

use crate::learners::LearnReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal {0:?} (expected \"p/q\" or an integer)")]
pub struct ParseRationalError(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("activation {0} is not exact on rationals")]
    InexactActivation(String),
    #[error("final bias must be zero")]
    NonzeroFinalBias,
    #[error("unknown activation {0:?}")]
    UnknownActivation(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("input dimension must be at least 1")]
    ZeroDimension,
    #[error("encoded coordinate {0} is not a non-negative integer")]
    NotNatural(String),
    #[error("coordinate {0} of an encoded input must be zero")]
    NonzeroPadding(usize),
    #[error("code does not decode to a parameter vector of length {0}")]
    WrongLength(usize),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("decoded network does not reproduce the label of sample #{0}")]
    LabelMismatch(usize),
}

#[derive(Debug, Clone, Error)]
pub enum LearnError {
    #[error("inconsistent dataset: input #{first} and #{second} coincide but their labels are too far apart")]
    InconsistentData { first: usize, second: usize },
    #[error("step budget exhausted after {} steps", .0.steps)]
    BudgetExhausted(Box<LearnReport>),
    #[error("dataset entry #{0} is not integral")]
    NonIntegerData(usize),
    #[error("invalid learner configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("classes {0} and {1} both accept the same input")]
    AmbiguousAccept(usize, usize),
    #[error("duplicate table key {0:?}")]
    DuplicateKey(Vec<i64>),
    #[error("input {0:?} is outside the classifier's domain")]
    DomainError(Vec<i64>),
    #[error("need samples from at least two classes")]
    InsufficientClasses,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid ball union: {0}")]
    InvalidBallUnion(String),
    #[error("epsilon must lie strictly between 0 and 1")]
    EpsilonOutOfRange,
}
