use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },

    #[error("unbound variable `{name}`")]
    UnboundVariable { name: String },

    #[error("domain error in `{expr}`: {message}")]
    Domain { expr: String, message: String },

    #[error("group kind mismatch: {0}")]
    KindMismatch(String),

    #[error("unsupported group kind for this operation: {0}")]
    UnsupportedGroup(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("join point has empty support")]
    EmptySupport,

    #[error("slot index {slot} out of range for stage {stage}")]
    SlotOutOfRange { slot: usize, stage: usize },

    #[error("stage overflow: need {needed}, have {stage}")]
    StageOverflow { needed: usize, stage: usize },

    #[error("weight at slot {0} is zero; point lies outside the chart")]
    ZeroWeightSlot(usize),

    #[error("unknown base complex `{0}`")]
    UnknownBase(String),

    #[error("point outside chart: {0}")]
    OutsideChart(String),

    #[error("point outside the overlap of charts {0} and {1}")]
    OutsideOverlap(usize, usize),

    #[error("no transition between charts {0} and {1}")]
    MissingTransition(usize, usize),

    #[error("chart assignment inconsistent with overlaps: {0}")]
    ChartAssignment(String),

    #[error("curve is not closed: {0}")]
    NotClosed(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("homotopy table `{name}` is not defined at degree {degree}")]
    TableOutOfRange { name: String, degree: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
