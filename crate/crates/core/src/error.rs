use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rank deficient input: residual norm {0:e} below tolerance")]
    RankDeficient(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("non-integer dimension {0}")]
    NonIntegerResult(String),
    #[error("too large: {0}")]
    TooLarge(String),
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("not comfortable: {0}")]
    NotComfortable(String),
    #[error("insufficient samples: need {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("measure {0:e} below the rejection-sampling floor")]
    MeasureTooSmall(f64),
    #[error("entry ({0}, {1}) appears more than twice")]
    MultiplicityTooHigh(usize, usize),
    #[error("evaluation stream ({0}, {1}) is the fitting stream")]
    StreamReuse(u64, u64),
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
