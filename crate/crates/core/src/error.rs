use alloc::string::String;

/// Errors produced by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid band specification: {0}")]
    Band(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("input too short: need at least {needed} samples, got {got}")]
    Length { needed: usize, got: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("no trials: {0}")]
    Empty(String),
    #[error("metric undefined: {0}")]
    Metric(String),
    #[error("incomplete coverage: {0}")]
    Coverage(String),
    #[error("invalid size: {0}")]
    Size(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
