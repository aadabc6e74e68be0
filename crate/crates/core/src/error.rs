use thiserror::Error;

use crate::signal_model::SchemeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("scheme {scheme} is not supported by {operation}: {hint}")]
    Unsupported {
        scheme: SchemeId,
        operation: &'static str,
        hint: &'static str,
    },

    #[error("time {t} lies outside the realization span [{start}, {end})")]
    OutOfSpan { t: f64, start: f64, end: f64 },

    #[error("non-cyclic realization of {symbols} symbols is too short for entropy work (need {required})")]
    TooShort { symbols: usize, required: usize },

    #[error("invalid realization record: {0}")]
    InvalidRecord(String),

    #[error("frequency step {step} is coarser than the allowed {limit}")]
    CoarseGrid { step: f64, limit: f64 },

    #[error("window width {width} for symbol {symbol} is not positive")]
    EmptyWindow { symbol: usize, width: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("equivalent power factor must be positive, got {0}")]
    NonPositiveGamma(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
