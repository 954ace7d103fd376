use thiserror::Error;

use crate::analytics::AnalyticsError;
use crate::llm::LlmError;
use crate::model::ModelError;
use crate::scoring::ScoringError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Union of the module error vocabularies.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

impl Error {
    /// Machine-readable error code, stable across releases.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Model(e) => e.code(),
            Error::Llm(e) => e.code(),
            Error::Analytics(e) => e.code(),
            Error::Scoring(e) => e.code(),
        }
    }
}
