//! Idea-quality scoring and the rating statistics.
//!
//! All functions here are pure and stateless.

mod band;
mod icc;
mod ratings;
mod report;
mod welch;
mod wilcoxon;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use band::{band_assign, Band, HIGH_MIN, LOW_MAX, MEDIUM_MAX, MEDIUM_MIN};
pub use icc::{icc_2k, Icc};
pub use ratings::{
    geometric_mean, parse_ratings_csv, score_idea, score_ideas, Dimension, ExcludedIdea, ExclusionReason, IdeaScore,
    RatingRecord, ScoreReport,
};
pub use report::{ConditionSummary, IccRow, MeanSd, RatingReport};
pub use welch::welch_t;
pub use wilcoxon::{exact_p_value, normal_p_value, signed_ranks, wilcoxon_signed_rank, WilcoxonResult, EXACT_MAX_N};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoringError {
    #[error("every rating of idea `{0}` was marked too vague")]
    AllRatingsVague(String),
    #[error("too few samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("both samples are constant")]
    BothConstant,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("all paired differences are zero")]
    AllZeroDifferences,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("score {0} is outside [1, 5]")]
    OutOfRange(f64),
    #[error("invalid rating: {0}")]
    InvalidRating(String),
    #[error("ratings csv: {0}")]
    Csv(String),
}

impl ScoringError {
    pub fn code(&self) -> &'static str {
        match self {
            ScoringError::AllRatingsVague(_) => "AllRatingsVague",
            ScoringError::TooFewSamples { .. } => "TooFewSamples",
            ScoringError::BothConstant => "BothConstant",
            ScoringError::LengthMismatch { .. } => "LengthMismatch",
            ScoringError::AllZeroDifferences => "AllZeroDifferences",
            ScoringError::DegenerateInput(_) => "DegenerateInput",
            ScoringError::OutOfRange(_) => "OutOfRange",
            ScoringError::InvalidRating(_) => "InvalidRating",
            ScoringError::Csv(_) => "InvalidRating",
        }
    }
}

/// Outcome of a two-sample or paired test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Bonferroni-adjusted p, present when a correction was requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrected_p: Option<f64>,
    /// Sample sizes used by the test (after any zero-drop).
    pub n: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub df: Option<f64>,
}

impl TestResult {
    /// Applies a Bonferroni correction for `m` comparisons. `m <= 1` leaves
    /// the p-value unchanged but still records it as corrected.
    pub fn with_bonferroni(mut self, m: usize) -> Self {
        self.corrected_p = Some(bonferroni(self.p_value, m));
        self
    }
}

pub fn bonferroni(p: f64, m: usize) -> f64 {
    (p * m.max(1) as f64).min(1.0)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased (n - 1) sample variance. Caller guarantees `xs.len() >= 2`.
fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}
