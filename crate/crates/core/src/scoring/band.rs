use serde::{Deserialize, Serialize};

use super::ScoringError;

/// Upper edge of the published low band.
pub const LOW_MAX: f64 = 2.621;
/// Lower edge of the published medium band.
pub const MEDIUM_MIN: f64 = 2.639;
pub const MEDIUM_MAX: f64 = 3.271;
pub const HIGH_MIN: f64 = 3.302;

// Gap midpoints, written as literals so the tie value compares exactly.
const LOW_CUT: f64 = 2.630;
const HIGH_CUT: f64 = 3.2865;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Low,
    Medium,
    High,
}

impl Band {
    pub fn as_str(self) -> &'static str {
        match self {
            Band::Low => "low",
            Band::Medium => "medium",
            Band::High => "high",
        }
    }
}

/// Maps an overall score in `[1, 5]` to a quality band.
///
/// The published intervals leave gaps (2.621..2.639 and 3.271..3.302). A
/// score in a gap goes to the band whose edge is nearer; an exact midpoint
/// goes to the lower band.
pub fn band_assign(score: f64) -> Result<Band, ScoringError> {
    if !(1.0..=5.0).contains(&score) {
        return Err(ScoringError::OutOfRange(score));
    }
    Ok(if score <= LOW_CUT {
        Band::Low
    } else if score <= HIGH_CUT {
        Band::Medium
    } else {
        Band::High
    })
}
