use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::model::{ActionEvent, Actor};

/// Inter-action pacing compared with system response time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Engagement {
    pub intervals: usize,
    pub mean_interval_s: f64,
    /// Sample SD of the intervals.
    pub sd: f64,
    pub mean_llm_latency_s: f64,
    /// Share of intervals strictly longer than three mean latencies.
    pub fraction_gt_3x: f64,
}

/// Engagement over user actions in a log. Intervals are deltas between
/// consecutive user actions; latency is averaged over every event that
/// called the model. Browser-search records are ignored.
pub fn engagement_intervals(events: &[ActionEvent]) -> Result<Engagement, AnalyticsError> {
    let kept: Vec<&ActionEvent> = events.iter().filter(|e| !e.browser_search).collect();
    let stamps: Vec<u64> = kept
        .iter()
        .filter(|e| e.actor == Actor::User)
        .map(|e| e.timestamp_ms)
        .collect();
    let latencies: Vec<u64> = kept.iter().filter_map(|e| e.llm_latency_ms).collect();
    engagement_from_samples(&stamps, &latencies)
}

/// Engagement from raw timestamps and latencies, both in milliseconds.
pub fn engagement_from_samples(timestamps_ms: &[u64], latencies_ms: &[u64]) -> Result<Engagement, AnalyticsError> {
    if timestamps_ms.len() < 2 {
        return Err(AnalyticsError::TooFewActions {
            need: 2,
            got: timestamps_ms.len(),
        });
    }
    let intervals: Vec<f64> = timestamps_ms
        .windows(2)
        .map(|w| w[1].saturating_sub(w[0]) as f64 / 1000.0)
        .collect();
    let n = intervals.len() as f64;
    let mean = intervals.iter().sum::<f64>() / n;
    let sd = if intervals.len() > 1 {
        (intervals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let latency = if latencies_ms.is_empty() {
        0.0
    } else {
        latencies_ms.iter().sum::<u64>() as f64 / 1000.0 / latencies_ms.len() as f64
    };
    let over = intervals.iter().filter(|i| **i > 3.0 * latency).count();
    Ok(Engagement {
        intervals: intervals.len(),
        mean_interval_s: mean,
        sd,
        mean_llm_latency_s: latency,
        fraction_gt_3x: over as f64 / n,
    })
}
