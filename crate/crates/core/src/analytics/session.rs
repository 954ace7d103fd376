use serde::{Deserialize, Serialize};

use super::{
    annotation_sites, card_forest_from_log, classify_jumps, collapse_action_nodes, compute_metrics, sites_from_log,
    strip_qa_nodes, AnalyticsError, Annotation, JumpAnalysis, MetricsReport,
};
use crate::model::ActionEvent;

/// Metrics plus the per-jump records behind the distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionAnalysis {
    pub metrics: MetricsReport,
    pub jumps: JumpAnalysis,
}

/// Analyzes a FlexMind action log. Q&A cards are dropped from the forest.
pub fn analyze_log(events: &[ActionEvent]) -> Result<SessionAnalysis, AnalyticsError> {
    let forest = strip_qa_nodes(&card_forest_from_log(events)?);
    let jumps = classify_jumps(&sites_from_log(events), &forest)?;
    Ok(SessionAnalysis {
        metrics: compute_metrics(&forest).with_jumps(jumps.distribution.clone()),
        jumps,
    })
}

/// Analyzes a manually annotated baseline session.
pub fn analyze_annotation(annotation: &Annotation) -> Result<SessionAnalysis, AnalyticsError> {
    let forest = collapse_action_nodes(annotation)?;
    let jumps = classify_jumps(&annotation_sites(annotation)?, &forest)?;
    Ok(SessionAnalysis {
        metrics: compute_metrics(&forest).with_jumps(jumps.distribution.clone()),
        jumps,
    })
}
