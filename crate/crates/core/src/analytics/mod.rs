//! Exploration analytics over information-node forests.
//!
//! Baseline sessions arrive as annotated action/information graphs and are
//! collapsed to information nodes; FlexMind sessions are rebuilt from the
//! action log with Q&A cards stripped. Both then share one metric layer:
//! depth counts edges, branch length counts nodes.

mod annotation;
mod codebook;
mod engagement;
mod forest;
mod jumps;
mod metrics;
mod session;

use thiserror::Error;

pub use annotation::{annotation_sites, collapse_action_nodes, AnnotatedNode, Annotation, NodeClass};
pub use codebook::{ActionLabel, InfoLabel};
pub use engagement::{engagement_from_samples, engagement_intervals, Engagement};
pub use forest::{
    card_forest_from_canvases, card_forest_from_log, idea_chain_length, strip_qa_nodes, InfoForest, InfoNode, InfoTree,
    QA_LABEL,
};
pub use jumps::{classify_jumps, sites_from_log, ActionSite, JumpAnalysis, JumpDistribution, JumpRecord, JumpType};
pub use metrics::{compute_metrics, MetricsReport};
pub use session::{analyze_annotation, analyze_log, SessionAnalysis};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("malformed annotation: {0}")]
    MalformedAnnotation(String),
    #[error("action {0} is not mapped to a tree location")]
    UnmappedAction(u64),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("need at least {need} actions, got {got}")]
    TooFewActions { need: usize, got: usize },
}

impl AnalyticsError {
    pub fn code(&self) -> &'static str {
        match self {
            AnalyticsError::MalformedAnnotation(_) => "MalformedAnnotation",
            AnalyticsError::UnmappedAction(_) => "UnmappedAction",
            AnalyticsError::UnknownNode(_) => "UnknownNode",
            AnalyticsError::TooFewActions { .. } => "TooFewActions",
        }
    }
}
