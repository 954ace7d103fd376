//! Core engine for the FlexMind ideation workbench.
//!
//! The crate is split into four layers:
//!
//! - [`model`]: projects, canvases, idea trees and the append-only action log.
//! - [`llm`]: prompt templates, structured-output parsing and the prompt
//!   chains that broaden (schemas, similar ideas) and deepen (trade-offs,
//!   mitigations, Q&A) an idea tree.
//! - [`analytics`]: information-node forests, breadth/depth metrics, jump
//!   classification and engagement intervals.
//! - [`scoring`]: idea-quality aggregation and the rating statistics
//!   (ICC(2,k), Welch's t, Wilcoxon signed-rank).

pub mod analytics;
pub mod clock;
mod error;
pub mod llm;
pub mod model;
pub mod scoring;

pub use clock::{Clock, SteppingClock, SystemClock};
pub use error::{Error, Result};
pub use model::{
    ActionEvent, ActionKind, Actor, CanvasId, CardId, CardKind, CategoryId, DesignBrief, IdeaCard, IdeaId, IdeaTree,
    Origin, OverviewIdea, Project, ProjectId, SchemaCategory, Session,
};
