//! Project, canvas and idea-tree data model.
//!
//! Every mutation of a [`Project`] is expressed as an [`ActionEvent`] and
//! applied through [`Project::apply`], so replaying the action log from an
//! empty project reproduces the final state exactly.

mod event;
mod layout;
mod project;
mod session;
mod tree;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use event::{ActionEvent, ActionKind, Actor, EventPayload, PlacedCard};
pub use layout::{auto_layout, LayoutGrid, Position};
pub use project::{Project, SavedGroup, SCHEMA_VERSION};
pub use session::Session;
pub use tree::{Edge, IdeaTree};

macro_rules! id_type {
    ($($(#[$meta:meta])* $name:ident;)*) => {$(
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    )*};
}

id_type! {
    ProjectId;
    /// Identifies a canvas; each canvas holds exactly one idea tree.
    CanvasId;
    CardId;
    CategoryId;
    /// Identifies an idea on the overview page (before it becomes a canvas).
    IdeaId;
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown card `{0}`")]
    UnknownCard(CardId),
    #[error("unknown canvas `{0}`")]
    UnknownCanvas(CanvasId),
    #[error("unknown overview idea `{0}`")]
    UnknownIdea(IdeaId),
    #[error("unknown category `{0}`")]
    UnknownCategory(CategoryId),
    #[error("kind violation: {0}")]
    KindViolation(String),
    #[error("card name must not be empty")]
    EmptyName,
    #[error("question must not be empty")]
    EmptyQuestion,
    #[error("design brief description must not be empty")]
    EmptyBrief,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("category `{0}` already exists")]
    DuplicateCategory(String),
    #[error("event seq {got} does not follow {last}")]
    OutOfOrder { last: u64, got: u64 },
    #[error("event inconsistent with project state: {0}")]
    InconsistentEvent(String),
}

impl ModelError {
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::UnknownCard(_) => "UnknownCard",
            ModelError::UnknownCanvas(_) => "UnknownCanvas",
            ModelError::UnknownIdea(_) => "UnknownCard",
            ModelError::UnknownCategory(_) => "UnknownCategory",
            ModelError::KindViolation(_) => "KindViolation",
            ModelError::EmptyName => "EmptyName",
            ModelError::EmptyQuestion => "EmptyQuestion",
            ModelError::EmptyBrief => "EmptyBrief",
            ModelError::InvalidArgument(_) => "InvalidArgument",
            ModelError::DuplicateCategory(_) => "DuplicateCategory",
            ModelError::OutOfOrder { .. } => "OutOfOrder",
            ModelError::InconsistentEvent(_) => "InconsistentEvent",
        }
    }
}

/// The ideation prompt the whole project is working on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignBrief {
    pub id: String,
    pub title: String,
    pub description: String,
}

impl DesignBrief {
    pub fn new(
        id: impl Into<String>,
        title: impl Into<String>,
        description: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let description = description.into();
        if description.trim().is_empty() {
            return Err(ModelError::EmptyBrief);
        }
        Ok(Self {
            id: id.into(),
            title: title.into(),
            description,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CategoryOrigin {
    System,
    SimilarPivot,
}

/// A high-level solution direction (schema) grouping concrete ideas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaCategory {
    pub id: CategoryId,
    pub name: String,
    pub description: String,
    pub origin: CategoryOrigin,
}

/// Lenient bound around the prompt's "2-5 words".
pub const CATEGORY_NAME_WORDS: std::ops::RangeInclusive<usize> = 1..=8;

pub fn category_name_is_valid(name: &str) -> bool {
    CATEGORY_NAME_WORDS.contains(&name.split_whitespace().count())
}

/// Case-insensitive, whitespace-normalized comparison key for names.
pub fn name_key(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CardKind {
    Solution,
    Tradeoff,
    Schema,
    Qa,
}

impl CardKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CardKind::Solution => "solution",
            CardKind::Tradeoff => "tradeoff",
            CardKind::Schema => "schema",
            CardKind::Qa => "qa",
        }
    }

    /// Whether a card of kind `child` may hang below a card of this kind.
    pub fn check_child(self, child: CardKind) -> Result<(), ModelError> {
        if self == CardKind::Qa {
            return Err(ModelError::KindViolation(
                "qa cards are leaves and cannot have children".into(),
            ));
        }
        if child == CardKind::Tradeoff && self != CardKind::Solution {
            return Err(ModelError::KindViolation(format!(
                "a tradeoff card must be attached to a solution, not a {}",
                self.as_str()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for CardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    System,
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaPair {
    pub question: String,
    pub answer: String,
}

/// One card on a canvas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdeaCard {
    pub id: CardId,
    pub kind: CardKind,
    pub name: String,
    pub description: String,
    pub origin: Origin,
    pub canvas_id: CanvasId,
    pub created_at: u64,
    #[serde(default)]
    pub saved: bool,
    /// Set on schema cards and on roots copied from a categorized overview idea.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category_id: Option<CategoryId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qa: Option<QaPair>,
}

/// A card before the engine assigns identity and placement.
#[derive(Debug, Clone, PartialEq)]
pub struct CardDraft {
    pub kind: CardKind,
    pub name: String,
    pub description: String,
    pub origin: Origin,
    pub category_id: Option<CategoryId>,
    pub qa: Option<QaPair>,
}

impl CardDraft {
    pub fn system(kind: CardKind, name: impl Into<String>, description: impl Into<String>) -> Self {
        Self {
            kind,
            name: name.into(),
            description: description.into(),
            origin: Origin::System,
            category_id: None,
            qa: None,
        }
    }
}

/// An idea on the overview page, either generated under a category or
/// added by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverviewIdea {
    pub id: IdeaId,
    pub category_id: Option<CategoryId>,
    pub name: String,
    pub description: String,
    pub origin: Origin,
}
