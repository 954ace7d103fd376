use serde::{Deserialize, Serialize};

use super::{CanvasId, CardId, CategoryId, IdeaCard, IdeaId, OverviewIdea, Position, SchemaCategory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actor {
    User,
    System,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    GenerateOverview,
    ExpandTradeoffs,
    ExpandSolutions,
    ExpandSimilar,
    AskQuestion,
    AddUserSolution,
    AddUserTradeoff,
    SaveIdea,
    CreateCanvas,
    DeleteCard,
    MoveCard,
}

impl ActionKind {
    /// Kinds that must produce at least one card, idea or category.
    pub fn is_generating(self) -> bool {
        !matches!(
            self,
            ActionKind::SaveIdea | ActionKind::DeleteCard | ActionKind::MoveCard
        )
    }

    pub fn invokes_llm(self) -> bool {
        matches!(
            self,
            ActionKind::GenerateOverview
                | ActionKind::ExpandTradeoffs
                | ActionKind::ExpandSolutions
                | ActionKind::ExpandSimilar
                | ActionKind::AskQuestion
        )
    }
}

/// A card together with the card it hangs under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedCard {
    pub parent: CardId,
    pub card: IdeaCard,
}

/// The state change carried by an event; enough to replay it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventPayload {
    Overview {
        categories: Vec<SchemaCategory>,
        ideas: Vec<OverviewIdea>,
    },
    UserIdea {
        idea: OverviewIdea,
    },
    Canvas {
        canvas: CanvasId,
        source_idea: IdeaId,
        root: IdeaCard,
    },
    Cards {
        canvas: CanvasId,
        cards: Vec<PlacedCard>,
    },
    Concepts {
        added: Vec<SchemaCategory>,
        proposed: Vec<CategoryId>,
    },
    Save {
        canvas: CanvasId,
        card: CardId,
    },
    Delete {
        canvas: CanvasId,
        card: CardId,
        removed: Vec<CardId>,
    },
    Move {
        canvas: CanvasId,
        card: CardId,
        position: Position,
    },
}

/// One line of the append-only action log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionEvent {
    pub seq: u64,
    pub timestamp_ms: u64,
    pub actor: Actor,
    pub kind: ActionKind,
    pub target_card: Option<CardId>,
    /// Ids of produced cards, overview ideas or categories.
    pub produced_cards: Vec<String>,
    pub llm_latency_ms: Option<u64>,
    /// Browser-search records are kept in the log but ignored by analytics.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub browser_search: bool,
    pub payload: EventPayload,
}

impl ActionEvent {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("events serialize")
    }

    /// Parses a JSONL action log, skipping blank lines.
    pub fn parse_jsonl(text: &str) -> Result<Vec<ActionEvent>, serde_json::Error> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect()
    }
}
