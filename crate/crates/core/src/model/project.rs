use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::event::{ActionEvent, ActionKind, EventPayload, PlacedCard};
use super::{
    name_key, CanvasId, CardId, CardKind, CategoryId, DesignBrief, IdeaCard, IdeaId, IdeaTree, ModelError,
    OverviewIdea, SchemaCategory,
};

/// Version of the project JSON document; loads of any other version fail.
pub const SCHEMA_VERSION: u32 = 1;

/// A design brief plus everything explored for it.
///
/// `action_log` is not part of the JSON document; it is stored and streamed
/// separately as JSONL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub schema_version: u32,
    pub id: super::ProjectId,
    pub brief: DesignBrief,
    pub categories: Vec<SchemaCategory>,
    pub overview_ideas: Vec<OverviewIdea>,
    pub canvases: Vec<IdeaTree>,
    /// Saved solution cards in the order they were saved.
    pub saved: Vec<CardId>,
    #[serde(skip)]
    action_log: Vec<ActionEvent>,
}

/// Saved ideas sharing one category (or none).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SavedGroup {
    pub category_id: Option<CategoryId>,
    pub category_name: String,
    pub cards: Vec<IdeaCard>,
}

fn fail<T>(msg: impl Into<String>) -> Result<T, ModelError> {
    Err(ModelError::InconsistentEvent(msg.into()))
}

impl Project {
    pub fn new(id: super::ProjectId, brief: DesignBrief) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            id,
            brief,
            categories: Vec::new(),
            overview_ideas: Vec::new(),
            canvases: Vec::new(),
            saved: Vec::new(),
            action_log: Vec::new(),
        }
    }

    /// Rebuilds a project by applying `events` to an empty one.
    pub fn replay<'a>(
        id: super::ProjectId,
        brief: DesignBrief,
        events: impl IntoIterator<Item = &'a ActionEvent>,
    ) -> Result<Self, ModelError> {
        let mut project = Self::new(id, brief);
        for event in events {
            project.apply(event.clone())?;
        }
        Ok(project)
    }

    /// Attaches a log loaded from storage to a deserialized document.
    pub fn with_log(mut self, log: Vec<ActionEvent>) -> Self {
        self.action_log = log;
        self
    }

    pub fn action_log(&self) -> &[ActionEvent] {
        &self.action_log
    }

    pub fn next_seq(&self) -> u64 {
        self.action_log.last().map_or(1, |e| e.seq + 1)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("project serializes")
    }

    pub fn log_jsonl(&self) -> String {
        let mut out = String::new();
        for event in &self.action_log {
            out.push_str(&event.to_json_line());
            out.push('\n');
        }
        out
    }

    pub fn canvas(&self, id: &CanvasId) -> Result<&IdeaTree, ModelError> {
        self.canvases
            .iter()
            .find(|c| &c.id == id)
            .ok_or_else(|| ModelError::UnknownCanvas(id.clone()))
    }

    fn canvas_index(&self, id: &CanvasId) -> Result<usize, ModelError> {
        self.canvases
            .iter()
            .position(|c| &c.id == id)
            .ok_or_else(|| ModelError::UnknownCanvas(id.clone()))
    }

    /// Finds the canvas holding `card`.
    pub fn locate(&self, card: &CardId) -> Result<&IdeaTree, ModelError> {
        self.canvases
            .iter()
            .find(|c| c.contains(card))
            .ok_or_else(|| ModelError::UnknownCard(card.clone()))
    }

    pub fn card(&self, card: &CardId) -> Result<&IdeaCard, ModelError> {
        self.locate(card)
            .map(|tree| tree.card(card).expect("located tree holds card"))
    }

    pub fn overview_idea(&self, id: &IdeaId) -> Result<&OverviewIdea, ModelError> {
        self.overview_ideas
            .iter()
            .find(|i| &i.id == id)
            .ok_or_else(|| ModelError::UnknownIdea(id.clone()))
    }

    pub fn category(&self, id: &CategoryId) -> Result<&SchemaCategory, ModelError> {
        self.categories
            .iter()
            .find(|c| &c.id == id)
            .ok_or_else(|| ModelError::UnknownCategory(id.clone()))
    }

    pub fn category_by_name(&self, name: &str) -> Option<&SchemaCategory> {
        let key = name_key(name);
        self.categories.iter().find(|c| name_key(&c.name) == key)
    }

    /// Overview ideas of one category (`None` = user-added ideas).
    pub fn ideas_in(&self, category: Option<&CategoryId>) -> Vec<&OverviewIdea> {
        self.overview_ideas
            .iter()
            .filter(|i| i.category_id.as_ref() == category)
            .collect()
    }

    /// Category a card belongs to: the nearest ancestor-or-self carrying one.
    pub fn category_of(&self, card: &CardId) -> Result<Option<&CategoryId>, ModelError> {
        let tree = self.locate(card)?;
        Ok(tree
            .trace_to_root(card)?
            .into_iter()
            .rev()
            .find_map(|c| c.category_id.as_ref()))
    }

    /// Saved solutions grouped by category, in category order; uncategorized last.
    pub fn list_saved(&self) -> Vec<SavedGroup> {
        let mut groups: Vec<SavedGroup> = Vec::new();
        for id in &self.saved {
            let Ok(card) = self.card(id) else { continue };
            let category = self.category_of(id).ok().flatten().cloned();
            match groups.iter_mut().find(|g| g.category_id == category) {
                Some(group) => group.cards.push(card.clone()),
                None => groups.push(SavedGroup {
                    category_name: category
                        .as_ref()
                        .and_then(|c| self.category(c).ok())
                        .map_or_else(|| "Uncategorized".to_owned(), |c| c.name.clone()),
                    category_id: category,
                    cards: vec![card.clone()],
                }),
            }
        }
        let rank = |g: &SavedGroup| {
            g.category_id
                .as_ref()
                .and_then(|id| self.categories.iter().position(|c| &c.id == id))
                .unwrap_or(usize::MAX)
        };
        groups.sort_by_key(rank);
        groups
    }

    fn card_id_taken(&self, id: &CardId) -> bool {
        self.canvases.iter().any(|c| c.contains(id))
    }

    fn check_new_categories(&self, added: &[SchemaCategory]) -> Result<(), ModelError> {
        let mut keys: HashSet<String> = self.categories.iter().map(|c| name_key(&c.name)).collect();
        let mut ids: HashSet<&CategoryId> = self.categories.iter().map(|c| &c.id).collect();
        for category in added {
            if !keys.insert(name_key(&category.name)) {
                return Err(ModelError::DuplicateCategory(category.name.clone()));
            }
            if !ids.insert(&category.id) {
                return fail(format!("duplicate category id {}", category.id));
            }
        }
        Ok(())
    }

    /// Validates `event` against the current state and applies it.
    ///
    /// On error the project is left untouched.
    pub fn apply(&mut self, event: ActionEvent) -> Result<(), ModelError> {
        if let Some(last) = self.action_log.last() {
            if event.seq <= last.seq {
                return Err(ModelError::OutOfOrder {
                    last: last.seq,
                    got: event.seq,
                });
            }
        }
        if event.kind.is_generating() && event.produced_cards.is_empty() {
            return fail(format!("{:?} event produced nothing", event.kind));
        }
        if event.kind.invokes_llm() != event.llm_latency_ms.is_some() {
            return fail(format!("{:?} event has inconsistent llm latency", event.kind));
        }
        match &event.payload {
            EventPayload::Overview { categories, ideas } => {
                self.expect_kind(&event, &[ActionKind::GenerateOverview])?;
                self.check_new_categories(categories)?;
                for idea in ideas {
                    let known = idea
                        .category_id
                        .as_ref()
                        .is_none_or(|c| categories.iter().any(|x| &x.id == c) || self.category(c).is_ok());
                    if !known || self.overview_idea(&idea.id).is_ok() {
                        return fail(format!("bad overview idea {}", idea.id));
                    }
                }
                self.categories.extend(categories.iter().cloned());
                self.overview_ideas.extend(ideas.iter().cloned());
            }
            EventPayload::UserIdea { idea } => {
                self.expect_kind(&event, &[ActionKind::AddUserSolution])?;
                if self.overview_idea(&idea.id).is_ok() {
                    return fail(format!("duplicate idea {}", idea.id));
                }
                if idea.name.trim().is_empty() {
                    return Err(ModelError::EmptyName);
                }
                self.overview_ideas.push(idea.clone());
            }
            EventPayload::Canvas {
                canvas,
                source_idea,
                root,
            } => {
                self.expect_kind(&event, &[ActionKind::CreateCanvas])?;
                self.overview_idea(source_idea)?;
                if self.canvas(canvas).is_ok() || &root.canvas_id != canvas {
                    return fail(format!("bad canvas id {canvas}"));
                }
                if self.card_id_taken(&root.id) {
                    return fail(format!("duplicate card id {}", root.id));
                }
                let tree = IdeaTree::new(root.clone(), Some(source_idea.clone()))?;
                self.canvases.push(tree);
            }
            EventPayload::Cards { canvas, cards } => {
                self.expect_kind(
                    &event,
                    &[
                        ActionKind::ExpandTradeoffs,
                        ActionKind::ExpandSolutions,
                        ActionKind::ExpandSimilar,
                        ActionKind::AskQuestion,
                        ActionKind::AddUserSolution,
                        ActionKind::AddUserTradeoff,
                    ],
                )?;
                let index = self.canvas_index(canvas)?;
                for placed in cards {
                    if self.card_id_taken(&placed.card.id) {
                        return fail(format!("duplicate card id {}", placed.card.id));
                    }
                }
                let produced: Vec<&str> = cards.iter().map(|p| p.card.id.as_str()).collect();
                if produced != event.produced_cards {
                    return fail("produced_cards does not match payload");
                }
                let mut tree = self.canvases[index].clone();
                for PlacedCard { parent, card } in cards {
                    tree.attach_cards(parent, vec![card.clone()])?;
                }
                self.canvases[index] = tree;
            }
            EventPayload::Concepts { added, proposed } => {
                self.expect_kind(&event, &[ActionKind::ExpandSimilar])?;
                self.check_new_categories(added)?;
                for id in proposed {
                    if self.category(id).is_err() && !added.iter().any(|c| &c.id == id) {
                        return Err(ModelError::UnknownCategory(id.clone()));
                    }
                }
                self.categories.extend(added.iter().cloned());
            }
            EventPayload::Save { canvas, card } => {
                self.expect_kind(&event, &[ActionKind::SaveIdea])?;
                let index = self.canvas_index(canvas)?;
                let found = self.canvases[index]
                    .card_mut(card)
                    .ok_or_else(|| ModelError::UnknownCard(card.clone()))?;
                if found.kind != CardKind::Solution {
                    return Err(ModelError::KindViolation(format!(
                        "only solution cards can be saved, not a {}",
                        found.kind
                    )));
                }
                found.saved = true;
                if !self.saved.contains(card) {
                    self.saved.push(card.clone());
                }
            }
            EventPayload::Delete { canvas, card, removed } => {
                self.expect_kind(&event, &[ActionKind::DeleteCard])?;
                let index = self.canvas_index(canvas)?;
                let tree = &self.canvases[index];
                if &tree.root == card {
                    let all: Vec<CardId> = tree.cards().iter().map(|c| c.id.clone()).collect();
                    if &all != removed {
                        return fail("removed list does not match canvas");
                    }
                    self.canvases.remove(index);
                } else {
                    let mut tree = tree.clone();
                    if &tree.remove_subtree(card)? != removed {
                        return fail("removed list does not match subtree");
                    }
                    self.canvases[index] = tree;
                }
                self.saved.retain(|id| !removed.contains(id));
            }
            EventPayload::Move { canvas, card, position } => {
                self.expect_kind(&event, &[ActionKind::MoveCard])?;
                let index = self.canvas_index(canvas)?;
                self.canvases[index].set_position(card, *position)?;
            }
        }
        self.action_log.push(event);
        Ok(())
    }

    fn expect_kind(&self, event: &ActionEvent, allowed: &[ActionKind]) -> Result<(), ModelError> {
        if allowed.contains(&event.kind) {
            Ok(())
        } else {
            fail(format!("{:?} event with mismatched payload", event.kind))
        }
    }
}
