use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{CanvasId, CardId, CardKind, IdeaCard, IdeaId, ModelError, Position};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub parent: CardId,
    pub child: CardId,
}

/// A single-rooted tree of cards living on one canvas.
///
/// Cards are kept in creation order; edges point parent to child.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdeaTree {
    pub id: CanvasId,
    pub root: CardId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_idea: Option<IdeaId>,
    cards: Vec<IdeaCard>,
    edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    positions: BTreeMap<CardId, Position>,
}

impl IdeaTree {
    pub fn new(root: IdeaCard, source_idea: Option<IdeaId>) -> Result<Self, ModelError> {
        if root.kind != CardKind::Solution {
            return Err(ModelError::KindViolation(format!(
                "a tree must be rooted at a solution, not a {}",
                root.kind
            )));
        }
        Ok(Self {
            id: root.canvas_id.clone(),
            root: root.id.clone(),
            source_idea,
            cards: vec![root],
            edges: Vec::new(),
            positions: BTreeMap::new(),
        })
    }

    pub fn cards(&self) -> &[IdeaCard] {
        &self.cards
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn positions(&self) -> &BTreeMap<CardId, Position> {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    pub fn root_card(&self) -> &IdeaCard {
        &self.cards[0]
    }

    pub fn card(&self, id: &CardId) -> Option<&IdeaCard> {
        self.cards.iter().find(|c| &c.id == id)
    }

    pub(crate) fn card_mut(&mut self, id: &CardId) -> Option<&mut IdeaCard> {
        self.cards.iter_mut().find(|c| &c.id == id)
    }

    pub fn contains(&self, id: &CardId) -> bool {
        self.card(id).is_some()
    }

    pub fn parent_of(&self, id: &CardId) -> Option<&CardId> {
        self.edges.iter().find(|e| &e.child == id).map(|e| &e.parent)
    }

    /// Children of `id` in creation order.
    pub fn children_of(&self, id: &CardId) -> Vec<&IdeaCard> {
        let children: HashSet<&CardId> = self
            .edges
            .iter()
            .filter(|e| &e.parent == id)
            .map(|e| &e.child)
            .collect();
        self.cards.iter().filter(|c| children.contains(&c.id)).collect()
    }

    /// Checks that cards of the given kinds may be attached under `parent`.
    pub fn check_attach(&self, parent: &CardId, kinds: impl IntoIterator<Item = CardKind>) -> Result<(), ModelError> {
        let parent = self
            .card(parent)
            .ok_or_else(|| ModelError::UnknownCard(parent.clone()))?;
        for kind in kinds {
            parent.kind.check_child(kind)?;
        }
        Ok(())
    }

    /// Attaches each card as a child of `parent`.
    ///
    /// Either every card is attached or, on error, the tree is unchanged.
    pub fn attach_cards(&mut self, parent: &CardId, cards: Vec<IdeaCard>) -> Result<(), ModelError> {
        self.check_attach(parent, cards.iter().map(|c| c.kind))?;
        let mut seen = HashSet::new();
        for card in &cards {
            if self.contains(&card.id) || !seen.insert(&card.id) {
                return Err(ModelError::InvalidArgument(format!(
                    "card id `{}` already present",
                    card.id
                )));
            }
            if card.canvas_id != self.id {
                return Err(ModelError::InvalidArgument(format!(
                    "card `{}` belongs to canvas `{}`",
                    card.id, card.canvas_id
                )));
            }
        }
        for card in cards {
            self.edges.push(Edge {
                parent: parent.clone(),
                child: card.id.clone(),
            });
            self.cards.push(card);
        }
        Ok(())
    }

    /// Path from the root to `id`, both inclusive.
    pub fn trace_to_root(&self, id: &CardId) -> Result<Vec<&IdeaCard>, ModelError> {
        let mut path = vec![self.card(id).ok_or_else(|| ModelError::UnknownCard(id.clone()))?];
        let mut current = id;
        while let Some(parent) = self.parent_of(current) {
            let card = self
                .card(parent)
                .ok_or_else(|| ModelError::UnknownCard(parent.clone()))?;
            path.push(card);
            current = parent;
            if path.len() > self.cards.len() {
                return Err(ModelError::InconsistentEvent("cycle in tree".into()));
            }
        }
        path.reverse();
        Ok(path)
    }

    /// Edge count from the root to `id`.
    pub fn depth_of(&self, id: &CardId) -> Result<usize, ModelError> {
        Ok(self.trace_to_root(id)?.len() - 1)
    }

    /// Removes `id` and its whole subtree; returns the removed ids in
    /// creation order. The root cannot be removed this way.
    pub(crate) fn remove_subtree(&mut self, id: &CardId) -> Result<Vec<CardId>, ModelError> {
        if !self.contains(id) {
            return Err(ModelError::UnknownCard(id.clone()));
        }
        let mut doomed: HashSet<CardId> = HashSet::from([id.clone()]);
        // Edges are appended in creation order, so one pass reaches every descendant.
        for edge in &self.edges {
            if doomed.contains(&edge.parent) {
                doomed.insert(edge.child.clone());
            }
        }
        let removed = self
            .cards
            .iter()
            .filter(|c| doomed.contains(&c.id))
            .map(|c| c.id.clone())
            .collect();
        self.cards.retain(|c| !doomed.contains(&c.id));
        self.edges.retain(|e| !doomed.contains(&e.child));
        self.positions.retain(|k, _| !doomed.contains(k));
        Ok(removed)
    }

    pub(crate) fn set_position(&mut self, id: &CardId, position: Position) -> Result<(), ModelError> {
        if !self.contains(id) {
            return Err(ModelError::UnknownCard(id.clone()));
        }
        self.positions.insert(id.clone(), position);
        Ok(())
    }

    /// Verifies the structural invariants: one root, every other card has
    /// exactly one parent, connected, acyclic, and kind rules on every edge.
    pub fn validate(&self) -> Result<(), ModelError> {
        let broken = |msg: String| Err(ModelError::InconsistentEvent(msg));
        let by_id: HashMap<&CardId, &IdeaCard> = self.cards.iter().map(|c| (&c.id, c)).collect();
        if by_id.len() != self.cards.len() {
            return broken("duplicate card ids".into());
        }
        if self.cards.first().map(|c| &c.id) != Some(&self.root) {
            return broken("root is not the first card".into());
        }
        let mut parent_count: HashMap<&CardId, usize> = HashMap::new();
        for edge in &self.edges {
            let (Some(parent), Some(child)) = (by_id.get(&edge.parent), by_id.get(&edge.child)) else {
                return broken(format!("dangling edge {} -> {}", edge.parent, edge.child));
            };
            parent.kind.check_child(child.kind)?;
            *parent_count.entry(&edge.child).or_default() += 1;
        }
        for card in &self.cards {
            let expected = usize::from(card.id != self.root);
            if parent_count.get(&card.id).copied().unwrap_or(0) != expected {
                return broken(format!("card {} has wrong parent count", card.id));
            }
        }
        let mut reached = HashSet::from([&self.root]);
        let mut stack = vec![&self.root];
        while let Some(id) = stack.pop() {
            for edge in self.edges.iter().filter(|e| &e.parent == id) {
                if reached.insert(&edge.child) {
                    stack.push(&edge.child);
                }
            }
        }
        if reached.len() != self.cards.len() {
            return broken("tree is not connected".into());
        }
        Ok(())
    }
}
