use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::model::{ActionEvent, EventPayload, IdeaTree};

/// Label carried by Q&A cards in a forest rebuilt from a FlexMind log.
pub const QA_LABEL: &str = "qa";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfoNode {
    pub id: String,
    pub label: String,
    /// `None` marks a co-root hanging directly under the tree's virtual root.
    pub parent: Option<String>,
}

impl InfoNode {
    pub fn new(id: impl Into<String>, label: impl Into<String>, parent: Option<&str>) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            parent: parent.map(str::to_owned),
        }
    }
}

/// One logical tree: information nodes under an implicit virtual root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfoTree {
    /// Stable identifier (a canvas id, or the root node of an annotation).
    pub key: String,
    pub nodes: Vec<InfoNode>,
}

impl InfoTree {
    pub fn new(key: impl Into<String>, nodes: Vec<InfoNode>) -> Self {
        Self { key: key.into(), nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: &str) -> Option<&InfoNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Children lists in node order, keyed by parent id.
    pub(crate) fn children(&self) -> HashMap<&str, Vec<&str>> {
        let mut map: HashMap<&str, Vec<&str>> = HashMap::new();
        for n in &self.nodes {
            if let Some(p) = &n.parent {
                map.entry(p.as_str()).or_default().push(&n.id);
            }
        }
        map
    }

    /// Edge count from the node's co-root down to the node.
    pub fn depth_of(&self, id: &str) -> Option<usize> {
        let index: HashMap<&str, &InfoNode> = self.nodes.iter().map(|n| (n.id.as_str(), n)).collect();
        let mut cur = *index.get(id)?;
        let mut depth = 0;
        while let Some(p) = &cur.parent {
            cur = index.get(p.as_str())?;
            depth += 1;
            if depth > self.nodes.len() {
                return None;
            }
        }
        Some(depth)
    }

    /// Ids on the path from the co-root to `id`, inclusive.
    pub fn path_to(&self, id: &str) -> Option<Vec<&str>> {
        let index: HashMap<&str, &InfoNode> = self.nodes.iter().map(|n| (n.id.as_str(), n)).collect();
        let mut cur = *index.get(id)?;
        let mut path = vec![cur.id.as_str()];
        while let Some(p) = &cur.parent {
            cur = index.get(p.as_str())?;
            path.push(&cur.id);
            if path.len() > self.nodes.len() {
                return None;
            }
        }
        path.reverse();
        Some(path)
    }
}

/// A validated set of information trees.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfoForest {
    trees: Vec<InfoTree>,
}

impl InfoForest {
    /// Checks that ids are unique across the forest, every parent lives in
    /// the same tree, and parent links are acyclic. Empty trees are dropped.
    pub fn new(trees: Vec<InfoTree>) -> Result<Self, AnalyticsError> {
        let mut seen = HashSet::new();
        let mut keys = HashSet::new();
        for t in &trees {
            if !keys.insert(t.key.as_str()) {
                return Err(AnalyticsError::MalformedAnnotation(format!(
                    "duplicate tree key `{}`",
                    t.key
                )));
            }
            for n in &t.nodes {
                if !seen.insert(n.id.as_str()) {
                    return Err(AnalyticsError::MalformedAnnotation(format!(
                        "duplicate node `{}`",
                        n.id
                    )));
                }
            }
        }
        for t in &trees {
            for n in &t.nodes {
                if let Some(p) = &n.parent {
                    if t.node(p).is_none() {
                        return Err(AnalyticsError::MalformedAnnotation(format!(
                            "parent `{p}` of `{}` is not in tree `{}`",
                            n.id, t.key
                        )));
                    }
                }
                if t.depth_of(&n.id).is_none() {
                    return Err(AnalyticsError::MalformedAnnotation(format!("cycle through `{}`", n.id)));
                }
            }
        }
        Ok(Self {
            trees: trees.into_iter().filter(|t| !t.is_empty()).collect(),
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn trees(&self) -> &[InfoTree] {
        &self.trees
    }

    pub fn tree(&self, key: &str) -> Option<&InfoTree> {
        self.trees.iter().find(|t| t.key == key)
    }

    /// The tree containing node `id`.
    pub fn tree_of(&self, id: &str) -> Option<&InfoTree> {
        self.trees.iter().find(|t| t.node(id).is_some())
    }

    pub fn node_count(&self) -> usize {
        self.trees.iter().map(InfoTree::len).sum()
    }

    /// Removes every node for which `drop` holds, re-parenting its children
    /// to its own parent.
    pub fn without(&self, drop: impl Fn(&InfoNode) -> bool) -> Self {
        let trees = self
            .trees
            .iter()
            .map(|t| {
                let parent_of: HashMap<&str, Option<&str>> =
                    t.nodes.iter().map(|n| (n.id.as_str(), n.parent.as_deref())).collect();
                let dropped: HashSet<&str> = t.nodes.iter().filter(|n| drop(n)).map(|n| n.id.as_str()).collect();
                let nodes = t
                    .nodes
                    .iter()
                    .filter(|n| !dropped.contains(n.id.as_str()))
                    .map(|n| {
                        let mut p = n.parent.as_deref();
                        while let Some(id) = p.filter(|id| dropped.contains(id)) {
                            p = parent_of[id];
                        }
                        InfoNode::new(n.id.clone(), n.label.clone(), p)
                    })
                    .collect();
                InfoTree::new(t.key.clone(), nodes)
            })
            .filter(|t| !t.is_empty())
            .collect();
        Self { trees }
    }
}

/// Removes Q&A cards. They are leaves, so the remaining structure is
/// unchanged.
pub fn strip_qa_nodes(forest: &InfoForest) -> InfoForest {
    forest.without(|n| n.label == QA_LABEL)
}

/// Rebuilds every canvas from the action log, keeping cards that were later
/// deleted (the forest records what was explored). Browser-search records
/// are ignored. Labels are card kinds.
pub fn card_forest_from_log(events: &[ActionEvent]) -> Result<InfoForest, AnalyticsError> {
    let mut trees: BTreeMap<u64, InfoTree> = BTreeMap::new();
    let mut order: HashMap<String, u64> = HashMap::new();
    for ev in events.iter().filter(|e| !e.browser_search) {
        match &ev.payload {
            EventPayload::Canvas { canvas, root, .. } => {
                let key = canvas.as_str().to_owned();
                if order.contains_key(&key) {
                    return Err(AnalyticsError::MalformedAnnotation(format!(
                        "canvas `{key}` created twice"
                    )));
                }
                order.insert(key.clone(), ev.seq);
                trees.insert(
                    ev.seq,
                    InfoTree::new(key, vec![InfoNode::new(root.id.as_str(), root.kind.as_str(), None)]),
                );
            }
            EventPayload::Cards { canvas, cards } => {
                let seq = *order
                    .get(canvas.as_str())
                    .ok_or_else(|| AnalyticsError::UnknownNode(canvas.as_str().to_owned()))?;
                let tree = trees.get_mut(&seq).expect("tree registered with its canvas");
                for placed in cards {
                    tree.nodes.push(InfoNode::new(
                        placed.card.id.as_str(),
                        placed.card.kind.as_str(),
                        Some(placed.parent.as_str()),
                    ));
                }
            }
            _ => {}
        }
    }
    InfoForest::new(trees.into_values().collect())
}

/// Forest of the live canvases (deleted cards are gone). Used when only a
/// project export is available and the log is not.
pub fn card_forest_from_canvases(canvases: &[IdeaTree]) -> Result<InfoForest, AnalyticsError> {
    let trees = canvases
        .iter()
        .map(|tree| {
            let nodes = tree
                .cards()
                .iter()
                .map(|c| {
                    InfoNode::new(
                        c.id.as_str(),
                        c.kind.as_str(),
                        tree.parent_of(&c.id).map(|p| p.as_str()),
                    )
                })
                .collect();
            InfoTree::new(tree.id.as_str(), nodes)
        })
        .collect();
    InfoForest::new(trees)
}

/// Edges from the node's co-root to the node.
pub fn idea_chain_length(forest: &InfoForest, node_id: &str) -> Result<usize, AnalyticsError> {
    forest
        .tree_of(node_id)
        .and_then(|t| t.depth_of(node_id))
        .ok_or_else(|| AnalyticsError::UnknownNode(node_id.to_owned()))
}
