use serde::{Deserialize, Serialize};

use super::{AnalyticsError, InfoForest};
use crate::model::{ActionEvent, ActionKind, EventPayload};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpType {
    NewTree,
    SwitchTree,
    ContinueBranch,
    ParallelBranch,
    CrossBranch,
}

/// Where one action happened.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSite {
    pub seq: u64,
    /// Node the action operated on, or the first node it produced when it
    /// started a tree.
    pub node: String,
    pub creates_tree: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub from_action_seq: u64,
    pub to_action_seq: u64,
    pub jump_type: JumpType,
}

/// Share of each jump type in percent. All zero when there are no jumps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpDistribution {
    pub total: usize,
    pub new_tree_pct: f64,
    pub switch_tree_pct: f64,
    pub continue_branch_pct: f64,
    pub parallel_branch_pct: f64,
    pub cross_branch_pct: f64,
}

impl JumpDistribution {
    pub fn from_records(records: &[JumpRecord]) -> Self {
        let total = records.len();
        if total == 0 {
            return Self::default();
        }
        let pct = |t: JumpType| 100.0 * records.iter().filter(|r| r.jump_type == t).count() as f64 / total as f64;
        Self {
            total,
            new_tree_pct: pct(JumpType::NewTree),
            switch_tree_pct: pct(JumpType::SwitchTree),
            continue_branch_pct: pct(JumpType::ContinueBranch),
            parallel_branch_pct: pct(JumpType::ParallelBranch),
            cross_branch_pct: pct(JumpType::CrossBranch),
        }
    }

    pub fn pct(&self, t: JumpType) -> f64 {
        match t {
            JumpType::NewTree => self.new_tree_pct,
            JumpType::SwitchTree => self.switch_tree_pct,
            JumpType::ContinueBranch => self.continue_branch_pct,
            JumpType::ParallelBranch => self.parallel_branch_pct,
            JumpType::CrossBranch => self.cross_branch_pct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpAnalysis {
    pub records: Vec<JumpRecord>,
    pub distribution: JumpDistribution,
}

/// Classifies each consecutive pair of actions.
///
/// Checked in order: the later action starts a tree (new tree); it lands in
/// another tree (switch tree); one site is an ancestor of, descendant of or
/// equal to the other (continue branch); both share a parent, co-roots
/// sharing the virtual root (parallel branch); otherwise cross branch.
pub fn classify_jumps(sites: &[ActionSite], forest: &InfoForest) -> Result<JumpAnalysis, AnalyticsError> {
    let mut located = Vec::with_capacity(sites.len());
    for s in sites {
        let tree = forest.tree_of(&s.node).ok_or(AnalyticsError::UnmappedAction(s.seq))?;
        let path = tree.path_to(&s.node).ok_or(AnalyticsError::UnmappedAction(s.seq))?;
        located.push((s, tree.key.as_str(), path));
    }
    let records: Vec<JumpRecord> = located
        .windows(2)
        .map(|w| {
            let (from, from_tree, from_path) = &w[0];
            let (to, to_tree, to_path) = &w[1];
            let jump_type = if to.creates_tree {
                JumpType::NewTree
            } else if from_tree != to_tree {
                JumpType::SwitchTree
            } else if from_path.contains(&to.node.as_str()) || to_path.contains(&from.node.as_str()) {
                JumpType::ContinueBranch
            } else if parent(from_path) == parent(to_path) {
                JumpType::ParallelBranch
            } else {
                JumpType::CrossBranch
            };
            JumpRecord {
                from_action_seq: from.seq,
                to_action_seq: to.seq,
                jump_type,
            }
        })
        .collect();
    let distribution = JumpDistribution::from_records(&records);
    Ok(JumpAnalysis { records, distribution })
}

fn parent<'a>(path: &[&'a str]) -> Option<&'a str> {
    path.len().checked_sub(2).map(|i| path[i])
}

/// Action sites from a FlexMind log: canvas creation and every action that
/// placed cards on a canvas. Browser-search records, saves, moves, deletes,
/// the overview and concept proposals carry no tree location and are skipped.
pub fn sites_from_log(events: &[ActionEvent]) -> Vec<ActionSite> {
    let mut sites = Vec::new();
    for ev in events.iter().filter(|e| !e.browser_search) {
        match &ev.payload {
            EventPayload::Canvas { root, .. } if ev.kind == ActionKind::CreateCanvas => {
                sites.push(ActionSite {
                    seq: ev.seq,
                    node: root.id.as_str().to_owned(),
                    creates_tree: true,
                });
            }
            EventPayload::Cards { cards, .. } => {
                let node = ev
                    .target_card
                    .as_ref()
                    .map(|c| c.as_str().to_owned())
                    .or_else(|| cards.first().map(|p| p.parent.as_str().to_owned()));
                if let Some(node) = node {
                    sites.push(ActionSite {
                        seq: ev.seq,
                        node,
                        creates_tree: false,
                    });
                }
            }
            _ => {}
        }
    }
    sites
}
