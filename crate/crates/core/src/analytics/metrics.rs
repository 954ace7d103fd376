use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{InfoForest, JumpDistribution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tree_count: usize,
    pub node_count: usize,
    /// Mean over trees of the longest co-root-to-leaf path, in edges.
    pub avg_tree_depth: f64,
    /// Number of leaves.
    pub branch_count: usize,
    /// Mean over all branches of the nodes on the branch.
    pub avg_branch_length: f64,
    pub single_node_tree_fraction: f64,
    pub jump_distribution: JumpDistribution,
}

/// Breadth and depth metrics of a forest. The jump distribution is left
/// empty; attach one with [`MetricsReport::with_jumps`].
pub fn compute_metrics(forest: &InfoForest) -> MetricsReport {
    let mut depth_sum = 0usize;
    let mut branch_count = 0usize;
    let mut branch_nodes = 0usize;
    let mut singles = 0usize;
    for tree in forest.trees() {
        let children = tree.children();
        // Iterative DFS from each co-root carrying the edge depth.
        let mut stack: Vec<(&str, usize)> = tree
            .nodes
            .iter()
            .filter(|n| n.parent.is_none())
            .map(|n| (n.id.as_str(), 0))
            .collect();
        let mut max_depth = 0;
        while let Some((id, d)) = stack.pop() {
            match children.get(id) {
                Some(kids) => stack.extend(kids.iter().map(|k| (*k, d + 1))),
                None => {
                    branch_count += 1;
                    branch_nodes += d + 1;
                    max_depth = max_depth.max(d);
                }
            }
        }
        depth_sum += max_depth;
        if tree.len() == 1 {
            singles += 1;
        }
    }
    let tree_count = forest.trees().len();
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    MetricsReport {
        tree_count,
        node_count: forest.node_count(),
        avg_tree_depth: ratio(depth_sum, tree_count),
        branch_count,
        avg_branch_length: ratio(branch_nodes, branch_count),
        single_node_tree_fraction: ratio(singles, tree_count),
        jump_distribution: JumpDistribution::default(),
    }
}

impl MetricsReport {
    pub fn with_jumps(mut self, jumps: JumpDistribution) -> Self {
        self.jump_distribution = jumps;
        self
    }

    pub const COLUMNS: [&'static str; 11] = [
        "Tree Count",
        "Nodes Count",
        "Avg. Tree Depth",
        "Branch Count",
        "Avg. Branch Length",
        "Single-Node Trees",
        "New Tree (pct)",
        "Continue Branch (pct)",
        "Switch Tree (pct)",
        "Parallel Branch (pct)",
        "Cross Branch (pct)",
    ];

    /// Numeric values in [`Self::COLUMNS`] order.
    pub fn values(&self) -> [f64; 11] {
        let j = &self.jump_distribution;
        [
            self.tree_count as f64,
            self.node_count as f64,
            self.avg_tree_depth,
            self.branch_count as f64,
            self.avg_branch_length,
            self.single_node_tree_fraction,
            j.new_tree_pct,
            j.continue_branch_pct,
            j.switch_tree_pct,
            j.parallel_branch_pct,
            j.cross_branch_pct,
        ]
    }

    /// Cell values in [`Self::COLUMNS`] order.
    pub fn cells(&self) -> Vec<String> {
        let j = &self.jump_distribution;
        vec![
            self.tree_count.to_string(),
            self.node_count.to_string(),
            format!("{:.2}", self.avg_tree_depth),
            self.branch_count.to_string(),
            format!("{:.2}", self.avg_branch_length),
            format!("{:.2}", self.single_node_tree_fraction),
            format!("{:.2}", j.new_tree_pct),
            format!("{:.2}", j.continue_branch_pct),
            format!("{:.2}", j.switch_tree_pct),
            format!("{:.2}", j.parallel_branch_pct),
            format!("{:.2}", j.cross_branch_pct),
        ]
    }

    /// Markdown table with one row per labelled report.
    pub fn markdown_table<'a>(rows: impl IntoIterator<Item = (&'a str, &'a MetricsReport)>) -> String {
        let mut out = format!("| Session | {} |\n", Self::COLUMNS.join(" | "));
        out.push_str(&format!("|---{}|\n", "|---".repeat(Self::COLUMNS.len())));
        for (label, r) in rows {
            let _ = writeln!(out, "| {} | {} |", label, r.cells().join(" | "));
        }
        out
    }
}
