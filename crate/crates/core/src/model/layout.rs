use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CardId, IdeaTree};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

/// Cell size of the layered layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutGrid {
    pub column_width: f64,
    pub row_height: f64,
}

impl LayoutGrid {
    /// One unit per column and row; coordinates are then plain grid indices.
    pub const UNIT: LayoutGrid = LayoutGrid {
        column_width: 1.0,
        row_height: 1.0,
    };
}

impl Default for LayoutGrid {
    fn default() -> Self {
        Self {
            column_width: 320.0,
            row_height: 160.0,
        }
    }
}

/// Layered layout: column = depth, rows handed out depth-first in creation
/// order with a new row after every leaf.
///
/// A parent shares the row of its first child. Two cards at the same depth
/// are always separated by at least one leaf, so no two cards collide.
pub fn auto_layout(tree: &IdeaTree, grid: &LayoutGrid) -> BTreeMap<CardId, Position> {
    let mut out = BTreeMap::new();
    let mut row = 0usize;
    let mut stack = vec![(tree.root.clone(), 0usize)];
    while let Some((id, depth)) = stack.pop() {
        out.insert(
            id.clone(),
            Position {
                x: depth as f64 * grid.column_width,
                y: row as f64 * grid.row_height,
            },
        );
        let children = tree.children_of(&id);
        if children.is_empty() {
            row += 1;
        }
        for child in children.into_iter().rev() {
            stack.push((child.id.clone(), depth + 1));
        }
    }
    out
}
