//! Deterministic inputs shared by the benchmarks.

use flexmind_core::analytics::{AnnotatedNode, Annotation, InfoForest, InfoNode, InfoTree, NodeClass};

/// `trees` trees of `per_tree` nodes each, every node hanging off the node
/// `i / 3` positions back so trees are bushy but several levels deep.
pub fn bushy_forest(trees: usize, per_tree: usize) -> InfoForest {
    let trees = (0..trees)
        .map(|t| {
            let nodes = (0..per_tree)
                .map(|i| {
                    let parent = (i > 0).then(|| format!("t{t}n{}", i / 3));
                    InfoNode::new(format!("t{t}n{i}"), "ideas", parent.as_deref())
                })
                .collect();
            InfoTree::new(format!("t{t}"), nodes)
        })
        .collect();
    InfoForest::new(trees).expect("bench forest is valid")
}

/// An annotation with `prompts` root prompts, each returning four ideas that
/// are then analyzed one after another.
pub fn session_annotation(prompts: usize) -> Annotation {
    let mut nodes = Vec::new();
    let mut push = |id: String, class, label: &str, parent: Option<String>| {
        nodes.push(AnnotatedNode {
            id,
            class,
            label: label.into(),
            is_initial_prompt: parent.is_none(),
            parent,
        })
    };
    for p in 0..prompts {
        push(
            format!("p{p}"),
            NodeClass::Action,
            "direct idea generation using ChatGPT or search",
            None,
        );
        for i in 0..4 {
            push(
                format!("p{p}i{i}"),
                NodeClass::Information,
                "ideas",
                Some(format!("p{p}")),
            );
            push(
                format!("p{p}a{i}"),
                NodeClass::Action,
                "analyze tradeoff using ChatGPT or search",
                Some(format!("p{p}i{i}")),
            );
            push(
                format!("p{p}t{i}"),
                NodeClass::Information,
                "tradeoffs",
                Some(format!("p{p}a{i}")),
            );
        }
    }
    Annotation {
        participant: None,
        condition: None,
        nodes,
    }
}

/// A subjects × raters matrix with a little structured disagreement.
pub fn ratings_matrix(subjects: usize, raters: usize) -> Vec<Vec<f64>> {
    (0..subjects)
        .map(|s| {
            (0..raters)
                .map(|r| 1.0 + ((s * 7 + r * 3) % 5) as f64 * 0.9 + (r as f64) * 0.05)
                .collect()
        })
        .collect()
}

/// Paired samples of length `n` with distinct, non-zero differences.
pub fn paired(n: usize) -> (Vec<f64>, Vec<f64>) {
    let a: Vec<f64> = (0..n).map(|i| 3.0 + (i % 4) as f64 * 0.25).collect();
    let b = a
        .iter()
        .enumerate()
        .map(|(i, x)| x - (i as f64 + 1.0) * if i % 3 == 0 { -0.1 } else { 0.1 })
        .collect();
    (a, b)
}
