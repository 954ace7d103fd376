use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{ActionLabel, ActionSite, AnalyticsError, InfoForest, InfoLabel, InfoNode, InfoTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    Action,
    Information,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedNode {
    pub id: String,
    pub class: NodeClass,
    /// Codebook category text.
    pub label: String,
    #[serde(default)]
    pub parent: Option<String>,
    #[serde(default)]
    pub is_initial_prompt: bool,
}

/// A manually annotated baseline session. Action nodes appear in the order
/// the participant performed them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    pub nodes: Vec<AnnotatedNode>,
}

impl Annotation {
    pub fn from_json(text: &str) -> Result<Self, AnalyticsError> {
        let a: Annotation =
            serde_json::from_str(text).map_err(|e| AnalyticsError::MalformedAnnotation(e.to_string()))?;
        a.validate()?;
        Ok(a)
    }

    /// Rejects duplicate ids, dangling parents, cycles and labels that do not
    /// belong to the node's class. Information-to-information links are
    /// accepted.
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        let bad = |m: String| Err(AnalyticsError::MalformedAnnotation(m));
        let index = self.index();
        if index.len() != self.nodes.len() {
            return bad("duplicate node id".into());
        }
        for n in &self.nodes {
            let label_ok = match n.class {
                NodeClass::Action => n.label.parse::<ActionLabel>().is_ok(),
                NodeClass::Information => n.label.parse::<InfoLabel>().is_ok(),
            };
            if !label_ok {
                return bad(format!("`{}` is not a {:?} label (node `{}`)", n.label, n.class, n.id));
            }
            if n.is_initial_prompt && n.class != NodeClass::Action {
                return bad(format!("initial prompt `{}` must be an action node", n.id));
            }
            let mut seen = HashSet::new();
            let mut cur = n;
            while let Some(p) = &cur.parent {
                if !seen.insert(cur.id.as_str()) {
                    return bad(format!("cycle through `{}`", n.id));
                }
                cur = match index.get(p.as_str()) {
                    Some(next) => next,
                    None => return bad(format!("parent `{p}` of `{}` does not exist", cur.id)),
                };
            }
        }
        Ok(())
    }

    fn index(&self) -> HashMap<&str, &AnnotatedNode> {
        self.nodes.iter().map(|n| (n.id.as_str(), n)).collect()
    }
}

/// Result of walking up from a node through action nodes only.
struct Ascent<'a> {
    /// Nearest information ancestor.
    info_parent: Option<&'a str>,
    /// Top-most node reached when there is no information ancestor.
    top: &'a str,
}

fn ascend<'a>(index: &HashMap<&'a str, &'a AnnotatedNode>, start: &'a AnnotatedNode) -> Ascent<'a> {
    let mut top = start.id.as_str();
    let mut cur = start.parent.as_deref();
    while let Some(id) = cur {
        let node = index[id];
        if node.class == NodeClass::Information {
            return Ascent {
                info_parent: Some(id),
                top,
            };
        }
        top = id;
        cur = node.parent.as_deref();
    }
    Ascent { info_parent: None, top }
}

/// Removes action nodes. Each information node is re-parented to its nearest
/// information ancestor; information nodes with none become co-roots of the
/// tree named after the top-most node above them, so the outputs of one root
/// prompt form one tree under a virtual root.
pub fn collapse_action_nodes(annotation: &Annotation) -> Result<InfoForest, AnalyticsError> {
    annotation.validate()?;
    let index = annotation.index();
    let mut tree_of: HashMap<&str, String> = HashMap::new();
    let mut trees: Vec<InfoTree> = Vec::new();
    let mut slot: HashMap<String, usize> = HashMap::new();

    // Parents precede children only if the file says so; resolve tree keys
    // recursively in a pre-pass so node order stays the file order.
    fn key_of<'a>(
        id: &'a str,
        index: &HashMap<&'a str, &'a AnnotatedNode>,
        memo: &mut HashMap<&'a str, String>,
    ) -> String {
        if let Some(k) = memo.get(id) {
            return k.clone();
        }
        let up = ascend(index, index[id]);
        let key = match up.info_parent {
            Some(p) => key_of(p, index, memo),
            None => up.top.to_owned(),
        };
        memo.insert(id, key.clone());
        key
    }

    for n in annotation.nodes.iter().filter(|n| n.class == NodeClass::Information) {
        let key = key_of(&n.id, &index, &mut tree_of);
        let parent = ascend(&index, n).info_parent;
        let i = *slot.entry(key.clone()).or_insert_with(|| {
            trees.push(InfoTree::new(key.clone(), Vec::new()));
            trees.len() - 1
        });
        trees[i]
            .nodes
            .push(InfoNode::new(n.id.clone(), n.label.clone(), parent));
    }
    InfoForest::new(trees)
}

/// One site per action node, in file order.
///
/// The site is the nearest information ancestor of the action. An action
/// with none starts a tree (if its tree has not been visited yet) and is
/// sited at the first information node it produced. Actions that neither
/// act on nor produce information have no location and are skipped.
pub fn annotation_sites(annotation: &Annotation) -> Result<Vec<ActionSite>, AnalyticsError> {
    annotation.validate()?;
    let index = annotation.index();
    let mut visited_tops: HashSet<&str> = HashSet::new();
    let mut sites = Vec::new();
    for (seq, action) in annotation
        .nodes
        .iter()
        .filter(|n| n.class == NodeClass::Action)
        .enumerate()
    {
        let up = ascend(&index, action);
        let site = match up.info_parent {
            Some(p) => Some((p.to_owned(), false)),
            None => first_output(annotation, &index, &action.id).map(|first| {
                let fresh = visited_tops.insert(up.top);
                (first.to_owned(), fresh)
            }),
        };
        if let Some((node, creates_tree)) = site {
            sites.push(ActionSite {
                seq: seq as u64 + 1,
                node,
                creates_tree,
            });
        }
    }
    Ok(sites)
}

/// First information node (file order) whose action chain passes through
/// `action` before reaching any information ancestor.
fn first_output<'a>(
    annotation: &'a Annotation,
    index: &HashMap<&'a str, &'a AnnotatedNode>,
    action: &str,
) -> Option<&'a str> {
    annotation
        .nodes
        .iter()
        .filter(|n| n.class == NodeClass::Information)
        .find(|n| {
            let mut cur = n.parent.as_deref();
            while let Some(id) = cur {
                if id == action {
                    return true;
                }
                let p = index[id];
                if p.class == NodeClass::Information {
                    return false;
                }
                cur = p.parent.as_deref();
            }
            false
        })
        .map(|n| n.id.as_str())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::compute_metrics;

    fn node(id: &str, class: NodeClass, label: &str, parent: Option<&str>) -> AnnotatedNode {
        AnnotatedNode {
            id: id.into(),
            class,
            label: label.into(),
            parent: parent.map(Into::into),
            is_initial_prompt: parent.is_none() && class == NodeClass::Action,
        }
    }

    fn ann(nodes: Vec<AnnotatedNode>) -> Annotation {
        Annotation {
            participant: None,
            condition: None,
            nodes,
        }
    }

    const GEN: &str = "direct idea generation using ChatGPT or search";
    const TRADE: &str = "analyze tradeoff using ChatGPT or search";
    use NodeClass::{Action as A, Information as I};

    #[test]
    fn root_prompt_with_four_ideas() {
        let a = ann(vec![
            node("p", A, GEN, None),
            node("i1", I, "ideas", Some("p")),
            node("i2", I, "ideas", Some("p")),
            node("i3", I, "ideas", Some("p")),
            node("i4", I, "ideas", Some("p")),
        ]);
        let f = collapse_action_nodes(&a).unwrap();
        assert_eq!(f.trees().len(), 1);
        assert_eq!(f.node_count(), 4);
        assert!(f.trees()[0].nodes.iter().all(|n| n.parent.is_none()));
        let m = compute_metrics(&f);
        assert_eq!((m.tree_count, m.node_count, m.branch_count), (1, 4, 4));
    }

    #[test]
    fn alternating_chain_becomes_single_branch() {
        let a = ann(vec![
            node("x", I, "ideas", None),
            node("a1", A, TRADE, Some("x")),
            node("y", I, "tradeoffs", Some("a1")),
            node("a2", A, "find solution to certain tradeoff themselves", Some("y")),
            node("z", I, "ideas", Some("a2")),
        ]);
        let f = collapse_action_nodes(&a).unwrap();
        let m = compute_metrics(&f);
        assert_eq!((m.tree_count, m.node_count, m.branch_count), (1, 3, 1));
        assert_eq!(m.avg_branch_length, 3.0);
        assert_eq!(m.avg_tree_depth, 2.0);
    }

    #[test]
    fn empty_annotation() {
        let f = collapse_action_nodes(&ann(vec![])).unwrap();
        assert_eq!(f.node_count(), 0);
        assert_eq!(compute_metrics(&f).tree_count, 0);
    }

    #[test]
    fn info_to_info_links_are_accepted() {
        let a = ann(vec![node("x", I, "ideas", None), node("y", I, "ideas", Some("x"))]);
        let f = collapse_action_nodes(&a).unwrap();
        assert_eq!(f.trees()[0].node("y").unwrap().parent.as_deref(), Some("x"));
    }

    #[test]
    fn class_violations_and_cycles_error() {
        let wrong = ann(vec![node("x", I, TRADE, None)]);
        assert_eq!(collapse_action_nodes(&wrong).unwrap_err().code(), "MalformedAnnotation");
        let cyc = ann(vec![node("x", I, "ideas", Some("y")), node("y", A, TRADE, Some("x"))]);
        assert!(collapse_action_nodes(&cyc).is_err());
        let dangling = ann(vec![node("x", I, "ideas", Some("nope"))]);
        assert!(collapse_action_nodes(&dangling).is_err());
    }

    #[test]
    fn children_may_precede_parents_in_file() {
        let a = ann(vec![
            node("z", I, "ideas", Some("a2")),
            node("a2", A, TRADE, Some("y")),
            node("y", I, "ideas", Some("a1")),
            node("a1", A, GEN, None),
        ]);
        let f = collapse_action_nodes(&a).unwrap();
        assert_eq!(f.trees().len(), 1);
        assert_eq!(f.trees()[0].depth_of("z"), Some(1));
    }

    #[test]
    fn sites_follow_action_order() {
        let a = ann(vec![
            node("p", A, GEN, None),
            node("i1", I, "ideas", Some("p")),
            node("c", A, TRADE, Some("i1")),
            node("t1", I, "tradeoffs", Some("c")),
            node("o", A, "other", None),
        ]);
        let s = annotation_sites(&a).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].node.as_str(), s[0].creates_tree), ("i1", true));
        assert_eq!((s[1].node.as_str(), s[1].creates_tree), ("i1", false));
    }

    #[test]
    fn json_shape() {
        let text = r#"{"participant":"P1","nodes":[
            {"id":"p","class":"action","label":"Direct idea generation using ChatGPT or search","parent":null,"is_initial_prompt":true},
            {"id":"i","class":"information","label":"ideas","parent":"p"}]}"#;
        let a = Annotation::from_json(text).unwrap();
        assert_eq!(a.participant.as_deref(), Some("P1"));
        assert_eq!(a.nodes.len(), 2);
    }
}
