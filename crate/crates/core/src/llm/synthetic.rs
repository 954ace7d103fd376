//! An offline model stand-in that answers every template with well-formed,
//! deterministic output. Used for demos (`serve --offline`) and for tests
//! that need many distinct sessions without fixture files.

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{prompt_key, LlmClient, LlmError, TemplateId, NO_CONCEPT_SENTINEL};

const ADJECTIVES: &[&str] = &[
    "Adaptive", "Modular", "Passive", "Compact", "Layered", "Pulsed", "Guided", "Shared", "Sealed", "Portable",
    "Rotating", "Tuned", "Hybrid", "Folding", "Gentle", "Smart",
];
const NOUNS: &[&str] = &[
    "Mist",
    "Sleeve",
    "Cartridge",
    "Membrane",
    "Brush",
    "Chamber",
    "Pad",
    "Foam",
    "Rack",
    "Filter",
    "Lattice",
    "Sensor",
    "Capsule",
    "Wand",
    "Drawer",
    "Loop",
];
const CONCERNS: &[&str] = &[
    "Cost Overrun",
    "Fabric Wear",
    "Energy Draw",
    "Residue Buildup",
    "Setup Burden",
    "Uneven Coverage",
    "Noise Levels",
    "Maintenance Load",
    "Odor Retention",
    "Safety Risk",
    "Limited Capacity",
    "Slow Cycle",
    "Supply Dependence",
    "Skill Barrier",
    "Waste Output",
    "Sensor Drift",
];
const LENSES: &[&str] = &[
    "Mechanical Agitation",
    "Chemical Treatment",
    "Thermal Methods",
    "Airflow Refresh",
    "Material Innovation",
    "Behavior Change",
    "Shared Services",
    "Water Recycling",
    "Sensing And Feedback",
    "Nature Inspired Processes",
];

/// Deterministic responder keyed on the rendered prompt.
#[derive(Debug, Default, Clone, Copy)]
pub struct SyntheticClient;

struct Picker(Vec<u8>);

impl Picker {
    fn new(seed: &str) -> Self {
        Self(Sha256::digest(seed.as_bytes()).to_vec())
    }

    fn pick<'a>(&self, list: &[&'a str], slot: usize) -> &'a str {
        list[self.0[slot % self.0.len()] as usize % list.len()]
    }
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = format!(
        "< table >\n| {} |\n|{}\n",
        header.join(" | "),
        "---|".repeat(header.len())
    );
    for r in rows {
        out.push_str(&format!("| {} |\n", r.join(" | ")));
    }
    out.push_str("</ table >");
    out
}

/// `count` distinct two-word names.
fn names(seed: &str, count: usize, first: &[&str], second: &[&str]) -> Vec<String> {
    let p = Picker::new(seed);
    let mut out: Vec<String> = Vec::new();
    let mut slot = 0;
    while out.len() < count {
        let name = format!("{} {}", p.pick(first, slot), p.pick(second, slot + 1));
        let name = if out.contains(&name) || slot >= 60 {
            format!("{name} {}", out.len() + 1)
        } else {
            name
        };
        if !out.contains(&name) {
            out.push(name);
        }
        slot += 2;
    }
    out
}

fn count_binding(b: &super::Bindings, key: &str) -> usize {
    b.get(key).and_then(|v| v.trim().parse().ok()).unwrap_or(3)
}

fn respond(prompt: &str) -> Result<String, LlmError> {
    let (id, b) = TemplateId::identify(prompt).ok_or_else(|| LlmError::MissingFixture(prompt_key(prompt)))?;
    let seed = prompt_key(prompt);
    let text = match id {
        TemplateId::P1 => {
            let rows: Vec<Vec<String>> = names(&seed, 3, CONCERNS, &["", ""])
                .into_iter()
                .enumerate()
                .map(|(i, n)| {
                    vec![
                        (i + 1).to_string(),
                        n.trim().to_owned(),
                        "A limitation of this mechanism.".into(),
                    ]
                })
                .collect();
            table(&["id", "name", "description"], &rows)
        }
        TemplateId::P2 | TemplateId::P6 => {
            let n = if id == TemplateId::P6 {
                count_binding(&b, "mech_num")
            } else {
                3
            };
            let rows: Vec<Vec<String>> = names(&seed, n, ADJECTIVES, NOUNS)
                .into_iter()
                .enumerate()
                .map(|(i, name)| vec![(i + 1).to_string(), name, "A concrete refinement of the idea.".into()])
                .collect();
            table(&["id", "name", "description"], &rows)
        }
        TemplateId::P3 => {
            let n = count_binding(&b, "concept_num");
            let rows: Vec<Vec<String>> = names(&seed, n, ADJECTIVES, LENSES)
                .into_iter()
                .map(|name| vec![name, "A high-level concept the idea embodies.".into()])
                .collect();
            table(&["name", "description"], &rows)
        }
        TemplateId::P4 => {
            let list: Vec<String> = b
                .get("mechanism_list")
                .and_then(|v| serde_json::from_str(v).ok())
                .unwrap_or_default();
            match list.first() {
                Some(first) => table(&["name", "reason"], &[vec![first.clone(), "Closely related.".into()]]),
                None => NO_CONCEPT_SENTINEL.to_owned(),
            }
        }
        TemplateId::P5 => String::new(),
        TemplateId::P7 => "< answer > It depends on the setup; a short pilot test would settle it. </ answer >".into(),
        TemplateId::P8 => {
            let items: Vec<Value> = LENSES
                .iter()
                .map(|l| json!({"direction": l, "description": format!("Address the challenge through {}.", l.to_lowercase())}))
                .collect();
            serde_json::to_string_pretty(&items).expect("json")
        }
        TemplateId::P9 => {
            let input: Vec<Value> = b
                .get("directions_output")
                .and_then(|v| serde_json::from_str(v).ok())
                .unwrap_or_default();
            let cats: Vec<Value> = input
                .iter()
                .map(|d| {
                    json!({"name": d["direction"].as_str().unwrap_or("Direction"), "description": d["description"]})
                })
                .collect();
            serde_json::to_string_pretty(&json!({ "categories": cats })).expect("json")
        }
        TemplateId::P10 => {
            let input: Value = b
                .get("categories_output")
                .and_then(|v| serde_json::from_str(v).ok())
                .unwrap_or(Value::Null);
            let cats = input["categories"].as_array().cloned().unwrap_or_default();
            let groups: Vec<Value> = cats
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let name = c["name"].as_str().unwrap_or("Category");
                    let ideas: Vec<Value> = names(&format!("{seed}{name}"), 5, ADJECTIVES, NOUNS)
                        .into_iter()
                        .map(|n| json!({"name": n, "description": format!("A {} idea.", name.to_lowercase())}))
                        .collect();
                    json!({"id": (i + 1).to_string(), "name": name, "description": c["description"], "mechanisms": ideas})
                })
                .collect();
            serde_json::to_string_pretty(&groups).expect("json")
        }
    };
    Ok(text)
}

impl LlmClient for SyntheticClient {
    fn model_name(&self) -> &str {
        "synthetic"
    }

    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        respond(prompt)
    }
}
