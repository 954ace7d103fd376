use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::LlmError;

/// The ten frozen prompt templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TemplateId {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
    P9,
    P10,
}

impl TemplateId {
    pub const ALL: [TemplateId; 10] = [
        TemplateId::P1,
        TemplateId::P2,
        TemplateId::P3,
        TemplateId::P4,
        TemplateId::P5,
        TemplateId::P6,
        TemplateId::P7,
        TemplateId::P8,
        TemplateId::P9,
        TemplateId::P10,
    ];

    pub fn title(self) -> &'static str {
        match self {
            TemplateId::P1 => "Tradeoff Generation",
            TemplateId::P2 => "Solution Generation",
            TemplateId::P3 => "Abstraction Generation",
            TemplateId::P4 => "Relevant Abstraction Retrieval",
            TemplateId::P5 => "Abstraction Redundant Check",
            TemplateId::P6 => "Similar Idea Generation",
            TemplateId::P7 => "Answer Generation",
            TemplateId::P8 => "Schema Generation",
            TemplateId::P9 => "Schema Check",
            TemplateId::P10 => "Idea Generation",
        }
    }

    fn body(self) -> &'static str {
        let raw = match self {
            TemplateId::P1 => include_str!("prompts/p01.txt"),
            TemplateId::P2 => include_str!("prompts/p02.txt"),
            TemplateId::P3 => include_str!("prompts/p03.txt"),
            TemplateId::P4 => include_str!("prompts/p04.txt"),
            TemplateId::P5 => include_str!("prompts/p05.txt"),
            TemplateId::P6 => include_str!("prompts/p06.txt"),
            TemplateId::P7 => include_str!("prompts/p07.txt"),
            TemplateId::P8 => include_str!("prompts/p08.txt"),
            TemplateId::P9 => include_str!("prompts/p09.txt"),
            TemplateId::P10 => include_str!("prompts/p10.txt"),
        };
        raw.strip_suffix('\n').unwrap_or(raw)
    }

    pub fn template(self) -> &'static PromptTemplate {
        static TEMPLATES: OnceLock<Vec<PromptTemplate>> = OnceLock::new();
        let all = TEMPLATES.get_or_init(|| {
            TemplateId::ALL
                .iter()
                .map(|&id| PromptTemplate {
                    id,
                    body: id.body(),
                    placeholders: placeholders_in(id.body()),
                })
                .collect()
        });
        &all[self as usize]
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", *self as usize + 1)
    }
}

impl FromStr for TemplateId {
    type Err = LlmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TemplateId::ALL
            .iter()
            .copied()
            .find(|id| id.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| LlmError::UnknownTemplate(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub body: &'static str,
    pub placeholders: BTreeSet<String>,
}

fn placeholder_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([a-z_]+)\}").expect("static regex"))
}

/// Names of the `{snake_case}` placeholders in `text`. JSON braces in the
/// templates never match because they are not followed by a bare identifier.
pub fn placeholders_in(text: &str) -> BTreeSet<String> {
    placeholder_regex()
        .captures_iter(text)
        .map(|c| c[1].to_owned())
        .collect()
}

pub type Bindings = BTreeMap<String, String>;

/// Builds a [`Bindings`] map from literal pairs.
pub fn bindings<I, K, V>(pairs: I) -> Bindings
where
    I: IntoIterator<Item = (K, V)>,
    K: Into<String>,
    V: Into<String>,
{
    pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect()
}

impl PromptTemplate {
    /// Substitutes every placeholder in a single pass. Bound values are
    /// inserted verbatim and never rescanned.
    pub fn render(&self, bindings: &Bindings) -> Result<String, LlmError> {
        if let Some(missing) = self.placeholders.iter().find(|p| !bindings.contains_key(*p)) {
            return Err(LlmError::MissingBinding(missing.clone()));
        }
        let mut out = String::with_capacity(self.body.len() + 256);
        let mut last = 0;
        for caps in placeholder_regex().captures_iter(self.body) {
            let whole = caps.get(0).expect("group 0");
            out.push_str(&self.body[last..whole.start()]);
            out.push_str(&bindings[&caps[1]]);
            last = whole.end();
        }
        out.push_str(&self.body[last..]);
        Ok(out)
    }
}

impl PromptTemplate {
    /// Inverse of [`render`](Self::render): recovers the bindings of a prompt
    /// produced from this template, or `None` if the literal text between
    /// placeholders does not line up. Each value extends to the first
    /// occurrence of the following literal text.
    pub fn match_prompt(&self, prompt: &str) -> Option<Bindings> {
        let mut literals = Vec::new();
        let mut names = Vec::new();
        let mut last = 0;
        for caps in placeholder_regex().captures_iter(self.body) {
            let whole = caps.get(0).expect("group 0");
            literals.push(&self.body[last..whole.start()]);
            names.push(caps[1].to_owned());
            last = whole.end();
        }
        let tail = &self.body[last..];
        let mut rest = prompt.strip_prefix(literals.first().copied().unwrap_or(tail))?;
        if names.is_empty() {
            return rest.is_empty().then(Bindings::new);
        }
        let mut out = Bindings::new();
        for (i, name) in names.iter().enumerate() {
            let next = literals.get(i + 1).copied();
            let (value, after) = match next {
                Some(lit) if !lit.is_empty() => {
                    let at = rest.find(lit)?;
                    (&rest[..at], &rest[at + lit.len()..])
                }
                Some(_) => return None,
                None => (rest.strip_suffix(tail)?, ""),
            };
            if let Some(prev) = out.get(name) {
                if prev != value {
                    return None;
                }
            }
            out.insert(name.clone(), value.to_owned());
            rest = after;
        }
        rest.is_empty().then_some(out)
    }
}

impl TemplateId {
    /// The template a rendered prompt came from, with its bindings.
    pub fn identify(prompt: &str) -> Option<(TemplateId, Bindings)> {
        TemplateId::ALL
            .iter()
            .find_map(|&id| id.template().match_prompt(prompt).map(|b| (id, b)))
    }
}

pub fn render(id: TemplateId, bindings: &Bindings) -> Result<String, LlmError> {
    id.template().render(bindings)
}

/// Looks a template up by its textual id ("P1".."P10").
pub fn render_named(id: &str, bindings: &Bindings) -> Result<String, LlmError> {
    render(id.parse()?, bindings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholder_sets() {
        let names = |id: TemplateId| -> Vec<String> { id.template().placeholders.iter().cloned().collect() };
        assert_eq!(names(TemplateId::P1), ["design_problem", "mechanism"]);
        assert_eq!(names(TemplateId::P2), ["design_problem", "mechanism", "tradeoff"]);
        assert_eq!(names(TemplateId::P3), ["concept_num", "design_problem", "mechanism"]);
        assert_eq!(names(TemplateId::P4), ["design_problem", "mechanism", "mechanism_list"]);
        assert_eq!(names(TemplateId::P5), ["design_problem", "new_list", "original_list"]);
        assert_eq!(names(TemplateId::P6), ["design_problem", "mech_num", "mechanism"]);
        assert_eq!(names(TemplateId::P7), ["design_problem", "idea", "question"]);
        assert_eq!(names(TemplateId::P8), ["design_problem"]);
        assert_eq!(names(TemplateId::P9), ["directions_output"]);
        assert_eq!(names(TemplateId::P10), ["categories_output", "design_problem"]);
    }

    #[test]
    fn p7_contains_question_verbatim() {
        let b = bindings([
            ("design_problem", "clean laundry with less water"),
            ("idea", "Pen applicator"),
            ("question", "would leftover lemon compounds interact with detergent?"),
        ]);
        let text = render(TemplateId::P7, &b).unwrap();
        assert!(text.contains("would leftover lemon compounds interact with detergent?"));
        assert!(placeholders_in(&text).is_empty());
        assert_eq!(text, render(TemplateId::P7, &b).unwrap());
    }

    #[test]
    fn missing_binding_is_named() {
        let b = bindings([("design_problem", "x")]);
        assert_eq!(
            render(TemplateId::P1, &b),
            Err(LlmError::MissingBinding("mechanism".into()))
        );
    }

    #[test]
    fn unknown_template() {
        assert!(matches!(
            render_named("P11", &Bindings::new()),
            Err(LlmError::UnknownTemplate(_))
        ));
        assert_eq!("p10".parse::<TemplateId>().unwrap(), TemplateId::P10);
    }

    #[test]
    fn bound_values_are_not_rescanned() {
        let b = bindings([("directions_output", "[{mechanism}]")]);
        let text = render(TemplateId::P9, &b).unwrap();
        assert!(text.contains("Input:[{mechanism}]"));
    }

    #[test]
    fn identify_inverts_render() {
        for id in TemplateId::ALL {
            let b: Bindings = id
                .template()
                .placeholders
                .iter()
                .map(|p| (p.clone(), format!("<<{p} value>>")))
                .collect();
            let text = render(id, &b).unwrap();
            assert_eq!(TemplateId::identify(&text), Some((id, b)), "{id}");
        }
        assert_eq!(TemplateId::identify("hello"), None);
    }

    #[test]
    fn bodies_keep_their_opening_lines() {
        assert!(TemplateId::P1
            .template()
            .body
            .starts_with("You are a design expert evaluating a proposed mechanism"));
        assert!(TemplateId::P10.template().body.ends_with(']'));
    }
}
