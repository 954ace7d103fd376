use std::sync::Arc;

use serde::Deserialize;
use serde_json::Value;

use super::extract::{extract_json, extract_tagged, parse_markdown_table, ParsedTable};
use super::template::{bindings, render, TemplateId};
use super::{LlmClient, LlmConfig, LlmError};
use crate::clock::Clock;
use crate::model::{
    category_name_is_valid, name_key, CardDraft, CardId, CardKind, CategoryId, DesignBrief, IdeaCard, SchemaCategory,
};

pub const OVERVIEW_CATEGORIES: usize = 10;
pub const IDEAS_PER_CATEGORY: usize = 5;
/// Cards added per Tradeoff / Solution press.
pub const BATCH_SIZE: usize = 3;
pub const NO_CONCEPT_SENTINEL: &str = "No concept found";

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryDraft {
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdeaDraft {
    /// Index into [`GeneratedOverview::categories`].
    pub category: usize,
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedOverview {
    pub categories: Vec<CategoryDraft>,
    pub ideas: Vec<IdeaDraft>,
    pub latency_ms: u64,
}

/// What a canvas button asks the LLM for.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaffoldRequest {
    Tradeoffs,
    Solutions,
    Concepts { concept_num: usize },
    SimilarIdeas { category: CategoryId },
    Question { question: String },
}

/// Owned snapshot of the project state an LLM action depends on, so the
/// call can run without holding the project.
#[derive(Debug, Clone)]
pub struct ScaffoldContext {
    pub request: ScaffoldRequest,
    pub design_problem: String,
    pub target: IdeaCard,
    /// Nearest solution strictly above the target.
    pub ancestor_solution: Option<IdeaCard>,
    /// Tradeoff children the target already has.
    pub prior_tradeoffs: Vec<IdeaCard>,
    pub categories: Vec<SchemaCategory>,
    pub chosen_category: Option<SchemaCategory>,
}

/// A concept the Similar button proposes. `existing` is set when it was
/// retrieved from, or merged into, a category the project already has.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptProposal {
    pub name: String,
    pub description: String,
    pub existing: Option<CategoryId>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScaffoldOutput {
    Tradeoffs(Vec<CardDraft>),
    Solutions(Vec<CardDraft>),
    Concepts(Vec<ConceptProposal>),
    SimilarIdeas { schema: CardDraft, ideas: Vec<CardDraft> },
    Answer { question: String, answer: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaffoldOutcome {
    pub target: CardId,
    pub output: ScaffoldOutput,
    pub latency_ms: u64,
}

/// Renders prompts, calls the model and validates what comes back.
///
/// Every malformed response is retried exactly once with the identical
/// prompt; a second failure is returned to the caller.
pub struct Orchestrator {
    client: Arc<dyn LlmClient>,
    config: LlmConfig,
    clock: Arc<dyn Clock>,
}

fn parse_err(step: TemplateId, message: impl std::fmt::Display) -> LlmError {
    LlmError::Parse {
        step,
        message: message.to_string(),
    }
}

/// Name/description rows of a tagged table, or a parse error for `step`.
fn tagged_rows(step: TemplateId, text: &str) -> Result<Vec<(String, String)>, LlmError> {
    let inner = extract_tagged(text, "table").map_err(|e| parse_err(step, e))?;
    let table = parse_markdown_table(&inner).map_err(|e| parse_err(step, e))?;
    name_description_rows(step, &table)
}

fn name_description_rows(step: TemplateId, table: &ParsedTable) -> Result<Vec<(String, String)>, LlmError> {
    let name = table
        .column(&["name", "concept_name"])
        .ok_or_else(|| parse_err(step, "table has no name column"))?;
    let description = table.column(&["description", "reason"]);
    Ok(table
        .rows
        .iter()
        .filter(|row| !row[name].is_empty())
        .map(|row| {
            let desc = description.map(|i| row[i].clone()).unwrap_or_default();
            (row[name].clone(), desc)
        })
        .collect())
}

fn take_exactly(
    step: TemplateId,
    mut rows: Vec<(String, String)>,
    n: usize,
) -> Result<Vec<(String, String)>, LlmError> {
    if rows.len() < n {
        return Err(LlmError::CountMismatch {
            step,
            expected: n,
            got: rows.len(),
        });
    }
    rows.truncate(n);
    Ok(rows)
}

fn drafts(kind: CardKind, rows: Vec<(String, String)>) -> Vec<CardDraft> {
    rows.into_iter()
        .map(|(name, description)| CardDraft::system(kind, name, description))
        .collect()
}

/// The target's description, followed by any tradeoffs it already has so
/// the model avoids repeating them.
fn mechanism_with_prior(target: &IdeaCard, prior: &[IdeaCard]) -> String {
    let mut out = card_text(target);
    if !prior.is_empty() {
        out.push_str("\nPreviously identified trade-offs (do not repeat these):");
        for tradeoff in prior {
            out.push_str(&format!("\n- {}: {}", tradeoff.name, tradeoff.description));
        }
    }
    out
}

fn card_text(card: &IdeaCard) -> String {
    if card.description.trim().is_empty() {
        card.name.clone()
    } else {
        card.description.clone()
    }
}

fn label_text(name: &str, description: &str) -> String {
    if description.trim().is_empty() {
        name.to_owned()
    } else {
        format!("{name}: {description}")
    }
}

fn name_list<'a>(names: impl IntoIterator<Item = &'a str>) -> String {
    serde_json::to_string(&names.into_iter().collect::<Vec<_>>()).expect("strings serialize")
}

#[derive(Deserialize)]
struct Direction {
    direction: String,
}

#[derive(Deserialize)]
struct NamedItem {
    name: String,
    #[serde(default)]
    description: String,
}

#[derive(Deserialize)]
struct IdeaGroup {
    #[serde(default)]
    name: String,
    #[serde(default)]
    mechanisms: Vec<NamedItem>,
}

fn json_array(step: TemplateId, text: &str, wrapper: &str) -> Result<Vec<Value>, LlmError> {
    let value = extract_json(text).map_err(|e| parse_err(step, e))?;
    let array = match value {
        Value::Array(items) => items,
        Value::Object(mut map) => match map.remove(wrapper) {
            Some(Value::Array(items)) => items,
            _ => return Err(parse_err(step, format!("expected an array under `{wrapper}`"))),
        },
        _ => return Err(parse_err(step, "expected a JSON array")),
    };
    Ok(array)
}

fn decode<T: for<'de> Deserialize<'de>>(step: TemplateId, items: Vec<Value>) -> Result<Vec<T>, LlmError> {
    items
        .into_iter()
        .map(|v| serde_json::from_value(v).map_err(|e| parse_err(step, e)))
        .collect()
}

fn expect_count(step: TemplateId, expected: usize, got: usize) -> Result<(), LlmError> {
    if expected == got {
        Ok(())
    } else {
        Err(LlmError::CountMismatch { step, expected, got })
    }
}

impl Orchestrator {
    pub fn new(client: Arc<dyn LlmClient>, config: LlmConfig, clock: Arc<dyn Clock>) -> Self {
        Self { client, config, clock }
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    pub fn client(&self) -> &dyn LlmClient {
        self.client.as_ref()
    }

    /// Calls the model with `prompt`, retrying once if `parse` rejects the
    /// response. Transport errors are returned immediately.
    fn call<T>(&self, prompt: &str, parse: impl Fn(&str) -> Result<T, LlmError>) -> Result<T, LlmError> {
        let first = self.client.complete(prompt)?;
        match parse(&first) {
            Ok(v) => Ok(v),
            Err(e) if e.is_output_error() => parse(&self.client.complete(prompt)?),
            Err(e) => Err(e),
        }
    }

    /// Runs a chain of calls and reports the wall-clock latency of the whole.
    fn timed<T>(&self, f: impl FnOnce() -> Result<T, LlmError>) -> Result<(T, u64), LlmError> {
        let start = self.clock.now_ms();
        let value = f()?;
        let end = self.clock.now_ms();
        Ok((value, end.saturating_sub(start)))
    }

    /// Schema generation, schema check, then idea generation: 10 categories
    /// with 5 ideas each.
    pub fn generate_overview(&self, brief: &DesignBrief) -> Result<GeneratedOverview, LlmError> {
        let ((categories, ideas), latency_ms) = self.timed(|| {
            let problem = brief.description.as_str();
            let prompt = render(TemplateId::P8, &bindings([("design_problem", problem)]))?;
            let directions = self.call(&prompt, |text| {
                let items = json_array(TemplateId::P8, text, "directions")?;
                expect_count(TemplateId::P8, OVERVIEW_CATEGORIES, items.len())?;
                let parsed: Vec<Direction> = decode(TemplateId::P8, items.clone())?;
                if parsed.iter().any(|d| d.direction.trim().is_empty()) {
                    return Err(parse_err(TemplateId::P8, "empty direction label"));
                }
                Ok(Value::Array(items))
            })?;
            let directions_output = serde_json::to_string_pretty(&directions).expect("json serializes");

            let prompt = render(TemplateId::P9, &bindings([("directions_output", directions_output)]))?;
            let (categories, categories_json) = self.call(&prompt, |text| {
                let items = json_array(TemplateId::P9, text, "categories")?;
                expect_count(TemplateId::P9, OVERVIEW_CATEGORIES, items.len())?;
                let parsed: Vec<NamedItem> = decode(TemplateId::P9, items.clone())?;
                let mut keys = Vec::new();
                for item in &parsed {
                    if !category_name_is_valid(&item.name) {
                        return Err(parse_err(
                            TemplateId::P9,
                            format!("category name `{}` has a bad word count", item.name),
                        ));
                    }
                    let key = name_key(&item.name);
                    if keys.contains(&key) {
                        return Err(parse_err(TemplateId::P9, format!("duplicate category `{}`", item.name)));
                    }
                    keys.push(key);
                }
                let categories: Vec<CategoryDraft> = parsed
                    .into_iter()
                    .map(|c| CategoryDraft {
                        name: c.name.trim().to_owned(),
                        description: c.description.trim().to_owned(),
                    })
                    .collect();
                Ok((categories, serde_json::json!({ "categories": items })))
            })?;
            let categories_output = serde_json::to_string_pretty(&categories_json).expect("json serializes");

            let prompt = render(
                TemplateId::P10,
                &bindings([
                    ("design_problem", problem.to_owned()),
                    ("categories_output", categories_output),
                ]),
            )?;
            let ideas = self.call(&prompt, |text| {
                let items = json_array(TemplateId::P10, text, "categories")?;
                expect_count(TemplateId::P10, OVERVIEW_CATEGORIES, items.len())?;
                let groups: Vec<IdeaGroup> = decode(TemplateId::P10, items)?;
                let mut slots: Vec<Option<&IdeaGroup>> = vec![None; categories.len()];
                for (position, group) in groups.iter().enumerate() {
                    let key = name_key(&group.name);
                    let index = categories
                        .iter()
                        .position(|c| name_key(&c.name) == key)
                        .filter(|&i| slots[i].is_none())
                        .unwrap_or(position);
                    if slots[index].is_some() {
                        return Err(parse_err(
                            TemplateId::P10,
                            format!("category `{}` appears twice", group.name),
                        ));
                    }
                    slots[index] = Some(group);
                }
                let mut ideas = Vec::new();
                for (category, group) in slots.into_iter().enumerate() {
                    let group = group.expect("all slots filled");
                    expect_count(TemplateId::P10, IDEAS_PER_CATEGORY, group.mechanisms.len())?;
                    for idea in &group.mechanisms {
                        if idea.name.trim().is_empty() {
                            return Err(parse_err(TemplateId::P10, "idea without a name"));
                        }
                        ideas.push(IdeaDraft {
                            category,
                            name: idea.name.trim().to_owned(),
                            description: idea.description.trim().to_owned(),
                        });
                    }
                }
                Ok(ideas)
            })?;
            Ok((categories, ideas))
        })?;
        Ok(GeneratedOverview {
            categories,
            ideas,
            latency_ms,
        })
    }

    /// Executes one canvas action against the model.
    pub fn run(&self, context: &ScaffoldContext) -> Result<ScaffoldOutcome, LlmError> {
        let (output, latency_ms) = self.timed(|| match &context.request {
            ScaffoldRequest::Tradeoffs => self.tradeoffs(context),
            ScaffoldRequest::Solutions => self.solutions(context),
            ScaffoldRequest::Concepts { concept_num } => self.concepts(context, *concept_num),
            ScaffoldRequest::SimilarIdeas { .. } => self.similar_ideas(context),
            ScaffoldRequest::Question { question } => self.answer(context, question),
        })?;
        Ok(ScaffoldOutcome {
            target: context.target.id.clone(),
            output,
            latency_ms,
        })
    }

    fn tradeoffs(&self, context: &ScaffoldContext) -> Result<ScaffoldOutput, LlmError> {
        let prompt = render(
            TemplateId::P1,
            &bindings([
                ("design_problem", context.design_problem.clone()),
                (
                    "mechanism",
                    mechanism_with_prior(&context.target, &context.prior_tradeoffs),
                ),
            ]),
        )?;
        let rows = self.call(&prompt, |text| {
            take_exactly(TemplateId::P1, tagged_rows(TemplateId::P1, text)?, BATCH_SIZE)
        })?;
        Ok(ScaffoldOutput::Tradeoffs(drafts(CardKind::Tradeoff, rows)))
    }

    fn solutions(&self, context: &ScaffoldContext) -> Result<ScaffoldOutput, LlmError> {
        let mechanism = context
            .ancestor_solution
            .as_ref()
            .map(card_text)
            .ok_or_else(|| parse_err(TemplateId::P2, "tradeoff has no solution above it"))?;
        let prompt = render(
            TemplateId::P2,
            &bindings([
                ("design_problem", context.design_problem.clone()),
                ("mechanism", mechanism),
                ("tradeoff", card_text(&context.target)),
            ]),
        )?;
        let rows = self.call(&prompt, |text| {
            take_exactly(TemplateId::P2, tagged_rows(TemplateId::P2, text)?, BATCH_SIZE)
        })?;
        Ok(ScaffoldOutput::Solutions(drafts(CardKind::Solution, rows)))
    }

    /// Abstraction generation, retrieval of matching existing categories,
    /// and the redundancy check that merges new concepts into existing ones.
    fn concepts(&self, context: &ScaffoldContext, concept_num: usize) -> Result<ScaffoldOutput, LlmError> {
        let problem = context.design_problem.clone();
        let mechanism = card_text(&context.target);
        let prompt = render(
            TemplateId::P3,
            &bindings([
                ("design_problem", problem.clone()),
                ("mechanism", mechanism.clone()),
                ("concept_num", concept_num.to_string()),
            ]),
        )?;
        let concepts = self.call(&prompt, |text| {
            let mut rows = tagged_rows(TemplateId::P3, text)?;
            if rows.is_empty() {
                return Err(parse_err(TemplateId::P3, "no concepts in table"));
            }
            rows.truncate(concept_num);
            if let Some((bad, _)) = rows.iter().find(|(n, _)| !category_name_is_valid(n)) {
                return Err(parse_err(TemplateId::P3, format!("bad concept name `{bad}`")));
            }
            Ok(rows)
        })?;

        let existing = &context.categories;
        let find_existing = |name: &str| {
            let key = name_key(name);
            existing.iter().find(|c| name_key(&c.name) == key)
        };
        let mut retrieved: Vec<&SchemaCategory> = Vec::new();
        let mut merged: Vec<Option<CategoryId>> = vec![None; concepts.len()];
        if !existing.is_empty() {
            let prompt = render(
                TemplateId::P4,
                &bindings([
                    ("design_problem", problem.clone()),
                    ("mechanism", mechanism),
                    ("mechanism_list", name_list(existing.iter().map(|c| c.name.as_str()))),
                ]),
            )?;
            let names = self.call(&prompt, |text| match extract_tagged(text, "table") {
                Ok(inner) => {
                    let table = parse_markdown_table(&inner).map_err(|e| parse_err(TemplateId::P4, e))?;
                    Ok(name_description_rows(TemplateId::P4, &table)?
                        .into_iter()
                        .map(|(n, _)| n)
                        .collect::<Vec<_>>())
                }
                Err(LlmError::TagNotFound(_)) if text.to_lowercase().contains(&NO_CONCEPT_SENTINEL.to_lowercase()) => {
                    Ok(Vec::new())
                }
                Err(e) => Err(parse_err(TemplateId::P4, e)),
            })?;
            for name in names {
                if let Some(category) = find_existing(&name) {
                    if !retrieved.iter().any(|c| c.id == category.id) {
                        retrieved.push(category);
                    }
                }
            }

            let prompt = render(
                TemplateId::P5,
                &bindings([
                    ("design_problem", problem),
                    ("new_list", name_list(concepts.iter().map(|(n, _)| n.as_str()))),
                    ("original_list", name_list(existing.iter().map(|c| c.name.as_str()))),
                ]),
            )?;
            let pairs = self.call(&prompt, |text| match extract_tagged(text, "table") {
                Ok(inner) if inner.trim().is_empty() => Ok(Vec::new()),
                Ok(inner) => {
                    let table = parse_markdown_table(&inner).map_err(|e| parse_err(TemplateId::P5, e))?;
                    let (Some(left), Some(right)) = (table.column(&["name1"]), table.column(&["name2"])) else {
                        return Err(parse_err(TemplateId::P5, "expected name1 and name2 columns"));
                    };
                    Ok(table.rows.iter().map(|r| (r[left].clone(), r[right].clone())).collect())
                }
                // "If no similar items are found, output nothing."
                Err(LlmError::TagNotFound(_)) => Ok(Vec::new()),
                Err(e) => Err(parse_err(TemplateId::P5, e)),
            })?;
            for (new_name, old_name) in pairs {
                let Some(index) = concepts.iter().position(|(n, _)| name_key(n) == name_key(&new_name)) else {
                    continue;
                };
                if let Some(category) = find_existing(&old_name) {
                    merged[index] = Some(category.id.clone());
                }
            }
        }

        let mut proposals: Vec<ConceptProposal> = concepts
            .into_iter()
            .zip(merged)
            .map(|((name, description), merged)| {
                let existing = merged.or_else(|| find_existing(&name).map(|c| c.id.clone()));
                ConceptProposal {
                    name,
                    description,
                    existing,
                }
            })
            .collect();
        for category in retrieved {
            if !proposals.iter().any(|p| p.existing.as_ref() == Some(&category.id)) {
                proposals.push(ConceptProposal {
                    name: category.name.clone(),
                    description: category.description.clone(),
                    existing: Some(category.id.clone()),
                });
            }
        }
        Ok(ScaffoldOutput::Concepts(proposals))
    }

    fn similar_ideas(&self, context: &ScaffoldContext) -> Result<ScaffoldOutput, LlmError> {
        let category = context
            .chosen_category
            .as_ref()
            .ok_or_else(|| parse_err(TemplateId::P6, "no concept selected"))?;
        let mech_num = self.config.mech_num;
        let prompt = render(
            TemplateId::P6,
            &bindings([
                ("design_problem", context.design_problem.clone()),
                ("mechanism", label_text(&category.name, &category.description)),
                ("mech_num", mech_num.to_string()),
            ]),
        )?;
        let rows = self.call(&prompt, |text| {
            take_exactly(TemplateId::P6, tagged_rows(TemplateId::P6, text)?, mech_num)
        })?;
        let mut schema = CardDraft::system(CardKind::Schema, &category.name, &category.description);
        schema.category_id = Some(category.id.clone());
        Ok(ScaffoldOutput::SimilarIdeas {
            schema,
            ideas: drafts(CardKind::Solution, rows),
        })
    }

    fn answer(&self, context: &ScaffoldContext, question: &str) -> Result<ScaffoldOutput, LlmError> {
        let prompt = render(
            TemplateId::P7,
            &bindings([
                ("design_problem", context.design_problem.clone()),
                ("idea", label_text(&context.target.name, &context.target.description)),
                ("question", question.to_owned()),
            ]),
        )?;
        let answer = self.call(&prompt, |text| {
            let answer = extract_tagged(text, "answer")?;
            if answer.is_empty() {
                return Err(parse_err(TemplateId::P7, "empty answer"));
            }
            Ok(answer)
        })?;
        Ok(ScaffoldOutput::Answer {
            question: question.to_owned(),
            answer,
        })
    }
}
