//! Scripted end-to-end run: overview, one canvas, and every card action.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use flexmind_core::llm::{LlmClient, LlmConfig, Orchestrator, ScriptedClient, SyntheticClient};
use flexmind_core::model::{name_key, CategoryOrigin, Project};
use flexmind_core::{CardKind, DesignBrief, ProjectId, Session, SteppingClock};
use serde::Serialize;

use crate::error::CliError;

pub const PROJECT_ID: &str = "mockrun";
pub const USER_TRADEOFF: (&str, &str) = ("Sticky Residue", "Leftover liquid can attract dust.");
pub const QUESTION: &str = "What is the biggest practical risk of this idea?";

/// Counts observed along the way.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MockrunSummary {
    /// Categories from the overview chain (concept pivots excluded).
    pub categories: usize,
    pub concept_categories: usize,
    pub overview_ideas: usize,
    pub seed: String,
    /// Tradeoff children of the seed after the first and second press.
    pub tradeoff_children: [usize; 2],
    /// Solution children of the first tradeoff after each press.
    pub solution_children: [usize; 2],
    pub proposed_concepts: usize,
    pub similar_ideas: usize,
    pub events: usize,
}

pub struct MockrunOptions {
    pub brief: PathBuf,
    /// Scripted fixtures; `None` uses the built-in synthetic model.
    pub fixtures: Option<PathBuf>,
    pub dump_prompts: Option<PathBuf>,
    /// Overview idea to open; defaults to the first one.
    pub seed: Option<String>,
    pub config: LlmConfig,
}

/// Reads a brief file: the first line is the title, the rest the description.
/// A single-line file is used as both.
pub fn read_brief(path: &Path) -> Result<DesignBrief, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    let text = text.trim();
    let (title, body) = match text.split_once('\n') {
        Some((t, rest)) if !rest.trim().is_empty() => (t.trim(), rest.trim()),
        _ => (text, text),
    };
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "brief".into());
    Ok(DesignBrief::new(id, title, body)?)
}

fn client(opts: &MockrunOptions) -> Result<Arc<dyn LlmClient>, CliError> {
    Ok(match &opts.fixtures {
        Some(dir) => {
            let mut c = ScriptedClient::load_dir(dir)?;
            if let Some(dump) = &opts.dump_prompts {
                std::fs::create_dir_all(dump).map_err(|e| CliError::write(dump, e))?;
                c = c.dump_missing_to(dump.clone());
            }
            Arc::new(c)
        }
        None => Arc::new(SyntheticClient),
    })
}

pub fn mockrun(opts: &MockrunOptions) -> Result<(Project, MockrunSummary), CliError> {
    let brief = read_brief(&opts.brief)?;
    let clock = Arc::new(SteppingClock::new(1_700_000_000_000, 1_500));
    let orch = Orchestrator::new(client(opts)?, opts.config.clone(), clock.clone());
    let mut s = Session::new(ProjectId::new(PROJECT_ID), brief, clock);

    s.generate_overview(&orch)?;
    let idea = match &opts.seed {
        Some(name) => s
            .project()
            .overview_ideas
            .iter()
            .find(|i| name_key(&i.name) == name_key(name))
            .ok_or_else(|| CliError::input(format!("no overview idea named `{name}`")))?,
        None => s
            .project()
            .overview_ideas
            .first()
            .ok_or_else(|| CliError::input("overview produced no ideas"))?,
    }
    .clone();
    let canvas = s.create_canvas_from_idea(&idea.id)?;
    let root = s.project().canvas(&canvas)?.root.clone();
    let children = |s: &Session, card| s.project().locate(card).map(|t| t.children_of(card).len());

    let first = s.expand_tradeoffs(&orch, &root)?;
    let t1 = children(&s, &root)?;
    s.expand_tradeoffs(&orch, &root)?;
    let t2 = children(&s, &root)?;

    let tradeoff = first[0].clone();
    s.expand_solutions(&orch, &tradeoff)?;
    let s1 = children(&s, &tradeoff)?;
    s.expand_solutions(&orch, &tradeoff)?;
    let s2 = children(&s, &tradeoff)?;

    s.add_user_card(&root, CardKind::Tradeoff, USER_TRADEOFF.0, USER_TRADEOFF.1)?;
    let proposed = s.expand_similar(&orch, &root, opts.config.concept_num)?;
    let concept = proposed
        .first()
        .ok_or_else(|| CliError::input("similar search proposed no concepts"))?
        .clone();
    let similar = s.select_concept(&orch, &root, &concept)?;
    s.ask_question(&orch, &root, QUESTION)?;
    s.save_idea(&root)?;

    let count = |o: CategoryOrigin| s.project().categories.iter().filter(|c| c.origin == o).count();
    let summary = MockrunSummary {
        categories: count(CategoryOrigin::System),
        concept_categories: count(CategoryOrigin::SimilarPivot),
        overview_ideas: s.project().overview_ideas.len(),
        seed: idea.name,
        tradeoff_children: [t1, t2],
        solution_children: [s1, s2],
        proposed_concepts: proposed.len(),
        similar_ideas: similar.len().saturating_sub(1),
        events: s.project().action_log().len(),
    };
    Ok((s.into_project(), summary))
}
