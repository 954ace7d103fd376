//! Prompt templates, structured-output parsing and the LLM prompt chains.

mod client;
mod config;
mod extract;
mod orchestrator;
mod synthetic;
mod template;

use thiserror::Error;

pub use client::{prompt_key, FnClient, LiveClient, LlmClient, ScriptedClient};
pub use config::LlmConfig;
pub use extract::{extract_json, extract_tagged, parse_markdown_table, ParsedTable};
pub use orchestrator::{
    CategoryDraft, ConceptProposal, GeneratedOverview, IdeaDraft, Orchestrator, ScaffoldContext, ScaffoldOutcome,
    ScaffoldOutput, ScaffoldRequest, BATCH_SIZE, IDEAS_PER_CATEGORY, NO_CONCEPT_SENTINEL, OVERVIEW_CATEGORIES,
};
pub use synthetic::SyntheticClient;
pub use template::{bindings, placeholders_in, render, render_named, Bindings, PromptTemplate, TemplateId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LlmError {
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("missing binding for placeholder `{0}`")]
    MissingBinding(String),
    #[error("no <{0}> region in response")]
    TagNotFound(String),
    #[error("unbalanced <{0}> tags in response")]
    UnbalancedTags(String),
    #[error("table has no header row")]
    EmptyTable,
    #[error("table row on line {line} has {got} cells, header has {expected}")]
    RaggedRow { line: usize, expected: usize, got: usize },
    #[error("could not parse {step} output: {message}")]
    Parse { step: TemplateId, message: String },
    #[error("{step} returned {got} items, expected {expected}")]
    CountMismatch {
        step: TemplateId,
        expected: usize,
        got: usize,
    },
    #[error("LLM request timed out")]
    LlmTimeout,
    #[error("LLM transport error: {0}")]
    Transport(String),
    #[error("no scripted response for prompt {0}")]
    MissingFixture(String),
    #[error("invalid LLM configuration: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl LlmError {
    pub fn code(&self) -> &'static str {
        match self {
            LlmError::UnknownTemplate(_) => "UnknownTemplate",
            LlmError::MissingBinding(_) => "MissingBinding",
            LlmError::TagNotFound(_) => "TagNotFound",
            LlmError::UnbalancedTags(_) => "UnbalancedTags",
            LlmError::EmptyTable => "EmptyTable",
            LlmError::RaggedRow { .. } => "RaggedRow",
            LlmError::Parse { .. } => "ParseError",
            LlmError::CountMismatch { .. } => "CountMismatch",
            LlmError::LlmTimeout => "LlmTimeout",
            LlmError::Transport(_) => "LlmTransport",
            LlmError::MissingFixture(_) => "MissingFixture",
            LlmError::Config(_) => "ConfigError",
            LlmError::Io(_) => "IoError",
        }
    }

    /// Malformed-output errors; these trigger the single retry.
    pub fn is_output_error(&self) -> bool {
        matches!(
            self,
            LlmError::TagNotFound(_)
                | LlmError::UnbalancedTags(_)
                | LlmError::EmptyTable
                | LlmError::RaggedRow { .. }
                | LlmError::Parse { .. }
                | LlmError::CountMismatch { .. }
        )
    }
}
