use std::sync::Arc;

use super::event::{ActionEvent, ActionKind, Actor, EventPayload, PlacedCard};
use super::{
    name_key, CanvasId, CardDraft, CardId, CardKind, CategoryId, CategoryOrigin, DesignBrief, IdeaCard, IdeaId,
    ModelError, Origin, OverviewIdea, Position, Project, ProjectId, QaPair, SchemaCategory,
};
use crate::clock::Clock;
use crate::llm::{GeneratedOverview, Orchestrator, ScaffoldContext, ScaffoldOutcome, ScaffoldOutput, ScaffoldRequest};

/// A project plus the clock that stamps its events.
///
/// All mutations go through here: each one builds an [`ActionEvent`] and
/// applies it with [`Project::apply`]. A session is a single writer; share it
/// behind a lock to serialize commands.
pub struct Session {
    project: Project,
    clock: Arc<dyn Clock>,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session").field("project", &self.project.id).finish()
    }
}

fn card_id(seq: u64, index: usize) -> CardId {
    CardId::new(format!("card-{seq:06}-{index:02}"))
}

/// Suffixes names that collide (case-insensitively) with a sibling or an
/// earlier card of the same batch: "X" becomes "X (2)", then "X (3)".
fn dedupe_names(siblings: &[&IdeaCard], drafts: &mut [CardDraft]) {
    let mut taken: Vec<String> = siblings.iter().map(|c| name_key(&c.name)).collect();
    for draft in drafts.iter_mut() {
        if taken.contains(&name_key(&draft.name)) {
            let base = draft.name.clone();
            let mut n = 2;
            while taken.contains(&name_key(&format!("{base} ({n})"))) {
                n += 1;
            }
            draft.name = format!("{base} ({n})");
        }
        taken.push(name_key(&draft.name));
    }
}

impl Session {
    pub fn new(id: ProjectId, brief: DesignBrief, clock: Arc<dyn Clock>) -> Self {
        Self::from_project(Project::new(id, brief), clock)
    }

    pub fn from_project(project: Project, clock: Arc<dyn Clock>) -> Self {
        Self { project, clock }
    }

    pub fn project(&self) -> &Project {
        &self.project
    }

    pub fn into_project(self) -> Project {
        self.project
    }

    #[allow(clippy::too_many_arguments)]
    fn submit(
        &mut self,
        kind: ActionKind,
        actor: Actor,
        target_card: Option<CardId>,
        produced_cards: Vec<String>,
        llm_latency_ms: Option<u64>,
        payload: EventPayload,
        timestamp_ms: u64,
    ) -> Result<ActionEvent, ModelError> {
        let event = ActionEvent {
            seq: self.project.next_seq(),
            timestamp_ms,
            actor,
            kind,
            target_card,
            produced_cards,
            llm_latency_ms,
            browser_search: false,
            payload,
        };
        self.project.apply(event.clone())?;
        Ok(event)
    }

    /// Stores a generated overview: categories and their ideas.
    pub fn record_overview(&mut self, overview: GeneratedOverview) -> Result<ActionEvent, ModelError> {
        let seq = self.project.next_seq();
        let now = self.clock.now_ms();
        let categories: Vec<SchemaCategory> = overview
            .categories
            .iter()
            .enumerate()
            .map(|(i, c)| SchemaCategory {
                id: CategoryId::new(format!("cat-{seq:06}-{i:02}")),
                name: c.name.clone(),
                description: c.description.clone(),
                origin: CategoryOrigin::System,
            })
            .collect();
        let ideas: Vec<OverviewIdea> = overview
            .ideas
            .iter()
            .enumerate()
            .map(|(i, idea)| OverviewIdea {
                id: IdeaId::new(format!("idea-{seq:06}-{i:02}")),
                category_id: Some(categories[idea.category].id.clone()),
                name: idea.name.clone(),
                description: idea.description.clone(),
                origin: Origin::System,
            })
            .collect();
        let produced = ideas.iter().map(|i| i.id.to_string()).collect();
        self.submit(
            ActionKind::GenerateOverview,
            Actor::System,
            None,
            produced,
            Some(overview.latency_ms),
            EventPayload::Overview { categories, ideas },
            now,
        )
    }

    /// Adds a user idea to the overview page.
    pub fn add_user_idea(&mut self, name: &str, description: &str) -> Result<IdeaId, ModelError> {
        if name.trim().is_empty() {
            return Err(ModelError::EmptyName);
        }
        let seq = self.project.next_seq();
        let idea = OverviewIdea {
            id: IdeaId::new(format!("idea-{seq:06}-00")),
            category_id: None,
            name: name.trim().to_owned(),
            description: description.trim().to_owned(),
            origin: Origin::User,
        };
        let id = idea.id.clone();
        let now = self.clock.now_ms();
        self.submit(
            ActionKind::AddUserSolution,
            Actor::User,
            None,
            vec![id.to_string()],
            None,
            EventPayload::UserIdea { idea },
            now,
        )?;
        Ok(id)
    }

    /// Starts a new canvas whose root is a copy of an overview idea.
    pub fn create_canvas_from_idea(&mut self, idea: &IdeaId) -> Result<CanvasId, ModelError> {
        let source = self.project.overview_idea(idea)?.clone();
        let seq = self.project.next_seq();
        let now = self.clock.now_ms();
        let canvas = CanvasId::new(format!("canvas-{seq:06}"));
        let root = IdeaCard {
            id: card_id(seq, 0),
            kind: CardKind::Solution,
            name: source.name,
            description: source.description,
            origin: source.origin,
            canvas_id: canvas.clone(),
            created_at: now,
            saved: false,
            category_id: source.category_id,
            qa: None,
        };
        self.submit(
            ActionKind::CreateCanvas,
            Actor::User,
            None,
            vec![root.id.to_string()],
            None,
            EventPayload::Canvas {
                canvas: canvas.clone(),
                source_idea: idea.clone(),
                root,
            },
            now,
        )?;
        Ok(canvas)
    }

    /// Adds a user-authored solution or tradeoff under `parent`.
    pub fn add_user_card(
        &mut self,
        parent: &CardId,
        kind: CardKind,
        name: &str,
        description: &str,
    ) -> Result<CardId, ModelError> {
        let action = match kind {
            CardKind::Solution => ActionKind::AddUserSolution,
            CardKind::Tradeoff => ActionKind::AddUserTradeoff,
            other => {
                return Err(ModelError::InvalidArgument(format!(
                    "users add solution or tradeoff cards, not {other}"
                )))
            }
        };
        if name.trim().is_empty() {
            return Err(ModelError::EmptyName);
        }
        let tree = self.project.locate(parent)?;
        tree.check_attach(parent, [kind])?;
        let draft = CardDraft {
            kind,
            name: name.trim().to_owned(),
            description: description.trim().to_owned(),
            origin: Origin::User,
            category_id: None,
            qa: None,
        };
        let canvas = tree.id.clone();
        let now = self.clock.now_ms();
        let event = self.attach_event(action, parent, &canvas, vec![(parent.clone(), draft)], None, now)?;
        Ok(CardId::new(event.produced_cards[0].clone()))
    }

    fn attach_event(
        &mut self,
        action: ActionKind,
        target: &CardId,
        canvas: &CanvasId,
        drafts: Vec<(CardId, CardDraft)>,
        latency: Option<u64>,
        now: u64,
    ) -> Result<ActionEvent, ModelError> {
        let seq = self.project.next_seq();
        let cards: Vec<PlacedCard> = drafts
            .into_iter()
            .enumerate()
            .map(|(i, (parent, d))| PlacedCard {
                parent,
                card: IdeaCard {
                    id: card_id(seq, i),
                    kind: d.kind,
                    name: d.name,
                    description: d.description,
                    origin: d.origin,
                    canvas_id: canvas.clone(),
                    created_at: now,
                    saved: false,
                    category_id: d.category_id,
                    qa: d.qa,
                },
            })
            .collect();
        let produced = cards.iter().map(|p| p.card.id.to_string()).collect();
        self.submit(
            action,
            Actor::User,
            Some(target.clone()),
            produced,
            latency,
            EventPayload::Cards {
                canvas: canvas.clone(),
                cards,
            },
            now,
        )
    }

    /// Marks a solution card as saved. Saving twice is a no-op on the list.
    pub fn save_idea(&mut self, card: &CardId) -> Result<(), ModelError> {
        let found = self.project.card(card)?;
        if found.kind != CardKind::Solution {
            return Err(ModelError::KindViolation(format!(
                "only solution cards can be saved, not a {}",
                found.kind
            )));
        }
        let canvas = found.canvas_id.clone();
        let now = self.clock.now_ms();
        self.submit(
            ActionKind::SaveIdea,
            Actor::User,
            Some(card.clone()),
            Vec::new(),
            None,
            EventPayload::Save {
                canvas,
                card: card.clone(),
            },
            now,
        )?;
        Ok(())
    }

    /// Removes a card and its subtree from the live tree (the whole canvas
    /// when `card` is the root). The log keeps the history.
    pub fn delete_card(&mut self, card: &CardId) -> Result<Vec<CardId>, ModelError> {
        let tree = self.project.locate(card)?;
        let canvas = tree.id.clone();
        let removed = if &tree.root == card {
            tree.cards().iter().map(|c| c.id.clone()).collect()
        } else {
            tree.clone().remove_subtree(card)?
        };
        let now = self.clock.now_ms();
        self.submit(
            ActionKind::DeleteCard,
            Actor::User,
            Some(card.clone()),
            Vec::new(),
            None,
            EventPayload::Delete {
                canvas,
                card: card.clone(),
                removed: removed.clone(),
            },
            now,
        )?;
        Ok(removed)
    }

    /// Records a drag; only the layout position changes.
    pub fn move_card(&mut self, card: &CardId, position: Position) -> Result<(), ModelError> {
        let canvas = self.project.locate(card)?.id.clone();
        let now = self.clock.now_ms();
        self.submit(
            ActionKind::MoveCard,
            Actor::User,
            Some(card.clone()),
            Vec::new(),
            None,
            EventPayload::Move {
                canvas,
                card: card.clone(),
                position,
            },
            now,
        )?;
        Ok(())
    }

    /// Snapshot of everything an LLM action on `target` needs.
    ///
    /// Kind preconditions are checked here, before any LLM call is made.
    pub fn scaffold_context(&self, target: &CardId, request: ScaffoldRequest) -> Result<ScaffoldContext, ModelError> {
        let tree = self.project.locate(target)?;
        let card = tree.card(target).expect("located").clone();
        let expect = |kind: CardKind, what: &str| {
            if card.kind == kind {
                Ok(())
            } else {
                Err(ModelError::KindViolation(format!(
                    "{what} needs a {kind} card, got a {}",
                    card.kind
                )))
            }
        };
        let mut chosen_category = None;
        match &request {
            ScaffoldRequest::Tradeoffs => expect(CardKind::Solution, "trade-off analysis")?,
            ScaffoldRequest::Solutions => expect(CardKind::Tradeoff, "mitigation generation")?,
            ScaffoldRequest::Concepts { concept_num } => {
                expect(CardKind::Solution, "similar-idea search")?;
                if *concept_num < 1 {
                    return Err(ModelError::InvalidArgument("concept_num must be >= 1".into()));
                }
            }
            ScaffoldRequest::SimilarIdeas { category } => {
                expect(CardKind::Solution, "similar-idea generation")?;
                chosen_category = Some(self.project.category(category)?.clone());
            }
            ScaffoldRequest::Question { question } => {
                if question.trim().is_empty() {
                    return Err(ModelError::EmptyQuestion);
                }
                tree.check_attach(target, [CardKind::Qa])?;
            }
        }
        let path = tree.trace_to_root(target)?;
        let ancestor_solution = path
            .iter()
            .rev()
            .skip(1)
            .find(|c| c.kind == CardKind::Solution)
            .map(|c| (*c).clone());
        let prior_tradeoffs = tree
            .children_of(target)
            .into_iter()
            .filter(|c| c.kind == CardKind::Tradeoff)
            .cloned()
            .collect();
        Ok(ScaffoldContext {
            request,
            design_problem: self.project.brief.description.clone(),
            target: card,
            ancestor_solution,
            prior_tradeoffs,
            categories: self.project.categories.clone(),
            chosen_category,
        })
    }

    /// Applies the result of an LLM action, re-validating against the
    /// current state (the target may have been deleted meanwhile).
    pub fn commit_scaffold(&mut self, outcome: ScaffoldOutcome) -> Result<ActionEvent, ModelError> {
        let ScaffoldOutcome {
            target,
            output,
            latency_ms,
        } = outcome;
        let tree = self.project.locate(&target)?;
        let canvas = tree.id.clone();
        let now = self.clock.now_ms();
        let siblings: Vec<&IdeaCard> = tree.children_of(&target);
        match output {
            ScaffoldOutput::Tradeoffs(drafts) | ScaffoldOutput::Solutions(drafts) if drafts.is_empty() => {
                Err(ModelError::InvalidArgument("LLM action produced no cards".into()))
            }
            ScaffoldOutput::Tradeoffs(mut drafts) | ScaffoldOutput::Solutions(mut drafts) => {
                let action = match drafts[0].kind {
                    CardKind::Tradeoff => ActionKind::ExpandTradeoffs,
                    _ => ActionKind::ExpandSolutions,
                };
                tree.check_attach(&target, drafts.iter().map(|d| d.kind))?;
                dedupe_names(&siblings, &mut drafts);
                let placed = drafts.into_iter().map(|d| (target.clone(), d)).collect();
                self.attach_event(action, &target, &canvas, placed, Some(latency_ms), now)
            }
            ScaffoldOutput::SimilarIdeas { schema, mut ideas } => {
                tree.check_attach(&target, [schema.kind])?;
                dedupe_names(&[], &mut ideas);
                let seq = self.project.next_seq();
                let schema_id = card_id(seq, 0);
                let mut placed = vec![(target.clone(), schema)];
                placed.extend(ideas.into_iter().map(|d| (schema_id.clone(), d)));
                self.attach_event(
                    ActionKind::ExpandSimilar,
                    &target,
                    &canvas,
                    placed,
                    Some(latency_ms),
                    now,
                )
            }
            ScaffoldOutput::Answer { question, answer } => {
                tree.check_attach(&target, [CardKind::Qa])?;
                let draft = CardDraft {
                    kind: CardKind::Qa,
                    name: question.clone(),
                    description: answer.clone(),
                    origin: Origin::System,
                    category_id: None,
                    qa: Some(QaPair { question, answer }),
                };
                self.attach_event(
                    ActionKind::AskQuestion,
                    &target,
                    &canvas,
                    vec![(target.clone(), draft)],
                    Some(latency_ms),
                    now,
                )
            }
            ScaffoldOutput::Concepts(proposals) => {
                let seq = self.project.next_seq();
                let mut added: Vec<SchemaCategory> = Vec::new();
                let mut proposed: Vec<CategoryId> = Vec::new();
                for proposal in proposals {
                    let existing = proposal
                        .existing
                        .as_ref()
                        .and_then(|id| self.project.category(id).ok())
                        .or_else(|| self.project.category_by_name(&proposal.name))
                        .map(|c| c.id.clone())
                        .or_else(|| {
                            let key = name_key(&proposal.name);
                            added.iter().find(|c| name_key(&c.name) == key).map(|c| c.id.clone())
                        });
                    let id = match existing {
                        Some(id) => id,
                        None => {
                            let category = SchemaCategory {
                                id: CategoryId::new(format!("cat-{seq:06}-{:02}", added.len())),
                                name: proposal.name,
                                description: proposal.description,
                                origin: CategoryOrigin::SimilarPivot,
                            };
                            let id = category.id.clone();
                            added.push(category);
                            id
                        }
                    };
                    if !proposed.contains(&id) {
                        proposed.push(id);
                    }
                }
                let produced = proposed.iter().map(|c| c.to_string()).collect();
                self.submit(
                    ActionKind::ExpandSimilar,
                    Actor::User,
                    Some(target),
                    produced,
                    Some(latency_ms),
                    EventPayload::Concepts { added, proposed },
                    now,
                )
            }
        }
    }

    fn scaffold(
        &mut self,
        orchestrator: &Orchestrator,
        target: &CardId,
        request: ScaffoldRequest,
    ) -> crate::Result<ActionEvent> {
        let context = self.scaffold_context(target, request)?;
        let outcome = orchestrator.run(&context)?;
        Ok(self.commit_scaffold(outcome)?)
    }

    /// Runs the three-step overview chain and stores the result.
    pub fn generate_overview(&mut self, orchestrator: &Orchestrator) -> crate::Result<ActionEvent> {
        let overview = orchestrator.generate_overview(&self.project.brief)?;
        Ok(self.record_overview(overview)?)
    }

    /// Tradeoff button: three more tradeoff cards under a solution.
    pub fn expand_tradeoffs(&mut self, orchestrator: &Orchestrator, solution: &CardId) -> crate::Result<Vec<CardId>> {
        let event = self.scaffold(orchestrator, solution, ScaffoldRequest::Tradeoffs)?;
        Ok(event.produced_cards.into_iter().map(CardId::new).collect())
    }

    /// Solution button: three more mitigation cards under a tradeoff.
    pub fn expand_solutions(&mut self, orchestrator: &Orchestrator, tradeoff: &CardId) -> crate::Result<Vec<CardId>> {
        let event = self.scaffold(orchestrator, tradeoff, ScaffoldRequest::Solutions)?;
        Ok(event.produced_cards.into_iter().map(CardId::new).collect())
    }

    /// Similar button: proposes concept categories the idea embodies and adds
    /// the new ones to the project. Returns the proposed category ids.
    pub fn expand_similar(
        &mut self,
        orchestrator: &Orchestrator,
        solution: &CardId,
        concept_num: usize,
    ) -> crate::Result<Vec<CategoryId>> {
        let event = self.scaffold(orchestrator, solution, ScaffoldRequest::Concepts { concept_num })?;
        Ok(event.produced_cards.into_iter().map(CategoryId::new).collect())
    }

    /// Picks one proposed concept: a schema card plus sub-ideas under it.
    /// Returns the schema card id followed by the sub-idea ids.
    pub fn select_concept(
        &mut self,
        orchestrator: &Orchestrator,
        solution: &CardId,
        category: &CategoryId,
    ) -> crate::Result<Vec<CardId>> {
        let request = ScaffoldRequest::SimilarIdeas {
            category: category.clone(),
        };
        let event = self.scaffold(orchestrator, solution, request)?;
        Ok(event.produced_cards.into_iter().map(CardId::new).collect())
    }

    /// Q&A on a card; the answer is attached as a qa leaf.
    pub fn ask_question(
        &mut self,
        orchestrator: &Orchestrator,
        card: &CardId,
        question: &str,
    ) -> crate::Result<CardId> {
        let request = ScaffoldRequest::Question {
            question: question.trim().to_owned(),
        };
        let event = self.scaffold(orchestrator, card, request)?;
        Ok(CardId::new(event.produced_cards[0].clone()))
    }
}
