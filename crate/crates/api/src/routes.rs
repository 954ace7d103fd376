use std::collections::BTreeMap;

use axum::extract::rejection::QueryRejection;
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use flexmind_core::analytics::analyze_log;
use flexmind_core::llm::ScaffoldRequest;
use flexmind_core::model::{auto_layout, ActionEvent, IdeaCard, LayoutGrid, Position, Project, SchemaCategory};
use flexmind_core::scoring::{parse_ratings_csv, RatingReport};
use flexmind_core::{CanvasId, CardId, CardKind, CategoryId, DesignBrief, IdeaId};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::ApiError;
use crate::state::AppState;

type ApiResult<T> = Result<T, ApiError>;

/// `Json` whose rejections use the API error body.
pub struct JsonBody<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for JsonBody<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| Self(v))
            .map_err(|e| ApiError::new("InvalidArgument", e.body_text()))
    }
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    q.map(|Query(v)| v)
        .map_err(|e| ApiError::new("InvalidArgument", e.body_text()))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/projects", post(create_project).get(list_projects))
        .route("/projects/{id}/overview", get(overview).post(restart_overview))
        .route("/projects/{id}/ideas", post(add_idea))
        .route("/projects/{id}/export", get(export))
        .route("/projects/{id}/log", get(log))
        .route("/projects/{id}/metrics", get(metrics))
        .route("/projects/{id}/saved", get(saved))
        .route("/canvases", post(create_canvas))
        .route("/canvases/{id}/layout", get(layout))
        .route("/cards", post(add_card))
        .route("/cards/{id}", axum::routing::delete(delete_card))
        .route("/cards/{id}/tradeoffs", post(tradeoffs))
        .route("/cards/{id}/solutions", post(solutions))
        .route("/cards/{id}/similar", post(similar))
        .route("/cards/{id}/question", post(question))
        .route("/cards/{id}/save", post(save))
        .route("/cards/{id}/move", post(move_card))
        .route("/score", post(score))
        .with_state(state)
}

#[derive(Deserialize)]
struct NewProject {
    #[serde(default)]
    id: Option<String>,
    brief: BriefBody,
}

#[derive(Deserialize)]
struct BriefBody {
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    title: String,
    description: String,
}

async fn create_project(State(state): State<AppState>, JsonBody(body): JsonBody<NewProject>) -> ApiResult<Response> {
    let b = body.brief;
    let brief = DesignBrief::new(b.id.unwrap_or_else(|| "brief".into()), b.title, b.description)?;
    let id = state.create_project(body.id, brief.clone())?;
    state.start_overview(&id, brief)?;
    Ok((
        StatusCode::ACCEPTED,
        Json(json!({ "project_id": id, "overview": "pending" })),
    )
        .into_response())
}

async fn list_projects(State(state): State<AppState>) -> ApiResult<Json<Value>> {
    Ok(Json(json!({ "projects": state.store().list()? })))
}

async fn overview(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let (status, categories, ideas) = state
        .read(&id, |p| {
            (
                state.overview_status(&id, p),
                p.categories.clone(),
                p.overview_ideas.clone(),
            )
        })
        .await?;
    let mut body = serde_json::to_value(&status).expect("status serializes");
    body["categories"] = json!(categories);
    body["ideas"] = json!(ideas);
    Ok(Json(body))
}

async fn restart_overview(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let (ready, brief) = state.read(&id, |p| (!p.categories.is_empty(), p.brief.clone())).await?;
    if ready {
        return Err(ApiError::new("InvalidArgument", "overview already generated"));
    }
    state.start_overview(&flexmind_core::ProjectId::new(id), brief)?;
    Ok((StatusCode::ACCEPTED, Json(json!({ "overview": "pending" }))).into_response())
}

#[derive(Deserialize)]
struct NewIdea {
    name: String,
    #[serde(default)]
    description: String,
}

async fn add_idea(
    State(state): State<AppState>,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<NewIdea>,
) -> ApiResult<Json<Value>> {
    let idea = state
        .mutate(&id, |s| Ok(s.add_user_idea(&body.name, &body.description)?))
        .await?;
    Ok(Json(json!({ "idea_id": idea })))
}

async fn export(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let text = state.read(&id, Project::to_json).await?;
    Ok(([(header::CONTENT_TYPE, "application/json")], text).into_response())
}

async fn log(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let text = state.read(&id, Project::log_jsonl).await?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

async fn metrics(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let analysis = state.read(&id, |p| analyze_log(p.action_log())).await??;
    Ok(Json(serde_json::to_value(analysis.metrics).expect("metrics serialize")))
}

async fn saved(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let groups = state.read(&id, Project::list_saved).await?;
    Ok(Json(json!({ "groups": groups })))
}

#[derive(Deserialize)]
struct NewCanvas {
    project_id: String,
    idea_id: IdeaId,
}

async fn create_canvas(State(state): State<AppState>, JsonBody(body): JsonBody<NewCanvas>) -> ApiResult<Json<Value>> {
    let (canvas, root) = state
        .mutate(&body.project_id, |s| {
            let canvas = s.create_canvas_from_idea(&body.idea_id)?;
            let root = s.project().canvas(&canvas)?.root_card().clone();
            Ok((canvas, root))
        })
        .await?;
    Ok(Json(json!({ "canvas_id": canvas, "root": root })))
}

#[derive(Deserialize)]
struct ProjectRef {
    project_id: String,
}

async fn layout(
    State(state): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<ProjectRef>, QueryRejection>,
) -> ApiResult<Json<Value>> {
    let r = query(q)?;
    let canvas = CanvasId::new(id);
    let positions: BTreeMap<CardId, Position> = state
        .read(&r.project_id, |p| {
            p.canvas(&canvas).map(|t| auto_layout(t, &LayoutGrid::default()))
        })
        .await??;
    Ok(Json(json!({ "positions": positions })))
}

#[derive(Deserialize)]
struct NewCard {
    project_id: String,
    parent: CardId,
    kind: CardKind,
    name: String,
    #[serde(default)]
    description: String,
}

async fn add_card(State(state): State<AppState>, JsonBody(body): JsonBody<NewCard>) -> ApiResult<Json<Value>> {
    let card = state
        .mutate(&body.project_id, |s| {
            let id = s.add_user_card(&body.parent, body.kind, &body.name, &body.description)?;
            Ok(s.project().card(&id)?.clone())
        })
        .await?;
    Ok(Json(json!({ "cards": [card] })))
}

#[derive(Serialize)]
struct CardsResponse {
    event_seq: u64,
    cards: Vec<IdeaCard>,
}

async fn produced_cards(state: &AppState, project: &str, event: ActionEvent) -> ApiResult<Json<CardsResponse>> {
    let cards = state
        .read(project, |p| {
            event
                .produced_cards
                .iter()
                .map(|id| p.card(&CardId::new(id.clone())).cloned())
                .collect::<Result<Vec<_>, _>>()
        })
        .await??;
    Ok(Json(CardsResponse {
        event_seq: event.seq,
        cards,
    }))
}

async fn tradeoffs(
    State(state): State<AppState>,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<ProjectRef>,
) -> ApiResult<Json<CardsResponse>> {
    let event = state
        .scaffold(&body.project_id, &CardId::new(id), ScaffoldRequest::Tradeoffs)
        .await?;
    produced_cards(&state, &body.project_id, event).await
}

async fn solutions(
    State(state): State<AppState>,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<ProjectRef>,
) -> ApiResult<Json<CardsResponse>> {
    let event = state
        .scaffold(&body.project_id, &CardId::new(id), ScaffoldRequest::Solutions)
        .await?;
    produced_cards(&state, &body.project_id, event).await
}

/// Without `category_id`: propose concepts. With it: place a schema card and
/// its sub-ideas for that concept.
#[derive(Deserialize)]
struct SimilarBody {
    project_id: String,
    #[serde(default)]
    concept_num: Option<usize>,
    #[serde(default)]
    category_id: Option<CategoryId>,
}

async fn similar(
    State(state): State<AppState>,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<SimilarBody>,
) -> ApiResult<Response> {
    let card = CardId::new(id);
    if let Some(category) = body.category_id {
        let event = state
            .scaffold(&body.project_id, &card, ScaffoldRequest::SimilarIdeas { category })
            .await?;
        return Ok(produced_cards(&state, &body.project_id, event).await?.into_response());
    }
    let concept_num = body.concept_num.unwrap_or(state.orchestrator().config().concept_num);
    let event = state
        .scaffold(&body.project_id, &card, ScaffoldRequest::Concepts { concept_num })
        .await?;
    let categories: Vec<SchemaCategory> = state
        .read(&body.project_id, |p| {
            event
                .produced_cards
                .iter()
                .map(|c| p.category(&CategoryId::new(c.clone())).cloned())
                .collect::<Result<Vec<_>, _>>()
        })
        .await??;
    Ok(Json(json!({ "event_seq": event.seq, "categories": categories })).into_response())
}

#[derive(Deserialize)]
struct QuestionBody {
    project_id: String,
    question: String,
}

async fn question(
    State(state): State<AppState>,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<QuestionBody>,
) -> ApiResult<Json<CardsResponse>> {
    let request = ScaffoldRequest::Question {
        question: body.question.trim().to_owned(),
    };
    let event = state.scaffold(&body.project_id, &CardId::new(id), request).await?;
    produced_cards(&state, &body.project_id, event).await
}

async fn save(
    State(state): State<AppState>,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<ProjectRef>,
) -> ApiResult<Json<Value>> {
    let card = CardId::new(id);
    state.mutate(&body.project_id, |s| Ok(s.save_idea(&card)?)).await?;
    Ok(Json(json!({ "saved": card })))
}

async fn delete_card(
    State(state): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<ProjectRef>, QueryRejection>,
) -> ApiResult<Json<Value>> {
    let r = query(q)?;
    let card = CardId::new(id);
    let removed = state.mutate(&r.project_id, |s| Ok(s.delete_card(&card)?)).await?;
    Ok(Json(json!({ "removed": removed })))
}

#[derive(Deserialize)]
struct MoveBody {
    project_id: String,
    x: f64,
    y: f64,
}

async fn move_card(
    State(state): State<AppState>,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<MoveBody>,
) -> ApiResult<Json<Value>> {
    let card = CardId::new(id);
    let position = Position { x: body.x, y: body.y };
    state
        .mutate(&body.project_id, |s| Ok(s.move_card(&card, position)?))
        .await?;
    Ok(Json(json!({ "moved": card, "position": position })))
}

#[derive(Deserialize)]
struct ScoreQuery {
    #[serde(default)]
    format: Option<String>,
}

/// CSV body in, rating report out (JSON, or markdown with `?format=markdown`).
async fn score(q: Result<Query<ScoreQuery>, QueryRejection>, body: String) -> ApiResult<Response> {
    let q = query(q)?;
    let ratings = parse_ratings_csv(body.as_bytes())?;
    let report = RatingReport::build(&ratings)?;
    Ok(match q.format.as_deref() {
        Some("markdown") => ([(header::CONTENT_TYPE, "text/markdown")], report.to_markdown()).into_response(),
        _ => Json(report).into_response(),
    })
}
