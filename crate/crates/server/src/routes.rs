use std::collections::BTreeMap;

use axum::extract::{Path, Query, Request, State};
use axum::http::StatusCode;
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use wata_core::codebook::{AssignRequest, AuditEntry, CodingError, CodingSession, Progress, TermAssignment};
use wata_core::gender::GenderedTerms;
use wata_core::report::{ReportBundle, ReportRow};
use wata_core::sampler::DEFAULT_SAMPLE_SIZE;
use wata_core::termstats::{StatsError, TermScore};
use wata_core::{sample_tweets, Partition, SampleRequest, TermStatus, Theme, TweetRecord};

use crate::data::AppState;

/// Header carrying the shared token for mutating requests.
pub const TOKEN_HEADER: &str = "x-wata-token";

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn unknown_partition(p: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, format!("unknown partition {p}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<CodingError> for ApiError {
    fn from(e: CodingError) -> Self {
        let status = match &e {
            CodingError::UnknownTheme(_) | CodingError::UnknownPartition(_) | CodingError::UnknownTerm { .. } => {
                StatusCode::NOT_FOUND
            }
            CodingError::WrongRound { .. }
            | CodingError::IncompleteRound { .. }
            | CodingError::AlreadyFinalRound(_)
            | CodingError::ThemeInUse { .. }
            | CodingError::DuplicateThemeName(_)
            | CodingError::DuplicateThemeId(_) => StatusCode::CONFLICT,
            CodingError::EmptyThemeName | CodingError::ReservedThemeName(_) => StatusCode::UNPROCESSABLE_ENTITY,
            CodingError::Io(_) | CodingError::BadLogLine { .. } | CodingError::Csv(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            log::error!("coding store: {e}");
        }
        ApiError::new(status, e.to_string())
    }
}

impl From<StatsError> for ApiError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::UnknownPartition(p) => ApiError::unknown_partition(p.as_str()),
            other => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, other.to_string()),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// All routes. Mutating routes pass through the read-only and token check.
pub fn router(state: AppState) -> Router {
    let mutating = Router::new()
        .route("/codebook/themes", post(create_theme))
        .route("/codebook/themes/{id}", delete(delete_theme))
        .route("/assignments", put(assign))
        .route("/sessions/{c}/advance-round", post(advance_round))
        .route_layer(middleware::from_fn_with_state(state.clone(), guard_mutation));
    Router::new()
        .route("/countries", get(countries))
        .route("/countries/{c}/terms", get(terms))
        .route("/countries/{c}/terms/{term}/samples", get(samples))
        .route("/codebook", get(codebook))
        .route("/sessions/{c}", get(session))
        .route("/progress", get(progress))
        .route("/audit", get(audit))
        .route("/export", get(export))
        .route("/gender/{c}/terms", get(gender_terms))
        .merge(mutating)
        .with_state(state)
}

async fn guard_mutation(State(state): State<AppState>, req: Request, next: Next) -> Response {
    if state.read_only {
        return ApiError::new(StatusCode::FORBIDDEN, "service is read-only").into_response();
    }
    if let Some(expected) = &state.token {
        let given = req.headers().get(TOKEN_HEADER).and_then(|v| v.to_str().ok());
        if given != Some(expected.as_str()) {
            return ApiError::new(StatusCode::UNAUTHORIZED, format!("missing or wrong {TOKEN_HEADER}")).into_response();
        }
    }
    next.run(req).await
}

fn partition(state: &AppState, label: &str) -> ApiResult<Partition> {
    let p = Partition::new(label);
    if state.run.term_lists.contains_key(&p) {
        Ok(p)
    } else {
        Err(ApiError::unknown_partition(label))
    }
}

#[derive(Debug, Serialize)]
struct CountryView {
    partition: Partition,
    tweets: usize,
    terms: usize,
}

async fn countries(State(state): State<AppState>) -> Json<Vec<CountryView>> {
    let run = &state.run;
    Json(
        run.term_lists
            .iter()
            .map(|(p, list)| CountryView {
                partition: p.clone(),
                tweets: run.corpus.index.partition_size(p).unwrap_or(0),
                terms: list.len(),
            })
            .collect(),
    )
}

#[derive(Debug, Deserialize)]
struct TermsQuery {
    k: Option<usize>,
}

#[derive(Debug, Serialize)]
struct TermView<'a> {
    #[serde(flatten)]
    score: &'a TermScore,
    status: TermStatus,
    coded_round: Option<u8>,
}

async fn terms(
    State(state): State<AppState>,
    Path(c): Path<String>,
    Query(q): Query<TermsQuery>,
) -> ApiResult<Response> {
    let p = partition(&state, &c)?;
    let list = &state.run.term_lists[&p];
    let store = state.store();
    let views: Vec<TermView> = list
        .iter()
        .take(q.k.unwrap_or(usize::MAX))
        .map(|score| {
            let a = store.assignment(&p, &score.term);
            TermView {
                score,
                status: a.map_or(TermStatus::Unthemed, |a| a.status.clone()),
                coded_round: a.map(|a| a.round),
            }
        })
        .collect();
    Ok(Json(views).into_response())
}

#[derive(Debug, Deserialize)]
struct SampleQuery {
    n: Option<usize>,
    seed: Option<u64>,
}

async fn samples(
    State(state): State<AppState>,
    Path((c, term)): Path<(String, String)>,
    Query(q): Query<SampleQuery>,
) -> ApiResult<Json<Vec<TweetRecord>>> {
    let p = partition(&state, &c)?;
    let seed = q
        .seed
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "the seed query parameter is required"))?;
    let req = SampleRequest {
        term,
        partition: p,
        n: q.n.unwrap_or(DEFAULT_SAMPLE_SIZE),
        seed,
    };
    let corpus = &state.run.corpus;
    Ok(Json(sample_tweets(&req, &corpus.index, &corpus.records)?))
}

#[derive(Debug, Serialize)]
struct CodebookView {
    themes: Vec<Theme>,
    audit_length: usize,
}

async fn codebook(State(state): State<AppState>) -> Json<CodebookView> {
    let store = state.store();
    Json(CodebookView {
        themes: store.themes().to_vec(),
        audit_length: store.audit_log().len(),
    })
}

#[derive(Debug, Deserialize)]
struct NewTheme {
    name: String,
    #[serde(default)]
    description: String,
}

async fn create_theme(State(state): State<AppState>, Json(body): Json<NewTheme>) -> ApiResult<(StatusCode, Json<Theme>)> {
    let theme = state.store().create_theme(&body.name, &body.description)?;
    Ok((StatusCode::CREATED, Json(theme)))
}

async fn delete_theme(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    state.store().delete_theme(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum StatusKind {
    Unthemed,
    Themed,
    IgnoredMultiContext,
}

#[derive(Debug, Deserialize)]
struct AssignBody {
    term: String,
    partition: Partition,
    status: StatusKind,
    theme_id: Option<String>,
    round: u8,
    #[serde(default)]
    note: String,
    #[serde(default)]
    reviewed_samples: Vec<String>,
}

async fn assign(State(state): State<AppState>, Json(body): Json<AssignBody>) -> ApiResult<Json<TermAssignment>> {
    let status = match (body.status, body.theme_id) {
        (StatusKind::Themed, Some(id)) => TermStatus::Themed(id),
        (StatusKind::Themed, None) => {
            return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "status themed needs a theme_id"));
        }
        (_, Some(_)) => {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "theme_id is only allowed with status themed",
            ));
        }
        (StatusKind::Unthemed, None) => TermStatus::Unthemed,
        (StatusKind::IgnoredMultiContext, None) => TermStatus::IgnoredMultiContext,
    };
    let req = AssignRequest {
        term: body.term,
        partition: body.partition,
        status,
        round: body.round,
        note: body.note,
        reviewed_samples: body.reviewed_samples,
    };
    Ok(Json(state.store().assign_term(req)?))
}

async fn session(State(state): State<AppState>, Path(c): Path<String>) -> ApiResult<Json<CodingSession>> {
    let p = partition(&state, &c)?;
    Ok(Json(state.store().session(&p)?))
}

async fn advance_round(State(state): State<AppState>, Path(c): Path<String>) -> ApiResult<Json<CodingSession>> {
    let p = partition(&state, &c)?;
    Ok(Json(state.store().advance_round(&p)?))
}

#[derive(Debug, Serialize)]
struct ProgressView {
    round: u8,
    #[serde(flatten)]
    progress: Progress,
}

async fn progress(State(state): State<AppState>) -> ApiResult<Json<BTreeMap<Partition, ProgressView>>> {
    let store = state.store();
    let mut out = BTreeMap::new();
    for p in state.run.term_lists.keys() {
        let view = ProgressView {
            round: store.state().round(p),
            progress: store.progress(p)?,
        };
        out.insert(p.clone(), view);
    }
    Ok(Json(out))
}

async fn audit(State(state): State<AppState>) -> Json<Vec<AuditEntry>> {
    Json(state.store().audit_log().to_vec())
}

#[derive(Debug, Serialize)]
struct MatrixRow {
    theme: String,
    counts: BTreeMap<Partition, usize>,
}

#[derive(Debug, Serialize)]
struct ExportView {
    partial: bool,
    themes: Vec<Theme>,
    partitions: BTreeMap<Partition, Vec<ReportRow>>,
    matrix: Vec<MatrixRow>,
}

async fn export(State(state): State<AppState>) -> Json<ExportView> {
    let bundle = ReportBundle::from_store(&state.store(), &state.run.term_lists);
    let matrix = bundle
        .theme_matrix()
        .into_iter()
        .map(|(theme, counts)| MatrixRow {
            theme,
            counts: bundle.partitions.keys().cloned().zip(counts).collect(),
        })
        .collect();
    Json(ExportView {
        partial: bundle.is_partial(),
        themes: bundle.themes,
        partitions: bundle.partitions,
        matrix,
    })
}

async fn gender_terms(State(state): State<AppState>, Path(c): Path<String>) -> ApiResult<Json<GenderedTerms>> {
    let p = partition(&state, &c)?;
    state
        .run
        .gender
        .get(&p)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no gender analysis for {p}")))
}
