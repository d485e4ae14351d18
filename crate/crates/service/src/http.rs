use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use anyhow::Context;
use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::json;
use termsuggest::analytics::{metrics_by_service, read_log, LogRecord, SearchEvent, SelectionEvent, ServiceType};
use termsuggest::combined::{combined_suggest, Section, SectionedSuggestions};
use termsuggest::recommender::AssociationTable;

use crate::bundle::Bundle;
use crate::config::ServiceConfig;
use crate::eventlog::EventLog;

const MAX_LIMIT: usize = 100;

/// Immutable search structures. Replaced as a whole on reload.
pub struct Indexes {
    pub bundle: Bundle,
    pub table: AssociationTable,
}

impl Indexes {
    pub fn load(config: &ServiceConfig) -> anyhow::Result<Self> {
        let bundle = Bundle::load(&config.bundle_path)?;
        let file = std::fs::File::open(&config.str_path)
            .with_context(|| format!("opening {}; run build-str first", config.str_path.display()))?;
        let table = AssociationTable::read_json(std::io::BufReader::new(file))
            .with_context(|| format!("loading {}", config.str_path.display()))?;
        Ok(Indexes { bundle, table })
    }
}

/// Issued visitor ids with idle expiry.
pub struct SessionRegistry {
    idle: Duration,
    seen: Mutex<HashMap<String, Instant>>,
}

impl SessionRegistry {
    pub fn new(idle: Duration) -> Self {
        SessionRegistry {
            idle,
            seen: Mutex::new(HashMap::new()),
        }
    }

    pub fn issue(&self) -> String {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let now = Instant::now();
        let mut seen = self.seen.lock().unwrap();
        seen.retain(|_, last| now.duration_since(*last) <= self.idle);
        seen.insert(id.clone(), now);
        id
    }

    /// True if `id` was issued and has not idled out; refreshes its expiry.
    pub fn touch(&self, id: &str) -> bool {
        let now = Instant::now();
        let mut seen = self.seen.lock().unwrap();
        match seen.get_mut(id) {
            Some(last) if now.duration_since(*last) <= self.idle => {
                *last = now;
                true
            }
            Some(_) => {
                seen.remove(id);
                false
            }
            None => false,
        }
    }
}

pub struct AppState {
    pub config: ServiceConfig,
    indexes: RwLock<Arc<Indexes>>,
    pub log: EventLog,
    pub sessions: SessionRegistry,
}

impl AppState {
    pub fn new(config: ServiceConfig, indexes: Indexes, log: EventLog) -> Self {
        AppState {
            config,
            indexes: RwLock::new(Arc::new(indexes)),
            log,
            sessions: SessionRegistry::new(Duration::from_secs(termsuggest::analytics::SESSION_TIMEOUT_SECS as u64)),
        }
    }

    /// The current indexes. Callers keep their snapshot across a reload.
    pub fn indexes(&self) -> Arc<Indexes> {
        self.indexes.read().unwrap().clone()
    }

    pub fn swap_indexes(&self, next: Indexes) {
        *self.indexes.write().unwrap() = Arc::new(next);
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/suggest", get(suggest))
        .route("/session", post(new_session))
        .route("/log/selection", post(log_selection))
        .route("/log/search", post(log_search))
        .route("/metrics", get(metrics))
        .route("/reload", post(reload))
        .route("/health", get(|| async { "ok" }))
        .with_state(state)
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn field_error(status: StatusCode, message: &str, fields: &[&str]) -> Response {
    (status, Json(json!({ "error": message, "fields": fields }))).into_response()
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SuggestionOut {
    pub term: String,
    pub position: usize,
    pub section: Section,
    pub source: String,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SuggestResponse {
    pub query: String,
    pub service_type: ServiceType,
    pub suggestions: Vec<SuggestionOut>,
}

/// Runs one suggester. Pure given the indexes and config.
pub fn suggest_with(indexes: &Indexes, config: &ServiceConfig, q: &str, service: ServiceType, limit: Option<usize>) -> SuggestResponse {
    let b = &indexes.bundle;
    let list = match service {
        ServiceType::UserSearchTerms => SectionedSuggestions::main_only(b.user_terms.suggest(q, limit.unwrap_or(config.limit))),
        ServiceType::Concordance => SectionedSuggestions::main_only(b.concordance.suggest(q, limit.unwrap_or(config.limit))),
        ServiceType::Thesaurus => SectionedSuggestions::main_only(b.thesaurus.suggest(q, limit.unwrap_or(config.limit))),
        ServiceType::Combined => {
            let mut params = config.combined_params();
            params.ts_limit = limit.unwrap_or(params.ts_limit);
            combined_suggest(&b.thesaurus, &indexes.table, q, &params)
        }
    };
    SuggestResponse {
        query: q.to_string(),
        service_type: service,
        suggestions: list
            .iter()
            .map(|(section, s)| SuggestionOut {
                term: s.term.display().to_string(),
                position: s.position,
                section,
                source: s.source.code().to_string(),
            })
            .collect(),
    }
}

async fn suggest(State(state): State<Arc<AppState>>, Query(params): Query<HashMap<String, String>>) -> Response {
    let Some(q) = params.get("q") else {
        return error(StatusCode::BAD_REQUEST, "missing query parameter q");
    };
    let service = match params.get("service").filter(|s| !s.is_empty()) {
        Some(s) => match s.parse::<ServiceType>() {
            Ok(s) => s,
            Err(e) => return error(StatusCode::BAD_REQUEST, e),
        },
        None => state.config.active_service,
    };
    let limit = match params.get("limit").filter(|s| !s.is_empty()) {
        Some(l) => match l.parse::<usize>() {
            Ok(n) if (1..=MAX_LIMIT).contains(&n) => Some(n),
            _ => return error(StatusCode::BAD_REQUEST, format!("limit must be an integer from 1 to {MAX_LIMIT}")),
        },
        None => None,
    };
    let indexes = state.indexes();
    Json(suggest_with(&indexes, &state.config, q, service, limit)).into_response()
}

async fn new_session(State(state): State<Arc<AppState>>) -> Response {
    Json(json!({ "session_id": state.sessions.issue() })).into_response()
}

#[derive(Deserialize)]
struct SelectionInput {
    entered_term: String,
    chosen_term: String,
    position: usize,
    #[serde(default)]
    section: Section,
    service_type: ServiceType,
    timestamp: Option<DateTime<Utc>>,
    session_id: String,
}

#[derive(Deserialize)]
struct SearchInput {
    submitted_term: String,
    service_type: Option<ServiceType>,
    timestamp: Option<DateTime<Utc>>,
    session_id: String,
}

async fn append(state: &AppState, record: LogRecord) -> Response {
    if let Err(e) = record.validate() {
        let fields = e.fields();
        return (
            StatusCode::UNPROCESSABLE_ENTITY,
            Json(json!({ "error": e.to_string(), "fields": fields })),
        )
            .into_response();
    }
    if state.config.require_session && !state.sessions.touch(record.session_id()) {
        return field_error(StatusCode::FORBIDDEN, "unknown or expired session", &["session_id"]);
    }
    match state.log.append(&record).await {
        Ok(()) => (StatusCode::CREATED, Json(json!({ "status": "logged" }))).into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, format!("log write failed: {e}")),
    }
}

async fn log_selection(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let input: SelectionInput = match serde_json::from_slice(&body) {
        Ok(i) => i,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed selection record: {e}")),
    };
    let record = LogRecord::Selection(SelectionEvent {
        entered_term: input.entered_term,
        chosen_term: input.chosen_term,
        position: input.position,
        section: input.section,
        service_type: input.service_type,
        timestamp: input.timestamp.unwrap_or_else(Utc::now),
        session_id: input.session_id,
    });
    append(&state, record).await
}

async fn log_search(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let input: SearchInput = match serde_json::from_slice(&body) {
        Ok(i) => i,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed search record: {e}")),
    };
    let record = LogRecord::Search(SearchEvent {
        submitted_term: input.submitted_term,
        service_type: input.service_type.or(Some(state.config.active_service)),
        timestamp: input.timestamp.unwrap_or_else(Utc::now),
        session_id: input.session_id,
    });
    append(&state, record).await
}

async fn metrics(State(state): State<Arc<AppState>>, Query(params): Query<HashMap<String, String>>) -> Response {
    let filter = match params.get("service").filter(|s| !s.is_empty()) {
        Some(s) => match s.parse::<ServiceType>() {
            Ok(s) => Some(s),
            Err(e) => return error(StatusCode::BAD_REQUEST, e),
        },
        None => None,
    };
    let path = state.log.path().to_path_buf();
    let read = tokio::task::spawn_blocking(move || match std::fs::File::open(&path) {
        Ok(f) => read_log(std::io::BufReader::new(f)).map_err(|e| e.to_string()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Default::default()),
        Err(e) => Err(e.to_string()),
    })
    .await;
    let contents = match read {
        Ok(Ok(c)) => c,
        Ok(Err(e)) => return error(StatusCode::INTERNAL_SERVER_ERROR, format!("event log unreadable: {e}")),
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    };
    let mut all = metrics_by_service(&contents.records);
    all.retain(|s, _| filter.is_none_or(|f| f == *s));
    Json(json!({ "services": all, "warning": contents.trailing_garbage })).into_response()
}

async fn reload(State(state): State<Arc<AppState>>) -> Response {
    let config = state.config.clone();
    match tokio::task::spawn_blocking(move || Indexes::load(&config)).await {
        Ok(Ok(next)) => {
            state.swap_indexes(next);
            Json(json!({ "status": "reloaded" })).into_response()
        }
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, format!("reload failed, keeping current indexes: {e:#}")),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

/// Loads indexes, opens the log and serves until ctrl-c.
pub async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    let indexes = Indexes::load(&config)?;
    let log = EventLog::open(&config.log_path).with_context(|| format!("opening log {}", config.log_path.display()))?;
    let listener = tokio::net::TcpListener::bind(&config.listen)
        .await
        .with_context(|| format!("binding {}", config.listen))?;
    eprintln!(
        "listening on {} (active service {}, log {})",
        listener.local_addr()?,
        config.active_service,
        config.log_path.display()
    );
    let state = Arc::new(AppState::new(config, indexes, log));
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
