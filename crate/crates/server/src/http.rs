//! HTTP+JSON API for interactive evolution sessions.
//!
//! | method | path | body | reply |
//! |---|---|---|---|
//! | POST | `/sessions` | partial session config, or empty | 201, generation view |
//! | GET | `/sessions/{id}/generation` | | generation view |
//! | POST | `/sessions/{id}/choice` | `{"index": i, "generation": g?}` | next generation view |
//! | POST | `/sessions/{id}/reroll` | `{"generation": g?}` or empty | fresh generation view |
//! | GET | `/sessions/{id}/history` | | config and actions, enough to replay |
//! | GET | `/schema` | | block types, colours, orientations, versions |
//!
//! Errors reply `{"error": reason, "message": text}`.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use evocraft_core::block::{block_schema, BlockInfo, BLOCK_SCHEMA_VERSION};
use evocraft_core::evolution::IecError;
use evocraft_core::iec::{Action, GenerationPayload, IecConfig, IecSession, SessionError, PAYLOAD_SCHEMA_VERSION};
use evocraft_core::Orientation;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Default)]
pub struct Sessions {
    next_id: AtomicU64,
    by_id: Mutex<BTreeMap<String, Arc<Mutex<IecSession>>>>,
}

impl Sessions {
    fn insert(&self, s: IecSession) -> String {
        let id = format!("s{}", self.next_id.fetch_add(1, Ordering::Relaxed) + 1);
        self.by_id.lock().expect("session table poisoned").insert(id.clone(), Arc::new(Mutex::new(s)));
        id
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<IecSession>>, ApiError> {
        self.by_id.lock().expect("session table poisoned").get(id).cloned().ok_or_else(|| ApiError::unknown_session(id))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationView {
    pub session_id: String,
    #[serde(flatten)]
    pub payload: GenerationPayload,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiceRequest {
    pub index: usize,
    /// Generation the choice was made on; a mismatch is rejected.
    #[serde(default)]
    pub generation: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RerollRequest {
    #[serde(default)]
    pub generation: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub session_id: String,
    pub config: IecConfig,
    pub actions: Vec<Action>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, message: impl Into<String>) -> Self {
        ApiError { status, body: ErrorBody { error: error.into(), message: message.into() } }
    }

    fn unknown_session(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session {id:?}"))
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let msg = e.to_string();
        match e {
            SessionError::InvalidConfig(_) => Self::new(StatusCode::BAD_REQUEST, "invalid_config", msg),
            SessionError::StaleGeneration { .. } => Self::new(StatusCode::CONFLICT, "stale_generation", msg),
            SessionError::Choice(IecError::OutOfRange { .. }) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "out_of_range", msg),
            SessionError::Choice(IecError::Filtered { .. }) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "not_displayable", msg),
            SessionError::Choice(IecError::Arity { .. }) | SessionError::Es(_) => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", msg),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

/// Parses a JSON body; an empty body means `T::default()`.
fn parse_body<T: DeserializeOwned + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.to_string()))
}

fn view(id: &str, s: &IecSession) -> GenerationView {
    GenerationView { session_id: id.to_string(), payload: s.payload() }
}

type Shared = Arc<Sessions>;

async fn create(State(st): State<Shared>, body: Bytes) -> Result<(StatusCode, Json<GenerationView>), ApiError> {
    let config: IecConfig = parse_body(&body)?;
    let session = IecSession::new(config)?;
    let v = view("", &session);
    let id = st.insert(session);
    tracing::info!(session = %id, "session created");
    Ok((StatusCode::CREATED, Json(GenerationView { session_id: id, ..v })))
}

async fn generation(State(st): State<Shared>, Path(id): Path<String>) -> Result<Json<GenerationView>, ApiError> {
    let s = st.get(&id)?;
    let s = s.lock().expect("session poisoned");
    Ok(Json(view(&id, &s)))
}

async fn choice(State(st): State<Shared>, Path(id): Path<String>, body: Bytes) -> Result<Json<GenerationView>, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "bad_request", "choice needs a body with an index"));
    }
    let req: ChoiceRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.to_string()))?;
    let s = st.get(&id)?;
    let mut s = s.lock().expect("session poisoned");
    s.submit_choice(req.index, req.generation)?;
    Ok(Json(view(&id, &s)))
}

async fn reroll(State(st): State<Shared>, Path(id): Path<String>, body: Bytes) -> Result<Json<GenerationView>, ApiError> {
    let req: RerollRequest = parse_body(&body)?;
    let s = st.get(&id)?;
    let mut s = s.lock().expect("session poisoned");
    s.reroll(req.generation)?;
    Ok(Json(view(&id, &s)))
}

async fn history(State(st): State<Shared>, Path(id): Path<String>) -> Result<Json<History>, ApiError> {
    let s = st.get(&id)?;
    let s = s.lock().expect("session poisoned");
    Ok(Json(History { session_id: id, config: s.config().clone(), actions: s.history().to_vec() }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemaBlock {
    #[serde(flatten)]
    pub info: BlockInfoView,
    /// `#rrggbb`; `None` for AIR.
    pub color: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockInfoView {
    pub id: u16,
    pub name: String,
    pub movability: String,
    pub physics: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemaDoc {
    pub block_schema_version: u32,
    pub payload_schema_version: u32,
    /// Meaning of each entry of a voxel array.
    pub voxel_layout: Vec<String>,
    pub orientations: Vec<(i32, String)>,
    pub block_types: Vec<SchemaBlock>,
}

fn info_view(b: &BlockInfo) -> BlockInfoView {
    let name = |v: serde_json::Value| v.as_str().unwrap_or_default().to_string();
    BlockInfoView {
        id: b.id,
        name: b.name.clone(),
        movability: name(serde_json::to_value(b.movability).expect("enum serializes")),
        physics: name(serde_json::to_value(b.physics).expect("enum serializes")),
    }
}

/// Display colour of a block type. Common building blocks get recognisable
/// colours; the rest a stable colour derived from the name.
pub fn block_color(name: &str) -> Option<String> {
    let fixed = match name {
        "AIR" => return None,
        "OBSIDIAN" => "#1b1429",
        "REDSTONE_BLOCK" => "#a31a0e",
        "GLASS" => "#c6e6ee",
        "BROWN_MUSHROOM" => "#8f6a4f",
        "NETHERRACK" => "#6f3534",
        "COBBLESTONE" => "#7a7a7a",
        "SLIME" => "#74c05a",
        "PISTON" | "PISTON_HEAD" | "PISTON_EXTENSION" => "#9c8b6a",
        "STICKY_PISTON" => "#7fa05a",
        "OBSERVER" => "#5f5f5f",
        "GOLD_BLOCK" => "#f5d33c",
        _ => {
            // FNV-1a; keeps colours stable across releases.
            let h = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3));
            return Some(format!("#{:06x}", h & 0xff_ffff));
        }
    };
    Some(fixed.to_string())
}

pub fn schema_doc() -> SchemaDoc {
    SchemaDoc {
        block_schema_version: BLOCK_SCHEMA_VERSION,
        payload_schema_version: PAYLOAD_SCHEMA_VERSION,
        voxel_layout: ["x", "y", "z", "type", "orientation"].map(String::from).to_vec(),
        orientations: Orientation::ALL.iter().map(|o| (o.id(), o.name().to_string())).collect(),
        block_types: block_schema().iter().map(|b| SchemaBlock { info: info_view(b), color: block_color(&b.name) }).collect(),
    }
}

async fn schema() -> Json<SchemaDoc> {
    Json(schema_doc())
}

pub fn router() -> Router {
    router_with(Arc::new(Sessions::default()))
}

pub fn router_with(sessions: Arc<Sessions>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/generation", get(generation))
        .route("/sessions/{id}/choice", post(choice))
        .route("/sessions/{id}/reroll", post(reroll))
        .route("/sessions/{id}/history", get(history))
        .route("/schema", get(schema))
        .with_state(sessions)
}

/// Serves the API until the listener fails.
pub async fn serve_http(listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router()).await
}
