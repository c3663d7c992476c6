//! Read-only HTTP view of a bundle for the front explorer.
//!
//! | route | reply |
//! |---|---|
//! | `GET /api/meta` | manifest plus current selection |
//! | `GET /api/front?stage=i` | front table of stage `i` (default: last) |
//! | `GET /api/solution/{id}/slice?kind=source\|target\|transformed&z=k` | base64 PNG |
//! | `GET /api/solution/{id}/dvf?z=k` | rows of displacement vectors (mm) |
//! | `GET /api/solution/{id}/metrics` | [`Metrics`] |
//! | `POST /api/select` `{"id": ...}` | writes `selected.json` and renders |
//!
//! Unknown ids or stages answer 404, malformed queries or bodies 400.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::bundle::{read_json, write_json, Bundle, FrontRow, Manifest, SELECTED};
use crate::error::{CliError, Result};
use crate::metrics::{compute_metrics, Metrics};
use crate::render::{dvf_slice, render_solution, slice_png, write_rendered, Rendered, SliceKind};

pub const SELECTED_DIR: &str = "selected";

impl IntoResponse for CliError {
    fn into_response(self) -> Response {
        let status = match &self {
            CliError::NotFound(_) => StatusCode::NOT_FOUND,
            CliError::BadRequest(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (
            status,
            Json(ErrorBody {
                error: self.to_string(),
            }),
        )
            .into_response()
    }
}

#[derive(Serialize, Deserialize)]
struct ErrorBody {
    error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub id: String,
    pub metrics: Metrics,
}

#[derive(Serialize)]
struct Meta<'a> {
    #[serde(flatten)]
    manifest: &'a Manifest,
    selected: Option<Selection>,
}

#[derive(Serialize)]
struct FrontReply<'a> {
    stage: usize,
    rows: &'a [FrontRow],
}

#[derive(Deserialize)]
struct FrontQuery {
    stage: Option<usize>,
}

#[derive(Deserialize)]
struct SliceQuery {
    kind: String,
    z: usize,
}

#[derive(Serialize)]
struct SliceReply {
    id: String,
    kind: String,
    z: usize,
    width: usize,
    height: usize,
    png_base64: String,
}

#[derive(Deserialize)]
struct DvfQuery {
    z: usize,
}

#[derive(Serialize)]
struct DvfReply {
    id: String,
    z: usize,
    width: usize,
    height: usize,
    vectors: Vec<Vec<[f64; 3]>>,
}

#[derive(Deserialize)]
struct SelectRequest {
    id: String,
}

struct AppState {
    bundle: Bundle,
    renders: Mutex<HashMap<String, Arc<Rendered>>>,
    metrics: Mutex<HashMap<String, Metrics>>,
    select: Mutex<()>,
}

type Shared = Arc<AppState>;

impl AppState {
    fn rendered(&self, id: &str) -> Result<Arc<Rendered>> {
        if let Some(r) = self.renders.lock().unwrap().get(id) {
            return Ok(r.clone());
        }
        let sol = self.bundle.solution(id)?;
        let r = Arc::new(render_solution(&sol, self.bundle.problem())?);
        self.renders
            .lock()
            .unwrap()
            .insert(id.to_string(), r.clone());
        Ok(r)
    }

    fn metrics(&self, id: &str) -> Result<Metrics> {
        if let Some(m) = self.metrics.lock().unwrap().get(id) {
            return Ok(m.clone());
        }
        let sol = self.bundle.solution(id)?;
        let m = compute_metrics(id, &sol, self.bundle.problem())?;
        self.metrics
            .lock()
            .unwrap()
            .insert(id.to_string(), m.clone());
        Ok(m)
    }

    fn selection(&self) -> Result<Option<Selection>> {
        let path = self.bundle.root().join(SELECTED);
        if path.exists() {
            read_json(&path).map(Some)
        } else {
            Ok(None)
        }
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T> + Send + 'static) -> Result<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| CliError::Bundle(format!("worker failed: {e}")))?
}

fn query<T>(q: std::result::Result<Query<T>, QueryRejection>) -> Result<T> {
    q.map(|Query(v)| v)
        .map_err(|e| CliError::BadRequest(e.body_text()))
}

async fn meta(State(s): State<Shared>) -> Result<Response> {
    let selected = s.selection()?;
    Ok(Json(Meta {
        manifest: s.bundle.manifest(),
        selected,
    })
    .into_response())
}

async fn front(
    State(s): State<Shared>,
    q: std::result::Result<Query<FrontQuery>, QueryRejection>,
) -> Result<Response> {
    let stage = query(q)?.stage.unwrap_or(s.bundle.stage_count());
    let rows = s.bundle.front(stage)?;
    Ok(Json(FrontReply { stage, rows }).into_response())
}

async fn slice(
    State(s): State<Shared>,
    Path(id): Path<String>,
    q: std::result::Result<Query<SliceQuery>, QueryRejection>,
) -> Result<Json<SliceReply>> {
    let q = query(q)?;
    let kind = SliceKind::parse(&q.kind)
        .ok_or_else(|| CliError::BadRequest(format!("unknown slice kind `{}`", q.kind)))?;
    s.bundle.row(&id)?;
    let dims = s.bundle.problem().dims();
    if q.z >= dims[2] {
        return Err(CliError::BadRequest(format!(
            "z = {} outside 0..{}",
            q.z, dims[2]
        )));
    }
    let st = s.clone();
    let key = id.clone();
    let png = blocking(move || {
        let p = st.bundle.problem();
        match kind {
            SliceKind::Source => slice_png(&p.source, q.z),
            SliceKind::Target => slice_png(&p.target, q.z),
            SliceKind::Transformed => slice_png(&st.rendered(&key)?.transformed_source, q.z),
        }
    })
    .await?;
    Ok(Json(SliceReply {
        id,
        kind: q.kind,
        z: q.z,
        width: dims[0],
        height: dims[1],
        png_base64: base64::engine::general_purpose::STANDARD.encode(png),
    }))
}

async fn dvf(
    State(s): State<Shared>,
    Path(id): Path<String>,
    q: std::result::Result<Query<DvfQuery>, QueryRejection>,
) -> Result<Json<DvfReply>> {
    let z = query(q)?.z;
    s.bundle.row(&id)?;
    let dims = s.bundle.problem().dims();
    if z >= dims[2] {
        return Err(CliError::BadRequest(format!(
            "z = {z} outside 0..{}",
            dims[2]
        )));
    }
    let st = s.clone();
    let key = id.clone();
    let vectors = blocking(move || dvf_slice(&st.rendered(&key)?.dvf, dims, z)).await?;
    Ok(Json(DvfReply {
        id,
        z,
        width: dims[0],
        height: dims[1],
        vectors,
    }))
}

async fn metrics(State(s): State<Shared>, Path(id): Path<String>) -> Result<Json<Metrics>> {
    s.bundle.row(&id)?;
    Ok(Json(blocking(move || s.metrics(&id)).await?))
}

async fn select(State(s): State<Shared>, body: Bytes) -> Result<Json<Selection>> {
    let req: SelectRequest = serde_json::from_slice(&body)
        .map_err(|e| CliError::BadRequest(format!("expected {{\"id\": ...}}: {e}")))?;
    s.bundle.row(&req.id)?;
    let selection = blocking(move || {
        let metrics = s.metrics(&req.id)?;
        let rendered = s.rendered(&req.id)?;
        let _guard = s.select.lock().unwrap();
        write_rendered(&s.bundle.root().join(SELECTED_DIR), &rendered)?;
        let selection = Selection {
            id: req.id,
            metrics,
        };
        write_json(&s.bundle.root().join(SELECTED), &selection)?;
        Ok(selection)
    })
    .await?;
    Ok(Json(selection))
}

pub fn router(bundle: Bundle) -> Router {
    let state = Arc::new(AppState {
        bundle,
        renders: Mutex::new(HashMap::new()),
        metrics: Mutex::new(HashMap::new()),
        select: Mutex::new(()),
    });
    Router::new()
        .route("/api/meta", get(meta))
        .route("/api/front", get(front))
        .route("/api/solution/{id}/slice", get(slice))
        .route("/api/solution/{id}/dvf", get(dvf))
        .route("/api/solution/{id}/metrics", get(metrics))
        .route("/api/select", post(select))
        .with_state(state)
}

pub async fn serve(bundle: Bundle, addr: SocketAddr) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| CliError::io(addr.to_string(), e))?;
    eprintln!("serving {} on http://{addr}", bundle.root().display());
    axum::serve(listener, router(bundle))
        .await
        .map_err(|e| CliError::io(addr.to_string(), e))
}
