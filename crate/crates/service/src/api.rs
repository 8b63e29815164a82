//! JSON HTTP API for the review UI.
//!
//! Every response carries the project revision it was produced from, in an
//! `x-project-revision` header and, for JSON bodies, a `revision` field.
//! Pipeline runs are started with `POST /pairs/{a}/{b}/run` and polled with
//! `GET /pairs/{a}/{b}/status`.

use std::sync::Arc;

use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use collate_core::collation::{CollationError, Direction};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::ServiceError;
use crate::images::{content_type, ImageSize};
use crate::pipeline::{current_stages, stage_hashes};
use crate::project::Stage;
use crate::service::ProjectService;

pub const REVISION_HEADER: &str = "x-project-revision";

type Svc = State<Arc<ProjectService>>;

pub fn router(service: Arc<ProjectService>) -> Router {
    Router::new()
        .route("/manuscripts", get(manuscripts))
        .route("/pairs/{a}/{b}/candidates/{i}", get(candidates))
        .route("/pairs/{a}/{b}/confirm", post(confirm))
        .route("/pairs/{a}/{b}/reject", post(reject))
        .route("/pairs/{a}/{b}/run", post(run))
        .route("/pairs/{a}/{b}/status", get(status))
        .route("/pairs/{a}/{b}/matches", get(matches))
        .route("/images/{illustration_id}", get(image))
        .layer(middleware::from_fn_with_state(
            service.clone(),
            stamp_revision,
        ))
        .with_state(service)
}

/// Adds the revision header to responses that lack one, such as request
/// rejections produced by extractors.
async fn stamp_revision(State(svc): Svc, request: Request, next: Next) -> Response {
    let mut response = next.run(request).await;
    if !response.headers().contains_key(REVISION_HEADER) {
        response
            .headers_mut()
            .insert(REVISION_HEADER, HeaderValue::from(svc.revision()));
    }
    response
}

fn reply(revision: u64, status: StatusCode, mut body: Value) -> Response {
    if let Value::Object(map) = &mut body {
        map.insert("revision".into(), revision.into());
    }
    let mut response = (status, Json(body)).into_response();
    response
        .headers_mut()
        .insert(REVISION_HEADER, HeaderValue::from(revision));
    response
}

struct ApiError {
    revision: u64,
    error: ServiceError,
}

impl ApiError {
    fn new(svc: &ProjectService, error: ServiceError) -> Self {
        Self {
            revision: svc.revision(),
            error,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        use ServiceError as E;
        let status = match &self.error {
            E::UnknownManuscript(_)
            | E::UnknownImage(_)
            | E::ImageMissing(_)
            | E::MissingStage { .. }
            | E::NothingToExport(..) => StatusCode::NOT_FOUND,
            E::IndexOutOfRange { .. } | E::InvalidArgument(_) => StatusCode::BAD_REQUEST,
            E::Collation(
                CollationError::IndexOutOfRange { .. } | CollationError::InvalidArgument(_),
            ) => StatusCode::BAD_REQUEST,
            E::StageOrder { .. } | E::RunInProgress(..) | E::DuplicateManuscript(_) => {
                StatusCode::CONFLICT
            }
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        reply(
            self.revision,
            status,
            json!({ "error": self.error.to_string() }),
        )
    }
}

type ApiResult = Result<Response, ApiError>;

/// Runs a write off the async executor; writes may wait behind a pipeline
/// run.
async fn blocking<T: Send + 'static>(
    svc: &Arc<ProjectService>,
    f: impl FnOnce(&ProjectService) -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ApiError> {
    let worker = svc.clone();
    match tokio::task::spawn_blocking(move || f(&worker)).await {
        Ok(result) => result.map_err(|e| ApiError::new(svc, e)),
        Err(join) => Err(ApiError::new(
            svc,
            ServiceError::Project(format!("worker panicked: {join}")),
        )),
    }
}

async fn manuscripts(State(svc): Svc) -> ApiResult {
    let p = svc.snapshot();
    let manuscripts: Vec<Value> = p
        .manuscript_ids()
        .map(|id| {
            let features = p.features(id).map_err(|e| ApiError::new(&svc, e))?;
            let ids: Vec<&str> = features
                .pyramids()
                .iter()
                .map(|q| q.illustration_id())
                .collect();
            Ok(json!({ "id": id, "count": ids.len(), "illustrations": ids }))
        })
        .collect::<Result<_, ApiError>>()?;
    let pairs: Vec<Value> = p
        .meta()
        .pairs
        .iter()
        .map(|r| json!({ "a": r.a, "b": r.b, "stages": r.stages.keys().collect::<Vec<_>>(), "annotations": r.annotations.len() }))
        .collect();
    Ok(reply(
        p.revision(),
        StatusCode::OK,
        json!({ "project_id": p.project_id(), "manuscripts": manuscripts, "pairs": pairs }),
    ))
}

#[derive(Debug, Deserialize)]
struct CandidateQuery {
    k: Option<usize>,
    mask: Option<String>,
    direction: Option<String>,
}

async fn candidates(
    State(svc): Svc,
    Path((a, b, i)): Path<(String, String, usize)>,
    Query(q): Query<CandidateQuery>,
) -> ApiResult {
    let p = svc.snapshot();
    let fail = |e: ServiceError| ApiError::new(&svc, e);
    let direction: Direction = q
        .direction
        .as_deref()
        .unwrap_or("rows")
        .parse()
        .map_err(|e: CollationError| fail(e.into()))?;
    let mask = match q.mask.as_deref() {
        None | Some("none") => false,
        Some("rejected") => true,
        Some(other) => {
            return Err(fail(ServiceError::InvalidArgument(format!(
                "unknown mask {other:?}"
            ))))
        }
    };
    let k = q.k.unwrap_or(5);
    let (stage, list) = p.candidates(&a, &b, i, direction, k, mask).map_err(fail)?;
    let query_manuscript = match direction {
        Direction::Rows => &a,
        Direction::Cols => &b,
    };
    let query_id = p.features(query_manuscript).map_err(fail)?.pyramids()[i]
        .illustration_id()
        .to_owned();
    Ok(reply(
        p.revision(),
        StatusCode::OK,
        json!({
            "pair": [a, b],
            "direction": direction,
            "query": { "index": i, "illustration_id": query_id },
            "stage": stage,
            "candidates": list,
        }),
    ))
}

#[derive(Debug, Deserialize)]
struct PairIndex {
    i: usize,
    j: usize,
}

async fn confirm(
    State(svc): Svc,
    Path((a, b)): Path<(String, String)>,
    Json(body): Json<PairIndex>,
) -> ApiResult {
    let (entry, revision) = blocking(&svc, move |s| s.confirm(&a, &b, body.i, body.j)).await?;
    Ok(reply(revision, StatusCode::OK, json!({ "entry": entry })))
}

async fn reject(
    State(svc): Svc,
    Path((a, b)): Path<(String, String)>,
    Json(body): Json<PairIndex>,
) -> ApiResult {
    let (entry, revision) = blocking(&svc, move |s| s.reject(&a, &b, body.i, body.j)).await?;
    Ok(reply(revision, StatusCode::OK, json!({ "entry": entry })))
}

#[derive(Debug, Default, Deserialize)]
struct RunRequest {
    #[serde(default)]
    stages: Option<Vec<Stage>>,
}

async fn run(
    State(svc): Svc,
    Path((a, b)): Path<(String, String)>,
    body: Option<Json<RunRequest>>,
) -> ApiResult {
    let stages = body
        .and_then(|Json(r)| r.stages)
        .unwrap_or_else(|| Stage::ALL.to_vec());
    let status = svc
        .start_run(&a, &b, &stages)
        .map_err(|e| ApiError::new(&svc, e))?;
    Ok(reply(
        svc.revision(),
        StatusCode::ACCEPTED,
        json!({ "run": status }),
    ))
}

async fn status(State(svc): Svc, Path((a, b)): Path<(String, String)>) -> ApiResult {
    let p = svc.snapshot();
    let fail = |e| ApiError::new(&svc, e);
    let hashes = stage_hashes(&p, &a, &b).map_err(fail)?;
    let current = current_stages(&p, &a, &b, &hashes);
    let stages: serde_json::Map<String, Value> = Stage::ALL
        .into_iter()
        .map(|s| {
            let recorded = p.stage_record(&a, &b, s).is_some();
            (
                s.to_string(),
                json!({ "present": recorded, "current": current.contains(&s) }),
            )
        })
        .collect();
    Ok(reply(
        p.revision(),
        StatusCode::OK,
        json!({ "pair": [a.clone(), b.clone()], "run": svc.run_status(&a, &b), "stages": stages }),
    ))
}

async fn matches(State(svc): Svc, Path((a, b)): Path<(String, String)>) -> ApiResult {
    let p = svc.snapshot();
    let set = p.export(&a, &b).map_err(|e| ApiError::new(&svc, e))?;
    let body = serde_json::to_value(&set).map_err(|e| ApiError::new(&svc, e.into()))?;
    Ok(reply(p.revision(), StatusCode::OK, body))
}

#[derive(Debug, Deserialize)]
struct ImageQuery {
    size: Option<String>,
}

async fn image(State(svc): Svc, Path(id): Path<String>, Query(q): Query<ImageQuery>) -> ApiResult {
    let p = svc.snapshot();
    let fail = |e| ApiError::new(&svc, e);
    let size: ImageSize = match q.size.as_deref() {
        Some(s) => s.parse().map_err(fail)?,
        None => ImageSize::Full,
    };
    let path = p.images().resolve(p.dir(), &id, size).map_err(fail)?;
    let bytes = tokio::fs::read(&path).await.map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            fail(ServiceError::ImageMissing(id.clone()))
        } else {
            fail(e.into())
        }
    })?;
    let mut response = (
        StatusCode::OK,
        [(header::CONTENT_TYPE, content_type(&path))],
        bytes,
    )
        .into_response();
    response
        .headers_mut()
        .insert(REVISION_HEADER, HeaderValue::from(p.revision()));
    Ok(response)
}
