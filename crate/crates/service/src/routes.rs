use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use tower_http::cors::{Any, CorsLayer};

use crate::api::{self, CombineRequest, EmulateRequest, HealthBody, PresetsBody, HEALTH_SCHEMA, PRESETS_SCHEMA};
use crate::error::ApiError;
use crate::state::{AppState, Model};

type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/health", get(health))
        .route("/model", get(model))
        .route("/presets", get(presets))
        .route("/emulate", post(emulate))
        .route("/combine", post(combine))
        .route("/reload", post(reload))
        .layer(cors)
        .with_state(state)
}

fn loaded(state: &AppState) -> Result<Arc<Model>, ApiError> {
    state.model().ok_or_else(ApiError::not_loaded)
}

/// Any parse failure is a 400, whatever serde's error category.
fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed request body: {e}")))
}

async fn health(State(state): State<Shared>) -> Response {
    let (status, text) = match state.model() {
        Some(_) => (StatusCode::OK, "ok"),
        None => (StatusCode::SERVICE_UNAVAILABLE, "loading"),
    };
    let body = HealthBody {
        schema: HEALTH_SCHEMA.to_string(),
        status: text.to_string(),
    };
    (status, Json(body)).into_response()
}

async fn model(State(state): State<Shared>) -> Result<Response, ApiError> {
    let m = loaded(&state)?;
    Ok(Json(&m.artifact).into_response())
}

async fn presets(State(state): State<Shared>) -> Result<Json<PresetsBody>, ApiError> {
    let m = loaded(&state)?;
    Ok(Json(PresetsBody {
        schema: PRESETS_SCHEMA.to_string(),
        presets: m.presets.clone(),
    }))
}

async fn emulate(State(state): State<Shared>, body: Bytes) -> Result<Response, ApiError> {
    let m = loaded(&state)?;
    let request: EmulateRequest = parse_body(&body)?;
    let fits = m.artifact.quantile_fits();
    let out = api::emulate(&fits, &m.artifact.observed, &request)?;
    Ok(Json(out).into_response())
}

async fn combine(body: Bytes) -> Result<Response, ApiError> {
    let request: CombineRequest = parse_body(&body)?;
    Ok(Json(api::combine(&request)?).into_response())
}

async fn reload(State(state): State<Shared>) -> Result<Response, ApiError> {
    let worker = Arc::clone(&state);
    let result = tokio::task::spawn_blocking(move || worker.reload())
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    match result {
        Ok(_) => Ok(health(State(state)).await),
        Err(e) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())),
    }
}
