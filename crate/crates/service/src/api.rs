//! Routes and handlers.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use glyphforge_core::{
    audit_schema, category_distribution, cooccurrence, find_signs_with, frequency, CodeField, Corpus, FacetError,
    FacetIndex, GlyphCode, GlyphRole, SelectionState, Sign,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::error::ApiError;
use crate::events::EventKind;
use crate::store::StoreError;
use crate::AppState;

type Shared = State<Arc<AppState>>;

pub const IMAGE_CACHE_CONTROL: &str = "public, max-age=31536000, immutable";

pub fn router(state: Arc<AppState>) -> Router {
    let mut app = Router::new()
        .route("/health", get(health))
        .route("/search", get(search))
        .route("/glyphs/{code}", get(glyph))
        .route("/signs", get(list_signs).post(create_sign))
        .route("/signs/search", get(search_signs))
        .route("/signs/{id}", get(get_sign).put(put_sign).delete(delete_sign))
        .route("/stats/frequency", get(stats_frequency))
        .route("/stats/cooccurrence", get(stats_cooccurrence))
        .route("/stats/categories", get(stats_categories))
        .route("/audit", get(audit))
        .route("/events", axum::routing::post(append_event));
    if let Some(dir) = &state.ui_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    app.with_state(state)
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> ApiError {
        match &e {
            StoreError::BadId(_) => ApiError::bad_request("BadSignId", e.to_string()),
            StoreError::NotFound(_) => ApiError::not_found(e.to_string()),
            StoreError::Exists(_) => ApiError::new(StatusCode::CONFLICT, "Conflict", e.to_string()),
            StoreError::Corrupt { .. } => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "CorruptRecord", e.to_string())
            }
            StoreError::Io { .. } => ApiError::internal(e.to_string()),
        }
    }
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

async fn health(State(state): Shared) -> Json<Value> {
    Json(json!({ "status": "ok", "glyphs": state.catalog.len() }))
}

/// Body of `GET /search`. Field order is part of the wire format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub results: Vec<GlyphCode>,
    pub available: BTreeMap<String, Vec<String>>,
}

pub fn search_response(index: &FacetIndex, state: &SelectionState) -> Result<SearchResponse, FacetError> {
    Ok(SearchResponse {
        results: index.query(state)?,
        available: index.available(state)?,
    })
}

/// Turns `area=hand&fingers=2&side=palm` into a selection state. Each box
/// may appear at most once.
pub fn selection_from_params(index: &FacetIndex, params: &[(String, String)]) -> Result<SelectionState, ApiError> {
    let mut area = None;
    let mut choices = BTreeMap::new();
    for (key, value) in params {
        if key == "area" {
            if area.replace(value.clone()).is_some() {
                return Err(ApiError::bad_request("DuplicateBox", "area given more than once"));
            }
        } else if choices.insert(key.clone(), value.clone()).is_some() {
            return Err(ApiError::bad_request(
                "DuplicateBox",
                format!("box {key} given more than once"),
            ));
        }
    }
    let area = area.ok_or_else(|| ApiError::bad_request("UnknownArea", "missing area parameter"))?;
    let state = SelectionState { area, choices };
    index.schema().validate_state(&state)?;
    Ok(state)
}

async fn search(
    State(state): Shared,
    Query(params): Query<Vec<(String, String)>>,
) -> Result<Json<SearchResponse>, ApiError> {
    let selection = selection_from_params(&state.index, &params)?;
    Ok(Json(search_response(&state.index, &selection)?))
}

#[derive(Serialize)]
struct Classification<'a> {
    prototype: &'a str,
    assignment: &'a BTreeMap<String, String>,
}

#[derive(Serialize)]
struct GlyphView<'a> {
    code: GlyphCode,
    role: Option<GlyphRole>,
    labels: &'a [String],
    field_labels: BTreeMap<CodeField, &'a str>,
    image_url: String,
    width_px: u32,
    height_px: u32,
    facet_attrs: &'a BTreeMap<String, String>,
    classification: Option<Classification<'a>>,
}

async fn glyph(State(state): Shared, Path(raw): Path<String>) -> Result<Response, ApiError> {
    if let Some(stem) = raw.strip_suffix(".png") {
        return glyph_image(state, stem).await;
    }
    let code: GlyphCode = raw.parse()?;
    let glyph = state
        .catalog
        .get_glyph(&code)
        .map_err(|_| ApiError::not_found(format!("no glyph {code}")))?;
    let decomposed = state.schema.decompose(&code).ok();
    let view = GlyphView {
        code,
        role: state.catalog.role_of(&code),
        labels: &glyph.labels,
        field_labels: state.catalog.field_labels(&code),
        image_url: format!("/glyphs/{code}.png"),
        width_px: glyph.width_px,
        height_px: glyph.height_px,
        facet_attrs: &glyph.facet_attrs,
        classification: decomposed.as_ref().map(|(proto, assignment)| Classification {
            prototype: &proto.id,
            assignment: &assignment.values,
        }),
    };
    Ok(Json(view).into_response())
}

async fn glyph_image(state: Arc<AppState>, stem: &str) -> Result<Response, ApiError> {
    let missing = || ApiError::not_found(format!("no image for {stem}"));
    let code: GlyphCode = stem.parse().map_err(|_| missing())?;
    let glyph = state.catalog.get_glyph(&code).map_err(|_| missing())?;
    let bytes = tokio::fs::read(state.image_root.join(&glyph.image_ref))
        .await
        .map_err(|_| missing())?;
    let content_type = if glyph.image_ref.ends_with(".png") {
        "image/png"
    } else {
        "application/octet-stream"
    };
    Ok((
        [
            (header::CONTENT_TYPE, content_type),
            (header::CACHE_CONTROL, IMAGE_CACHE_CONTROL),
        ],
        bytes,
    )
        .into_response())
}

fn parse_sign_body(state: &AppState, body: &Bytes) -> Result<Sign, ApiError> {
    let text = std::str::from_utf8(body).map_err(|e| ApiError::bad_request("ParseError", e.to_string()))?;
    let sign = Sign::parse(text)?;
    if let Some(p) = sign.placements().iter().find(|p| !state.catalog.contains(&p.code)) {
        return Err(ApiError::bad_request(
            "UnknownGlyph",
            format!(
                "placement {} uses {}, which is not in the catalog",
                p.placement_id, p.code
            ),
        ));
    }
    Ok(sign)
}

async fn create_sign(State(state): Shared, body: Bytes) -> Result<Response, ApiError> {
    let sign = parse_sign_body(&state, &body)?;
    let (id, meta) = blocking(move || {
        let id = state.store.create(&sign)?;
        let meta = state.store.get(&id)?.meta;
        Ok((id, meta))
    })
    .await?;
    let location = HeaderValue::from_str(&format!("/signs/{id}")).map_err(|e| ApiError::internal(e.to_string()))?;
    Ok((
        StatusCode::CREATED,
        [(header::LOCATION, location)],
        Json(json!({ "sign_id": id, "created_at": meta.created_at })),
    )
        .into_response())
}

async fn list_signs(State(state): Shared) -> Result<Json<Vec<String>>, ApiError> {
    let listed = blocking(move || Ok(state.store.list()?)).await?;
    Ok(Json(listed.into_iter().map(|(id, _)| id).collect()))
}

async fn get_sign(State(state): Shared, Path(id): Path<String>) -> Result<Response, ApiError> {
    let record = blocking(move || Ok(state.store.get(&id)?)).await?;
    let stamp = |s: &str| HeaderValue::from_str(s).map_err(|e| ApiError::internal(e.to_string()));
    Ok((
        [
            (header::CONTENT_TYPE, HeaderValue::from_static("application/json")),
            (
                header::HeaderName::from_static("x-created-at"),
                stamp(&record.meta.created_at)?,
            ),
            (
                header::HeaderName::from_static("x-modified-at"),
                stamp(&record.meta.modified_at)?,
            ),
        ],
        record.body,
    )
        .into_response())
}

async fn put_sign(State(state): Shared, Path(id): Path<String>, body: Bytes) -> Result<Json<Value>, ApiError> {
    let sign = parse_sign_body(&state, &body)?;
    if !sign.sign_id().is_empty() && sign.sign_id() != id {
        return Err(ApiError::bad_request(
            "IdMismatch",
            format!("body sign_id {:?} does not match path id {id:?}", sign.sign_id()),
        ));
    }
    let meta = blocking(move || {
        let meta = state.store.update(&id, &sign)?;
        Ok((id, meta))
    })
    .await?;
    Ok(Json(json!({ "sign_id": meta.0, "modified_at": meta.1.modified_at })))
}

async fn delete_sign(State(state): Shared, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    blocking(move || Ok(state.store.delete(&id)?)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn load_corpus(state: Arc<AppState>) -> Result<(Arc<AppState>, Corpus), ApiError> {
    blocking(move || {
        let corpus = Corpus::load_dir(state.store.dir())?;
        Ok((state, corpus))
    })
    .await
}

#[derive(Deserialize)]
struct ContainsQuery {
    contains: Option<String>,
}

async fn search_signs(State(state): Shared, Query(q): Query<ContainsQuery>) -> Result<Json<Vec<String>>, ApiError> {
    let pattern = q
        .contains
        .unwrap_or_default()
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<BTreeSet<GlyphCode>, _>>()?;
    let (_, corpus) = load_corpus(state).await?;
    Ok(Json(find_signs_with(&corpus, &pattern)?))
}

async fn stats_frequency(State(state): Shared) -> Result<Response, ApiError> {
    let (_, corpus) = load_corpus(state).await?;
    Ok(Json(frequency(&corpus)).into_response())
}

async fn stats_cooccurrence(State(state): Shared) -> Result<Response, ApiError> {
    let (_, corpus) = load_corpus(state).await?;
    Ok(Json(cooccurrence(&corpus)).into_response())
}

async fn stats_categories(State(state): Shared) -> Result<Response, ApiError> {
    let (state, corpus) = load_corpus(state).await?;
    Ok(Json(category_distribution(&corpus, &state.catalog)?).into_response())
}

async fn audit(State(state): Shared) -> Response {
    Json(audit_schema(&state.schema, &state.catalog)).into_response()
}

#[derive(Deserialize)]
struct EventRequest {
    session_id: String,
    kind: String,
    #[serde(default)]
    payload: Value,
}

async fn append_event(State(state): Shared, body: Bytes) -> Result<Response, ApiError> {
    let req: EventRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request("BadEvent", e.to_string()))?;
    if req.session_id.is_empty() {
        return Err(ApiError::bad_request("BadEvent", "session_id must not be empty"));
    }
    let kind = EventKind::parse(&req.kind)
        .ok_or_else(|| ApiError::bad_request("UnknownKind", format!("unknown event kind {:?}", req.kind)))?;
    let entry = blocking(move || {
        state
            .events
            .append(&req.session_id, kind, req.payload)
            .map_err(|e| ApiError::internal(format!("event log append failed: {e}")))
    })
    .await?;
    Ok((StatusCode::CREATED, Json(json!({ "at": entry.at }))).into_response())
}
