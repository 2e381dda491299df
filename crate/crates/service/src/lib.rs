//! HTTP front end serving case listings and on-demand sliced renders from a
//! directory of compiled assets.
//!
//! - `GET /cases` lists decodable assets and warns about the rest.
//! - `POST /render` takes a JSON [`RenderRequest`] and answers with raw RGBA8
//!   (`X-Width`/`X-Height` headers) or, if the client accepts `image/png`,
//!   a PNG. `X-Render-Ms` and `X-State-Index` carry timing and the selected
//!   state.
//! - `GET /healthz` answers `ok`.

pub mod request;
pub mod store;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use splatslice_core::render::render_linear;
use splatslice_core::FrameImage;

pub use request::{CameraSpec, FieldError, PlaneSpec, RenderInputs, RenderRequest, MAX_PIXELS};
pub use store::{CaseDescriptor, CaseListing, CaseStore, CaseWarning, LoadError, ASSET_EXTENSION};

pub const PNG_MIME: &str = "image/png";
pub const RGBA_MIME: &str = "application/octet-stream";

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<String>,
}

#[derive(Debug)]
pub enum ApiError {
    BadRequest(FieldError),
    Load(LoadError),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, error, field) = match self {
            ApiError::BadRequest(e) => (StatusCode::BAD_REQUEST, e.to_string(), Some(e.field)),
            ApiError::Load(e @ LoadError::NotFound(_)) => (StatusCode::NOT_FOUND, e.to_string(), None),
            ApiError::Load(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), None),
            ApiError::Internal(e) => (StatusCode::INTERNAL_SERVER_ERROR, e, None),
        };
        (status, Json(ErrorBody { error, field })).into_response()
    }
}

/// A rendered frame with the metadata sent alongside it.
#[derive(Debug, Clone)]
pub struct RenderedFrame {
    pub frame: FrameImage,
    pub state_index: usize,
    pub render_ms: f64,
}

/// Loads the case and renders the request synchronously.
pub fn render_request(store: &CaseStore, req: &RenderRequest) -> Result<RenderedFrame, ApiError> {
    let inputs = req.inputs().map_err(ApiError::BadRequest)?;
    let asset = store.load(&req.case_id).map_err(ApiError::Load)?;
    let start = Instant::now();
    let (image, state_index) = render_linear(&asset, &inputs.plane, &inputs.camera, &inputs.options)
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    let frame = image.to_frame();
    Ok(RenderedFrame {
        frame,
        state_index,
        render_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn wants_png(headers: &HeaderMap) -> bool {
    headers
        .get_all(header::ACCEPT)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .flat_map(|v| v.split(','))
        .any(|v| v.split(';').next().is_some_and(|m| m.trim().eq_ignore_ascii_case(PNG_MIME)))
}

async fn healthz() -> &'static str {
    "ok"
}

async fn list_cases(State(store): State<Arc<CaseStore>>) -> Result<Json<CaseListing>, ApiError> {
    let listing = tokio::task::spawn_blocking(move || store.list())
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(Json(listing))
}

async fn render(
    State(store): State<Arc<CaseStore>>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let req = RenderRequest::from_json(&body).map_err(ApiError::BadRequest)?;
    let png = wants_png(&headers);
    let rendered = tokio::task::spawn_blocking(move || render_request(&store, &req))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;

    let frame = rendered.frame;
    let (width, height) = (frame.width(), frame.height());
    let (mime, bytes) = if png {
        let bytes = frame.to_png().map_err(|e| ApiError::Internal(e.to_string()))?;
        (PNG_MIME, bytes)
    } else {
        (RGBA_MIME, frame.into_pixels())
    };
    let mut response = bytes.into_response();
    let h = response.headers_mut();
    h.insert(header::CONTENT_TYPE, HeaderValue::from_static(mime));
    h.insert("x-width", HeaderValue::from(width));
    h.insert("x-height", HeaderValue::from(height));
    h.insert("x-state-index", HeaderValue::from(rendered.state_index as u64));
    h.insert(
        "x-render-ms",
        HeaderValue::from_str(&format!("{:.3}", rendered.render_ms)).expect("ascii number"),
    );
    Ok(response)
}

pub fn router(store: Arc<CaseStore>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/cases", get(list_cases))
        .route("/render", post(render))
        .with_state(store)
}

/// Serves `dir` on an already bound listener until ctrl-c.
pub async fn serve(listener: tokio::net::TcpListener, dir: impl Into<PathBuf>) -> std::io::Result<()> {
    let app = router(Arc::new(CaseStore::new(dir)));
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accept_negotiation() {
        let mut h = HeaderMap::new();
        assert!(!wants_png(&h));
        h.insert(header::ACCEPT, HeaderValue::from_static("text/html, image/png;q=0.9"));
        assert!(wants_png(&h));
        h.insert(header::ACCEPT, HeaderValue::from_static("application/octet-stream"));
        assert!(!wants_png(&h));
    }
}
