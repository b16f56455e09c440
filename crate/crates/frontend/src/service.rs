use std::net::SocketAddr;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::DefaultBodyLimit;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use htmlflow::ExportFormat;
use serde::Deserialize;
use serde_json::json;

use crate::request::{convert, ConversionRequest, RulesSource};

pub const DEFAULT_MAX_BODY_BYTES: usize = 16 * 1024 * 1024;
pub const MAX_BODY_ENV: &str = "CONVERT_MAX_BODY_BYTES";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServiceConfig {
    pub max_body_bytes: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            max_body_bytes: DEFAULT_MAX_BODY_BYTES,
        }
    }
}

impl ServiceConfig {
    /// Defaults, with the body limit taken from `CONVERT_MAX_BODY_BYTES` when set.
    pub fn from_env() -> Result<Self, String> {
        let mut config = ServiceConfig::default();
        if let Ok(value) = std::env::var(MAX_BODY_ENV) {
            config.max_body_bytes = value
                .trim()
                .parse()
                .map_err(|_| format!("{MAX_BODY_ENV}={value:?} is not a byte count"))?;
        }
        Ok(config)
    }
}

#[derive(Debug, Deserialize)]
struct GetTextRequest {
    html: String,
    #[serde(default)]
    annotation_rules: Option<serde_json::Value>,
    #[serde(default)]
    postprocessor: Option<String>,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

async fn health() -> &'static str {
    "OK"
}

async fn get_text(body: Result<Bytes, BytesRejection>) -> Response {
    let body = match body {
        Ok(b) => b,
        Err(rejection) => return error(rejection.status(), rejection.body_text()),
    };
    let request: GetTextRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("invalid request body: {e}")),
    };
    let format = match request.postprocessor.as_deref().map(str::parse::<ExportFormat>) {
        None => ExportFormat::Plain,
        Some(Ok(f)) => f,
        Some(Err(e)) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    let conversion = ConversionRequest {
        html: request.html.into_bytes(),
        encoding_hint: None,
        rules: request.annotation_rules.map(RulesSource::Value),
        format,
        profile_overrides: None,
    };
    let result = tokio::task::spawn_blocking(move || convert(&conversion)).await;
    match result {
        Ok(Ok(out)) => match format {
            ExportFormat::Xml | ExportFormat::Html => Json(json!({ "output": out.output })).into_response(),
            ExportFormat::Plain | ExportFormat::Jsonl => {
                let annotations: Vec<_> = out
                    .document
                    .annotations
                    .iter()
                    .map(|a| json!([a.start, a.end, a.label]))
                    .collect();
                Json(json!({ "text": out.document.text, "annotations": annotations })).into_response()
            }
        },
        Ok(Err(e)) => error(StatusCode::BAD_REQUEST, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, format!("conversion failed: {e}")),
    }
}

pub fn router(config: ServiceConfig) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/get_text", post(get_text))
        .layer(DefaultBodyLimit::max(config.max_body_bytes))
}

/// Serves until the listener fails or the process receives Ctrl-C.
pub async fn serve(listener: tokio::net::TcpListener, config: ServiceConfig) -> std::io::Result<()> {
    axum::serve(listener, router(config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

pub async fn bind(address: SocketAddr) -> std::io::Result<tokio::net::TcpListener> {
    tokio::net::TcpListener::bind(address).await
}
