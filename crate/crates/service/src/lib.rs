//! HTTP JSON API over a loaded [`System`]: completion, parsing and
//! completability of prefixes.
//!
//! Every response body carries `schema`, the version of the response
//! layout ([`SCHEMA_VERSION`]). Handler time is reported in the
//! `server-timing` header as `handler;dur=<ms>`.

mod api;
mod config;

use std::sync::Arc;
use std::time::Instant;

use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, Request, State};
use axum::http::{header, HeaderName, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Deserialize;
use tower_http::cors::{AllowOrigin, CorsLayer};

use semcomplete_core::coordinator::System;

pub use api::*;
pub use config::{load_system, ServiceConfig, BIND_ENV, DEFAULT_BIND};

pub const SCHEMA_VERSION: u32 = 1;

pub const TIMING_HEADER: &str = "server-timing";

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Core(#[from] semcomplete_core::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("{addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("server: {0}")]
    Server(#[from] std::io::Error),
}

/// A 4xx/5xx response with a JSON body.
struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(ErrorResponse { schema: SCHEMA_VERSION, error: self.1 })).into_response()
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        ApiError(StatusCode::BAD_REQUEST, r.body_text())
    }
}

type Shared = Arc<System>;

/// The API routes over `system`. `cors_origins` empty allows any origin.
pub fn router(system: Shared, cors_origins: &[String]) -> Result<Router, ServiceError> {
    let origins = if cors_origins.is_empty() {
        AllowOrigin::any()
    } else {
        let list = cors_origins
            .iter()
            .map(|o| HeaderValue::from_str(o).map_err(|_| ServiceError::Config(format!("bad CORS origin `{o}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        AllowOrigin::list(list)
    };
    let cors = CorsLayer::new()
        .allow_origin(origins)
        .allow_methods([Method::GET])
        .allow_headers([header::CONTENT_TYPE])
        .expose_headers([HeaderName::from_static(TIMING_HEADER)]);
    Ok(Router::new()
        .route("/health", get(health))
        .route("/complete", get(complete))
        .route("/parse", get(parse))
        .route("/completability", get(completability))
        .fallback(|| async { ApiError(StatusCode::NOT_FOUND, "no such endpoint".into()) })
        .layer(middleware::from_fn(timing))
        .layer(cors)
        .with_state(system))
}

async fn timing(req: Request, next: Next) -> Response {
    let start = Instant::now();
    let mut res = next.run(req).await;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    if let Ok(v) = HeaderValue::from_str(&format!("handler;dur={ms:.3}")) {
        res.headers_mut().insert(TIMING_HEADER, v);
    }
    res
}

/// Runs engine work off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

async fn health(State(sys): State<Shared>) -> Json<HealthResponse> {
    Json(HealthResponse { schema: SCHEMA_VERSION, status: "ok".into(), domain: sys.bundle.domain.name.clone() })
}

#[derive(Deserialize)]
struct CompleteParams {
    prefix: Option<String>,
    k: Option<usize>,
}

async fn complete(
    State(sys): State<Shared>,
    q: Result<Query<CompleteParams>, QueryRejection>,
) -> Result<Json<CompleteResponse>, ApiError> {
    let Query(q) = q?;
    let prefix = q.prefix.ok_or_else(|| ApiError(StatusCode::BAD_REQUEST, "missing `prefix`".into()))?;
    let d = sys.coordinator.cfg.d;
    let k = match q.k {
        Some(0) => return Err(ApiError(StatusCode::BAD_REQUEST, "`k` must be positive".into())),
        Some(k) => k.min(d),
        None => d,
    };
    let p = prefix.clone();
    let out = blocking(move || sys.complete(&p)).await?;
    Ok(Json(CompleteResponse {
        schema: SCHEMA_VERSION,
        prefix,
        completions: out.completions.iter().take(k).map(CompletionItem::from).collect(),
        timed_out: out.timed_out,
    }))
}

#[derive(Deserialize)]
struct ParseParams {
    q: Option<String>,
}

async fn parse(
    State(sys): State<Shared>,
    q: Result<Query<ParseParams>, QueryRejection>,
) -> Result<Json<ParseResponse>, ApiError> {
    let Query(q) = q?;
    let query = q.q.ok_or_else(|| ApiError(StatusCode::BAD_REQUEST, "missing `q`".into()))?;
    let text = query.clone();
    let parses = blocking(move || sys.parse(&text)).await?;
    Ok(Json(ParseResponse { schema: SCHEMA_VERSION, query, parses: parses.iter().map(ParseItem::from).collect() }))
}

#[derive(Deserialize)]
struct PrefixParams {
    prefix: Option<String>,
}

async fn completability(
    State(sys): State<Shared>,
    q: Result<Query<PrefixParams>, QueryRejection>,
) -> Result<Json<CompletabilityResponse>, ApiError> {
    let Query(q) = q?;
    let prefix = q.prefix.ok_or_else(|| ApiError(StatusCode::BAD_REQUEST, "missing `prefix`".into()))?;
    let p = prefix.clone();
    let c = blocking(move || sys.completable(&p)).await?;
    Ok(Json(CompletabilityResponse { schema: SCHEMA_VERSION, prefix, completable: c.completable, dead_at: c.dead_at }))
}

/// Loads the indexes and serves until SIGINT or SIGTERM.
pub async fn serve(cfg: ServiceConfig) -> Result<(), ServiceError> {
    let system = Arc::new(tokio::task::block_in_place(|| load_system(&cfg))?);
    let app = router(system, &cfg.cors_origins)?;
    let addr = cfg.bind_addr();
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .map_err(|source| ServiceError::Bind { addr: addr.clone(), source })?;
    log::info!("listening on {}", listener.local_addr()?);
    serve_on(listener, app, signal()).await
}

/// Serves `app` on a bound listener until `stop` resolves, then drains
/// in-flight requests.
pub async fn serve_on(
    listener: tokio::net::TcpListener,
    app: Router,
    stop: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    axum::serve(listener, app).with_graceful_shutdown(stop).await?;
    Ok(())
}

async fn signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        if let Ok(mut s) = tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            s.recv().await;
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
    log::info!("shutting down");
}
