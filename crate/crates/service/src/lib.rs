//! HTTP/JSON front end for the screening store.
//!
//! | Method | Path                         | Purpose                         |
//! |--------|------------------------------|---------------------------------|
//! | GET    | `/healthz`                   | liveness, body `ok`             |
//! | POST   | `/subjects`                  | register (idempotent)           |
//! | POST   | `/subjects/{cnp}/sessions`   | record and evaluate a session   |
//! | GET    | `/subjects/{cnp}/history`    | all sessions, `?limit=N`        |
//! | GET    | `/subjects/{cnp}/latest`     | most recent session             |
//! | GET    | `/flags`                     | overweight/obese, `?limit=N`    |
//! | GET    | `/reference?age=&sex=&env=`  | reference weight cell           |
//!
//! Every 4xx/5xx response carries an [`ApiError`] JSON body.

mod error;
mod handlers;
pub mod views;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::handler::HandlerWithoutStateExt;
use axum::http::{header, HeaderValue, Method};
use axum::routing::{get, post};
use axum::Router;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

use screening_core::{Environment, ReferenceTable, Store};

pub use error::ApiError;

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
    pub reference: Arc<ReferenceTable>,
    /// Environment assigned to subjects registered without one.
    pub default_environment: Environment,
}

impl AppState {
    pub fn new(store: Arc<Store>, reference: Arc<ReferenceTable>) -> Self {
        AppState {
            store,
            reference,
            default_environment: Environment::Urban,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// Origin allowed by CORS, e.g. `http://localhost:5173`.
    pub ui_origin: Option<String>,
    /// Directory of built UI assets served for unmatched paths.
    pub ui_dir: Option<PathBuf>,
}

pub fn router(state: AppState, config: &ServiceConfig) -> Result<Router, ApiError> {
    let mut app = Router::new()
        .route("/healthz", get(handlers::healthz))
        .route("/subjects", post(handlers::create_subject))
        .route("/subjects/{cnp}/sessions", post(handlers::record_session))
        .route("/subjects/{cnp}/history", get(handlers::history))
        .route("/subjects/{cnp}/latest", get(handlers::latest))
        .route("/flags", get(handlers::flags))
        .route("/reference", get(handlers::reference))
        .method_not_allowed_fallback(handlers::method_not_allowed)
        .with_state(state);

    app = match &config.ui_dir {
        Some(dir) => app.fallback_service(
            ServeDir::new(dir).not_found_service(handlers::not_found.into_service()),
        ),
        None => app.fallback(handlers::not_found),
    };
    if let Some(origin) = &config.ui_origin {
        let origin = HeaderValue::from_str(origin)
            .map_err(|_| ApiError::validation("ui-origin", format!("invalid origin `{origin}`")))?;
        app = app.layer(
            CorsLayer::new()
                .allow_origin(origin)
                .allow_methods([Method::GET, Method::POST])
                .allow_headers([header::CONTENT_TYPE]),
        );
    }
    Ok(app)
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(app: Router, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
