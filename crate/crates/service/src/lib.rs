//! HTTP/JSON front end for the chair search engine: session registry,
//! per-session request serialization, session log persistence, and the
//! `chairsearch` command-line tool.

pub mod api;
pub mod cli;
pub mod config;
pub mod error;
pub mod registry;

use std::sync::Arc;
use std::time::Duration;

use chairsearch_core::session::SystemClock;

pub use api::{router, AppState};
pub use config::{load_engine, ServiceConfig};
pub use error::{ErrorBody, Result, ServiceError};

/// Interval at which expired sessions get their timeout recorded.
pub const REAP_INTERVAL: Duration = Duration::from_secs(1);

/// Validates `config`, builds the engine and serves until interrupted.
pub async fn serve(config: ServiceConfig) -> Result<()> {
    config.validate()?;
    let engine = {
        let c = config.clone();
        tokio::task::spawn_blocking(move || load_engine(c.manifest.as_deref(), c.dictionary.as_deref()))
            .await
            .map_err(|e| ServiceError::Internal(e.to_string()))??
    };
    let app = AppState::new(
        Arc::new(engine),
        Arc::new(SystemClock::new()),
        config.budget_ms,
        Some(config.log_dir.clone()),
    );
    let reaper = app.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(REAP_INTERVAL);
        loop {
            tick.tick().await;
            let r = reaper.clone();
            let _ = tokio::task::spawn_blocking(move || r.reap_timeouts()).await;
        }
    });
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    eprintln!("chairsearch listening on {}", listener.local_addr()?);
    axum::serve(listener, router(app, config.static_dir.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
