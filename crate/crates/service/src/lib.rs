//! HTTP scoring service.
//!
//! Sessions collect questionnaire answers and recordings, are scored once,
//! and expire after a configurable time. Session state is kept in memory and
//! mirrored to an append-only log so a restart picks up where it left off.

pub mod clock;
pub mod config;
pub mod error;
mod routes;
pub mod store;

use std::sync::Arc;
use std::time::Duration;

use rspscrn_core::pipeline::Screener;

pub use clock::{Clock, ManualClock, SystemClock};
pub use config::{ConfigError, ServiceConfig};
pub use error::ApiError;
pub use routes::router;
pub use store::{SessionStore, StoreError};

/// Shared handler state.
#[derive(Clone)]
pub struct AppState {
    pub screener: Arc<Screener>,
    pub store: Arc<SessionStore>,
    pub clock: Arc<dyn Clock>,
    pub config: Arc<ServiceConfig>,
}

impl AppState {
    /// Loads models, tree and fusion weights and replays the session log.
    pub fn from_config(config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<Self, ConfigError> {
        let screener = config.build_screener()?;
        let store = SessionStore::open(&config.storage_dir)?;
        Ok(AppState {
            screener: Arc::new(screener),
            store: Arc::new(store),
            clock,
            config: Arc::new(config),
        })
    }

    /// Expires sessions older than the configured TTL. Returns how many.
    pub async fn expire_now(&self) -> Result<usize, StoreError> {
        let ttl = chrono::Duration::seconds(self.config.session_ttl_secs as i64);
        self.store.expire_created_before(self.clock.now() - ttl).await
    }
}

/// Binds, spawns the expiry sweeper and serves until ctrl-c.
pub async fn serve(state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(&state.config.listen).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    serve_on(listener, state, shutdown_signal()).await
}

/// Serves on an already-bound listener until `shutdown` resolves.
pub async fn serve_on(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let sweeper = {
        let state = state.clone();
        let period = Duration::from_secs(state.config.session_ttl_secs.clamp(1, 60));
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(period);
            loop {
                tick.tick().await;
                match state.expire_now().await {
                    Ok(0) => {}
                    Ok(n) => tracing::info!(expired = n, "expired sessions"),
                    Err(e) => tracing::warn!(error = %e, "expiry sweep failed"),
                }
            }
        })
    };
    let result = axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await;
    sweeper.abort();
    result
}

async fn shutdown_signal() {
    let _ = tokio::signal::ctrl_c().await;
}
