//! HTTP facade over a pre-fitted model: observed quantiles, coefficient grid
//! and assumption presets are loaded once, then emulation requests are
//! answered without refitting.

pub mod api;
mod error;
mod routes;
mod state;

pub use error::ApiError;
pub use routes::router;
pub use state::{literature_presets, load_presets, AppState, LoadError, Model, Preset, ServiceConfig};

use std::net::SocketAddr;
use std::sync::Arc;

/// Binds `addr` and serves until Ctrl-C. The model is loaded after the
/// listener is up, so `/health` answers 503 until loading completes.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let state = Arc::new(AppState::new(config));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    let loader = Arc::clone(&state);
    tokio::task::spawn_blocking(move || match loader.reload() {
        Ok(m) => tracing::info!(fits = m.artifact.fits.len(), presets = m.presets.len(), "model loaded"),
        Err(e) => tracing::error!(error = %e, "model load failed"),
    });
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
