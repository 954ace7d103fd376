//! Persistence and the HTTP/JSON surface consumed by the canvas UI.
//!
//! Card routes take the owning `project_id` in the body (or the query for
//! `DELETE`), since card ids are only unique within a project.

mod error;
mod routes;
mod state;
pub mod store;

use std::net::SocketAddr;

pub use error::{status_for, ApiError};
pub use routes::{router, JsonBody};
pub use state::{AppState, OverviewStatus};
pub use store::{Store, StoreError};

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(state)).await
}
