//! Local HTTP API over a pipeline run directory and its coding log.
//!
//! Reads come from the run's term lists, corpus and gender lists, loaded
//! once at startup. Coding mutations go through a single
//! [`wata_core::CodingStore`] behind a mutex, persisted to
//! `coding.jsonl` in the run directory.

mod data;
mod routes;

use std::future::Future;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;

use thiserror::Error;
use tokio::net::TcpListener;
use wata_core::codebook::CodingError;
use wata_core::pipeline::PipelineError;

pub use data::{load_state, required_artifacts, AppState, CODING_LOG_FILE};
pub use routes::{router, TOKEN_HEADER};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiConfig {
    pub bind: IpAddr,
    pub port: u16,
    pub data_dir: PathBuf,
    pub read_only: bool,
    /// When set, mutating requests must carry this value in
    /// [`TOKEN_HEADER`].
    pub token: Option<String>,
}

impl Default for ApiConfig {
    fn default() -> Self {
        ApiConfig {
            bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: 8787,
            data_dir: PathBuf::from("wata-out"),
            read_only: false,
            token: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("port must be in 1..65535")]
    InvalidPort,
    #[error("run directory {dir} is missing: {}", missing.join(", "))]
    MissingArtifacts { dir: PathBuf, missing: Vec<String> },
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error("server: {0}")]
    Io(#[from] std::io::Error),
}

/// A bound, not yet running, service.
pub struct Server {
    listener: TcpListener,
    state: AppState,
}

impl Server {
    /// Loads the run directory and binds the listening socket.
    pub async fn bind(config: &ApiConfig) -> Result<Server, ServeError> {
        if config.port == 0 {
            return Err(ServeError::InvalidPort);
        }
        let state = load_state(config)?;
        let addr = SocketAddr::new(config.bind, config.port);
        let listener = TcpListener::bind(addr)
            .await
            .map_err(|source| ServeError::Bind { addr, source })?;
        Ok(Server { listener, state })
    }

    pub fn local_addr(&self) -> Result<SocketAddr, ServeError> {
        Ok(self.listener.local_addr()?)
    }

    /// Serves until `shutdown` resolves, then drains in-flight requests.
    pub async fn run(self, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), ServeError> {
        log::info!("listening on http://{}", self.listener.local_addr()?);
        axum::serve(self.listener, router(self.state))
            .with_graceful_shutdown(shutdown)
            .await?;
        log::info!("server stopped");
        Ok(())
    }
}

/// Binds and serves until Ctrl-C or SIGTERM.
pub async fn serve(config: &ApiConfig) -> Result<(), ServeError> {
    Server::bind(config).await?.run(shutdown_signal()).await
}

async fn shutdown_signal() {
    let ctrl_c = async {
        if let Err(e) = tokio::signal::ctrl_c().await {
            log::error!("cannot listen for Ctrl-C: {e}");
            std::future::pending::<()>().await;
        }
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(e) => {
                log::error!("cannot listen for SIGTERM: {e}");
                std::future::pending::<()>().await;
            }
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
}
