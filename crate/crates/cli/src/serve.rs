use std::io;
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};

use axum::Router;
use evotrack_core::pipeline::{COMPARISON_FILE, EXPLORATION_FILE};
use thiserror::Error;
use tokio::net::TcpListener;
use tower_http::services::ServeDir;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("{0} holds no {EXPLORATION_FILE} or {COMPARISON_FILE}")]
    MissingBundle(PathBuf),
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error("server error: {0}")]
    Io(#[from] io::Error),
}

impl ServeError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ServeError::MissingBundle(_) => 2,
            _ => 1,
        }
    }
}

fn check_bundle(dir: &Path) -> Result<(), ServeError> {
    if [EXPLORATION_FILE, COMPARISON_FILE]
        .iter()
        .any(|f| dir.join(f).is_file())
    {
        Ok(())
    } else {
        Err(ServeError::MissingBundle(dir.to_path_buf()))
    }
}

/// Serves `bundle_dir` read-only on localhost until interrupted. Paths not
/// found in the bundle fall back to `ui_dir` when one is given.
pub async fn serve(bundle_dir: &Path, ui_dir: Option<&Path>, port: u16) -> Result<(), ServeError> {
    check_bundle(bundle_dir)?;
    let listener = TcpListener::bind(SocketAddr::from((Ipv4Addr::LOCALHOST, port)))
        .await
        .map_err(|e| match e.kind() {
            io::ErrorKind::AddrInUse => ServeError::PortInUse(port),
            _ => ServeError::Io(e),
        })?;

    let bundle = ServeDir::new(bundle_dir);
    let app = match ui_dir {
        Some(ui) => Router::new().fallback_service(bundle.fallback(ServeDir::new(ui))),
        None => Router::new().fallback_service(bundle),
    };

    let addr = listener.local_addr()?;
    eprintln!("serving {} on http://{addr}/", bundle_dir.display());
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
