//! Network front end for the session engine.
//!
//! One TCP port speaks two framings of the same JSON messages: newline-delimited
//! JSON, or WebSocket text frames when the connection opens with an HTTP `GET`.
//! Each session runs in its own task that owns the engine and its log file.

mod actor;
mod connection;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use peergaze::session::{Session, SessionConfig, SessionLog};
use tokio::net::TcpListener;
use tokio::sync::{mpsc, oneshot};
use tokio::task::JoinHandle;

pub use actor::Command;

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error(transparent)]
    Core(#[from] peergaze::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("session `{0}` configured twice")]
    DuplicateSession(String),

    #[error("session task for `{0}` stopped unexpectedly")]
    ActorGone(String),
}

pub type Result<T, E = ServerError> = std::result::Result<T, E>;

pub(crate) fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> ServerError {
    let context = context.into();
    move |source| ServerError::Io { context, source }
}

pub(crate) type Registry = Arc<HashMap<String, mpsc::Sender<Command>>>;

pub struct ServerConfig {
    pub addr: SocketAddr,
    pub log_dir: PathBuf,
    pub sessions: Vec<SessionConfig>,
}

/// A running server. Dropping the handle leaves it running until the runtime stops.
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    task: JoinHandle<Result<Vec<SessionLog>>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting, closes every session and returns their final logs.
    pub async fn shutdown(mut self) -> Result<Vec<SessionLog>> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.wait().await
    }

    /// Waits for the server to stop on its own (after its shutdown signal).
    pub async fn wait(self) -> Result<Vec<SessionLog>> {
        match self.task.await {
            Ok(r) => r,
            Err(e) => Err(ServerError::Io {
                context: "server task".into(),
                source: std::io::Error::other(e),
            }),
        }
    }
}

/// Binds, opens every configured session and starts serving in the background.
pub async fn start(config: ServerConfig) -> Result<ServerHandle> {
    let (tx, rx) = oneshot::channel();
    let mut handle = start_with_signal(config, async {
        let _ = rx.await;
    })
    .await?;
    handle.shutdown = Some(tx);
    Ok(handle)
}

/// Like [`start`], stopping when `signal` completes.
pub async fn start_with_signal(
    config: ServerConfig,
    signal: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<ServerHandle> {
    tokio::fs::create_dir_all(&config.log_dir)
        .await
        .map_err(io_err(format!("creating {}", config.log_dir.display())))?;
    let mut registry = HashMap::new();
    let mut actors = Vec::new();
    for sc in config.sessions {
        let id = sc.session.clone();
        if registry.contains_key(&id) {
            return Err(ServerError::DuplicateSession(id));
        }
        let session = Session::new(sc)?;
        let path = config.log_dir.join(format!("{id}.jsonl"));
        let (tx, task) = actor::spawn(session, path).await?;
        registry.insert(id.clone(), tx);
        actors.push((id, task));
    }
    let registry: Registry = Arc::new(registry);
    let listener = TcpListener::bind(config.addr)
        .await
        .map_err(io_err(format!("binding {}", config.addr)))?;
    let addr = listener.local_addr().map_err(io_err("local address"))?;
    log::info!("listening on {addr}");

    let task = tokio::spawn(async move {
        let mut connections = Vec::new();
        tokio::pin!(signal);
        loop {
            tokio::select! {
                _ = &mut signal => break,
                accepted = listener.accept() => match accepted {
                    Ok((stream, peer)) => {
                        log::debug!("connection from {peer}");
                        connections.push(tokio::spawn(connection::handle(stream, registry.clone())));
                    }
                    Err(e) => log::warn!("accept failed: {e}"),
                },
            }
        }
        let mut logs = Vec::new();
        for (id, tx) in registry.iter() {
            let (reply, rx) = oneshot::channel();
            if tx.send(Command::Close { reply }).await.is_err() {
                return Err(ServerError::ActorGone(id.clone()));
            }
            logs.push(rx.await.map_err(|_| ServerError::ActorGone(id.clone()))??);
        }
        drop(registry);
        for (_, task) in actors {
            let _ = task.await;
        }
        // give writers a moment to deliver the end notice, then drop readers
        tokio::time::sleep(std::time::Duration::from_millis(50)).await;
        for c in connections {
            c.abort();
        }
        Ok(logs)
    });
    Ok(ServerHandle {
        addr,
        shutdown: None,
        task,
    })
}
