use std::collections::HashMap;
use std::path::PathBuf;

use peergaze::session::{ClientEvent, Group, Outbound, ServerMessage, Session, SessionLog};
use peergaze::UserId;
use tokio::fs::File;
use tokio::io::{AsyncWriteExt, BufWriter};
use tokio::sync::{mpsc, oneshot};
use tokio::task::JoinHandle;

use crate::{io_err, Result};

pub type Outbox = mpsc::UnboundedSender<ServerMessage>;

/// Requests handled by a session task, one at a time in arrival order.
pub enum Command {
    Join {
        user: UserId,
        group: Group,
        outbox: Outbox,
        reply: oneshot::Sender<peergaze::Result<()>>,
    },
    /// Errors go back through `outbox`.
    Event {
        user: UserId,
        event: ClientEvent,
        outbox: Outbox,
    },
    Close {
        reply: oneshot::Sender<Result<SessionLog>>,
    },
}

struct Actor {
    session: Session,
    clients: HashMap<UserId, Outbox>,
    file: BufWriter<File>,
    path: PathBuf,
    written: usize,
}

pub async fn spawn(session: Session, path: PathBuf) -> Result<(mpsc::Sender<Command>, JoinHandle<()>)> {
    let file = File::create(&path)
        .await
        .map_err(io_err(format!("creating {}", path.display())))?;
    let mut actor = Actor {
        session,
        clients: HashMap::new(),
        file: BufWriter::new(file),
        path,
        written: 0,
    };
    let (tx, mut rx) = mpsc::channel(1024);
    let task = tokio::spawn(async move {
        while let Some(cmd) = rx.recv().await {
            if actor.handle(cmd).await {
                break;
            }
        }
    });
    Ok((tx, task))
}

impl Actor {
    fn dispatch(&self, out: Vec<Outbound>) {
        for o in out {
            if let Some(tx) = self.clients.get(&o.to) {
                let _ = tx.send(o.msg);
            }
        }
    }

    async fn persist(&mut self) -> Result<()> {
        let records = &self.session.log().records[self.written..];
        for r in records {
            let line = r.to_line() + "\n";
            self.file
                .write_all(line.as_bytes())
                .await
                .map_err(io_err(format!("writing {}", self.path.display())))?;
        }
        self.written += records.len();
        self.file
            .flush()
            .await
            .map_err(io_err(format!("writing {}", self.path.display())))
    }

    fn step(&mut self, user: &UserId, event: ClientEvent) -> peergaze::Result<Vec<Outbound>> {
        self.session.ingest(user, event)?;
        let clock = self.session.clock();
        self.session.tick(clock)
    }

    /// Returns true once the session is closed.
    async fn handle(&mut self, cmd: Command) -> bool {
        match cmd {
            Command::Join {
                user,
                group,
                outbox,
                reply,
            } => match self.session.join(user.clone(), group) {
                Ok(out) => {
                    self.clients.insert(user, outbox);
                    self.dispatch(out);
                    let _ = reply.send(Ok(()));
                }
                Err(e) => {
                    let _ = reply.send(Err(e));
                }
            },
            Command::Event { user, event, outbox } => {
                let leaving = matches!(event, ClientEvent::Leave);
                match self.step(&user, event) {
                    Ok(out) => self.dispatch(out),
                    Err(e) => {
                        let _ = outbox.send(ServerMessage::error(&e));
                    }
                }
                if leaving {
                    self.clients.remove(&user);
                }
            }
            Command::Close { reply } => {
                let result = self.close().await;
                let _ = reply.send(result);
                return true;
            }
        }
        if let Err(e) = self.persist().await {
            log::error!("session {}: {e}", self.session.id());
        }
        false
    }

    async fn close(&mut self) -> Result<SessionLog> {
        let log = self.session.close()?.clone();
        self.persist().await?;
        self.file
            .get_ref()
            .sync_all()
            .await
            .map_err(io_err(format!("syncing {}", self.path.display())))?;
        for tx in self.clients.values() {
            let _ = tx.send(ServerMessage::End);
        }
        self.clients.clear();
        log::info!("session {} closed with {} records", self.session.id(), log.records.len());
        Ok(log)
    }
}
