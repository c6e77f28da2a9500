use std::io;

use futures_util::{future, Sink, SinkExt, Stream, StreamExt};
use peergaze::session::{ClientMessage, ServerMessage};
use peergaze::{Error, UserId};
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::TcpStream;
use tokio::sync::{mpsc, oneshot};
use tokio_tungstenite::tungstenite::Message;

use crate::actor::Outbox;
use crate::{Command, Registry};

pub async fn handle(stream: TcpStream, registry: Registry) {
    let mut head = [0u8; 4];
    let is_ws = matches!(stream.peek(&mut head).await, Ok(4) if &head == b"GET ");
    if is_ws {
        match tokio_tungstenite::accept_async(stream).await {
            Ok(ws) => {
                let (sink, source) = ws.split();
                let sink = sink
                    .sink_map_err(io::Error::other)
                    .with(|line: String| future::ready(Ok::<_, io::Error>(Message::text(line))));
                let source = source.filter_map(|m| {
                    future::ready(match m {
                        Ok(Message::Text(t)) => Some(Ok(t.to_string())),
                        Ok(Message::Close(_)) => Some(Err(io::Error::from(io::ErrorKind::ConnectionAborted))),
                        Ok(_) => None,
                        Err(e) => Some(Err(io::Error::other(e))),
                    })
                });
                serve(Box::pin(source), Box::pin(sink), registry).await;
            }
            Err(e) => log::warn!("websocket handshake failed: {e}"),
        }
    } else {
        let (read, write) = stream.into_split();
        let lines = BufReader::new(read).lines();
        let source = futures_util::stream::unfold(lines, |mut lines| async move {
            match lines.next_line().await {
                Ok(Some(l)) => Some((Ok(l), lines)),
                Ok(None) => None,
                Err(e) => Some((Err(e), lines)),
            }
        });
        let sink = futures_util::sink::unfold(write, |mut w, line: String| async move {
            w.write_all(line.as_bytes()).await?;
            w.write_all(b"\n").await?;
            Ok::<_, io::Error>(w)
        });
        serve(Box::pin(source), Box::pin(sink), registry).await;
    }
}

async fn serve<R, W>(mut source: R, mut sink: W, registry: Registry)
where
    R: Stream<Item = io::Result<String>> + Unpin,
    W: Sink<String, Error = io::Error> + Unpin + Send + 'static,
{
    let (outbox, mut rx) = mpsc::unbounded_channel::<ServerMessage>();
    let writer = tokio::spawn(async move {
        while let Some(msg) = rx.recv().await {
            let end = matches!(msg, ServerMessage::End);
            if sink.send(msg.to_line()).await.is_err() || end {
                break;
            }
        }
        let _ = sink.close().await;
    });

    let mut joined: Option<(UserId, mpsc::Sender<Command>)> = None;
    let mut left = false;
    while let Some(Ok(text)) = source.next().await {
        if text.trim().is_empty() {
            continue;
        }
        let msg = match ClientMessage::parse(&text) {
            Ok(m) => m,
            Err(e) => {
                let _ = outbox.send(ServerMessage::error(&e));
                continue;
            }
        };
        match (msg, &joined) {
            (ClientMessage::Join { session, user, group }, None) => {
                let Some(tx) = registry.get(&session) else {
                    let _ = outbox.send(ServerMessage::error(&Error::SessionNotFound(session)));
                    continue;
                };
                let (reply, ack) = oneshot::channel();
                let cmd = Command::Join {
                    user: user.clone(),
                    group,
                    outbox: outbox.clone(),
                    reply,
                };
                if tx.send(cmd).await.is_err() {
                    let _ = outbox.send(ServerMessage::error(&Error::SessionClosed));
                    continue;
                }
                match ack.await {
                    Ok(Ok(())) => joined = Some((user, tx.clone())),
                    Ok(Err(e)) => {
                        let _ = outbox.send(ServerMessage::error(&e));
                    }
                    Err(_) => {
                        let _ = outbox.send(ServerMessage::error(&Error::SessionClosed));
                    }
                }
            }
            (ClientMessage::Join { .. }, Some(_)) => {
                let e = Error::Protocol("this connection has already joined".into());
                let _ = outbox.send(ServerMessage::error(&e));
            }
            (other, None) => {
                let e = Error::Protocol(format!("join before sending `{}`", type_name(&other)));
                let _ = outbox.send(ServerMessage::error(&e));
            }
            (other, Some((user, tx))) => {
                let event = other.into_event().expect("join handled above");
                left |= matches!(event, peergaze::session::ClientEvent::Leave);
                let cmd = Command::Event {
                    user: user.clone(),
                    event,
                    outbox: outbox.clone(),
                };
                if tx.send(cmd).await.is_err() {
                    let _ = outbox.send(ServerMessage::error(&Error::SessionClosed));
                }
                if left {
                    break;
                }
            }
        }
    }
    // a dropped connection counts as leaving
    if let (Some((user, tx)), false) = (joined, left) {
        let _ = tx
            .send(Command::Event {
                user,
                event: peergaze::session::ClientEvent::Leave,
                outbox: discard(),
            })
            .await;
    }
    drop(outbox);
    let _ = writer.await;
}

fn discard() -> Outbox {
    mpsc::unbounded_channel().0
}

fn type_name(msg: &ClientMessage) -> &'static str {
    match msg {
        ClientMessage::Join { .. } => "join",
        ClientMessage::Gaze { .. } => "gaze",
        ClientMessage::Click { .. } => "click",
        ClientMessage::Face { .. } => "face",
        ClientMessage::Leave => "leave",
    }
}
