use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use peergaze::session::{LogRecord, SessionConfig, SessionLog};
use peergaze::simulator::{demo_aois, demo_pace};
use peergaze_server::{start, ServerConfig, ServerHandle};
use serde_json::Value;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader, Lines};
use tokio::net::tcp::{OwnedReadHalf, OwnedWriteHalf};
use tokio::net::TcpStream;
use tokio::time::timeout;
use tokio_tungstenite::tungstenite::Message;

struct Client {
    lines: Lines<BufReader<OwnedReadHalf>>,
    write: OwnedWriteHalf,
}

impl Client {
    async fn connect(server: &ServerHandle) -> Self {
        let stream = TcpStream::connect(server.local_addr()).await.unwrap();
        let (read, write) = stream.into_split();
        Self {
            lines: BufReader::new(read).lines(),
            write,
        }
    }

    async fn send(&mut self, line: &str) {
        self.write.write_all(line.as_bytes()).await.unwrap();
        self.write.write_all(b"\n").await.unwrap();
    }

    async fn recv(&mut self) -> Value {
        let line = timeout(Duration::from_secs(5), self.lines.next_line())
            .await
            .expect("timed out waiting for a message")
            .unwrap()
            .expect("connection closed");
        serde_json::from_str(&line).unwrap()
    }

    async fn recv_until(&mut self, ty: &str) -> Value {
        loop {
            let v = self.recv().await;
            if v["type"] == ty {
                return v;
            }
        }
    }

    async fn join(&mut self, user: &str, group: &str) -> Value {
        self.send(&format!(r#"{{"type":"join","session":"s1","user":"{user}","group":"{group}"}}"#))
            .await;
        self.recv().await
    }
}

async fn server(dir: &std::path::Path) -> ServerHandle {
    let config = SessionConfig::new("s1", "deck-1", demo_aois(), demo_pace(60_000));
    start(ServerConfig {
        addr: "127.0.0.1:0".parse().unwrap(),
        log_dir: dir.to_path_buf(),
        sessions: vec![config],
    })
    .await
    .unwrap()
}

#[tokio::test]
async fn ndjson_join_vote_broadcast_and_log() {
    let dir = tempfile::tempdir().unwrap();
    let server = server(dir.path()).await;
    let mut control = Client::connect(&server).await;
    let mut feedback = Client::connect(&server).await;

    let ack = control.join("c1", "control").await;
    assert_eq!(ack["type"], "joined");
    assert_eq!(ack["slide"], "deck-1");
    assert_eq!(ack["feedback"], false);
    assert_eq!(ack["aois"].as_array().unwrap().len(), 4);
    let ack = feedback.join("f1", "feedback").await;
    assert_eq!(ack["feedback"], true);

    // the title AoI centroid, for just over one vote window
    for i in 0..=152 {
        let t = i * 33;
        control.send(&format!(r#"{{"type":"gaze","t":{t},"x":480.0,"y":55.0}}"#)).await;
    }
    let region = feedback.recv_until("peer_region").await;
    assert_eq!(region["window"], 0);
    assert_eq!(region["aoi"], 0);
    assert_eq!(region["rect"], serde_json::json!([280, 30, 400, 50]));

    // the control client only ever sees pace messages
    let pace = control.recv().await;
    assert_eq!(pace["type"], "pace");

    let logs = server.shutdown().await.unwrap();
    assert_eq!(control.recv_until("end").await["type"], "end");
    let on_disk = SessionLog::load(dir.path().join("s1.jsonl")).unwrap();
    assert_eq!(on_disk, logs[0]);
    assert!(on_disk.is_closed());
    let gaze = on_disk.records.iter().filter(|r| matches!(r, LogRecord::Gaze { .. })).count();
    assert_eq!(gaze, 153);
    assert_eq!(on_disk.regions().len(), 1);
}

#[tokio::test]
async fn protocol_errors_keep_the_connection() {
    let dir = tempfile::tempdir().unwrap();
    let server = server(dir.path()).await;
    let mut c = Client::connect(&server).await;

    c.send("{not json").await;
    assert_eq!(c.recv().await["code"], "protocol");
    c.send(r#"{"type":"gaze","t":0,"x":1,"y":1}"#).await;
    assert_eq!(c.recv().await["code"], "protocol");
    c.send(r#"{"type":"join","session":"nope","user":"u","group":"control"}"#).await;
    assert_eq!(c.recv().await["code"], "session_not_found");

    assert_eq!(c.join("u", "control").await["type"], "joined");
    let mut dup = Client::connect(&server).await;
    let err = dup.join("u", "feedback").await;
    assert_eq!(err["type"], "error");
    assert_eq!(err["code"], "duplicate_user");

    c.send(r#"{"type":"warp","t":0}"#).await;
    assert_eq!(c.recv_until("error").await["code"], "protocol");
    c.send(r#"{"type":"click","t":10,"x":5,"y":5}"#).await;
    c.send(r#"{"type":"leave"}"#).await;
    // the server hangs up once the leave is processed
    loop {
        match timeout(Duration::from_secs(5), c.lines.next_line()).await.unwrap() {
            Ok(Some(_)) => continue,
            _ => break,
        }
    }

    let logs = server.shutdown().await.unwrap();
    let kinds: Vec<&str> = logs[0]
        .records
        .iter()
        .map(|r| match r {
            LogRecord::Join { .. } => "join",
            LogRecord::Click { .. } => "click",
            LogRecord::Leave { .. } => "leave",
            LogRecord::End { .. } => "end",
            LogRecord::Tick { .. } => "tick",
            LogRecord::Pace { .. } => "pace",
            _ => "other",
        })
        .filter(|k| *k != "tick" && *k != "pace")
        .collect();
    assert_eq!(kinds, ["join", "click", "leave", "end"]);
}

#[tokio::test]
async fn websocket_clients_share_the_port() {
    let dir = tempfile::tempdir().unwrap();
    let server = server(dir.path()).await;
    let url = format!("ws://{}/", server.local_addr());
    let (mut ws, _) = tokio_tungstenite::connect_async(&url).await.unwrap();
    ws.send(Message::text(r#"{"type":"join","session":"s1","user":"w","group":"feedback"}"#))
        .await
        .unwrap();
    let first = timeout(Duration::from_secs(5), ws.next()).await.unwrap().unwrap().unwrap();
    let v: Value = serde_json::from_str(first.to_text().unwrap()).unwrap();
    assert_eq!(v["type"], "joined");
    assert_eq!(v["feedback"], true);

    // an NDJSON control client drives a region to the WebSocket feedback client
    let mut control = Client::connect(&server).await;
    control.join("c", "control").await;
    for i in 0..=152 {
        let t = i * 33;
        control.send(&format!(r#"{{"type":"gaze","t":{t},"x":710.0,"y":230.0}}"#)).await;
    }
    loop {
        let m = timeout(Duration::from_secs(5), ws.next()).await.unwrap().unwrap().unwrap();
        let v: Value = serde_json::from_str(m.to_text().unwrap()).unwrap();
        if v["type"] == "peer_region" {
            assert_eq!(v["aoi"], 2);
            break;
        }
    }
    ws.send(Message::text("garbage")).await.unwrap();
    let m = timeout(Duration::from_secs(5), ws.next()).await.unwrap().unwrap().unwrap();
    let v: Value = serde_json::from_str(m.to_text().unwrap()).unwrap();
    assert_eq!(v["code"], "protocol");
    server.shutdown().await.unwrap();
}
