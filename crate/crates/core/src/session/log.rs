use serde::{Deserialize, Serialize};

use super::Group;
use crate::attention::PeerRegion;
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::oculomotor::UserId;

const KINDS: [&str; 9] = ["join", "gaze", "click", "face", "leave", "tick", "peer_region", "pace", "end"];

/// One line of a session log. Client events keep their received timestamps;
/// engine records carry the session clock at emission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LogRecord {
    Join { t: i64, user: UserId, group: Group },
    Gaze { t: i64, user: UserId, x: f64, y: f64 },
    Click { t: i64, user: UserId, x: f64, y: f64 },
    Face { t: i64, user: UserId, present: bool },
    Leave { t: i64, user: UserId },
    /// A tick that closed a vote window or crossed a pace change.
    Tick { t: i64 },
    PeerRegion { t: i64, window: u64, aoi: usize, rect: Rect, votes: usize },
    Pace { t: i64, aois: Vec<usize> },
    End { t: i64 },
}

impl LogRecord {
    pub fn t(&self) -> i64 {
        match self {
            LogRecord::Join { t, .. }
            | LogRecord::Gaze { t, .. }
            | LogRecord::Click { t, .. }
            | LogRecord::Face { t, .. }
            | LogRecord::Leave { t, .. }
            | LogRecord::Tick { t }
            | LogRecord::PeerRegion { t, .. }
            | LogRecord::Pace { t, .. }
            | LogRecord::End { t } => *t,
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("log records always serialize")
    }

    pub fn region(&self) -> Option<PeerRegion> {
        match self {
            LogRecord::PeerRegion { window, aoi, rect, votes, .. } => Some(PeerRegion {
                window: *window,
                aoi: *aoi,
                rect: *rect,
                votes: *votes,
            }),
            _ => None,
        }
    }
}

/// Append-only record sequence in arrival order, stored as JSONL.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SessionLog {
    pub records: Vec<LogRecord>,
}

impl SessionLog {
    pub fn parse(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            records.push(parse_line(line).map_err(|msg| Error::Parse { line: i + 1, msg })?);
        }
        Ok(Self { records })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_jsonl(&self) -> String {
        self.records.iter().map(|r| r.to_line() + "\n").collect()
    }

    pub fn regions(&self) -> Vec<PeerRegion> {
        self.records.iter().filter_map(LogRecord::region).collect()
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.records.last(), Some(LogRecord::End { .. }))
    }
}

fn parse_line(line: &str) -> std::result::Result<LogRecord, String> {
    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .map(str::to_owned)
        .ok_or_else(|| "record has no string `kind`".to_string())?;
    if !KINDS.contains(&kind.as_str()) {
        return Err(format!("unknown event kind `{kind}`"));
    }
    serde_json::from_value(value).map_err(|e| format!("bad `{kind}` record: {e}"))
}
