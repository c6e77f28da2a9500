//! The per-session engine behind the live service: joins, event ingestion,
//! windowed detection, voting, broadcasts and the replayable log.
//!
//! The engine is synchronous and single-threaded; callers serialize each
//! session's events and may run distinct sessions in parallel.

mod config;
mod engine;
mod log;
mod protocol;
mod replay;

use serde::{Deserialize, Serialize};

pub use config::{FeedbackSource, SessionConfig, Source, VotePolicy};
pub use engine::{Counters, IngestOutcome, Outbound, Session, SessionRegistry};
pub use log::{LogRecord, SessionLog};
pub use protocol::{ClientEvent, ClientMessage, ServerMessage};
pub use replay::{replay, ReplayOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Control,
    Feedback,
}

impl std::str::FromStr for Group {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "control" => Ok(Group::Control),
            "feedback" => Ok(Group::Feedback),
            _ => Err(crate::Error::InvalidArgument(format!("unknown group `{s}`"))),
        }
    }
}
