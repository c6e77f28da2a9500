use super::{ClientEvent, LogRecord, Session, SessionConfig, SessionLog};
use crate::metrics::UserRecording;
use crate::attention::PeerRegion;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutput {
    /// Regions the engine emitted while replaying.
    pub regions: Vec<PeerRegion>,
    /// Regions stored in the source log.
    pub recorded_regions: Vec<PeerRegion>,
    pub recordings: Vec<UserRecording>,
    /// The log the replaying engine wrote.
    pub log: SessionLog,
}

impl ReplayOutput {
    pub fn regions_match(&self) -> bool {
        self.regions == self.recorded_regions
    }

    /// Emitted regions as JSONL, the form compared byte for byte.
    pub fn regions_jsonl(&self) -> String {
        self.regions
            .iter()
            .map(|r| serde_json::to_string(r).expect("regions serialize") + "\n")
            .collect()
    }
}

/// Feeds a recorded log back through a fresh engine built from `config`.
///
/// Join and client records are re-ingested, tick records re-run the ticks, and
/// stored regions are kept for comparison only.
pub fn replay(log: &SessionLog, config: SessionConfig) -> Result<ReplayOutput> {
    let mut session = Session::new(config)?;
    for record in &log.records {
        match record {
            LogRecord::Join { user, group, .. } => {
                session.join(user.clone(), *group)?;
            }
            LogRecord::Gaze { t, user, x, y } => {
                session.ingest(user, ClientEvent::Gaze { t: *t, x: *x, y: *y })?;
            }
            LogRecord::Click { t, user, x, y } => {
                session.ingest(user, ClientEvent::Click { t: *t, x: *x, y: *y })?;
            }
            LogRecord::Face { t, user, present } => {
                session.ingest(user, ClientEvent::Face { t: *t, present: *present })?;
            }
            LogRecord::Leave { user, .. } => {
                session.ingest(user, ClientEvent::Leave)?;
            }
            LogRecord::Tick { t } => {
                session.tick(*t)?;
            }
            LogRecord::PeerRegion { .. } | LogRecord::Pace { .. } => {}
            LogRecord::End { .. } => {
                session.close()?;
            }
        }
    }
    Ok(ReplayOutput {
        regions: session.emitted_regions().to_vec(),
        recorded_regions: log.regions(),
        recordings: session.recordings(),
        log: session.log().clone(),
    })
}
