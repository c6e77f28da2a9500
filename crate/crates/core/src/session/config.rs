use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{Group, SessionLog};
use crate::attention::{PeerRegion, VOTE_WINDOW_MS};
use crate::error::{Error, Result};
use crate::imaging::Aoi;
use crate::metrics::PaceScript;
use crate::oculomotor::{FixationParams, UserId};

/// Either an inline value or the path of a JSON file holding it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(PathBuf),
    Inline(T),
}

impl<T: DeserializeOwned + Clone> Source<T> {
    pub fn resolve(&self) -> Result<T> {
        match self {
            Source::Inline(v) => Ok(v.clone()),
            Source::Path(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", p.display())))
            }
        }
    }

    fn rebase(&mut self, dir: &Path) {
        if let Source::Path(p) = self {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }
}

/// Where feedback clients' peer regions come from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum FeedbackSource {
    /// Voted from this session's control users.
    #[default]
    Live,
    /// Looked up by window in a previously recorded session log.
    Replay { log: PathBuf },
}

/// Which control fixations take part in a window's vote.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VotePolicy {
    /// Completed fixations plus the fixation still in progress at window close.
    #[default]
    IncludeInFlight,
    /// Only fixations the detector has completed by window close.
    CompletedOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub session: String,
    pub slide: String,
    pub aois: Source<Vec<Aoi>>,
    #[serde(default = "empty_pace")]
    pub pace: Source<PaceScript>,
    /// Expected group per user; joins that disagree are rejected.
    #[serde(default)]
    pub groups: BTreeMap<UserId, Group>,
    #[serde(default = "default_vote_window")]
    pub vote_window_ms: i64,
    #[serde(default = "default_detection_window")]
    pub detection_window_ms: i64,
    #[serde(default)]
    pub fixation: FixationParams,
    #[serde(default)]
    pub feedback_source: FeedbackSource,
    #[serde(default)]
    pub vote_policy: VotePolicy,
}

fn empty_pace() -> Source<PaceScript> {
    Source::Inline(PaceScript::default())
}

fn default_vote_window() -> i64 {
    VOTE_WINDOW_MS
}

fn default_detection_window() -> i64 {
    2000
}

impl SessionConfig {
    pub fn new(session: impl Into<String>, slide: impl Into<String>, aois: Vec<Aoi>, pace: PaceScript) -> Self {
        Self {
            session: session.into(),
            slide: slide.into(),
            aois: Source::Inline(aois),
            pace: Source::Inline(pace),
            groups: BTreeMap::new(),
            vote_window_ms: VOTE_WINDOW_MS,
            detection_window_ms: default_detection_window(),
            fixation: FixationParams::default(),
            feedback_source: FeedbackSource::Live,
            vote_policy: VotePolicy::default(),
        }
    }

    /// Reads a JSON config; relative paths inside it are taken relative to the file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: Self =
            serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        config.aois.rebase(dir);
        config.pace.rebase(dir);
        if let FeedbackSource::Replay { log } = &mut config.feedback_source {
            if log.is_relative() {
                *log = dir.join(&*log);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vote_window_ms <= 0 {
            return Err(Error::InvalidConfig(format!(
                "vote_window_ms must be positive, got {}",
                self.vote_window_ms
            )));
        }
        if self.detection_window_ms <= 0 {
            return Err(Error::InvalidConfig(format!(
                "detection_window_ms must be positive, got {}",
                self.detection_window_ms
            )));
        }
        self.fixation.validate()
    }

    /// Regions by window from the replay source, or `None` in live mode.
    pub fn replay_regions(&self) -> Result<Option<BTreeMap<u64, PeerRegion>>> {
        match &self.feedback_source {
            FeedbackSource::Live => Ok(None),
            FeedbackSource::Replay { log } => {
                let source = SessionLog::load(log)?;
                Ok(Some(source.regions().into_iter().map(|r| (r.window, r)).collect()))
            }
        }
    }
}
