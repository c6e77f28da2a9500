use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One scripted stretch of the lecture and the AoIs it talks about.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaceSegment {
    pub start: i64,
    pub end: i64,
    pub aois: BTreeSet<usize>,
}

impl PaceSegment {
    pub fn new(start: i64, end: i64, aois: impl IntoIterator<Item = usize>) -> Self {
        Self {
            start,
            end,
            aois: aois.into_iter().collect(),
        }
    }
}

/// Sorted, non-overlapping pace segments. Serialized as a bare JSON array.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PaceSegment>", into = "Vec<PaceSegment>")]
pub struct PaceScript {
    segments: Vec<PaceSegment>,
}

impl PaceScript {
    pub fn new(segments: Vec<PaceSegment>) -> Result<Self> {
        for s in &segments {
            if s.start >= s.end {
                return Err(Error::InvalidData(format!(
                    "pace segment [{}, {}) is empty",
                    s.start, s.end
                )));
            }
        }
        if let Some(w) = segments.windows(2).find(|w| w[1].start < w[0].end) {
            return Err(Error::InvalidData(format!(
                "pace segments overlap or are unsorted at {}",
                w[1].start
            )));
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[PaceSegment] {
        &self.segments
    }

    /// Active AoIs at `t`; empty outside every segment.
    pub fn active_at(&self, t: i64) -> Option<&PaceSegment> {
        self.segments.iter().find(|s| s.start <= t && t < s.end)
    }

    pub fn end(&self) -> i64 {
        self.segments.last().map_or(0, |s| s.end)
    }
}

impl TryFrom<Vec<PaceSegment>> for PaceScript {
    type Error = Error;

    fn try_from(segments: Vec<PaceSegment>) -> Result<Self> {
        Self::new(segments)
    }
}

impl From<PaceScript> for Vec<PaceSegment> {
    fn from(p: PaceScript) -> Self {
        p.segments
    }
}
