//! Fixation and saccade detection from timestamped gaze streams.
//!
//! Samples are median-smoothed, split at blinks, then classified per
//! contiguous run against a median-based velocity threshold. Runs of
//! sub-threshold samples long enough to satisfy the minimum duration become
//! fixations. A windowed variant processes the stream incrementally and
//! carries an unfinished trailing fixation into the next window.

mod detect;
mod filter;
mod velocity;
mod windowed;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use detect::{detect_fixations, detect_fixations_by_user, FixationOutput};
pub use filter::smooth;
pub use velocity::{ek_threshold, median, velocities, Velocity};
pub use windowed::{detect_fixations_windowed, finish_windowed, WindowCarry, WindowedDetector};

/// Opaque user identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub String);

impl UserId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for UserId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

fn default_true() -> bool {
    true
}

/// One gaze coordinate. Serialized as `{"user","t","x","y","face"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub user: UserId,
    /// Milliseconds since session start.
    pub t: i64,
    pub x: f64,
    pub y: f64,
    #[serde(rename = "face", default = "default_true")]
    pub face_present: bool,
}

impl GazeSample {
    pub fn new(user: impl Into<UserId>, t: i64, x: f64, y: f64) -> Self {
        Self {
            user: user.into(),
            t,
            x,
            y,
            face_present: true,
        }
    }
}

/// Per-axis saccade thresholds in px/ms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityThreshold {
    pub lambda: f64,
    pub mu_x: f64,
    pub mu_y: f64,
}

/// How the median spread of velocities becomes a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// `λ·(⟨v²⟩ − ⟨v⟩²)`, medians throughout.
    #[default]
    Variance,
    /// `λ·√(⟨v²⟩ − ⟨v⟩²)`, the standard-deviation form of the original batch algorithm.
    StdDev,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixationParams {
    pub lambda: f64,
    pub min_duration_ms: i64,
    /// Inter-sample gaps above this are treated as blinks.
    pub max_gap_ms: i64,
    pub rule: ThresholdRule,
}

impl Default for FixationParams {
    fn default() -> Self {
        Self {
            lambda: 6.0,
            min_duration_ms: 200,
            max_gap_ms: 100,
            rule: ThresholdRule::Variance,
        }
    }
}

impl FixationParams {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.lambda > 0.0) {
            return Err(crate::Error::InvalidArgument(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.min_duration_ms < 0 || self.max_gap_ms < 0 {
            return Err(crate::Error::InvalidArgument(
                "durations must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// A detected fixation. Serialized as `{"user","start","end","cx","cy","n"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixation {
    pub user: UserId,
    #[serde(rename = "start")]
    pub start_ms: i64,
    #[serde(rename = "end")]
    pub end_ms: i64,
    #[serde(rename = "cx")]
    pub center_x: f64,
    #[serde(rename = "cy")]
    pub center_y: f64,
    #[serde(rename = "n", default)]
    pub n_samples: usize,
}

impl Fixation {
    pub fn duration_ms(&self) -> i64 {
        self.end_ms - self.start_ms
    }

    pub fn center(&self) -> crate::geometry::Point {
        crate::geometry::Point::new(self.center_x, self.center_y)
    }

    /// Overlap in ms with the half-open span `[start, end)`.
    pub fn overlap_ms(&self, start: i64, end: i64) -> i64 {
        (self.end_ms.min(end) - self.start_ms.max(start)).max(0)
    }

    pub(crate) fn from_members(members: &[GazeSample]) -> Self {
        let n = members.len() as f64;
        let cx = members.iter().map(|s| s.x).sum::<f64>() / n;
        let cy = members.iter().map(|s| s.y).sum::<f64>() / n;
        Fixation {
            user: members[0].user.clone(),
            start_ms: members[0].t,
            end_ms: members[members.len() - 1].t,
            center_x: cx,
            center_y: cy,
            n_samples: members.len(),
        }
    }
}

/// Movement between fixations; indices refer to the fixation list of the same output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Saccade {
    pub user: UserId,
    pub start_ms: i64,
    pub end_ms: i64,
    pub from_fixation: Option<usize>,
    pub to_fixation: Option<usize>,
}
