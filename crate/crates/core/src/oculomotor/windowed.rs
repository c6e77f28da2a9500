use crate::error::{Error, Result};

use super::detect::{check_sorted, classify, piece_duration};
use super::{Fixation, FixationParams, GazeSample};

/// In-progress state between windows: the raw samples of an unfinished trailing fixation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WindowCarry {
    pending: Vec<GazeSample>,
    last_t: Option<i64>,
}

impl WindowCarry {
    pub fn pending(&self) -> &[GazeSample] {
        &self.pending
    }

    pub fn last_t(&self) -> Option<i64> {
        self.last_t
    }
}

fn process(
    buffer: &[GazeSample],
    carry: WindowCarry,
    params: &FixationParams,
    last_window: bool,
) -> Result<(Vec<Fixation>, WindowCarry)> {
    params.validate()?;
    check_sorted(buffer)?;
    if let (Some(last), Some(first)) = (carry.last_t, buffer.first()) {
        if first.t < last {
            return Err(Error::InvalidStream(format!(
                "window starts at {} before previous window ended at {last}",
                first.t
            )));
        }
    }
    let mut combined = carry.pending;
    combined.extend_from_slice(buffer);
    let last_t = combined.last().map(|s| s.t).or(carry.last_t);
    if combined.is_empty() {
        return Ok((Vec::new(), WindowCarry { pending: Vec::new(), last_t }));
    }

    let pieces = classify(&combined, params)?;
    let trailing = match pieces.last() {
        Some(p) if !last_window && !p.saccadic && p.range.end == combined.len() => Some(p.range.start),
        _ => None,
    };

    let fixations = pieces
        .iter()
        .filter(|p| !p.saccadic && Some(p.range.start) != trailing)
        .filter(|p| piece_duration(&combined, p) >= params.min_duration_ms)
        .map(|p| Fixation::from_members(&combined[p.range.clone()]))
        .collect();
    let pending = match trailing {
        Some(start) => combined.split_off(start),
        None => Vec::new(),
    };
    Ok((fixations, WindowCarry { pending, last_t }))
}

/// Detects fixations in one time-ordered window buffer.
///
/// Only fixations that end inside the window are returned; a fixation still
/// running at the last sample is carried and re-examined with the next buffer.
/// Thresholds are estimated per window from the carried samples plus the buffer.
pub fn detect_fixations_windowed(
    buffer: &[GazeSample],
    carry: WindowCarry,
    params: &FixationParams,
) -> Result<(Vec<Fixation>, WindowCarry)> {
    process(buffer, carry, params, false)
}

/// Closes the stream, emitting the carried fixation if it is long enough.
pub fn finish_windowed(carry: WindowCarry, params: &FixationParams) -> Result<Vec<Fixation>> {
    process(&[], carry, params, true).map(|(f, _)| f)
}

/// Streaming driver over one user's samples using windows aligned to multiples of `window_ms`.
#[derive(Debug, Clone)]
pub struct WindowedDetector {
    params: FixationParams,
    window_ms: i64,
    window_end: i64,
    /// Samples earlier than this have been handed to a window already.
    horizon: i64,
    buffer: Vec<GazeSample>,
    carry: WindowCarry,
}

impl WindowedDetector {
    pub fn new(params: FixationParams, window_ms: i64) -> Result<Self> {
        params.validate()?;
        if window_ms <= 0 {
            return Err(Error::InvalidArgument(format!(
                "window length must be positive, got {window_ms}"
            )));
        }
        Ok(Self {
            params,
            window_ms,
            window_end: window_ms,
            horizon: i64::MIN,
            buffer: Vec::new(),
            carry: WindowCarry::default(),
        })
    }

    pub fn horizon(&self) -> i64 {
        self.horizon
    }

    /// Adds a sample, closing any windows that end at or before it.
    /// Samples older than the processed horizon are rejected.
    pub fn push(&mut self, sample: GazeSample) -> Result<Vec<Fixation>> {
        if sample.t < self.horizon {
            return Err(Error::InvalidStream(format!(
                "sample at {} precedes processed horizon {}",
                sample.t, self.horizon
            )));
        }
        let mut done = Vec::new();
        if sample.t >= self.window_end {
            done = self.cut(self.window_end)?;
            self.window_end = (sample.t.div_euclid(self.window_ms) + 1) * self.window_ms;
        }
        let pos = self.buffer.partition_point(|s| s.t <= sample.t);
        self.buffer.insert(pos, sample);
        Ok(done)
    }

    /// Processes every buffered sample earlier than `now`.
    pub fn advance_to(&mut self, now: i64) -> Result<Vec<Fixation>> {
        let done = self.cut(now)?;
        if now >= self.window_end {
            self.window_end = (now.div_euclid(self.window_ms) + 1) * self.window_ms;
        }
        Ok(done)
    }

    fn cut(&mut self, until: i64) -> Result<Vec<Fixation>> {
        if until <= self.horizon {
            return Ok(Vec::new());
        }
        let split = self.buffer.partition_point(|s| s.t < until);
        let rest = self.buffer.split_off(split);
        let window = std::mem::replace(&mut self.buffer, rest);
        self.horizon = until;
        let (fixations, carry) =
            detect_fixations_windowed(&window, std::mem::take(&mut self.carry), &self.params)?;
        self.carry = carry;
        Ok(fixations)
    }

    /// The unfinished trailing fixation observed so far, if already long enough.
    pub fn provisional(&self) -> Option<Fixation> {
        let pending = self.carry.pending();
        let (first, last) = (pending.first()?, pending.last()?);
        (last.t - first.t >= self.params.min_duration_ms).then(|| Fixation::from_members(pending))
    }

    /// Flushes the buffer and the carried fixation.
    pub fn finish(&mut self) -> Result<Vec<Fixation>> {
        let window = std::mem::take(&mut self.buffer);
        let (fixations, _) = process(&window, std::mem::take(&mut self.carry), &self.params, true)?;
        self.horizon = i64::MAX;
        Ok(fixations)
    }
}
