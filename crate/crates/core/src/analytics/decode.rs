use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::accuracy::{QuestionSpec, ResponseRecord};
use super::logistic::{logistic_fit, LogisticParams, RegressionResult, Separation};
use crate::attention::{AoiAssignment, PeerRegion};
use crate::error::{Error, Result};
use crate::metrics::{
    clipped_total, confusion_intervals, course_following_ratio, gaze_in_peer_ratio, inattention,
    total_fixation_ms, valid_focus_ratio, MetricsParams, PaceScript, UserRecording,
};
use crate::oculomotor::{Fixation, UserId};
use crate::session::Group;

/// Feature columns of the decode table, in order.
pub const FEATURE_NAMES: [&str; 6] = [
    "valid_focus",
    "course_following",
    "gaze_in_peer",
    "inattention",
    "confusion",
    "group",
];

/// The users of one session and the regions that session emitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordedSession {
    pub recordings: Vec<UserRecording>,
    pub regions: Vec<PeerRegion>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecodeParams {
    pub metrics: MetricsParams,
    pub fit: LogisticParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub user: UserId,
    pub question: String,
    pub correct: bool,
    /// Raw values in [`FEATURE_NAMES`] order.
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FitOutcome {
    Fitted(RegressionResult),
    Separated(Separation),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub table: FeatureTable,
    /// Names of the fitted columns after the intercept.
    pub fitted: Vec<String>,
    /// Columns with zero spread after pooling, excluded from the fit.
    pub dropped: Vec<String>,
    pub skipped_no_gaze: usize,
    pub skipped_no_response: usize,
    pub fit: FitOutcome,
}

fn clip_fixations(
    fixations: &[Fixation],
    assignments: &[AoiAssignment],
    (start, end): (i64, i64),
) -> (Vec<Fixation>, Vec<AoiAssignment>) {
    fixations
        .iter()
        .zip(assignments)
        .filter(|(f, _)| f.overlap_ms(start, end) > 0)
        .map(|(f, a)| {
            let mut f = f.clone();
            f.start_ms = f.start_ms.max(start);
            f.end_ms = f.end_ms.min(end);
            (f, *a)
        })
        .unzip()
}

/// Segment-level features of one user; `None` without fixation time in the segment.
fn segment_features(
    rec: &UserRecording,
    segment: (i64, i64),
    pace: &PaceScript,
    regions: &[PeerRegion],
    params: &MetricsParams,
) -> Option<Vec<f64>> {
    let (fix, asg) = clip_fixations(&rec.fixations, &rec.assignments, segment);
    if total_fixation_ms(&fix) == 0 {
        return None;
    }
    let lost = inattention(&rec.events, rec.session_end);
    let confused = confusion_intervals(&rec.events, params.click_window_ms, rec.session_end);
    Some(vec![
        valid_focus_ratio(&fix, &asg, params.eps_px),
        course_following_ratio(&fix, &asg, pace),
        gaze_in_peer_ratio(&fix, &asg, regions, params.vote_window_ms),
        clipped_total(&lost.intervals, segment.0, segment.1) as f64,
        clipped_total(&confused, segment.0, segment.1) as f64,
        match rec.group {
            Group::Control => 0.0,
            Group::Feedback => 1.0,
        },
    ])
}

/// Per-question decoding: one row per (user, question), pooled and standardized,
/// then a logistic fit of correctness on the features.
pub fn decode_questions(
    sessions: &[RecordedSession],
    pace: &PaceScript,
    questions: &[QuestionSpec],
    responses: &[ResponseRecord],
    params: &DecodeParams,
) -> Result<DecodeResult> {
    params.metrics.validate()?;
    for q in questions {
        q.validate()?;
    }
    let answers: HashMap<(&UserId, &str), bool> =
        responses.iter().map(|r| ((&r.user, r.question.as_str()), r.correct)).collect();

    let mut rows = Vec::new();
    let (mut skipped_no_gaze, mut skipped_no_response) = (0, 0);
    for (rec, regions) in sessions
        .iter()
        .flat_map(|s| s.recordings.iter().map(move |r| (r, &s.regions[..])))
    {
        for q in questions {
            let Some(&correct) = answers.get(&(&rec.user, q.id.as_str())) else {
                skipped_no_response += 1;
                continue;
            };
            match segment_features(rec, q.segment, pace, regions, &params.metrics) {
                Some(features) => rows.push(FeatureRow {
                    user: rec.user.clone(),
                    question: q.id.clone(),
                    correct,
                    features,
                }),
                None => skipped_no_gaze += 1,
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::InvalidData("decode: no (user, question) row has gaze in its segment".into()));
    }

    let n = rows.len() as f64;
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut z_columns: Vec<Vec<f64>> = Vec::new();
    for (j, name) in FEATURE_NAMES.iter().enumerate() {
        let col: Vec<f64> = rows.iter().map(|r| r.features[j]).collect();
        let mean = col.iter().sum::<f64>() / n;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        if sd == 0.0 || !sd.is_finite() {
            dropped.push(name.to_string());
            continue;
        }
        kept.push(name.to_string());
        z_columns.push(col.iter().map(|v| (v - mean) / sd).collect());
    }
    let design: Vec<Vec<f64>> = (0..rows.len())
        .map(|i| std::iter::once(1.0).chain(z_columns.iter().map(|c| c[i])).collect())
        .collect();
    let labels: Vec<bool> = rows.iter().map(|r| r.correct).collect();
    let fit = match logistic_fit(&design, &labels, &params.fit) {
        Ok(r) => FitOutcome::Fitted(r),
        Err(Error::Separation(s)) => FitOutcome::Separated(s),
        Err(e) => return Err(e),
    };
    Ok(DecodeResult {
        table: FeatureTable {
            names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            rows,
        },
        fitted: kept,
        dropped,
        skipped_no_gaze,
        skipped_no_response,
        fit,
    })
}
