//! Engagement metrics per user and their per-video normalization.
//!
//! Ratio denominators are total fixation time, not wall-clock time, so face
//! loss is only penalized through `inattention_ms`.

mod pace;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::attention::{user_modal_aoi, window_span, AoiAssignment, PeerRegion};
use crate::error::{Error, Result};
use crate::oculomotor::{Fixation, UserId};
use crate::session::Group;

pub use pace::{PaceScript, PaceSegment};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CognitiveKind {
    FaceLost,
    FaceFound,
    ConfusionClick { x: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CognitiveEvent {
    pub user: UserId,
    pub t: i64,
    #[serde(flatten)]
    pub kind: CognitiveKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsParams {
    /// Max distance from a hull for a fixation to count as valid focus.
    pub eps_px: f64,
    /// Duration credited to each confusion click.
    pub click_window_ms: i64,
    pub vote_window_ms: i64,
}

impl Default for MetricsParams {
    fn default() -> Self {
        Self {
            eps_px: 10.0,
            click_window_ms: 5000,
            vote_window_ms: crate::attention::VOTE_WINDOW_MS,
        }
    }
}

impl MetricsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_px >= 0.0) || self.click_window_ms <= 0 || self.vote_window_ms <= 0 {
            return Err(Error::InvalidArgument(format!("invalid metrics parameters {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub user: UserId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<Group>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video: Option<String>,
    pub valid_focus_ratio: f64,
    pub course_following_ratio: f64,
    pub gaze_in_peer_ratio: f64,
    pub inattention_ms: i64,
    pub confusion_ms: i64,
    pub total_fixation_ms: i64,
}

fn ratio(num: i64, den: i64) -> f64 {
    if den <= 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn total_fixation_ms(fixations: &[Fixation]) -> i64 {
    fixations.iter().map(Fixation::duration_ms).sum()
}

/// Share of fixation time whose center lies within `eps_px` of an AoI.
pub fn valid_focus_ratio(fixations: &[Fixation], assignments: &[AoiAssignment], eps_px: f64) -> f64 {
    let valid = fixations
        .iter()
        .zip(assignments)
        .filter(|(_, a)| a.distance <= eps_px)
        .map(|(f, _)| f.duration_ms())
        .sum();
    ratio(valid, total_fixation_ms(fixations))
}

/// Share of fixation time spent on an AoI active in the pace segment it overlaps.
pub fn course_following_ratio(
    fixations: &[Fixation],
    assignments: &[AoiAssignment],
    pace: &PaceScript,
) -> f64 {
    let mut following = 0;
    for (f, a) in fixations.iter().zip(assignments) {
        for seg in pace.segments() {
            if seg.aois.contains(&a.aoi_id) {
                following += f.overlap_ms(seg.start, seg.end);
            }
        }
    }
    ratio(following, total_fixation_ms(fixations))
}

/// Within windows that emitted a region, the share of fixation time on that region's AoI.
pub fn gaze_in_peer_ratio(
    fixations: &[Fixation],
    assignments: &[AoiAssignment],
    regions: &[PeerRegion],
    vote_window_ms: i64,
) -> f64 {
    let (mut on_peer, mut total) = (0, 0);
    for region in regions {
        let (start, end) = window_span(region.window, vote_window_ms);
        for (f, a) in fixations.iter().zip(assignments) {
            let overlap = f.overlap_ms(start, end);
            total += overlap;
            if a.aoi_id == region.aoi {
                on_peer += overlap;
            }
        }
    }
    ratio(on_peer, total)
}

/// Modal AoI of one user in each of the first `n_windows` vote windows.
pub fn modal_by_window(
    fixations: &[Fixation],
    assignments: &[AoiAssignment],
    n_windows: u64,
    vote_window_ms: i64,
) -> Vec<Option<usize>> {
    (0..n_windows)
        .map(|k| user_modal_aoi(fixations, assignments, window_span(k, vote_window_ms)))
        .collect()
}

/// Per-window agreement with the crowd-modal AoI; `None` where every user abstained.
/// `per_window[k]` holds one entry per user.
pub fn crowd_consistency_series(per_window: &[Vec<Option<usize>>]) -> Vec<Option<f64>> {
    per_window
        .iter()
        .map(|votes| {
            let (_, agree) = crate::attention::tally(votes)?;
            let voters = votes.iter().flatten().count();
            Some(agree as f64 / voters as f64)
        })
        .collect()
}

/// Mean of the per-window agreement over windows with at least one voter; 0 if none.
pub fn crowd_consistency(per_window: &[Vec<Option<usize>>]) -> f64 {
    let series: Vec<f64> = crowd_consistency_series(per_window).into_iter().flatten().collect();
    if series.is_empty() {
        0.0
    } else {
        series.iter().sum::<f64>() / series.len() as f64
    }
}

/// Face-lost intervals of one user's time-sorted events.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Inattention {
    pub intervals: Vec<(i64, i64)>,
    /// `face_found` events without a preceding `face_lost`; ignored.
    pub unmatched_found: usize,
}

impl Inattention {
    pub fn duration_ms(&self) -> i64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }
}

/// Pairs face_lost/face_found; an open interval closes at `session_end`.
pub fn inattention(events: &[CognitiveEvent], session_end: i64) -> Inattention {
    let mut out = Inattention::default();
    let mut lost_at: Option<i64> = None;
    for e in events {
        match e.kind {
            CognitiveKind::FaceLost => {
                lost_at.get_or_insert(e.t);
            }
            CognitiveKind::FaceFound => match lost_at.take() {
                Some(t0) => out.intervals.push((t0, e.t)),
                None => out.unmatched_found += 1,
            },
            CognitiveKind::ConfusionClick { .. } => {}
        }
    }
    if let Some(t0) = lost_at {
        if session_end > t0 {
            out.intervals.push((t0, session_end));
        }
    }
    out
}

pub fn inattention_duration(events: &[CognitiveEvent], session_end: i64) -> i64 {
    inattention(events, session_end).duration_ms()
}

/// Union of `[t, t + click_window)` over confusion clicks, clipped to `[0, session_end)`.
pub fn confusion_intervals(
    events: &[CognitiveEvent],
    click_window_ms: i64,
    session_end: i64,
) -> Vec<(i64, i64)> {
    let mut merged: Vec<(i64, i64)> = Vec::new();
    let mut clicks: Vec<i64> = events
        .iter()
        .filter(|e| matches!(e.kind, CognitiveKind::ConfusionClick { .. }))
        .map(|e| e.t)
        .collect();
    clicks.sort_unstable();
    for t in clicks {
        let (a, b) = (t.max(0), (t + click_window_ms).min(session_end));
        if b <= a {
            continue;
        }
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    merged
}

pub fn confusion_duration(events: &[CognitiveEvent], click_window_ms: i64, session_end: i64) -> i64 {
    confusion_intervals(events, click_window_ms, session_end)
        .iter()
        .map(|(a, b)| b - a)
        .sum()
}

/// Total overlap of intervals with `[start, end)`.
pub fn clipped_total(intervals: &[(i64, i64)], start: i64, end: i64) -> i64 {
    intervals
        .iter()
        .map(|&(a, b)| (b.min(end) - a.max(start)).max(0))
        .sum()
}

/// z-scores with population standard deviation; zero variance maps to all zeros.
pub fn normalize_within_video(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("cannot normalize an empty cohort".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd == 0.0 || !sd.is_finite() {
        return Ok(vec![0.0; values.len()]);
    }
    Ok(values.iter().map(|v| (v - mean) / sd).collect())
}

/// Everything recorded about one user in one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecording {
    pub user: UserId,
    pub group: Group,
    pub fixations: Vec<Fixation>,
    pub assignments: Vec<AoiAssignment>,
    pub events: Vec<CognitiveEvent>,
    pub session_end: i64,
}

/// Everything needed to score one user.
#[derive(Debug, Clone, Copy)]
pub struct ReportInputs<'a> {
    pub fixations: &'a [Fixation],
    pub assignments: &'a [AoiAssignment],
    pub events: &'a [CognitiveEvent],
    pub pace: &'a PaceScript,
    pub regions: &'a [PeerRegion],
    pub session_end: i64,
}

pub fn compute_report(user: UserId, inputs: ReportInputs<'_>, params: &MetricsParams) -> MetricsReport {
    MetricsReport {
        user,
        group: None,
        video: None,
        valid_focus_ratio: valid_focus_ratio(inputs.fixations, inputs.assignments, params.eps_px),
        course_following_ratio: course_following_ratio(inputs.fixations, inputs.assignments, inputs.pace),
        gaze_in_peer_ratio: gaze_in_peer_ratio(
            inputs.fixations,
            inputs.assignments,
            inputs.regions,
            params.vote_window_ms,
        ),
        inattention_ms: inattention_duration(inputs.events, inputs.session_end),
        confusion_ms: confusion_duration(inputs.events, params.click_window_ms, inputs.session_end),
        total_fixation_ms: total_fixation_ms(inputs.fixations),
    }
}

/// Normalizes one numeric field of every report within its `video` cohort.
/// Reports without a video label form one cohort.
pub fn normalize_reports_by_video(
    reports: &[MetricsReport],
    field: impl Fn(&MetricsReport) -> f64,
) -> Result<Vec<f64>> {
    let mut cohorts: BTreeMap<Option<&str>, Vec<usize>> = BTreeMap::new();
    for (i, r) in reports.iter().enumerate() {
        cohorts.entry(r.video.as_deref()).or_default().push(i);
    }
    let mut out = vec![0.0; reports.len()];
    for idx in cohorts.values() {
        let values: Vec<f64> = idx.iter().map(|&i| field(&reports[i])).collect();
        for (&i, z) in idx.iter().zip(normalize_within_video(&values)?) {
            out[i] = z;
        }
    }
    Ok(out)
}

/// Report for one recorded user, labelled with their group.
pub fn report_for_recording(
    rec: &UserRecording,
    pace: &PaceScript,
    regions: &[PeerRegion],
    params: &MetricsParams,
) -> MetricsReport {
    let inputs = ReportInputs {
        fixations: &rec.fixations,
        assignments: &rec.assignments,
        events: &rec.events,
        pace,
        regions,
        session_end: rec.session_end,
    };
    MetricsReport {
        group: Some(rec.group),
        ..compute_report(rec.user.clone(), inputs, params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fix(start: i64, end: i64) -> Fixation {
        Fixation {
            user: UserId::new("u"),
            start_ms: start,
            end_ms: end,
            center_x: 0.0,
            center_y: 0.0,
            n_samples: 2,
        }
    }

    fn on(aoi_id: usize, distance: f64) -> AoiAssignment {
        AoiAssignment { aoi_id, distance }
    }

    fn ev(t: i64, kind: CognitiveKind) -> CognitiveEvent {
        CognitiveEvent {
            user: UserId::new("u"),
            t,
            kind,
        }
    }

    fn click(t: i64) -> CognitiveEvent {
        ev(t, CognitiveKind::ConfusionClick { x: 1.0, y: 1.0 })
    }

    fn region(window: u64, aoi: usize) -> PeerRegion {
        PeerRegion {
            window,
            aoi,
            rect: crate::geometry::Rect { x: 0, y: 0, w: 1, h: 1 },
            votes: 1,
        }
    }

    #[test]
    fn valid_focus_cases() {
        let f = [fix(0, 600), fix(600, 1000)];
        assert_eq!(valid_focus_ratio(&f, &[on(0, 0.0), on(1, 0.0)], 10.0), 1.0);
        assert_eq!(valid_focus_ratio(&f, &[on(0, 50.0), on(1, 11.0)], 10.0), 0.0);
        assert_eq!(valid_focus_ratio(&f, &[on(0, 10.0), on(1, 11.0)], 10.0), 0.6);
        assert_eq!(valid_focus_ratio(&[], &[], 10.0), 0.0);
    }

    #[test]
    fn course_following_cases() {
        let pace = PaceScript::new(vec![PaceSegment::new(0, 1000, [1])]).unwrap();
        assert_eq!(course_following_ratio(&[fix(100, 900)], &[on(1, 0.0)], &pace), 1.0);
        assert_eq!(course_following_ratio(&[fix(100, 900)], &[on(2, 0.0)], &pace), 0.0);
        assert_eq!(course_following_ratio(&[fix(500, 1500)], &[on(1, 0.0)], &pace), 0.5);
    }

    #[test]
    fn gaze_in_peer_cases() {
        let f = [fix(0, 2000), fix(2000, 5000)];
        assert_eq!(gaze_in_peer_ratio(&f, &[on(1, 0.0), on(1, 0.0)], &[region(0, 1)], 5000), 1.0);
        assert_eq!(gaze_in_peer_ratio(&f, &[on(1, 0.0), on(2, 0.0)], &[], 5000), 0.0);
        assert_eq!(gaze_in_peer_ratio(&f, &[on(1, 0.0), on(2, 0.0)], &[region(0, 1)], 5000), 0.4);
        // windows without a region are ignored
        let f = [fix(0, 5000), fix(5000, 10000)];
        assert_eq!(gaze_in_peer_ratio(&f, &[on(1, 0.0), on(2, 0.0)], &[region(1, 2)], 5000), 1.0);
    }

    #[test]
    fn crowd_consistency_cases() {
        assert_eq!(crowd_consistency(&[vec![Some(0), Some(0), Some(0), Some(1)]]), 0.75);
        assert_eq!(crowd_consistency(&[vec![Some(2), Some(2)], vec![Some(1), Some(1)]]), 1.0);
        assert_eq!(
            crowd_consistency(&[vec![Some(0), Some(1)], vec![Some(3), Some(3)], vec![None, None]]),
            0.75
        );
        assert_eq!(crowd_consistency(&[vec![None]]), 0.0);
    }

    #[test]
    fn inattention_cases() {
        let evs = [ev(1000, CognitiveKind::FaceLost), ev(4000, CognitiveKind::FaceFound)];
        assert_eq!(inattention_duration(&evs, 10_000), 3000);
        assert_eq!(inattention_duration(&[], 10_000), 0);
        assert_eq!(inattention_duration(&[ev(9000, CognitiveKind::FaceLost)], 10_000), 1000);
        let stray = inattention(&[ev(10, CognitiveKind::FaceFound)], 100);
        assert_eq!((stray.duration_ms(), stray.unmatched_found), (0, 1));
    }

    #[test]
    fn confusion_cases() {
        assert_eq!(confusion_duration(&[click(0)], 5000, 60_000), 5000);
        assert_eq!(confusion_duration(&[click(0), click(2000)], 5000, 60_000), 7000);
        assert_eq!(confusion_duration(&[click(0), click(6000)], 5000, 60_000), 10_000);
        assert_eq!(confusion_duration(&[click(58_000)], 5000, 60_000), 2000);
    }

    #[test]
    fn normalization_cases() {
        assert_eq!(normalize_within_video(&[5.0, 5.0, 5.0]).unwrap(), vec![0.0; 3]);
        let z = normalize_within_video(&[1.0, 2.0, 3.0]).unwrap();
        let expected = [-1.224744871391589, 0.0, 1.224744871391589];
        for (a, b) in z.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(normalize_within_video(&[]).is_err());
    }

    #[test]
    fn report_json_round_trip() {
        let r = MetricsReport {
            user: UserId::new("u1"),
            group: Some(Group::Feedback),
            video: None,
            valid_focus_ratio: 0.5,
            course_following_ratio: 0.25,
            gaze_in_peer_ratio: 1.0,
            inattention_ms: 10,
            confusion_ms: 0,
            total_fixation_ms: 100,
        };
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.starts_with(r#"{"user":"u1","group":"feedback","valid_focus_ratio":0.5"#));
        assert_eq!(serde_json::from_str::<MetricsReport>(&s).unwrap(), r);
    }
}
