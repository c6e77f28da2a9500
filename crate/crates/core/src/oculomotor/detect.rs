use std::collections::BTreeMap;
use std::ops::Range;

use crate::error::{Error, Result};

use super::velocity::threshold_with_rule;
use super::{smooth, velocities, Fixation, FixationParams, GazeSample, Saccade, UserId};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixationOutput {
    pub fixations: Vec<Fixation>,
    pub saccades: Vec<Saccade>,
}

/// A maximal same-class stretch inside one observed run.
#[derive(Debug, Clone)]
pub(crate) struct Piece {
    pub run: usize,
    pub range: Range<usize>,
    pub saccadic: bool,
}

pub(crate) fn check_sorted(samples: &[GazeSample]) -> Result<()> {
    match samples.windows(2).find(|w| w[1].t < w[0].t) {
        Some(w) => Err(Error::InvalidStream(format!(
            "samples out of order: {} after {}",
            w[1].t, w[0].t
        ))),
        None => Ok(()),
    }
}

/// Contiguous observed runs: face present and no gap above `max_gap_ms`.
fn observed_runs(samples: &[GazeSample], max_gap_ms: i64) -> Vec<Range<usize>> {
    let mut runs = Vec::new();
    let mut start: Option<usize> = None;
    for (i, s) in samples.iter().enumerate() {
        if !s.face_present {
            if let Some(a) = start.take() {
                runs.push(a..i);
            }
            continue;
        }
        match start {
            Some(a) if s.t - samples[i - 1].t > max_gap_ms => {
                runs.push(a..i);
                start = Some(i);
            }
            Some(_) => {}
            None => start = Some(i),
        }
    }
    if let Some(a) = start {
        runs.push(a..samples.len());
    }
    runs
}

/// Smooth, split at blinks and classify every sample of `samples`.
pub(crate) fn classify(samples: &[GazeSample], params: &FixationParams) -> Result<Vec<Piece>> {
    check_sorted(samples)?;
    let smoothed = smooth(samples);
    let mut pieces = Vec::new();
    for (run_idx, run) in observed_runs(&smoothed, params.max_gap_ms).into_iter().enumerate() {
        let v = velocities(&smoothed[run.clone()])?;
        let thr = threshold_with_rule(&v, params.lambda, params.rule)?;
        let flags: Vec<bool> = v
            .iter()
            .map(|v| v.vx.abs() > thr.mu_x || v.vy.abs() > thr.mu_y)
            .collect();
        let mut a = 0;
        while a < flags.len() {
            let mut b = a + 1;
            while b < flags.len() && flags[b] == flags[a] {
                b += 1;
            }
            pieces.push(Piece {
                run: run_idx,
                range: run.start + a..run.start + b,
                saccadic: flags[a],
            });
            a = b;
        }
    }
    Ok(pieces)
}

pub(crate) fn piece_duration(samples: &[GazeSample], piece: &Piece) -> i64 {
    samples[piece.range.end - 1].t - samples[piece.range.start].t
}

/// Batch detection over one user's time-sorted stream.
pub fn detect_fixations(samples: &[GazeSample], params: &FixationParams) -> Result<FixationOutput> {
    params.validate()?;
    if samples.is_empty() {
        return Ok(FixationOutput::default());
    }
    let pieces = classify(samples, params)?;

    let mut retained: Vec<Option<usize>> = vec![None; pieces.len()];
    let mut fixations = Vec::new();
    for (i, p) in pieces.iter().enumerate() {
        if !p.saccadic && piece_duration(samples, p) >= params.min_duration_ms {
            retained[i] = Some(fixations.len());
            fixations.push(Fixation::from_members(&samples[p.range.clone()]));
        }
    }

    let neighbour = |i: usize, j: Option<usize>| -> Option<usize> {
        let j = j?;
        (pieces.get(j)?.run == pieces[i].run).then_some(())?;
        retained[j]
    };
    let saccades = pieces
        .iter()
        .enumerate()
        .filter(|(_, p)| p.saccadic)
        .map(|(i, p)| Saccade {
            user: samples[p.range.start].user.clone(),
            start_ms: samples[p.range.start].t,
            end_ms: samples[p.range.end - 1].t,
            from_fixation: neighbour(i, i.checked_sub(1)),
            to_fixation: neighbour(i, Some(i + 1)),
        })
        .collect();

    Ok(FixationOutput {
        fixations,
        saccades,
    })
}

/// Groups a mixed stream by user (stable order within each user) and detects per user.
pub fn detect_fixations_by_user(
    samples: &[GazeSample],
    params: &FixationParams,
) -> Result<BTreeMap<UserId, FixationOutput>> {
    let mut by_user: BTreeMap<UserId, Vec<GazeSample>> = BTreeMap::new();
    for s in samples {
        by_user.entry(s.user.clone()).or_default().push(s.clone());
    }
    by_user
        .into_iter()
        .map(|(user, stream)| Ok((user, detect_fixations(&stream, params)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at_30hz(from: usize, to: usize, x: f64, y: f64) -> Vec<GazeSample> {
        (from..to)
            .map(|i| GazeSample::new("u1", (i * 1000 / 30) as i64, x, y))
            .collect()
    }

    #[test]
    fn stationary_second_is_one_fixation() {
        let s = at_30hz(0, 31, 100.0, 100.0);
        let out = detect_fixations(&s, &FixationParams::default()).unwrap();
        assert_eq!(out.fixations.len(), 1);
        let f = &out.fixations[0];
        assert_eq!((f.center_x, f.center_y), (100.0, 100.0));
        assert_eq!(f.duration_ms(), 1000);
        assert!(out.saccades.is_empty());
    }

    #[test]
    fn two_clusters_one_saccade() {
        let mut s = at_30hz(0, 15, 100.0, 100.0);
        s.extend(at_30hz(15, 30, 500.0, 300.0));
        // Velocities are zero except the two samples around the jump, so both
        // medians are 0 and the threshold is 0; the jump samples exceed it.
        let v = velocities(&smooth(&s)).unwrap();
        let nonzero = v.iter().filter(|v| v.vx != 0.0).count();
        assert_eq!(nonzero, 2);
        let out = detect_fixations(&s, &FixationParams::default()).unwrap();
        assert_eq!(out.fixations.len(), 2);
        assert_eq!(out.fixations[0].center(), crate::geometry::Point::new(100.0, 100.0));
        assert_eq!(out.fixations[1].center(), crate::geometry::Point::new(500.0, 300.0));
        assert_eq!(out.saccades.len(), 1);
        assert_eq!(out.saccades[0].from_fixation, Some(0));
        assert_eq!(out.saccades[0].to_fixation, Some(1));
    }

    #[test]
    fn short_cluster_discarded() {
        let s = at_30hz(0, 5, 10.0, 10.0); // spans 133 ms
        let out = detect_fixations(&s, &FixationParams::default()).unwrap();
        assert!(out.fixations.is_empty());
    }

    #[test]
    fn empty_stream() {
        let out = detect_fixations(&[], &FixationParams::default()).unwrap();
        assert_eq!(out, FixationOutput::default());
    }

    #[test]
    fn blink_splits_fixation() {
        let mut s = at_30hz(0, 60, 200.0, 200.0);
        for sample in &mut s[25..32] {
            sample.face_present = false;
        }
        let out = detect_fixations(&s, &FixationParams::default()).unwrap();
        assert_eq!(out.fixations.len(), 2);
        assert!(out.fixations[0].end_ms < s[25].t);
        assert!(out.fixations[1].start_ms > s[31].t);
    }

    #[test]
    fn gap_splits_fixation() {
        let mut s = at_30hz(0, 20, 200.0, 200.0);
        let mut late = at_30hz(0, 20, 200.0, 200.0);
        for x in &mut late {
            x.t += 1000;
        }
        s.extend(late);
        let out = detect_fixations(&s, &FixationParams::default()).unwrap();
        assert_eq!(out.fixations.len(), 2);
    }

    #[test]
    fn constant_drift_is_all_saccade() {
        let s: Vec<_> = (0..30)
            .map(|i| GazeSample::new("u", i * 33, i as f64 * 5.0, 0.0))
            .collect();
        let out = detect_fixations(&s, &FixationParams::default()).unwrap();
        assert!(out.fixations.is_empty());
    }

    #[test]
    fn unsorted_stream_rejected() {
        let s = vec![GazeSample::new("u", 10, 0.0, 0.0), GazeSample::new("u", 5, 0.0, 0.0)];
        assert!(matches!(
            detect_fixations(&s, &FixationParams::default()),
            Err(Error::InvalidStream(_))
        ));
    }
}
