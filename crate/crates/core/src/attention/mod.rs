//! Gaze clustering onto AoIs and the per-window peer-attention vote.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};
use crate::imaging::Aoi;
use crate::oculomotor::Fixation;

pub use crate::geometry::point_segment_distance;

/// Default vote window length.
pub const VOTE_WINDOW_MS: i64 = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AoiAssignment {
    pub aoi_id: usize,
    /// 0 when the point lies in the hull.
    pub distance: f64,
}

/// The winning AoI of one vote window. Serialized as `{"window","aoi","rect","votes"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeerRegion {
    pub window: u64,
    pub aoi: usize,
    pub rect: Rect,
    pub votes: usize,
}

/// Half-open interval `[start, end)` of vote window `k`.
pub fn window_span(k: u64, window_ms: i64) -> (i64, i64) {
    let start = k as i64 * window_ms;
    (start, start + window_ms)
}

/// Minimum distance from `p` to the hull boundary edges.
pub fn hull_distance(p: Point, aoi: &Aoi) -> f64 {
    let n = aoi.hull.len();
    (0..n)
        .map(|i| {
            point_segment_distance(p, aoi.hull[i].to_point(), aoi.hull[(i + 1) % n].to_point())
        })
        .fold(f64::INFINITY, f64::min)
}

/// Aligns a point to its AoI: a containing hull wins with distance 0, otherwise the
/// nearest hull by edge distance. Ties go to the smallest id.
pub fn assign_to_aoi(center: Point, aois: &[Aoi]) -> Result<AoiAssignment> {
    if aois.is_empty() {
        return Err(Error::NoAoi);
    }
    if let Some(aoi) = aois.iter().filter(|a| a.contains(center)).min_by_key(|a| a.id) {
        return Ok(AoiAssignment {
            aoi_id: aoi.id,
            distance: 0.0,
        });
    }
    let mut best: Option<AoiAssignment> = None;
    for aoi in aois {
        let d = hull_distance(center, aoi);
        let better = match best {
            None => true,
            Some(b) => d < b.distance || (d == b.distance && aoi.id < b.aoi_id),
        };
        if better {
            best = Some(AoiAssignment {
                aoi_id: aoi.id,
                distance: d,
            });
        }
    }
    Ok(best.expect("aois is nonempty"))
}

/// Confusion clicks are aligned exactly like fixation centers.
pub fn assign_confusion(click: Point, aois: &[Aoi]) -> Result<AoiAssignment> {
    assign_to_aoi(click, aois)
}

pub fn assign_fixations(fixations: &[Fixation], aois: &[Aoi]) -> Result<Vec<AoiAssignment>> {
    fixations.iter().map(|f| assign_to_aoi(f.center(), aois)).collect()
}

/// The AoI holding most of one user's fixation time inside `[start, end)`;
/// `None` (abstain) if no fixation time falls in the window.
pub fn user_modal_aoi(
    fixations: &[Fixation],
    assignments: &[AoiAssignment],
    window: (i64, i64),
) -> Option<usize> {
    let mut time: BTreeMap<usize, i64> = BTreeMap::new();
    for (f, a) in fixations.iter().zip(assignments) {
        let overlap = f.overlap_ms(window.0, window.1);
        if overlap > 0 {
            *time.entry(a.aoi_id).or_default() += overlap;
        }
    }
    // BTreeMap iterates ids ascending; keep the first maximum.
    let mut best: Option<(usize, i64)> = None;
    for (id, t) in time {
        if best.is_none_or(|(_, bt)| t > bt) {
            best = Some((id, t));
        }
    }
    best.map(|(id, _)| id)
}

/// Counts of non-abstaining votes and the winner (most votes, smallest id on ties).
pub fn tally(votes: &[Option<usize>]) -> Option<(usize, usize)> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for v in votes.iter().flatten() {
        *counts.entry(*v).or_default() += 1;
    }
    let mut best: Option<(usize, usize)> = None;
    for (id, c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((id, c));
        }
    }
    best
}

/// Votes the window's peer region from per-user modal AoIs.
pub fn vote_peer_region(window: u64, votes: &[Option<usize>], aois: &[Aoi]) -> Option<PeerRegion> {
    let (aoi, count) = tally(votes)?;
    let winner = aois.iter().find(|a| a.id == aoi)?;
    Some(PeerRegion {
        window,
        aoi,
        rect: winner.bbox,
        votes: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oculomotor::UserId;

    fn fix(start: i64, end: i64) -> Fixation {
        Fixation {
            user: UserId::new("u"),
            start_ms: start,
            end_ms: end,
            center_x: 0.0,
            center_y: 0.0,
            n_samples: 1,
        }
    }

    fn aa(id: usize) -> AoiAssignment {
        AoiAssignment {
            aoi_id: id,
            distance: 0.0,
        }
    }

    fn grid() -> Vec<Aoi> {
        vec![
            Aoi::rect(0, 0, 0, 10, 10).unwrap(),
            Aoi::rect(1, 40, 0, 10, 10).unwrap(),
            Aoi::rect(2, 100, 100, 50, 50).unwrap(),
            Aoi::rect(3, 20, 0, 10, 10).unwrap(),
        ]
    }

    #[test]
    fn containment_wins() {
        let a = assign_to_aoi(Point::new(120.0, 120.0), &grid()).unwrap();
        assert_eq!(a, AoiAssignment { aoi_id: 2, distance: 0.0 });
    }

    #[test]
    fn equidistant_tie_goes_to_smallest_id() {
        // x = 15 is 5 px from AoI 0 (right edge 10) and AoI 3 (left edge 20)
        let a = assign_to_aoi(Point::new(15.0, 5.0), &grid()).unwrap();
        assert_eq!(a.aoi_id, 0);
        assert_eq!(a.distance, 5.0);
    }

    #[test]
    fn overlapping_hulls_pick_smallest_id() {
        let aois = vec![
            Aoi::rect(5, 0, 0, 20, 20).unwrap(),
            Aoi::rect(1, 10, 10, 20, 20).unwrap(),
        ];
        assert_eq!(assign_to_aoi(Point::new(15.0, 15.0), &aois).unwrap().aoi_id, 1);
    }

    #[test]
    fn confusion_clicks() {
        let aois = grid();
        let c = aois[1].centroid();
        assert_eq!(assign_confusion(c, &aois).unwrap(), AoiAssignment { aoi_id: 1, distance: 0.0 });
        let blank = assign_confusion(Point::new(300.0, 300.0), &aois).unwrap();
        assert_eq!(blank.aoi_id, 2);
        assert!(blank.distance > 0.0);
        assert!(matches!(assign_confusion(c, &[]), Err(Error::NoAoi)));
    }

    #[test]
    fn modal_aoi_by_clipped_duration() {
        assert_eq!(user_modal_aoi(&[fix(100, 900)], &[aa(1)], (0, 5000)), Some(1));
        assert_eq!(
            user_modal_aoi(&[fix(0, 300), fix(400, 1000)], &[aa(1), aa(2)], (0, 5000)),
            Some(2)
        );
        assert_eq!(user_modal_aoi(&[], &[], (0, 5000)), None);
        // boundary-spanning fixation contributes only its clipped part
        assert_eq!(
            user_modal_aoi(&[fix(4000, 7000), fix(5000, 6500)], &[aa(4), aa(3)], (5000, 10000)),
            Some(4)
        );
        assert_eq!(user_modal_aoi(&[fix(0, 300)], &[aa(1)], (5000, 10000)), None);
    }

    #[test]
    fn vote_truth_table() {
        let aois = grid();
        let r = vote_peer_region(0, &[Some(0), Some(0), Some(0), Some(1)], &aois).unwrap();
        assert_eq!((r.aoi, r.votes, r.rect), (0, 3, aois[0].bbox));
        let r = vote_peer_region(1, &[Some(3), Some(1), Some(3), Some(1), None], &aois).unwrap();
        assert_eq!((r.aoi, r.votes), (1, 2));
        assert_eq!(vote_peer_region(2, &[None, None], &aois), None);
        assert_eq!(vote_peer_region(2, &[], &aois), None);
    }

    #[test]
    fn region_json_shape() {
        let r = PeerRegion {
            window: 3,
            aoi: 1,
            rect: Rect { x: 1, y: 2, w: 3, h: 4 },
            votes: 2,
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"window":3,"aoi":1,"rect":[1,2,3,4],"votes":2}"#
        );
    }
}
