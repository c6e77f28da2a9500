//! Seeded synthetic students that emit wire-protocol event streams with a known
//! intended target at every instant.

mod cohort;
mod demo;
mod rng;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::attention::{hull_distance, window_span};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::imaging::Aoi;
use crate::metrics::PaceScript;
use crate::oculomotor::UserId;
use crate::session::{ClientEvent, ClientMessage, Group};

pub use cohort::{drive_session, simulate_cohort, Cohort, CohortSpec, GroundTruthRow, SimulatedStudent};
pub use demo::{demo_aois, demo_pace, SLIDE_HEIGHT, SLIDE_WIDTH};
pub use rng::{SimRng, PCG_STREAM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    /// Looks at the lowest-id active pace AoI.
    Follower,
    /// Re-targets every 1–3 s among all AoIs and blank slide points.
    Wanderer,
    /// Like a follower but lingers on the previous AoI after each pace change.
    Reflective,
}

impl std::str::FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "follower" => Ok(ProfileKind::Follower),
            "wanderer" => Ok(ProfileKind::Wanderer),
            "reflective" => Ok(ProfileKind::Reflective),
            _ => Err(Error::InvalidArgument(format!("unknown profile `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudentProfile {
    pub kind: ProfileKind,
    /// Per-dwell landing error, px per axis.
    pub jitter_sigma: f64,
    /// Per-sample noise, px per axis.
    pub tremor_sigma: f64,
    pub sample_rate_hz: f64,
    /// Face-loss episodes per minute.
    pub inattention_rate: f64,
    /// Confusion clicks per minute.
    pub confusion_rate: f64,
    pub dwell_lag_ms: i64,
    /// Wanderer only: chance that a new target is a blank point.
    pub blank_prob: f64,
    /// Blank points keep at least this distance from every hull.
    pub blank_margin_px: f64,
    pub seed: u64,
}

impl Default for StudentProfile {
    fn default() -> Self {
        Self {
            kind: ProfileKind::Follower,
            jitter_sigma: 8.0,
            tremor_sigma: 0.0,
            sample_rate_hz: 30.0,
            inattention_rate: 0.0,
            confusion_rate: 0.0,
            dwell_lag_ms: 4000,
            blank_prob: 0.5,
            blank_margin_px: 34.0,
            seed: 0,
        }
    }
}

impl StudentProfile {
    pub fn new(kind: ProfileKind, seed: u64) -> Self {
        Self {
            kind,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("{what}: {self:?}")));
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz <= 1000.0) {
            return bad("sample rate must be in (0, 1000] Hz");
        }
        if !(self.jitter_sigma >= 0.0 && self.tremor_sigma >= 0.0) {
            return bad("noise levels must be non-negative");
        }
        if !(self.inattention_rate >= 0.0 && self.confusion_rate >= 0.0) {
            return bad("rates must be non-negative");
        }
        if self.dwell_lag_ms < 0 || !(0.0..=1.0).contains(&self.blank_prob) || !(self.blank_margin_px >= 0.0) {
            return bad("invalid dwell lag, blank probability or margin");
        }
        Ok(())
    }
}

/// One stretch of steady intended gaze.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dwell {
    pub start: i64,
    pub end: i64,
    /// Landing point including the dwell's jitter.
    pub point: Point,
    /// Intended AoI; `None` for a blank point.
    pub aoi: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudentStream {
    pub user: UserId,
    pub events: Vec<ClientEvent>,
    pub dwells: Vec<Dwell>,
    /// Face-loss intervals `[start, end)`.
    pub episodes: Vec<(i64, i64)>,
    pub duration_ms: i64,
}

impl StudentStream {
    /// Intended target at `t`, or `None` during face loss or past the end.
    pub fn target_at(&self, t: i64) -> Option<&Dwell> {
        if self.episodes.iter().any(|&(a, b)| a <= t && t < b) {
            return None;
        }
        let i = self.dwells.partition_point(|d| d.end <= t);
        self.dwells.get(i).filter(|d| d.start <= t)
    }

    /// Intended AoI of each vote window: the target held longest while attending,
    /// with AoIs preferred over blank on ties and smaller ids first.
    pub fn intended_by_window(&self, vote_window_ms: i64) -> Vec<Option<usize>> {
        let n = (self.duration_ms + vote_window_ms - 1) / vote_window_ms;
        (0..n as u64)
            .map(|k| {
                let (ws, we) = window_span(k, vote_window_ms);
                let mut time: BTreeMap<Option<usize>, i64> = BTreeMap::new();
                for d in &self.dwells {
                    let (a, b) = (d.start.max(ws), d.end.min(we));
                    if b <= a {
                        continue;
                    }
                    let lost: i64 = self
                        .episodes
                        .iter()
                        .map(|&(ea, eb)| (b.min(eb) - a.max(ea)).max(0))
                        .sum();
                    *time.entry(d.aoi).or_default() += b - a - lost;
                }
                let mut best: Option<(Option<usize>, i64)> = None;
                // Some(id) keys sort after None; walk them first so they win ties
                let ordered = time.iter().filter(|(k, _)| k.is_some()).chain(time.iter().filter(|(k, _)| k.is_none()));
                for (&key, &t) in ordered {
                    if t > 0 && best.is_none_or(|(_, bt)| t > bt) {
                        best = Some((key, t));
                    }
                }
                best.and_then(|(key, _)| key)
            })
            .collect()
    }

    /// Wire-protocol JSONL: a join line followed by every event.
    pub fn to_wire_jsonl(&self, session: &str, group: Group) -> String {
        let join = ClientMessage::Join {
            session: session.to_string(),
            user: self.user.clone(),
            group,
        };
        std::iter::once(join)
            .chain(self.events.iter().map(|e| ClientMessage::from(*e)))
            .map(|m| m.to_line() + "\n")
            .collect()
    }
}

fn sample_times(rate_hz: f64, duration_ms: i64) -> impl Iterator<Item = i64> {
    (0u64..)
        .map(move |i| (i as f64 * 1000.0 / rate_hz).floor() as i64)
        .take_while(move |t| *t < duration_ms)
}

/// Follower targets over `[0, duration)`: the smallest active id per pace segment;
/// blank or uncovered time keeps the previous target.
fn follower_plan(pace: &PaceScript, aois: &[Aoi], duration_ms: i64) -> Vec<(i64, i64, usize)> {
    let known = |id: &usize| aois.iter().any(|a| a.id == *id);
    let first = aois.iter().map(|a| a.id).min().expect("aois checked non-empty");
    let mut plan: Vec<(i64, i64, usize)> = Vec::new();
    let mut current = pace
        .segments()
        .iter()
        .find_map(|s| s.aois.iter().copied().find(known))
        .unwrap_or(first);
    let push = |plan: &mut Vec<(i64, i64, usize)>, start: i64, end: i64, aoi: usize| {
        let (start, end) = (start.max(0), end.min(duration_ms));
        if end <= start {
            return;
        }
        match plan.last_mut() {
            Some(last) if last.2 == aoi && last.1 == start => last.1 = end,
            _ => plan.push((start, end, aoi)),
        }
    };
    let mut t = 0;
    for seg in pace.segments() {
        if seg.start > t {
            push(&mut plan, t, seg.start, current);
        }
        if let Some(id) = seg.aois.iter().copied().find(known) {
            current = id;
        }
        push(&mut plan, seg.start.max(t), seg.end, current);
        t = t.max(seg.end);
    }
    push(&mut plan, t, duration_ms, current);
    plan
}

/// After each change of target, keeps the previous stretch's AoI for `lag`
/// (at most the length of the new stretch).
fn reflective_plan(plan: Vec<(i64, i64, usize)>, lag: i64) -> Vec<(i64, i64, usize)> {
    let mut out: Vec<(i64, i64, usize)> = Vec::new();
    let mut push = |start: i64, end: i64, aoi: usize| {
        if end <= start {
            return;
        }
        match out.last_mut() {
            Some(last) if last.2 == aoi && last.1 == start => last.1 = end,
            _ => out.push((start, end, aoi)),
        }
    };
    for (i, &(start, end, aoi)) in plan.iter().enumerate() {
        let switch = match i {
            0 => start,
            _ => (start + lag).min(end),
        };
        if i > 0 {
            push(start, switch, plan[i - 1].2);
        }
        push(switch, end, aoi);
    }
    out
}

fn blank_point(rng: &mut SimRng, aois: &[Aoi], margin: f64) -> Result<Point> {
    for _ in 0..10_000 {
        let p = Point::new(rng.range(0.0, SLIDE_WIDTH as f64), rng.range(0.0, SLIDE_HEIGHT as f64));
        if aois.iter().all(|a| !a.contains(p) && hull_distance(p, a) > margin) {
            return Ok(p);
        }
    }
    Err(Error::InvalidConfig(format!("no blank slide area at margin {margin} px")))
}

fn poisson_times(rng: &mut SimRng, per_minute: f64, duration_ms: i64) -> Vec<i64> {
    let mut out = Vec::new();
    if per_minute <= 0.0 {
        return out;
    }
    let mean = 60_000.0 / per_minute;
    let mut t = rng.exponential(mean);
    while t < duration_ms as f64 {
        out.push(t.floor() as i64);
        t += rng.exponential(mean);
    }
    out
}

/// Generates one student's event stream. Same arguments always give the same stream.
pub fn simulate_student(
    user: UserId,
    profile: &StudentProfile,
    pace: &PaceScript,
    aois: &[Aoi],
    duration_ms: i64,
) -> Result<StudentStream> {
    profile.validate()?;
    if duration_ms <= 0 {
        return Err(Error::InvalidArgument(format!("duration must be positive, got {duration_ms}")));
    }
    if aois.is_empty() && profile.kind != ProfileKind::Wanderer {
        return Err(Error::InvalidConfig(format!("{:?} profile needs at least one AoI", profile.kind)));
    }
    let mut rng = SimRng::new(profile.seed);
    let centroid = |id: usize| aois.iter().find(|a| a.id == id).expect("planned ids exist").centroid();

    let plan: Vec<(i64, i64, Option<usize>, Point)> = match profile.kind {
        ProfileKind::Follower | ProfileKind::Reflective => {
            let mut plan = follower_plan(pace, aois, duration_ms);
            if profile.kind == ProfileKind::Reflective {
                plan = reflective_plan(plan, profile.dwell_lag_ms);
            }
            plan.into_iter().map(|(s, e, id)| (s, e, Some(id), centroid(id))).collect()
        }
        ProfileKind::Wanderer => {
            let mut plan = Vec::new();
            let mut t = 0;
            while t < duration_ms {
                let len = rng.range(1000.0, 3000.0).round() as i64;
                let end = (t + len).min(duration_ms);
                if aois.is_empty() || rng.uniform() < profile.blank_prob {
                    plan.push((t, end, None, blank_point(&mut rng, aois, profile.blank_margin_px)?));
                } else {
                    let a = &aois[rng.index(aois.len())];
                    plan.push((t, end, Some(a.id), a.centroid()));
                }
                t = end;
            }
            plan
        }
    };
    let dwells: Vec<Dwell> = plan
        .into_iter()
        .map(|(start, end, aoi, base)| {
            let dx = profile.jitter_sigma * rng.normal();
            let dy = profile.jitter_sigma * rng.normal();
            Dwell {
                start,
                end,
                point: Point::new(base.x + dx, base.y + dy),
                aoi,
            }
        })
        .collect();

    let mut episodes = Vec::new();
    if profile.inattention_rate > 0.0 {
        let mean = 60_000.0 / profile.inattention_rate;
        let mut t = rng.exponential(mean);
        while t < duration_ms as f64 {
            let start = t.floor() as i64;
            let end = (start + rng.range(2000.0, 5000.0).round() as i64).min(duration_ms);
            episodes.push((start, end));
            t = end as f64 + rng.exponential(mean);
        }
    }
    let clicks = poisson_times(&mut rng, profile.confusion_rate, duration_ms);

    let mut stream = StudentStream {
        user,
        events: Vec::new(),
        dwells,
        episodes,
        duration_ms,
    };
    // (t, rank) orders face changes before gaze before clicks at equal times
    let mut timed: Vec<(i64, u8, ClientEvent)> = Vec::new();
    for &(a, b) in &stream.episodes {
        timed.push((a, 0, ClientEvent::Face { t: a, present: false }));
        if b < duration_ms {
            timed.push((b, 0, ClientEvent::Face { t: b, present: true }));
        }
    }
    for t in sample_times(profile.sample_rate_hz, duration_ms) {
        let Some(d) = stream.target_at(t) else { continue };
        let mut p = d.point;
        if profile.tremor_sigma > 0.0 {
            p.x += profile.tremor_sigma * rng.normal();
            p.y += profile.tremor_sigma * rng.normal();
        }
        timed.push((t, 1, ClientEvent::Gaze { t, x: p.x, y: p.y }));
    }
    for t in clicks {
        if let Some(d) = stream.target_at(t) {
            timed.push((t, 2, ClientEvent::Click { t, x: d.point.x, y: d.point.y }));
        }
    }
    timed.sort_by_key(|(t, rank, _)| (*t, *rank));
    stream.events = timed.into_iter().map(|(_, _, e)| e).collect();
    Ok(stream)
}
