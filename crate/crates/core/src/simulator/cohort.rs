use serde::{Deserialize, Serialize};

use super::{simulate_student, StudentProfile, StudentStream};
use crate::error::{Error, Result};
use crate::imaging::Aoi;
use crate::metrics::PaceScript;
use crate::oculomotor::UserId;
use crate::session::{ClientEvent, Group, Outbound, Session};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub n_control: usize,
    pub n_feedback: usize,
    /// Profiles assigned round-robin over students, control first; seeds are overridden.
    pub mix: Vec<StudentProfile>,
    pub duration_ms: i64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedStudent {
    pub group: Group,
    pub profile: StudentProfile,
    pub stream: StudentStream,
}

/// One student's intended AoI in one vote window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthRow {
    pub user: UserId,
    pub group: Group,
    pub window: u64,
    pub aoi: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub students: Vec<SimulatedStudent>,
    pub ground_truth: Vec<GroundTruthRow>,
}

impl Cohort {
    pub fn ground_truth_jsonl(&self) -> String {
        self.ground_truth
            .iter()
            .map(|r| serde_json::to_string(r).expect("rows serialize") + "\n")
            .collect()
    }

    /// Intended AoIs per window, one entry per student of `group`.
    pub fn intended_votes(&self, group: Group) -> Vec<Vec<Option<usize>>> {
        let users: Vec<&UserId> = self
            .students
            .iter()
            .filter(|s| s.group == group)
            .map(|s| &s.stream.user)
            .collect();
        let n = self.ground_truth.iter().map(|r| r.window + 1).max().unwrap_or(0);
        (0..n)
            .map(|k| {
                users
                    .iter()
                    .map(|u| {
                        self.ground_truth
                            .iter()
                            .find(|r| r.window == k && &r.user == *u)
                            .and_then(|r| r.aoi)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Student `i` (control first) is `c{i}` or `f{j}` and uses seed `seed + i`.
pub fn simulate_cohort(spec: &CohortSpec, pace: &PaceScript, aois: &[Aoi], vote_window_ms: i64) -> Result<Cohort> {
    if spec.n_control == 0 || spec.n_feedback == 0 {
        return Err(Error::InvalidArgument("a cohort needs at least one student per group".into()));
    }
    if spec.mix.is_empty() {
        return Err(Error::InvalidArgument("cohort profile mix is empty".into()));
    }
    let mut students = Vec::new();
    let mut ground_truth = Vec::new();
    for i in 0..spec.n_control + spec.n_feedback {
        let (group, user) = if i < spec.n_control {
            (Group::Control, UserId::new(format!("c{i}")))
        } else {
            (Group::Feedback, UserId::new(format!("f{}", i - spec.n_control)))
        };
        let profile = StudentProfile {
            seed: spec.seed.wrapping_add(i as u64),
            ..spec.mix[i % spec.mix.len()].clone()
        };
        let stream = simulate_student(user.clone(), &profile, pace, aois, spec.duration_ms)?;
        for (k, aoi) in stream.intended_by_window(vote_window_ms).into_iter().enumerate() {
            ground_truth.push(GroundTruthRow {
                user: user.clone(),
                group,
                window: k as u64,
                aoi,
            });
        }
        students.push(SimulatedStudent { group, profile, stream });
    }
    Ok(Cohort { students, ground_truth })
}

/// Joins every student, then ingests all events in time order (student order on ties),
/// ticking at the session clock after each one. A last tick at the cohort duration
/// closes the final window before the session is closed.
pub fn drive_session(session: &mut Session, cohort: &Cohort) -> Result<Vec<Outbound>> {
    let mut out = Vec::new();
    for s in &cohort.students {
        out.extend(session.join(s.stream.user.clone(), s.group)?);
    }
    let mut merged: Vec<(i64, usize, usize)> = Vec::new();
    for (si, s) in cohort.students.iter().enumerate() {
        for (ei, e) in s.stream.events.iter().enumerate() {
            let t = match e {
                ClientEvent::Gaze { t, .. } | ClientEvent::Click { t, .. } | ClientEvent::Face { t, .. } => *t,
                ClientEvent::Leave => continue,
            };
            merged.push((t, si, ei));
        }
    }
    merged.sort_unstable();
    for (_, si, ei) in merged {
        let s = &cohort.students[si];
        session.ingest(&s.stream.user, s.stream.events[ei])?;
        out.extend(session.tick(session.clock())?);
    }
    let end = cohort.students.iter().map(|s| s.stream.duration_ms).max().unwrap_or(0);
    out.extend(session.tick(end)?);
    session.close()?;
    Ok(out)
}
