use std::collections::{BTreeMap, HashMap};

use super::config::VotePolicy;
use super::{ClientEvent, Group, LogRecord, ServerMessage, SessionConfig, SessionLog};
use crate::attention::{assign_to_aoi, user_modal_aoi, vote_peer_region, window_span, AoiAssignment, PeerRegion};
use crate::error::{Error, Result};
use crate::imaging::Aoi;
use crate::metrics::{CognitiveEvent, CognitiveKind, PaceScript, UserRecording};
use crate::oculomotor::{Fixation, GazeSample, UserId, WindowedDetector};

/// A message addressed to one joined user.
#[derive(Debug, Clone, PartialEq)]
pub struct Outbound {
    pub to: UserId,
    pub msg: ServerMessage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IngestOutcome {
    Accepted,
    /// Older than one vote window behind the session clock; not logged.
    DroppedStale,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub accepted: u64,
    pub dropped_stale: u64,
    /// Logged gaze that arrived behind its user's detection horizon.
    pub late_unprocessed: u64,
}

struct UserState {
    id: UserId,
    group: Group,
    detector: WindowedDetector,
    fixations: Vec<Fixation>,
    assignments: Vec<AoiAssignment>,
    events: Vec<CognitiveEvent>,
    face_present: bool,
    left: bool,
}

/// One session's engine. Every method is deterministic in its inputs.
pub struct Session {
    config: SessionConfig,
    aois: Vec<Aoi>,
    pace_changes: Vec<(i64, Vec<usize>)>,
    replay_regions: Option<BTreeMap<u64, PeerRegion>>,
    users: Vec<UserState>,
    index: HashMap<UserId, usize>,
    log: SessionLog,
    clock: i64,
    next_window: u64,
    next_pace: usize,
    emitted: Vec<PeerRegion>,
    counters: Counters,
    closed: bool,
}

fn pace_changes(pace: &PaceScript) -> Vec<(i64, Vec<usize>)> {
    let mut out: Vec<(i64, Vec<usize>)> = Vec::new();
    for seg in pace.segments() {
        // a blank announcement is only kept where no segment follows directly
        if out.last().is_some_and(|last| last.0 == seg.start) {
            out.pop();
        }
        out.push((seg.start, seg.aois.iter().copied().collect()));
        out.push((seg.end, Vec::new()));
    }
    out
}

impl Session {
    pub fn new(config: SessionConfig) -> Result<Self> {
        config.validate()?;
        let aois = config.aois.resolve()?;
        let pace = config.pace.resolve()?;
        let replay_regions = config.replay_regions()?;
        Ok(Self {
            pace_changes: pace_changes(&pace),
            aois,
            replay_regions,
            config,
            users: Vec::new(),
            index: HashMap::new(),
            log: SessionLog::default(),
            clock: 0,
            next_window: 0,
            next_pace: 0,
            emitted: Vec::new(),
            counters: Counters::default(),
            closed: false,
        })
    }

    pub fn id(&self) -> &str {
        &self.config.session
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn aois(&self) -> &[Aoi] {
        &self.aois
    }

    /// Largest timestamp seen so far.
    pub fn clock(&self) -> i64 {
        self.clock
    }

    pub fn log(&self) -> &SessionLog {
        &self.log
    }

    pub fn emitted_regions(&self) -> &[PeerRegion] {
        &self.emitted
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn group_of(&self, user: &UserId) -> Option<Group> {
        self.index.get(user).map(|&i| self.users[i].group)
    }

    fn ensure_open(&self) -> Result<()> {
        if self.closed {
            Err(Error::SessionClosed)
        } else {
            Ok(())
        }
    }

    /// Registers a user and returns the join acknowledgment plus the current pace.
    pub fn join(&mut self, user: UserId, group: Group) -> Result<Vec<Outbound>> {
        self.ensure_open()?;
        if self.index.contains_key(&user) {
            return Err(Error::DuplicateUser(user.to_string()));
        }
        if let Some(expected) = self.config.groups.get(&user) {
            if *expected != group {
                return Err(Error::InvalidArgument(format!(
                    "user `{user}` is configured as {expected:?}, not {group:?}"
                )));
            }
        }
        let detector = WindowedDetector::new(self.config.fixation.clone(), self.config.detection_window_ms)?;
        self.index.insert(user.clone(), self.users.len());
        self.users.push(UserState {
            id: user.clone(),
            group,
            detector,
            fixations: Vec::new(),
            assignments: Vec::new(),
            events: Vec::new(),
            face_present: true,
            left: false,
        });
        self.log.records.push(LogRecord::Join {
            t: self.clock,
            user: user.clone(),
            group,
        });
        let mut out = vec![Outbound {
            to: user.clone(),
            msg: ServerMessage::Joined {
                slide: self.config.slide.clone(),
                aois: self.aois.clone(),
                feedback: group == Group::Feedback,
            },
        }];
        if let Some((t, aois)) = self.next_pace.checked_sub(1).map(|i| &self.pace_changes[i]) {
            out.push(Outbound {
                to: user,
                msg: ServerMessage::Pace { t: *t, aois: aois.clone() },
            });
        }
        Ok(out)
    }

    fn state_index(&self, user: &UserId) -> Result<usize> {
        match self.index.get(user) {
            Some(&i) if !self.users[i].left => Ok(i),
            _ => Err(Error::UnknownUser(user.to_string())),
        }
    }

    fn record_fixations(&mut self, i: usize, fixations: Vec<Fixation>) -> Result<()> {
        for f in fixations {
            let a = assign_to_aoi(f.center(), &self.aois)?;
            self.users[i].fixations.push(f);
            self.users[i].assignments.push(a);
        }
        Ok(())
    }

    /// Applies one post-join event from `user`.
    pub fn ingest(&mut self, user: &UserId, event: ClientEvent) -> Result<IngestOutcome> {
        self.ensure_open()?;
        let i = self.state_index(user)?;
        let t = match event {
            ClientEvent::Gaze { t, .. } | ClientEvent::Click { t, .. } | ClientEvent::Face { t, .. } => t,
            ClientEvent::Leave => self.clock,
        };
        if t < self.clock - self.config.vote_window_ms {
            self.counters.dropped_stale += 1;
            return Ok(IngestOutcome::DroppedStale);
        }
        self.clock = self.clock.max(t);
        let id = self.users[i].id.clone();
        match event {
            ClientEvent::Gaze { t, x, y } => {
                self.log.records.push(LogRecord::Gaze { t, user: id.clone(), x, y });
                let st = &mut self.users[i];
                if t < st.detector.horizon() {
                    self.counters.late_unprocessed += 1;
                } else {
                    let sample = GazeSample {
                        user: id,
                        t,
                        x,
                        y,
                        face_present: st.face_present,
                    };
                    let done = st.detector.push(sample)?;
                    self.record_fixations(i, done)?;
                }
            }
            ClientEvent::Click { t, x, y } => {
                self.log.records.push(LogRecord::Click { t, user: id.clone(), x, y });
                self.users[i].events.push(CognitiveEvent {
                    user: id,
                    t,
                    kind: CognitiveKind::ConfusionClick { x, y },
                });
            }
            ClientEvent::Face { t, present } => {
                self.log.records.push(LogRecord::Face { t, user: id.clone(), present });
                let st = &mut self.users[i];
                st.face_present = present;
                st.events.push(CognitiveEvent {
                    user: id,
                    t,
                    kind: if present {
                        CognitiveKind::FaceFound
                    } else {
                        CognitiveKind::FaceLost
                    },
                });
            }
            ClientEvent::Leave => {
                self.log.records.push(LogRecord::Leave { t, user: id });
                let done = self.users[i].detector.finish()?;
                self.record_fixations(i, done)?;
                self.users[i].left = true;
            }
        }
        self.counters.accepted += 1;
        Ok(IngestOutcome::Accepted)
    }

    fn active_users(&self, group: Option<Group>) -> impl Iterator<Item = &UserState> {
        self.users
            .iter()
            .filter(move |u| !u.left && group.is_none_or(|g| u.group == g))
    }

    fn live_vote(&mut self, k: u64) -> Result<Option<PeerRegion>> {
        let (start, end) = window_span(k, self.config.vote_window_ms);
        let mut votes = Vec::new();
        for i in 0..self.users.len() {
            if self.users[i].group != Group::Control {
                continue;
            }
            if !self.users[i].left {
                let done = self.users[i].detector.advance_to(end)?;
                self.record_fixations(i, done)?;
            }
            let st = &self.users[i];
            let mut fixations = st.fixations.clone();
            let mut assignments = st.assignments.clone();
            if self.config.vote_policy == VotePolicy::IncludeInFlight && !st.left {
                if let Some(p) = st.detector.provisional() {
                    assignments.push(assign_to_aoi(p.center(), &self.aois)?);
                    fixations.push(p);
                }
            }
            votes.push(user_modal_aoi(&fixations, &assignments, (start, end)));
        }
        Ok(vote_peer_region(k, &votes, &self.aois))
    }

    /// Closes every vote window ending at or before `now` and announces pace changes
    /// reached by `now`. Returns the broadcasts. The session clock advances to `now`.
    pub fn tick(&mut self, now: i64) -> Result<Vec<Outbound>> {
        self.ensure_open()?;
        self.clock = self.clock.max(now);
        let w = self.config.vote_window_ms;
        let closing = (self.next_window..).take_while(|k| (*k as i64 + 1) * w <= now).count();
        let pace_due = self.pace_changes[self.next_pace..]
            .iter()
            .take_while(|(t, _)| *t <= now)
            .count();
        if closing == 0 && pace_due == 0 {
            return Ok(Vec::new());
        }
        self.log.records.push(LogRecord::Tick { t: now });
        let mut out = Vec::new();
        for (t, aois) in self.pace_changes[self.next_pace..self.next_pace + pace_due].to_vec() {
            self.log.records.push(LogRecord::Pace { t, aois: aois.clone() });
            for u in self.active_users(None) {
                out.push(Outbound {
                    to: u.id.clone(),
                    msg: ServerMessage::Pace { t, aois: aois.clone() },
                });
            }
        }
        self.next_pace += pace_due;
        for _ in 0..closing {
            let k = self.next_window;
            self.next_window += 1;
            let region = match &self.replay_regions {
                Some(map) => map.get(&k).cloned(),
                None => self.live_vote(k)?,
            };
            let Some(region) = region else { continue };
            self.log.records.push(LogRecord::PeerRegion {
                t: now,
                window: region.window,
                aoi: region.aoi,
                rect: region.rect,
                votes: region.votes,
            });
            for u in self.active_users(Some(Group::Feedback)) {
                out.push(Outbound {
                    to: u.id.clone(),
                    msg: ServerMessage::PeerRegion {
                        window: region.window,
                        aoi: region.aoi,
                        rect: region.rect,
                    },
                });
            }
            self.emitted.push(region);
        }
        Ok(out)
    }

    /// Flushes every detector and appends the end record. Idempotent.
    pub fn close(&mut self) -> Result<&SessionLog> {
        if !self.closed {
            for i in 0..self.users.len() {
                if !self.users[i].left {
                    let done = self.users[i].detector.finish()?;
                    self.record_fixations(i, done)?;
                }
            }
            self.log.records.push(LogRecord::End { t: self.clock });
            self.closed = true;
        }
        Ok(&self.log)
    }

    /// Who should receive the end notice.
    pub fn connected_users(&self) -> Vec<UserId> {
        self.active_users(None).map(|u| u.id.clone()).collect()
    }

    /// Per-user fixations, assignments and cognitive events recorded so far.
    pub fn recordings(&self) -> Vec<UserRecording> {
        self.users
            .iter()
            .map(|u| UserRecording {
                user: u.id.clone(),
                group: u.group,
                fixations: u.fixations.clone(),
                assignments: u.assignments.clone(),
                events: u.events.clone(),
                session_end: self.clock,
            })
            .collect()
    }
}

/// Open sessions by id.
#[derive(Default)]
pub struct SessionRegistry {
    sessions: BTreeMap<String, Session>,
}

impl SessionRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, session: Session) -> Result<()> {
        if self.sessions.contains_key(session.id()) {
            return Err(Error::InvalidConfig(format!("session `{}` configured twice", session.id())));
        }
        self.sessions.insert(session.id().to_string(), session);
        Ok(())
    }

    pub fn get_mut(&mut self, id: &str) -> Result<&mut Session> {
        self.sessions
            .get_mut(id)
            .ok_or_else(|| Error::SessionNotFound(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.sessions.keys().map(String::as_str)
    }

    pub fn into_sessions(self) -> impl Iterator<Item = Session> {
        self.sessions.into_values()
    }
}
