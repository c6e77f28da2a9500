use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use peergaze::analytics::{
    decode_questions, one_way_anova, corr_matrix, score_accuracy, DecodeParams, LogisticParams, QuestionSpec,
    RecordedSession, ResponseRecord,
};
use peergaze::attention::{tally, user_modal_aoi, window_span};
use peergaze::imaging::{detect_aois, Aoi, SlideImage};
use peergaze::metrics::{normalize_reports_by_video, report_for_recording, MetricsReport, PaceScript};
use peergaze::oculomotor::{detect_fixations_by_user, Fixation, GazeSample, WindowedDetector};
use peergaze::session::{replay, FeedbackSource, Group, LogRecord, SessionConfig, SessionLog, Source};
use peergaze::simulator::{
    demo_aois, demo_pace, drive_session, simulate_cohort, simulate_student, CohortSpec, ProfileKind, StudentProfile,
};
use peergaze::UserId;

use crate::args::*;
use crate::io::{csv_string, emit, jsonl, read_json, read_jsonl, read_text, usage, write, UsageError};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Aoi(AoiCommand::Detect(a)) => aoi_detect(a),
        Command::Fixations(a) => fixations(a),
        Command::Serve(a) => serve(a),
        Command::Simulate(a) => simulate(a),
        Command::Metrics(a) => metrics(a),
        Command::Analyze(AnalyzeCommand::Corr(a)) => corr(a),
        Command::Analyze(AnalyzeCommand::Anova(a)) => anova(a),
        Command::Analyze(AnalyzeCommand::Decode(a)) => decode(a),
        Command::Replay(a) => replay_cmd(a),
    }
}

fn aoi_detect(a: AoiDetectArgs) -> Result<()> {
    let params = a.params.params();
    usage(params.validate())?;
    let slide = SlideImage::load(&a.slide).with_context(|| format!("cannot load slide {}", a.slide.display()))?;
    let aois = detect_aois(&slide, &params)?;
    log::info!("{} AoIs on {}", aois.len(), a.slide.display());
    emit(a.out.as_deref(), &(serde_json::to_string_pretty(&aois)? + "\n"))
}

/// Gaze samples from either sample JSONL or a session log.
fn read_gaze(path: &Path) -> Result<Vec<GazeSample>> {
    let text = read_text(path)?;
    let mut samples = Vec::new();
    let mut face: BTreeMap<UserId, bool> = BTreeMap::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let ctx = || format!("{}:{}: invalid record", path.display(), i + 1);
        let value: serde_json::Value = serde_json::from_str(line).with_context(ctx)?;
        if value.get("kind").is_none() {
            samples.push(serde_json::from_value(value).with_context(ctx)?);
            continue;
        }
        match serde_json::from_value::<LogRecord>(value).with_context(ctx)? {
            LogRecord::Face { user, present, .. } => {
                face.insert(user, present);
            }
            LogRecord::Gaze { t, user, x, y } => {
                let face_present = face.get(&user).copied().unwrap_or(true);
                samples.push(GazeSample {
                    user,
                    t,
                    x,
                    y,
                    face_present,
                });
            }
            _ => {}
        }
    }
    Ok(samples)
}

fn fixations(a: FixationsArgs) -> Result<()> {
    let params = a.fixation.params();
    usage(params.validate())?;
    if a.window <= 0 {
        return Err(UsageError(format!("--window must be positive, got {}", a.window)).into());
    }
    let samples = read_gaze(&a.gaze)?;
    let mut all: Vec<Fixation> = Vec::new();
    if a.windowed {
        let mut by_user: BTreeMap<UserId, Vec<GazeSample>> = BTreeMap::new();
        for s in samples {
            by_user.entry(s.user.clone()).or_default().push(s);
        }
        for (_, user_samples) in by_user {
            let mut det = WindowedDetector::new(params.clone(), a.window)?;
            for s in user_samples {
                all.extend(det.push(s)?);
            }
            all.extend(det.finish()?);
        }
    } else {
        for (_, out) in detect_fixations_by_user(&samples, &params)? {
            all.extend(out.fixations);
        }
    }
    log::info!("{} fixations", all.len());
    emit(a.out.as_deref(), &jsonl(&all))
}

fn serve(a: ServeArgs) -> Result<()> {
    let mut sessions = Vec::new();
    for path in &a.configs {
        let mut c = SessionConfig::load(path)?;
        match a.mode {
            Some(ModeArg::Live) => c.feedback_source = FeedbackSource::Live,
            Some(ModeArg::Replay) => {
                let log = a.replay_log.clone().expect("clap requires --replay-log");
                c.feedback_source = FeedbackSource::Replay { log };
            }
            None => {}
        }
        usage(c.validate())?;
        sessions.push(c);
    }
    let addr = format!("{}:{}", a.host, a.port)
        .parse()
        .map_err(|e| UsageError(format!("bad --host/--port: {e}")))?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let config = peergaze_server::ServerConfig {
            addr,
            log_dir: a.log_dir.clone(),
            sessions,
        };
        let handle = peergaze_server::start_with_signal(config, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
        eprintln!("serving on {} (logs in {})", handle.local_addr(), a.log_dir.display());
        let logs = handle.wait().await?;
        eprintln!("closed {} session(s)", logs.len());
        Ok(())
    })
}

fn load_aois(path: Option<&Path>) -> Result<Vec<Aoi>> {
    path.map_or_else(|| Ok(demo_aois()), read_json)
}

fn load_pace(path: Option<&Path>, demo_duration_ms: i64) -> Result<PaceScript> {
    path.map_or_else(|| Ok(demo_pace(demo_duration_ms)), read_json)
}

fn profile_kind(p: ProfileArg) -> ProfileKind {
    match p {
        ProfileArg::Follower => ProfileKind::Follower,
        ProfileArg::Wanderer => ProfileKind::Wanderer,
        ProfileArg::Reflective => ProfileKind::Reflective,
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    if a.duration <= 0 {
        return Err(UsageError(format!("--duration must be positive, got {}", a.duration)).into());
    }
    if a.vote_window <= 0 {
        return Err(UsageError(format!("--vote-window must be positive, got {}", a.vote_window)).into());
    }
    let aois = load_aois(a.aois.as_deref())?;
    let pace = load_pace(a.pace.as_deref(), a.duration)?;
    let base = StudentProfile {
        kind: profile_kind(a.profile),
        jitter_sigma: a.jitter,
        tremor_sigma: a.tremor,
        sample_rate_hz: a.rate,
        inattention_rate: a.inattention_rate,
        confusion_rate: a.confusion_rate,
        dwell_lag_ms: a.dwell_lag,
        blank_prob: a.blank_prob,
        seed: a.seed,
        ..StudentProfile::default()
    };
    usage(base.validate())?;

    let (Some(n_control), Some(n_feedback), Some(dir)) = (a.control, a.feedback, a.out_dir.as_deref()) else {
        let group = match a.group {
            GroupArg::Control => Group::Control,
            GroupArg::Feedback => Group::Feedback,
        };
        let stream = simulate_student(UserId::new(a.user.as_str()), &base, &pace, &aois, a.duration)?;
        return emit(a.out.as_deref(), &stream.to_wire_jsonl(&a.session, group));
    };
    let mix = if a.mix.is_empty() {
        vec![base]
    } else {
        a.mix
            .iter()
            .map(|k| StudentProfile {
                kind: profile_kind(*k),
                ..base.clone()
            })
            .collect()
    };
    let spec = CohortSpec {
        n_control,
        n_feedback,
        mix,
        duration_ms: a.duration,
        seed: a.seed,
    };
    let cohort = usage(simulate_cohort(&spec, &pace, &aois, a.vote_window))?;
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    for s in &cohort.students {
        let path = dir.join(format!("{}.jsonl", s.stream.user));
        write(&path, &s.stream.to_wire_jsonl(&a.session, s.group))?;
    }
    write(&dir.join("ground_truth.jsonl"), &cohort.ground_truth_jsonl())?;
    write(&dir.join("aois.json"), &(serde_json::to_string_pretty(&aois)? + "\n"))?;
    write(&dir.join("pace.json"), &(serde_json::to_string_pretty(&pace)? + "\n"))?;
    let mut config = SessionConfig::new(a.session.clone(), "simulated", aois, pace);
    config.vote_window_ms = a.vote_window;
    let mut session = peergaze::session::Session::new(config.clone())?;
    drive_session(&mut session, &cohort)?;
    write(&dir.join("session.jsonl"), &session.log().to_jsonl())?;
    config.aois = Source::Path("aois.json".into());
    config.pace = Source::Path("pace.json".into());
    write(&dir.join("config.json"), &(serde_json::to_string_pretty(&config)? + "\n"))?;
    eprintln!("wrote {} students to {}", cohort.students.len(), dir.display());
    Ok(())
}

fn last_t(log: &SessionLog) -> i64 {
    log.records.iter().map(LogRecord::t).max().unwrap_or(0)
}

/// Engine config matching the flags, with the demo pace sized to the log.
fn engine_config(e: &EngineFlags, log: &SessionLog) -> Result<SessionConfig> {
    if let Some(path) = &e.config {
        return Ok(SessionConfig::load(path)?);
    }
    let aois = load_aois(e.aois.as_deref())?;
    let demo_len = (last_t(log) + 9_999) / 10_000 * 10_000;
    let pace = load_pace(e.pace.as_deref(), demo_len.max(10_000))?;
    let mut c = SessionConfig::new("replay", "replay", aois, pace);
    c.fixation = e.fixation.params();
    usage(c.validate())?;
    Ok(c)
}

fn load_log(path: &Path) -> Result<SessionLog> {
    SessionLog::parse(&read_text(path)?).with_context(|| format!("{}: corrupt session log", path.display()))
}

fn metrics(a: MetricsArgs) -> Result<()> {
    let params = a.metrics.params();
    usage(params.validate())?;
    let log = load_log(&a.log)?;
    let mut config = engine_config(&a.engine, &log)?;
    config.vote_window_ms = params.vote_window_ms;
    let pace = config.pace.resolve()?;
    let out = replay(&log, config)?;
    let reports: Vec<MetricsReport> = out
        .recordings
        .iter()
        .map(|r| MetricsReport {
            video: a.video.clone(),
            ..report_for_recording(r, &pace, &out.recorded_regions, &params)
        })
        .collect();
    if let Some(path) = &a.crowd_csv {
        let end = out.recordings.iter().map(|r| r.session_end).max().unwrap_or(0);
        let n = (end + params.vote_window_ms - 1) / params.vote_window_ms;
        let mut rows = Vec::new();
        for k in 0..n.max(0) as u64 {
            let span = window_span(k, params.vote_window_ms);
            let votes: Vec<Option<usize>> = out
                .recordings
                .iter()
                .map(|r| user_modal_aoi(&r.fixations, &r.assignments, span))
                .collect();
            let voters = votes.iter().flatten().count();
            let (crowd, consistency) = match tally(&votes) {
                Some((aoi, agree)) => (aoi.to_string(), format!("{}", agree as f64 / voters as f64)),
                None => (String::new(), String::new()),
            };
            rows.push(vec![
                k.to_string(),
                span.0.to_string(),
                span.1.to_string(),
                voters.to_string(),
                crowd,
                consistency,
            ]);
        }
        let header: Vec<String> = ["window", "start_ms", "end_ms", "voters", "crowd_aoi", "consistency"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        write(path, &csv_string(&header, &rows)?)?;
    }
    emit(a.out.as_deref(), &jsonl(&reports))
}

type Column = (String, fn(&MetricsReport) -> f64);

fn metric_columns() -> Vec<Column> {
    vec![
        ("valid_focus_ratio".into(), |r| r.valid_focus_ratio),
        ("course_following_ratio".into(), |r| r.course_following_ratio),
        ("gaze_in_peer_ratio".into(), |r| r.gaze_in_peer_ratio),
        ("inattention_ms".into(), |r| r.inattention_ms as f64),
        ("confusion_ms".into(), |r| r.confusion_ms as f64),
    ]
}

fn read_reports(paths: &[std::path::PathBuf]) -> Result<Vec<MetricsReport>> {
    let mut all = Vec::new();
    for p in paths {
        all.extend(read_jsonl::<MetricsReport>(p)?);
    }
    if all.is_empty() {
        bail!("no metric reports in the input");
    }
    Ok(all)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn corr(a: CorrArgs) -> Result<()> {
    let reports = read_reports(&a.input.reports)?;
    let mut columns: Vec<(String, Vec<Option<f64>>)> = Vec::new();
    for (name, f) in metric_columns() {
        let values = if a.normalize {
            normalize_reports_by_video(&reports, f)?
        } else {
            reports.iter().map(f).collect()
        };
        columns.push((name, values.into_iter().map(Some).collect()));
    }
    if let (Some(q), Some(r)) = (&a.questions, &a.responses) {
        let questions: Vec<QuestionSpec> = read_json(q)?;
        let responses: Vec<ResponseRecord> = read_jsonl(r)?;
        let acc = score_accuracy(&responses, &questions)?;
        let pick = |f: fn(&peergaze::analytics::Accuracy) -> Option<f64>| -> Vec<Option<f64>> {
            reports.iter().map(|r| acc.get(&r.user).and_then(f)).collect()
        };
        columns.push(("easy_accuracy".into(), pick(|a| a.easy)));
        columns.push(("hard_accuracy".into(), pick(|a| a.hard)));
        columns.push(("overall_accuracy".into(), pick(|a| a.overall)));
    }
    let m = corr_matrix(&columns)?;
    let header: Vec<String> = std::iter::once("metric".to_string()).chain(m.names.iter().cloned()).collect();
    let rows: Vec<Vec<String>> = m
        .names
        .iter()
        .enumerate()
        .map(|(i, n)| std::iter::once(n.clone()).chain(m.values[i].iter().map(|v| fmt_opt(*v))).collect())
        .collect();
    emit(a.out.as_deref(), &csv_string(&header, &rows)?)
}

fn anova(a: AnovaArgs) -> Result<()> {
    let reports = read_reports(&a.input.reports)?;
    let groups: Vec<Group> = reports
        .iter()
        .map(|r| r.group.with_context(|| format!("report for `{}` has no group", r.user)))
        .collect::<Result<_>>()?;
    let mut columns = metric_columns();
    if !a.metric.is_empty() {
        for m in &a.metric {
            if !columns.iter().any(|(n, _)| n == m) {
                let known: Vec<&str> = columns.iter().map(|(n, _)| n.as_str()).collect();
                return Err(UsageError(format!("unknown metric `{m}`; expected one of {}", known.join(", "))).into());
            }
        }
        columns.retain(|(n, _)| a.metric.contains(n));
    }
    let mut rows = Vec::new();
    for (name, f) in columns {
        let values = if a.raw {
            reports.iter().map(f).collect()
        } else {
            normalize_reports_by_video(&reports, f)?
        };
        let split = |g: Group| -> Vec<f64> {
            values.iter().zip(&groups).filter(|(_, gg)| **gg == g).map(|(v, _)| *v).collect()
        };
        let r = one_way_anova(&[split(Group::Control), split(Group::Feedback)])
            .with_context(|| format!("ANOVA on {name}"))?;
        rows.push(vec![
            name,
            r.f_value.to_string(),
            r.df_between.to_string(),
            r.df_within.to_string(),
            r.p_value.to_string(),
            format!("F({},{}) = {:.3}, p = {:.3}", r.df_between, r.df_within, r.f_value, r.p_value),
        ]);
    }
    let header: Vec<String> = ["metric", "f_value", "df_between", "df_within", "p_value", "report"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    emit(a.out.as_deref(), &csv_string(&header, &rows)?)
}

fn decode(a: DecodeArgs) -> Result<()> {
    let params = DecodeParams {
        metrics: a.metrics.params(),
        fit: LogisticParams {
            separation_bound: a.separation_bound,
            ..LogisticParams::default()
        },
    };
    usage(params.metrics.validate())?;
    let mut sessions = Vec::new();
    let mut pace = None;
    for path in &a.logs {
        let log = load_log(path)?;
        let mut config = engine_config(&a.engine, &log)?;
        config.vote_window_ms = params.metrics.vote_window_ms;
        if pace.is_none() {
            pace = Some(config.pace.resolve()?);
        }
        let out = replay(&log, config)?;
        sessions.push(RecordedSession {
            recordings: out.recordings,
            regions: out.recorded_regions,
        });
    }
    let pace = pace.expect("at least one log is required");
    let questions: Vec<QuestionSpec> = read_json(&a.questions)?;
    let responses: Vec<ResponseRecord> = read_jsonl(&a.responses)?;
    let result = decode_questions(&sessions, &pace, &questions, &responses, &params)?;
    if let Some(path) = &a.table_csv {
        let header: Vec<String> = ["user", "question", "correct"]
            .iter()
            .map(|s| s.to_string())
            .chain(result.table.names.iter().cloned())
            .collect();
        let rows: Vec<Vec<String>> = result
            .table
            .rows
            .iter()
            .map(|r| {
                [r.user.to_string(), r.question.clone(), r.correct.to_string()]
                    .into_iter()
                    .chain(r.features.iter().map(|v| v.to_string()))
                    .collect()
            })
            .collect();
        write(path, &csv_string(&header, &rows)?)?;
    }
    emit(a.out.as_deref(), &(serde_json::to_string_pretty(&result)? + "\n"))
}

fn replay_cmd(a: ReplayArgs) -> Result<()> {
    let log = load_log(&a.log)?;
    let mut config = engine_config(&a.engine, &log)?;
    if let Some(src) = &a.source_log {
        config.feedback_source = FeedbackSource::Replay { log: src.clone() };
    }
    let out = replay(&log, config)?;
    if let Some(path) = &a.rewrite_log {
        write(path, &out.log.to_jsonl())?;
    }
    emit(a.out.as_deref(), &out.regions_jsonl())?;
    if a.verify && !out.regions_match() {
        bail!(
            "replayed regions differ from the log: {} replayed vs {} recorded",
            out.regions.len(),
            out.recorded_regions.len()
        );
    }
    Ok(())
}
