use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use peergaze::imaging::AoiParams;
use peergaze::metrics::MetricsParams;
use peergaze::oculomotor::{FixationParams, ThresholdRule};

#[derive(Parser, Debug)]
#[command(name = "peergaze", version, about = "Peer-attention pipeline for online lectures")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Slide area-of-interest tools
    #[command(subcommand)]
    Aoi(AoiCommand),
    /// Detect fixations in recorded gaze
    Fixations(FixationsArgs),
    /// Run the live session server (NDJSON and WebSocket on one port)
    Serve(ServeArgs),
    /// Generate synthetic students
    Simulate(SimulateArgs),
    /// Per-user engagement metrics from a session log
    Metrics(MetricsArgs),
    /// Statistics over metric reports
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Re-run a session log through the engine
    Replay(ReplayArgs),
}

#[derive(Subcommand, Debug)]
pub enum AoiCommand {
    /// Detect AoIs on a slide image (PGM or PNG)
    Detect(AoiDetectArgs),
}

#[derive(Args, Debug)]
pub struct AoiDetectArgs {
    #[arg(long)]
    pub slide: PathBuf,
    /// Output JSON; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub params: AoiFlags,
}

#[derive(Args, Debug, Clone)]
pub struct AoiFlags {
    /// Smallest accepted hull area as a fraction of the slide
    #[arg(long, default_value_t = 0.01)]
    pub area_min: f64,
    /// Largest accepted hull area as a fraction of the slide
    #[arg(long, default_value_t = 0.15)]
    pub area_max: f64,
    /// First dilation element side, px
    #[arg(long, default_value_t = 20)]
    pub elem_start: usize,
    /// Last dilation element side, px
    #[arg(long, default_value_t = 5)]
    pub elem_end: usize,
    /// Decrement between passes, px
    #[arg(long, default_value_t = 5)]
    pub elem_step: usize,
    /// Working width slides are resized to
    #[arg(long, default_value_t = 960)]
    pub width: usize,
    /// Working height slides are resized to
    #[arg(long, default_value_t = 540)]
    pub height: usize,
}

impl AoiFlags {
    pub fn params(&self) -> AoiParams {
        AoiParams {
            area_min_frac: self.area_min,
            area_max_frac: self.area_max,
            elem_start: self.elem_start,
            elem_end: self.elem_end,
            elem_step: self.elem_step,
            target_width: self.width,
            target_height: self.height,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum RuleArg {
    /// λ times the median-based variance
    Variance,
    /// λ times its square root
    StdDev,
}

#[derive(Args, Debug, Clone)]
pub struct FixationFlags {
    /// Saccade threshold multiplier
    #[arg(long, default_value_t = 6.0)]
    pub lambda: f64,
    /// Minimum fixation duration, ms
    #[arg(long, default_value_t = 200)]
    pub min_dur: i64,
    /// Longest inter-sample gap inside one run, ms
    #[arg(long, default_value_t = 100)]
    pub max_gap: i64,
    /// Threshold form
    #[arg(long, value_enum, default_value_t = RuleArg::Variance)]
    pub rule: RuleArg,
}

impl FixationFlags {
    pub fn params(&self) -> FixationParams {
        FixationParams {
            lambda: self.lambda,
            min_duration_ms: self.min_dur,
            max_gap_ms: self.max_gap,
            rule: match self.rule {
                RuleArg::Variance => ThresholdRule::Variance,
                RuleArg::StdDev => ThresholdRule::StdDev,
            },
        }
    }
}

#[derive(Args, Debug)]
pub struct FixationsArgs {
    /// Gaze samples as JSONL, or a session log
    #[arg(long)]
    pub gaze: PathBuf,
    /// Output JSONL; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub fixation: FixationFlags,
    /// Detect in consecutive windows instead of one batch
    #[arg(long)]
    pub windowed: bool,
    /// Window length for --windowed, ms
    #[arg(long, default_value_t = 2000, requires = "windowed")]
    pub window: i64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    /// Vote regions from this session's control users
    Live,
    /// Replay regions recorded in --replay-log
    Replay,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    /// Session config JSON; repeat for several sessions
    #[arg(long = "config", required = true)]
    pub configs: Vec<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 7070)]
    pub port: u16,
    /// Directory for session logs
    #[arg(long, env = "PEERGAZE_LOG_DIR", default_value = "logs")]
    pub log_dir: PathBuf,
    /// Overrides every config's feedback source
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Recorded log used by --mode replay
    #[arg(long, required_if_eq("mode", "replay"))]
    pub replay_log: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum ProfileArg {
    Follower,
    Wanderer,
    Reflective,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum GroupArg {
    Control,
    Feedback,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Profile of every student; overridden by --mix
    #[arg(long, value_enum, default_value_t = ProfileArg::Follower)]
    pub profile: ProfileArg,
    /// Profiles assigned round-robin over a cohort, e.g. follower,wanderer
    #[arg(long, value_enum, value_delimiter = ',')]
    pub mix: Vec<ProfileArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Stream length, ms
    #[arg(long, default_value_t = 300_000)]
    pub duration: i64,
    /// Control students; with --feedback writes a cohort to --out-dir
    #[arg(long, requires_all = ["feedback", "out_dir"])]
    pub control: Option<usize>,
    /// Feedback students
    #[arg(long, requires_all = ["control", "out_dir"])]
    pub feedback: Option<usize>,
    /// AoI JSON; built-in demo slide when omitted
    #[arg(long)]
    pub aois: Option<PathBuf>,
    /// Pace JSON; built-in demo pace when omitted
    #[arg(long)]
    pub pace: Option<PathBuf>,
    /// Per-dwell landing error, px
    #[arg(long, default_value_t = 8.0)]
    pub jitter: f64,
    /// Per-sample noise, px
    #[arg(long, default_value_t = 0.0)]
    pub tremor: f64,
    /// Gaze sample rate, Hz
    #[arg(long, default_value_t = 30.0)]
    pub rate: f64,
    /// Face-loss episodes per minute
    #[arg(long, default_value_t = 0.0)]
    pub inattention_rate: f64,
    /// Confusion clicks per minute
    #[arg(long, default_value_t = 0.0)]
    pub confusion_rate: f64,
    /// Reflective lag after each pace change, ms
    #[arg(long, default_value_t = 4000)]
    pub dwell_lag: i64,
    /// Wanderer chance of a blank target
    #[arg(long, default_value_t = 0.5)]
    pub blank_prob: f64,
    /// Vote window of the ground-truth table and driven session, ms
    #[arg(long, default_value_t = 5000)]
    pub vote_window: i64,
    /// Session id in join messages
    #[arg(long, default_value = "s1")]
    pub session: String,
    /// User id of a single student
    #[arg(long, default_value = "u0", conflicts_with = "control")]
    pub user: String,
    /// Group of a single student
    #[arg(long, value_enum, default_value_t = GroupArg::Control, conflicts_with = "control")]
    pub group: GroupArg,
    /// Single-student wire JSONL output; standard output when omitted
    #[arg(long, conflicts_with = "out_dir")]
    pub out: Option<PathBuf>,
    /// Cohort output directory
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct MetricFlags {
    /// Distance from a hull still counted as valid focus, px
    #[arg(long, default_value_t = 10.0)]
    pub eps: f64,
    /// Duration credited to each confusion click, ms
    #[arg(long, default_value_t = 5000)]
    pub click_window: i64,
    /// Peer-region vote window, ms
    #[arg(long, default_value_t = 5000)]
    pub vote_window: i64,
}

impl MetricFlags {
    pub fn params(&self) -> MetricsParams {
        MetricsParams {
            eps_px: self.eps,
            click_window_ms: self.click_window,
            vote_window_ms: self.vote_window,
        }
    }
}

/// How to rebuild the engine a log was recorded with.
#[derive(Args, Debug, Clone)]
pub struct EngineFlags {
    /// Session config JSON; --aois and --pace are used when omitted
    #[arg(long, conflicts_with_all = ["aois", "pace"])]
    pub config: Option<PathBuf>,
    /// AoI JSON; demo slide when neither this nor --config is given
    #[arg(long)]
    pub aois: Option<PathBuf>,
    /// Pace JSON; demo pace when neither this nor --config is given
    #[arg(long)]
    pub pace: Option<PathBuf>,
    #[command(flatten)]
    pub fixation: FixationFlags,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Session log JSONL
    #[arg(long)]
    pub log: PathBuf,
    #[command(flatten)]
    pub engine: EngineFlags,
    #[command(flatten)]
    pub metrics: MetricFlags,
    /// Video label stored in each report for per-video normalization
    #[arg(long)]
    pub video: Option<String>,
    /// Report JSONL; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-window crowd consistency CSV
    #[arg(long)]
    pub crowd_csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum AnalyzeCommand {
    /// Pearson matrix of metric columns as CSV
    Corr(CorrArgs),
    /// One-way ANOVA of each metric between groups as CSV
    Anova(AnovaArgs),
    /// Logistic decoding of question correctness
    Decode(DecodeArgs),
}

#[derive(Args, Debug)]
pub struct ReportInput {
    /// Metric report JSONL; repeatable
    #[arg(long = "reports", required = true)]
    pub reports: Vec<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CorrArgs {
    #[command(flatten)]
    pub input: ReportInput,
    /// Adds accuracy columns; needs --responses
    #[arg(long, requires = "responses")]
    pub questions: Option<PathBuf>,
    #[arg(long, requires = "questions")]
    pub responses: Option<PathBuf>,
    /// z-score each column within its video first
    #[arg(long)]
    pub normalize: bool,
    /// CSV output; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnovaArgs {
    #[command(flatten)]
    pub input: ReportInput,
    /// Metric to compare; all metrics when omitted
    #[arg(long)]
    pub metric: Vec<String>,
    /// Skip the per-video z-scoring
    #[arg(long)]
    pub raw: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    /// Session log JSONL; repeatable
    #[arg(long = "log", required = true)]
    pub logs: Vec<PathBuf>,
    #[command(flatten)]
    pub engine: EngineFlags,
    #[command(flatten)]
    pub metrics: MetricFlags,
    /// Question JSON
    #[arg(long)]
    pub questions: PathBuf,
    /// Response JSONL
    #[arg(long)]
    pub responses: PathBuf,
    /// Separation bound on |β|
    #[arg(long, default_value_t = 30.0)]
    pub separation_bound: f64,
    /// Result JSON; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Feature table CSV
    #[arg(long)]
    pub table_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    /// Session log JSONL
    #[arg(long)]
    pub log: PathBuf,
    #[command(flatten)]
    pub engine: EngineFlags,
    /// Serve regions from this recorded log instead of voting
    #[arg(long)]
    pub source_log: Option<PathBuf>,
    /// Region JSONL; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Writes the regenerated log
    #[arg(long)]
    pub rewrite_log: Option<PathBuf>,
    /// Exit 1 unless regenerated regions equal the recorded ones
    #[arg(long)]
    pub verify: bool,
}
