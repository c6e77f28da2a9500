//! The statistical layer: accuracy scoring, ANOVA, correlation and logistic decoding.

mod accuracy;
mod decode;
mod logistic;
pub mod special;
mod stats;

pub use accuracy::{score_accuracy, score_user, Accuracy, Difficulty, QuestionSpec, ResponseRecord};
pub use decode::{
    decode_questions, DecodeParams, DecodeResult, FeatureRow, FeatureTable, FitOutcome, RecordedSession,
    FEATURE_NAMES,
};
pub use logistic::{logistic_fit, LogisticParams, RegressionResult, Separation};
pub use stats::{corr_matrix, one_way_anova, pearson, AnovaResult, CorrMatrix};

pub use crate::metrics::UserRecording;
