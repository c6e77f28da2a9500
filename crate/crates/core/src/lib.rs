//! Real-time peer-attention engine for online lectures.
//!
//! Slides are segmented into areas of interest, gaze streams become fixations,
//! control-group fixations are voted into a per-window peer region that is shown
//! to feedback-group students, and the recorded sessions feed engagement metrics
//! and statistical decoding.

mod error;

pub mod analytics;
pub mod attention;
pub mod geometry;
pub mod imaging;
pub mod metrics;
pub mod oculomotor;
pub mod session;
pub mod simulator;

pub use error::{Error, Result};
pub use oculomotor::UserId;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/aoi-detection.md")]
    pub mod aoi_detection {}
    #[doc = include_str!("../../../book/src/fixations.md")]
    pub mod fixations {}
    #[doc = include_str!("../../../book/src/attention.md")]
    pub mod attention {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    pub mod metrics {}
    #[doc = include_str!("../../../book/src/analytics.md")]
    pub mod analytics {}
    #[doc = include_str!("../../../book/src/session-protocol.md")]
    pub mod session_protocol {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    pub mod simulator {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
