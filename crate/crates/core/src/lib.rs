//! Diversity-multiplexing tradeoff of MIMO multiple-access channels with
//! quantized, noisy feedback.
//!
//! [`analytic`] evaluates the achievable exponents exactly; [`sim`] runs the
//! block-fading channel with feedback-indexed power control and measures
//! outage against SNR.

pub mod analytic;
pub mod config;
pub mod error;
pub mod sim;

pub use config::{FeedbackExponent, MultiplexPoint, SystemConfig};
pub use error::{DmtError, Result};
