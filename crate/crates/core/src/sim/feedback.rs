//! Quantized feedback: index selection at the receiver and the symmetric
//! index-error channel back to each user.
//!
//! Level indices are 0-based here; index `k` is the `(k+1)`-th power level.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::channel::FadingDraw;
use super::schedule::PowerSchedule;
use crate::config::FeedbackExponent;

/// Feedback link at one SNR: the correct index arrives with probability
/// `1 - epsilon`, each wrong index with probability `epsilon / (K - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackChannel {
    pub levels: usize,
    pub epsilon: f64,
    pub y: FeedbackExponent,
    /// `SNR^-y` exceeded `(K-1)/K` and was clamped.
    pub clamped: bool,
}

impl FeedbackChannel {
    /// `epsilon = min(snr^-y, (K-1)/K)`; zero for perfect feedback or `K = 1`.
    pub fn at_snr(levels: usize, y: FeedbackExponent, snr: f64) -> Self {
        let cap = (levels.saturating_sub(1)) as f64 / levels.max(1) as f64;
        let raw = match y {
            _ if levels <= 1 => 0.0,
            FeedbackExponent::Perfect => 0.0,
            FeedbackExponent::Finite(y) => snr.powf(-y),
        };
        let clamped = raw > cap;
        if clamped {
            log::warn!(
                "feedback error probability {raw:.3e} clamped to {cap:.3e} (K={levels}, y={y})"
            );
        }
        FeedbackChannel {
            levels,
            epsilon: raw.min(cap),
            y,
            clamped,
        }
    }

    pub fn new(levels: usize, epsilon: f64) -> Self {
        let cap = (levels.saturating_sub(1)) as f64 / levels.max(1) as f64;
        assert!(
            (0.0..=cap).contains(&epsilon),
            "epsilon {epsilon} outside [0, {cap}]"
        );
        FeedbackChannel {
            levels,
            epsilon,
            y: FeedbackExponent::Perfect,
            clamped: false,
        }
    }

    /// Marginal of a received index given the sent-index marginal:
    /// `epsilon/(K-1) + (1 - epsilon K/(K-1)) sent`.
    pub fn received_marginal(&self, sent: f64) -> f64 {
        if self.levels <= 1 {
            return sent;
        }
        let k = self.levels as f64;
        self.epsilon / (k - 1.0) + (1.0 - self.epsilon * k / (k - 1.0)) * sent
    }
}

/// Passes `index` through the feedback link.
pub fn corrupt_index<R: Rng + ?Sized>(index: usize, fb: &FeedbackChannel, rng: &mut R) -> usize {
    debug_assert!(index < fb.levels);
    if fb.levels <= 1 || fb.epsilon == 0.0 {
        return index;
    }
    if rng.random::<f64>() >= fb.epsilon {
        return index;
    }
    let other = rng.random_range(0..fb.levels - 1);
    if other >= index {
        other + 1
    } else {
        other
    }
}

/// Index rule from per-level outage flags `U(R, P_k)`: the lowest level if the
/// top level is in outage, otherwise the lowest outage-free level.
pub fn index_from_outages(outage_at_level: &[bool]) -> usize {
    match outage_at_level.last() {
        None | Some(true) => 0,
        Some(false) => outage_at_level.iter().position(|&u| !u).unwrap_or(0),
    }
}

/// Receiver's feedback index for one draw, scanning levels `1..=K`.
pub fn feedback_index(h: &FadingDraw, rates: &[f64], schedule: &PowerSchedule) -> usize {
    let flags: Vec<bool> = schedule
        .levels
        .iter()
        .map(|&p| h.in_outage_common(rates, p))
        .collect();
    index_from_outages(&flags)
}
