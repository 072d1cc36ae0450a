//! Closed forms for a single-antenna, single-user link, where `|h|^2` is a
//! unit-mean exponential variable.

use super::feedback::FeedbackChannel;
use super::outage::decomposition_bound;
use super::schedule::next_level;
use crate::config::FeedbackExponent;

/// `Pi(R, P) = 1 - exp(-(2^R - 1) / P)` with `R` in bits.
pub fn siso_outage(rate_bits: f64, power: f64) -> f64 {
    -(-(rate_bits.exp2() - 1.0) / power).exp_m1()
}

/// Exact outage of the calibrated feedback system on a scalar link: the power
/// levels are built from closed-form `Pi(R, P_i)` and combined through the
/// single-user decomposition `(1-eps) Pi_K + eps/(K-1) sum_{i<K} Pi_i`.
pub fn siso_reference_outage(levels: usize, y: FeedbackExponent, r: f64, snr: f64) -> f64 {
    let feedback = FeedbackChannel::at_snr(levels, y, snr);
    let rate = r * snr.log2();
    let mut power = snr / levels as f64;
    let mut probabilities = Vec::with_capacity(levels);
    for _ in 0..levels {
        let p = siso_outage(rate, power);
        probabilities.push(p);
        power = next_level(snr, &feedback, p);
    }
    decomposition_bound(1, feedback.epsilon, &probabilities)
}
