//! Feedback-indexed power levels calibrated against the average power budget.

use serde::{Deserialize, Serialize};

use super::channel::rates_for;
use super::engine::count_outages_common;
use super::feedback::FeedbackChannel;
use super::stream::StreamSeed;
use crate::config::{MultiplexPoint, SystemConfig};
use crate::error::{DmtError, Result};

/// Monte Carlo estimate of `Pi(R, P)` used while building the next level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageEstimate {
    /// 0-based level whose outage probability was measured.
    pub level: usize,
    pub power: f64,
    pub outages: u64,
    pub trials: u64,
    /// Value plugged into the level formula.
    pub probability: f64,
    pub reliable: bool,
}

/// Per-index transmit powers, equal across users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSchedule {
    pub snr: f64,
    pub levels: Vec<f64>,
    /// `ln(P^i) / ln(snr)`.
    pub exponents: Vec<f64>,
    pub feedback: FeedbackChannel,
    pub stages: Vec<StageEstimate>,
    /// Set when some stage saw fewer outage events than the floor.
    pub flagged: bool,
}

impl PowerSchedule {
    /// A hand-specified schedule (no calibration stages).
    pub fn fixed(snr: f64, levels: Vec<f64>, feedback: FeedbackChannel) -> Self {
        assert!(
            levels.windows(2).all(|w| w[0] <= w[1]),
            "power levels must be non-decreasing"
        );
        let exponents = levels.iter().map(|p| p.ln() / snr.ln()).collect();
        PowerSchedule {
            snr,
            levels,
            exponents,
            feedback,
            stages: Vec::new(),
            flagged: false,
        }
    }

    pub fn levels_count(&self) -> usize {
        self.levels.len()
    }
}

/// Level `i > 1` of the calibrated schedule given `Pi(R, P_{i-1})`:
/// `snr / (K (eps/(K-1) + (1 - eps K/(K-1)) Pi))`. Level 1 is `snr / K`.
pub fn next_level(snr: f64, feedback: &FeedbackChannel, previous_outage: f64) -> f64 {
    let k = feedback.levels as f64;
    snr / (k * feedback.received_marginal(previous_outage))
}

/// Builds the schedule level by level. Each stage estimates `Pi(R, P_{i-1})`
/// with all users at level `i - 1`, reusing the same fading draws across
/// stages so the estimates are pathwise monotone in power.
///
/// A stage with fewer than `outage_floor` outage events flags the schedule;
/// a stage with none plugs in the rule-of-three bound `3 / trials`.
pub fn calibrate_schedule(
    cfg: &SystemConfig,
    r: &MultiplexPoint,
    snr: f64,
    trials: u64,
    outage_floor: u64,
    stream: StreamSeed,
) -> Result<PowerSchedule> {
    cfg.ensure_feasible(r)?;
    if !snr.is_finite() || snr <= 0.0 {
        return Err(DmtError::InvalidConfig(format!(
            "SNR must be positive, got {snr}"
        )));
    }
    let k = cfg.levels;
    let feedback = FeedbackChannel::at_snr(k, cfg.y, snr);
    let rates = rates_for(r.gains(), snr);

    let mut levels = vec![snr / k as f64];
    let mut stages = Vec::with_capacity(k - 1);
    let mut flagged = false;
    for level in 0..k - 1 {
        let power = levels[level];
        let outages = count_outages_common(cfg, &rates, power, trials, stream);
        let reliable = outages >= outage_floor && trials > 0;
        let probability = match (trials, outages) {
            (0, _) => 1.0,
            (t, 0) => (3.0 / t as f64).min(1.0),
            (t, c) => c as f64 / t as f64,
        };
        if !reliable {
            flagged = true;
            log::warn!(
                "calibration stage {} at snr {snr:.3}: {outages} outage events in {trials} trials",
                level + 1
            );
        }
        stages.push(StageEstimate {
            level,
            power,
            outages,
            trials,
            probability,
            reliable,
        });
        let next = next_level(snr, &feedback, probability).max(power);
        levels.push(next);
    }
    let exponents = levels.iter().map(|p| p.ln() / snr.ln()).collect();
    Ok(PowerSchedule {
        snr,
        levels,
        exponents,
        feedback,
        stages,
        flagged,
    })
}
