//! Outage estimation, power-budget audit and SNR sweeps.

use serde::{Deserialize, Serialize};

use super::channel::rates_for;
use super::engine::run_trials;
use super::schedule::{calibrate_schedule, PowerSchedule};
use super::slope::{fit_diversity_slope, SlopeFit, MIN_SLOPE_POINTS};
use super::stream::StreamSeed;
use crate::config::{MultiplexPoint, SystemConfig};
use crate::error::{DmtError, Result};

/// Minimum outage events for an estimate to count as reliable.
pub const DEFAULT_OUTAGE_FLOOR: u64 = 50;

const Z95: f64 = 1.959_963_984_540_054;

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub snr_db: f64,
    pub snr: f64,
    pub trials: u64,
    pub outages: u64,
    pub probability: f64,
    /// Binomial standard error `sqrt(p(1-p)/N)`.
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub reliable: bool,
    pub epsilon: f64,
    /// `Pi(R, P_k)` per level, from the same draws.
    pub level_probabilities: Vec<f64>,
    /// `(1 - L eps) Pi(R, P_K) + (L eps / (K-1)) sum_{i<K} Pi(R, P_i)`;
    /// an equality in expectation when `L = 1`.
    pub decomposition_bound: f64,
    pub sent_index_probabilities: Vec<f64>,
}

/// Decomposition of the outage probability into per-level terms.
pub fn decomposition_bound(users: usize, epsilon: f64, level_probabilities: &[f64]) -> f64 {
    let k = level_probabilities.len();
    let top = level_probabilities[k - 1];
    if k == 1 {
        return top;
    }
    let spread = users as f64 * epsilon;
    let lower: f64 = level_probabilities[..k - 1].iter().sum();
    (1.0 - spread) * top + spread / (k - 1) as f64 * lower
}

fn check_schedule(cfg: &SystemConfig, schedule: &PowerSchedule) -> Result<()> {
    if schedule.levels.len() != cfg.levels {
        return Err(DmtError::InvalidConfig(format!(
            "schedule has {} levels, configuration has K = {}",
            schedule.levels.len(),
            cfg.levels
        )));
    }
    Ok(())
}

/// Runs the full feedback system on `trials` independent blocks.
pub fn estimate_outage(
    cfg: &SystemConfig,
    r: &MultiplexPoint,
    schedule: &PowerSchedule,
    trials: u64,
    outage_floor: u64,
    stream: StreamSeed,
) -> Result<OutageEstimate> {
    cfg.ensure_feasible(r)?;
    check_schedule(cfg, schedule)?;
    let rates = rates_for(r.gains(), schedule.snr);
    let counts = run_trials(cfg, &rates, schedule, trials, stream);

    let n = counts.trials.max(1) as f64;
    let probability = counts.outages as f64 / n;
    let level_probabilities: Vec<f64> =
        counts.level_outages.iter().map(|&c| c as f64 / n).collect();
    let (ci_low, ci_high) = wilson_interval(counts.outages, counts.trials);
    let epsilon = schedule.feedback.epsilon;
    Ok(OutageEstimate {
        snr_db: 10.0 * schedule.snr.log10(),
        snr: schedule.snr,
        trials: counts.trials,
        outages: counts.outages,
        probability,
        std_error: (probability * (1.0 - probability) / n).sqrt(),
        ci_low,
        ci_high,
        reliable: counts.trials > 0 && counts.outages >= outage_floor && !schedule.flagged,
        epsilon,
        decomposition_bound: decomposition_bound(cfg.users, epsilon, &level_probabilities),
        level_probabilities,
        sent_index_probabilities: counts.sent.iter().map(|&c| c as f64 / n).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMarginal {
    /// 0-based level.
    pub level: usize,
    /// Empirical `Pi(I = i)`.
    pub sent_empirical: f64,
    /// `Pi(I = i)` from the per-level outage frequencies.
    pub sent_from_outages: f64,
    /// Empirical `Pi(Ibar_s = i)`.
    pub received_empirical: f64,
    /// `eps/(K-1) + (1 - eps K/(K-1)) Pi(I = i)`.
    pub received_predicted: f64,
    pub sigma: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserPowerAudit {
    /// 1-based user label.
    pub user: usize,
    /// Empirical `E[P^{Ibar_s}]`.
    pub mean_power: f64,
    pub std_error: f64,
    /// `snr - mean_power`; negative means over budget.
    pub margin: f64,
    /// `mean_power <= snr + 3 std_error`.
    pub within_budget: bool,
    pub marginals: Vec<LevelMarginal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAudit {
    pub snr: f64,
    pub trials: u64,
    pub users: Vec<UserPowerAudit>,
    pub passed: bool,
}

/// Checks the average power budget and the received-index marginal against
/// fresh draws of the full system.
pub fn verify_power_constraint(
    cfg: &SystemConfig,
    r: &MultiplexPoint,
    schedule: &PowerSchedule,
    trials: u64,
    stream: StreamSeed,
) -> Result<PowerAudit> {
    cfg.ensure_feasible(r)?;
    check_schedule(cfg, schedule)?;
    if trials == 0 {
        return Err(DmtError::InvalidConfig(
            "power audit needs at least one trial".into(),
        ));
    }
    let rates = rates_for(r.gains(), schedule.snr);
    let counts = run_trials(cfg, &rates, schedule, trials, stream);
    let n = counts.trials as f64;
    let k = cfg.levels;
    let lp: Vec<f64> = counts.level_outages.iter().map(|&c| c as f64 / n).collect();
    let sent_from_outages: Vec<f64> = (0..k)
        .map(|i| {
            if i == 0 {
                1.0 + lp[k - 1] - lp[0]
            } else {
                lp[i - 1] - lp[i]
            }
        })
        .collect();

    let users: Vec<UserPowerAudit> = counts
        .received
        .iter()
        .enumerate()
        .map(|(s, received)| {
            let mean_power: f64 = received
                .iter()
                .zip(&schedule.levels)
                .map(|(&c, p)| c as f64 * p)
                .sum::<f64>()
                / n;
            let second: f64 = received
                .iter()
                .zip(&schedule.levels)
                .map(|(&c, p)| c as f64 * p * p)
                .sum::<f64>()
                / n;
            let std_error = ((second - mean_power * mean_power).max(0.0) / n).sqrt();
            let marginals = (0..k)
                .map(|i| {
                    let sent = counts.sent[i] as f64 / n;
                    let predicted = schedule.feedback.received_marginal(sent);
                    let empirical = received[i] as f64 / n;
                    let sigma = (predicted * (1.0 - predicted) / n).sqrt();
                    LevelMarginal {
                        level: i,
                        sent_empirical: sent,
                        sent_from_outages: sent_from_outages[i],
                        received_empirical: empirical,
                        received_predicted: predicted,
                        sigma,
                        within: (empirical - predicted).abs() <= 3.0 * sigma + 1e-12,
                    }
                })
                .collect::<Vec<_>>();
            UserPowerAudit {
                user: s + 1,
                mean_power,
                std_error,
                margin: schedule.snr - mean_power,
                within_budget: mean_power <= schedule.snr + 3.0 * std_error,
                marginals,
            }
        })
        .collect();
    let passed = users
        .iter()
        .all(|u| u.within_budget && u.marginals.iter().all(|m| m.within));
    if !passed {
        log::warn!("power audit failed at snr {:.3}", schedule.snr);
    }
    Ok(PowerAudit {
        snr: schedule.snr,
        trials: counts.trials,
        users,
        passed,
    })
}

/// Trial budgets and seed for an SNR sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    pub trials: u64,
    pub calibration_trials: u64,
    pub seed: u64,
    pub outage_floor: u64,
}

impl SimSettings {
    pub fn new(trials: u64, calibration_trials: u64, seed: u64) -> Self {
        SimSettings {
            trials,
            calibration_trials,
            seed,
            outage_floor: DEFAULT_OUTAGE_FLOOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageRun {
    pub config: SystemConfig,
    pub r: Vec<f64>,
    pub snr_grid_db: Vec<f64>,
    pub settings: SimSettings,
    pub schedules: Vec<PowerSchedule>,
    pub estimates: Vec<OutageEstimate>,
    pub slope: Option<SlopeFit>,
    pub slope_error: Option<String>,
}

impl OutageRun {
    /// Any unreliable point or schedule, or no slope on a grid long enough to fit one.
    pub fn flagged(&self) -> bool {
        self.estimates.iter().any(|e| !e.reliable)
            || self.schedules.iter().any(|s| s.flagged)
            || (self.slope.is_none() && self.estimates.len() >= MIN_SLOPE_POINTS)
    }

    /// Slope over the reliable estimates only.
    pub fn fit_slope(&self) -> Result<SlopeFit> {
        let points: Vec<(f64, f64)> = self
            .estimates
            .iter()
            .filter(|e| e.reliable)
            .map(|e| (e.snr, e.probability))
            .collect();
        fit_diversity_slope(&points)
    }
}

/// Calibrates and estimates at every SNR point, then fits the slope. Point
/// `j` draws calibration and estimation randomness from separate streams.
pub fn run_outage(
    cfg: &SystemConfig,
    r: &MultiplexPoint,
    snr_grid_db: &[f64],
    settings: &SimSettings,
) -> Result<OutageRun> {
    cfg.ensure_feasible(r)?;
    if snr_grid_db.iter().any(|s| !s.is_finite()) {
        return Err(DmtError::InvalidConfig("SNR grid must be finite".into()));
    }
    let mut schedules = Vec::with_capacity(snr_grid_db.len());
    let mut estimates = Vec::with_capacity(snr_grid_db.len());
    for (j, &db) in snr_grid_db.iter().enumerate() {
        let snr = 10f64.powf(db / 10.0);
        let schedule = calibrate_schedule(
            cfg,
            r,
            snr,
            settings.calibration_trials,
            settings.outage_floor,
            StreamSeed::calibration(settings.seed, j as u64),
        )?;
        let mut estimate = estimate_outage(
            cfg,
            r,
            &schedule,
            settings.trials,
            settings.outage_floor,
            StreamSeed::estimation(settings.seed, j as u64),
        )?;
        estimate.snr_db = db;
        log::info!(
            "snr {db} dB: {} / {} outages (p = {:.3e})",
            estimate.outages,
            estimate.trials,
            estimate.probability
        );
        schedules.push(schedule);
        estimates.push(estimate);
    }
    let mut run = OutageRun {
        config: *cfg,
        r: r.gains().to_vec(),
        snr_grid_db: snr_grid_db.to_vec(),
        settings: *settings,
        schedules,
        estimates,
        slope: None,
        slope_error: None,
    };
    match run.fit_slope() {
        Ok(fit) => run.slope = Some(fit),
        Err(e) => run.slope_error = Some(e.to_string()),
    }
    Ok(run)
}
