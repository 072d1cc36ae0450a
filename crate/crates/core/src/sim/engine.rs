//! Trial loops. Work is split into fixed-size RNG blocks, run in parallel and
//! reduced in block order, so counts depend only on the seed.

use rayon::prelude::*;
use smallvec::SmallVec;

use super::channel::FadingDraw;
use super::feedback::{corrupt_index, index_from_outages};
use super::schedule::PowerSchedule;
use super::stream::{blocks, StreamSeed};
use crate::config::SystemConfig;

/// Integer tallies from one estimation run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct TrialCounts {
    pub trials: u64,
    pub outages: u64,
    /// Draws with `U(R, P_k) = 1`, per level.
    pub level_outages: Vec<u64>,
    /// Sent index histogram.
    pub sent: Vec<u64>,
    /// Received index histogram per user.
    pub received: Vec<Vec<u64>>,
}

impl TrialCounts {
    fn empty(users: usize, levels: usize) -> Self {
        TrialCounts {
            trials: 0,
            outages: 0,
            level_outages: vec![0; levels],
            sent: vec![0; levels],
            received: vec![vec![0; levels]; users],
        }
    }

    fn merge(mut self, other: &TrialCounts) -> Self {
        self.trials += other.trials;
        self.outages += other.outages;
        add(&mut self.level_outages, &other.level_outages);
        add(&mut self.sent, &other.sent);
        for (a, b) in self.received.iter_mut().zip(&other.received) {
            add(a, b);
        }
        self
    }
}

fn add(a: &mut [u64], b: &[u64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// Outage events over `trials` draws with every user at `power`.
pub(crate) fn count_outages_common(
    cfg: &SystemConfig,
    rates: &[f64],
    power: f64,
    trials: u64,
    stream: StreamSeed,
) -> u64 {
    let per_block: Vec<u64> = blocks(trials)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(block, count)| {
            let mut rng = stream.block_rng(block);
            let mut h = FadingDraw::zeros(cfg.m, cfg.n, cfg.users);
            let mut outages = 0;
            for _ in 0..count {
                h.resample(&mut rng);
                outages += u64::from(h.in_outage_common(rates, power));
            }
            outages
        })
        .collect();
    per_block.iter().sum()
}

/// Full system: index selection, per-user feedback corruption, transmission
/// at the received-index power.
pub(crate) fn run_trials(
    cfg: &SystemConfig,
    rates: &[f64],
    schedule: &PowerSchedule,
    trials: u64,
    stream: StreamSeed,
) -> TrialCounts {
    let levels = schedule.levels.len();
    let per_block: Vec<TrialCounts> = blocks(trials)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(block, count)| {
            let mut rng = stream.block_rng(block);
            let mut h = FadingDraw::zeros(cfg.m, cfg.n, cfg.users);
            let mut tally = TrialCounts::empty(cfg.users, levels);
            let mut flags: SmallVec<[bool; 8]> = SmallVec::from_elem(false, levels);
            let mut received: SmallVec<[usize; 8]> = SmallVec::from_elem(0, cfg.users);
            let mut powers: SmallVec<[f64; 8]> = SmallVec::from_elem(0.0, cfg.users);
            for _ in 0..count {
                h.resample(&mut rng);
                for (k, flag) in flags.iter_mut().enumerate() {
                    *flag = h.in_outage_common(rates, schedule.levels[k]);
                    tally.level_outages[k] += u64::from(*flag);
                }
                let sent = index_from_outages(&flags);
                tally.sent[sent] += 1;
                for (s, slot) in received.iter_mut().enumerate() {
                    *slot = corrupt_index(sent, &schedule.feedback, &mut rng);
                    tally.received[s][*slot] += 1;
                    powers[s] = schedule.levels[*slot];
                }
                // all users on one level: reuse that level's outage flag
                let outage = if received.iter().all(|&i| i == received[0]) {
                    flags[received[0]]
                } else {
                    h.in_outage(rates, &powers)
                };
                tally.outages += u64::from(outage);
            }
            tally.trials = count;
            tally
        })
        .collect();
    per_block
        .iter()
        .fold(TrialCounts::empty(cfg.users, levels), |acc, b| acc.merge(b))
}
