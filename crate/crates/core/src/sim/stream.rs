//! Seed-derived ChaCha streams.
//!
//! Every trial block gets its own ChaCha8 stream keyed by `(seed, domain)` with
//! the block number as the stream id, so results do not depend on how blocks
//! are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Trials per RNG block. Part of the reproducibility contract: changing it
/// changes every simulated number.
pub const BLOCK_TRIALS: u64 = 1 << 16;

const CALIBRATION_TAG: u64 = 0xC0;
const ESTIMATION_TAG: u64 = 0xE5;
const AUDIT_TAG: u64 = 0xA7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamSeed {
    pub seed: u64,
    pub domain: u64,
}

impl StreamSeed {
    pub fn new(seed: u64, domain: u64) -> Self {
        StreamSeed { seed, domain }
    }

    pub fn calibration(seed: u64, point: u64) -> Self {
        Self::new(seed, CALIBRATION_TAG << 32 | point)
    }

    pub fn estimation(seed: u64, point: u64) -> Self {
        Self::new(seed, ESTIMATION_TAG << 32 | point)
    }

    pub fn audit(seed: u64, point: u64) -> Self {
        Self::new(seed, AUDIT_TAG << 32 | point)
    }

    pub fn block_rng(&self, block: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.seed ^ splitmix64(self.domain)));
        rng.set_stream(block);
        rng
    }
}

pub(crate) fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `(block, trials in block)` covering `trials` trials.
pub(crate) fn blocks(trials: u64) -> impl Iterator<Item = (u64, u64)> {
    let count = trials.div_ceil(BLOCK_TRIALS);
    (0..count).map(move |b| (b, BLOCK_TRIALS.min(trials - b * BLOCK_TRIALS)))
}
