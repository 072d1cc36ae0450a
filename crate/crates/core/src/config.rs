use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{DmtError, Result};

/// Largest supported user count; every operation enumerates all `2^L - 1` user subsets.
pub const MAX_USERS: usize = 20;

/// Tolerance for branch and breakpoint comparisons on exponents.
pub const EXPONENT_TOL: f64 = 1e-9;

/// Decay exponent `y` of the feedback error probability, `eps ~ SNR^-y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackExponent {
    Finite(f64),
    /// Error-free feedback (`y = +inf`).
    Perfect,
}

impl FeedbackExponent {
    /// `min(y, x)`, exact for perfect feedback.
    pub fn min_with(self, x: f64) -> f64 {
        match self {
            FeedbackExponent::Finite(y) => y.min(x),
            FeedbackExponent::Perfect => x,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            FeedbackExponent::Finite(y) => y,
            FeedbackExponent::Perfect => f64::INFINITY,
        }
    }

    pub fn is_perfect(self) -> bool {
        matches!(self, FeedbackExponent::Perfect)
    }
}

impl fmt::Display for FeedbackExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeedbackExponent::Finite(y) => write!(f, "{y}"),
            FeedbackExponent::Perfect => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for FeedbackExponent {
    type Err = DmtError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(
            s.to_ascii_lowercase().as_str(),
            "inf" | "+inf" | "infinity" | "perfect"
        ) {
            return Ok(FeedbackExponent::Perfect);
        }
        let y: f64 = s.parse().map_err(|_| {
            DmtError::InvalidConfig(format!("cannot parse feedback exponent {s:?}"))
        })?;
        if y.is_infinite() && y > 0.0 {
            return Ok(FeedbackExponent::Perfect);
        }
        if y.is_nan() || y < 0.0 {
            return Err(DmtError::InvalidConfig(format!(
                "feedback exponent must be >= 0, got {s}"
            )));
        }
        Ok(FeedbackExponent::Finite(y))
    }
}

/// Antenna counts, user count, feedback cardinality and feedback error exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Transmit antennas per user.
    pub m: usize,
    /// Receive antennas at the base station.
    pub n: usize,
    pub users: usize,
    /// Number of feedback indices `K`; `K = 1` means no feedback.
    pub levels: usize,
    pub y: FeedbackExponent,
}

impl SystemConfig {
    pub fn new(
        m: usize,
        n: usize,
        users: usize,
        levels: usize,
        y: FeedbackExponent,
    ) -> Result<Self> {
        let cfg = SystemConfig {
            m,
            n,
            users,
            levels,
            y,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(DmtError::InvalidConfig(format!(
                "antenna counts must be positive (m={}, n={})",
                self.m, self.n
            )));
        }
        if self.users == 0 || self.users > MAX_USERS {
            return Err(DmtError::InvalidConfig(format!(
                "user count must be in 1..={MAX_USERS}, got {}",
                self.users
            )));
        }
        if self.levels == 0 {
            return Err(DmtError::InvalidConfig("K must be at least 1".into()));
        }
        if let FeedbackExponent::Finite(y) = self.y {
            if !y.is_finite() || y < 0.0 {
                return Err(DmtError::InvalidConfig(format!(
                    "feedback exponent must be finite and >= 0, got {y}"
                )));
            }
        }
        Ok(())
    }

    /// `m * n`, the no-feedback diversity at zero multiplexing gain.
    pub fn mn(&self) -> usize {
        self.m * self.n
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = levels;
        self
    }

    pub fn with_y(mut self, y: FeedbackExponent) -> Self {
        self.y = y;
        self
    }

    /// Sum-rate limit `min(|S| m, n)` for a subset with `size` users.
    pub fn subset_limit(&self, size: usize) -> f64 {
        (size * self.m).min(self.n) as f64
    }

    /// Checks `sum_{i in S} r_i < min(|S| m, n)` for every non-empty subset.
    pub fn ensure_feasible(&self, r: &MultiplexPoint) -> Result<()> {
        self.validate()?;
        if r.len() != self.users {
            return Err(DmtError::DimensionMismatch {
                expected: self.users,
                got: r.len(),
            });
        }
        for mask in subsets(self.users) {
            let sum = r.subset_sum(mask);
            let limit = self.subset_limit(mask.count_ones() as usize);
            if sum >= limit {
                return Err(DmtError::Infeasible {
                    users: members(mask),
                    sum,
                    limit,
                });
            }
        }
        Ok(())
    }
}

/// Per-user multiplexing gains `r_s` in `R_s = r_s log SNR`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiplexPoint(Vec<f64>);

impl MultiplexPoint {
    pub fn new(gains: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = gains.iter().find(|g| !g.is_finite() || **g < 0.0) {
            return Err(DmtError::InvalidGain(bad));
        }
        Ok(MultiplexPoint(gains))
    }

    pub fn zeros(users: usize) -> Self {
        MultiplexPoint(vec![0.0; users])
    }

    /// Same gain for every user.
    pub fn uniform(users: usize, r: f64) -> Result<Self> {
        Self::new(vec![r; users])
    }

    pub fn gains(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn subset_sum(&self, mask: u32) -> f64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, r)| r)
            .sum()
    }

    pub(crate) fn with_coordinate(&self, index: usize, value: f64) -> Self {
        let mut gains = self.0.clone();
        gains[index] = value;
        MultiplexPoint(gains)
    }
}

/// Bitmasks of all non-empty subsets of `users` users.
pub fn subsets(users: usize) -> impl Iterator<Item = u32> {
    1..(1u32 << users)
}

/// 1-based user labels in a subset mask.
pub fn members(mask: u32) -> Vec<usize> {
    (0..32)
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| i + 1)
        .collect()
}
