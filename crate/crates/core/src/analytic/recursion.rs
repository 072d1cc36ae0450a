//! Power-exponent recursions for quantized feedback and the resulting
//! achievable diversity.

use serde::{Deserialize, Serialize};

use super::exponent::d_unchecked;
use crate::config::{FeedbackExponent, MultiplexPoint, SystemConfig, EXPONENT_TOL};
use crate::error::{DmtError, Result};

/// Which term of the achievable tradeoff is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `K = 1`: `D(r, 1)`.
    NoFeedback,
    /// The error-limited recursion `Cbar_K(r)` is the minimum.
    Recursion,
    /// The feedback-error floor `y + C_1(r)` is the minimum (ties land here).
    ErrorFloor,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::NoFeedback => "no_feedback",
            Branch::Recursion => "recursion",
            Branch::ErrorFloor => "error_floor",
        }
    }
}

/// `C_j(r)`: `C_0 = 0`, `C_j = D(r, 1 + C_{j-1})`. Exponents for error-free feedback.
pub fn c_recursion(cfg: &SystemConfig, r: &MultiplexPoint, j: usize) -> Result<f64> {
    cfg.ensure_feasible(r)?;
    Ok(c_sequence(cfg, r, j)[j])
}

/// `Cbar_j(r)`: `Cbar_0 = 0`, `Cbar_j = D(r, 1 + min(y, Cbar_{j-1}))`.
pub fn cbar_recursion(cfg: &SystemConfig, r: &MultiplexPoint, j: usize) -> Result<f64> {
    cfg.ensure_feasible(r)?;
    Ok(cbar_sequence(cfg, r, j)[j])
}

/// `[C_0, ..., C_j]`. Caller guarantees feasibility.
pub(crate) fn c_sequence(cfg: &SystemConfig, r: &MultiplexPoint, j: usize) -> Vec<f64> {
    recurse(cfg, r, j, FeedbackExponent::Perfect)
}

pub(crate) fn cbar_sequence(cfg: &SystemConfig, r: &MultiplexPoint, j: usize) -> Vec<f64> {
    recurse(cfg, r, j, cfg.y)
}

fn recurse(cfg: &SystemConfig, r: &MultiplexPoint, j: usize, y: FeedbackExponent) -> Vec<f64> {
    let mut seq = Vec::with_capacity(j + 1);
    seq.push(0.0);
    for i in 1..=j {
        let prev = seq[i - 1];
        seq.push(d_unchecked(cfg, r, 1.0 + y.min_with(prev)));
    }
    seq
}

/// Achievable diversity with `K = cfg.levels` feedback indices:
/// `D(r, 1)` for `K = 1`, otherwise `min(Cbar_K(r), y + C_1(r))`.
pub fn d_opt(cfg: &SystemConfig, r: &MultiplexPoint) -> Result<f64> {
    d_opt_with_branch(cfg, r).map(|(d, _)| d)
}

pub fn d_opt_with_branch(cfg: &SystemConfig, r: &MultiplexPoint) -> Result<(f64, Branch)> {
    cfg.ensure_feasible(r)?;
    Ok(d_opt_unchecked(cfg, r))
}

pub(crate) fn d_opt_unchecked(cfg: &SystemConfig, r: &MultiplexPoint) -> (f64, Branch) {
    let c1 = d_unchecked(cfg, r, 1.0);
    if cfg.levels == 1 {
        return (c1, Branch::NoFeedback);
    }
    let cbar = cbar_sequence(cfg, r, cfg.levels)[cfg.levels];
    match cfg.y {
        FeedbackExponent::Perfect => (cbar, Branch::Recursion),
        FeedbackExponent::Finite(y) => {
            let floor = y + c1;
            if floor <= cbar + EXPONENT_TOL {
                (floor.min(cbar), Branch::ErrorFloor)
            } else {
                (cbar, Branch::Recursion)
            }
        }
    }
}

const CUT_SEARCH_LIMIT: usize = 10_000_000;

/// Largest `k >= 1` with `C_k(r) <= mn` (ties count as `<=`).
pub fn cut_index(cfg: &SystemConfig, r: &MultiplexPoint) -> Result<usize> {
    cfg.ensure_feasible(r)?;
    let mn = cfg.mn() as f64;
    let mut prev = 0.0;
    let mut k = 0;
    while k < CUT_SEARCH_LIMIT {
        let next = d_unchecked(cfg, r, 1.0 + prev);
        if next > mn + EXPONENT_TOL {
            // C_1 <= mn always holds, so k >= 1 here.
            return Ok(k.max(1));
        }
        if next <= prev {
            return Err(DmtError::Contract(format!(
                "C recursion stalled at j={} (value {next})",
                k + 1
            )));
        }
        k += 1;
        prev = next;
    }
    Err(DmtError::Contract(format!(
        "C recursion stays below mn for more than {CUT_SEARCH_LIMIT} steps"
    )))
}

/// Three-branch form of the achievable diversity when `y = mn`, with `j`
/// feedback indices: `C_j` for `j <= k`, `min(C_{k+1}, mn + C_1)` for
/// `j = k + 1`, and `mn + C_1` beyond, where `k` is [`cut_index`].
pub fn d_opt_piecewise_ymn(cfg: &SystemConfig, r: &MultiplexPoint, j: usize) -> Result<f64> {
    let mn = cfg.mn() as f64;
    match cfg.y {
        FeedbackExponent::Finite(y) if (y - mn).abs() <= EXPONENT_TOL => {}
        other => {
            return Err(DmtError::Contract(format!(
                "three-branch form requires y = mn = {mn}, got y = {other}"
            )))
        }
    }
    if j == 0 {
        return Err(DmtError::Contract(
            "number of feedback indices must be >= 1".into(),
        ));
    }
    cfg.ensure_feasible(r)?;
    // only C_1..C_j are needed to place j relative to k
    let c = c_sequence(cfg, r, j);
    let within = |i: usize| c[i] <= mn + EXPONENT_TOL;
    Ok(if within(j) {
        c[j]
    } else if j == 1 || within(j - 1) {
        c[j].min(mn + c[1])
    } else {
        mn + c[1]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::g_exponent;

    fn cfg(m: usize, n: usize, users: usize, levels: usize, y: FeedbackExponent) -> SystemConfig {
        SystemConfig::new(m, n, users, levels, y).unwrap()
    }

    fn fin(y: f64) -> FeedbackExponent {
        FeedbackExponent::Finite(y)
    }

    fn pt(r: &[f64]) -> MultiplexPoint {
        MultiplexPoint::new(r.to_vec()).unwrap()
    }

    #[test]
    fn c_recursion_values() {
        let mimo = cfg(3, 4, 1, 2, fin(12.0));
        assert_eq!(c_recursion(&mimo, &pt(&[0.0]), 2).unwrap(), 156.0);
        assert_eq!(c_recursion(&mimo, &pt(&[1.0]), 0).unwrap(), 0.0);

        // unrolled by hand with the SISO segment G(r, p) = p - r
        let siso = cfg(1, 1, 1, 1, FeedbackExponent::Perfect);
        let r = 0.25;
        let mut c = 0.0;
        for _ in 0..3 {
            c = g_exponent(1, 1, r, 1.0 + c).unwrap();
        }
        assert!((c - 2.25).abs() < 1e-12);
        assert!((c_recursion(&siso, &pt(&[r]), 3).unwrap() - c).abs() < 1e-12);
    }

    #[test]
    fn cbar_recursion_values() {
        let mimo = cfg(3, 4, 1, 2, fin(12.0));
        assert_eq!(cbar_recursion(&mimo, &pt(&[0.0]), 2).unwrap(), 156.0);
        assert_eq!(cbar_recursion(&mimo, &pt(&[0.0]), 1).unwrap(), 12.0);

        let siso = cfg(1, 1, 1, 2, fin(0.2));
        // Cbar_1 = 0.5, Cbar_2 = 1 + min(0.2, 0.5) - 0.5
        assert!((cbar_recursion(&siso, &pt(&[0.5]), 2).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn cbar_first_step_equals_c() {
        for y in [0.0, 0.3, 5.0] {
            let c = cfg(2, 3, 2, 3, fin(y));
            let r = pt(&[0.4, 0.9]);
            assert_eq!(
                cbar_recursion(&c, &r, 1).unwrap(),
                c_recursion(&c, &r, 1).unwrap()
            );
        }
    }

    #[test]
    fn d_opt_values() {
        assert_eq!(
            d_opt(&cfg(3, 4, 1, 2, fin(12.0)), &pt(&[0.0])).unwrap(),
            24.0
        );
        assert_eq!(
            d_opt(&cfg(3, 4, 1, 1, fin(12.0)), &pt(&[0.0])).unwrap(),
            12.0
        );
        let perfect = cfg(1, 1, 1, 4, FeedbackExponent::Perfect);
        assert!((d_opt(&perfect, &pt(&[0.5])).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn d_opt_limits() {
        let r = pt(&[0.7, 0.3]);
        for k in 1..=5 {
            let perfect = cfg(2, 2, 2, k, FeedbackExponent::Perfect);
            assert_eq!(
                d_opt(&perfect, &r).unwrap(),
                c_recursion(&perfect, &r, k).unwrap()
            );
            let useless = cfg(2, 2, 2, k, fin(0.0));
            assert_eq!(
                d_opt(&useless, &r).unwrap(),
                c_recursion(&useless, &r, 1).unwrap()
            );
        }
    }

    #[test]
    fn branch_labels() {
        let (_, b) = d_opt_with_branch(&cfg(3, 4, 1, 1, fin(12.0)), &pt(&[1.0])).unwrap();
        assert_eq!(b, Branch::NoFeedback);
        let (d, b) = d_opt_with_branch(&cfg(3, 4, 1, 2, fin(12.0)), &pt(&[2.9])).unwrap();
        assert!((d - 1.4).abs() < 1e-12);
        assert_eq!(b, Branch::Recursion);
        let (d, b) = d_opt_with_branch(&cfg(3, 4, 1, 6, fin(12.0)), &pt(&[0.0])).unwrap();
        assert_eq!((d, b), (24.0, Branch::ErrorFloor));
    }

    #[test]
    fn piecewise_values() {
        let mimo = cfg(3, 4, 1, 1, fin(12.0));
        assert_eq!(d_opt_piecewise_ymn(&mimo, &pt(&[0.0]), 1).unwrap(), 12.0);
        assert_eq!(d_opt_piecewise_ymn(&mimo, &pt(&[0.0]), 5).unwrap(), 24.0);

        let siso = cfg(1, 1, 1, 1, fin(1.0));
        assert_eq!(cut_index(&siso, &pt(&[0.5])).unwrap(), 2);
        let v = d_opt_piecewise_ymn(&siso, &pt(&[0.5]), 3).unwrap();
        assert!((v - 1.5).abs() < 1e-12);
        assert!((v - d_opt(&siso.with_levels(3), &pt(&[0.5])).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn piecewise_requires_y_equal_mn() {
        let wrong = cfg(2, 2, 1, 1, fin(3.0));
        assert!(matches!(
            d_opt_piecewise_ymn(&wrong, &pt(&[0.0]), 2),
            Err(DmtError::Contract(_))
        ));
        let perfect = cfg(2, 2, 1, 1, FeedbackExponent::Perfect);
        assert!(d_opt_piecewise_ymn(&perfect, &pt(&[0.0]), 2).is_err());
        let right = cfg(2, 2, 1, 1, fin(4.0));
        assert!(d_opt_piecewise_ymn(&right, &pt(&[0.0]), 0).is_err());
    }

    #[test]
    fn c_strictly_increasing() {
        let c = cfg(3, 4, 2, 1, fin(12.0));
        for r in [[0.0, 0.0], [1.5, 0.5], [1.9, 2.0], [2.9, 0.05]] {
            let seq = c_sequence(&c, &pt(&r), 6);
            assert!(seq.windows(2).all(|w| w[1] > w[0]), "{r:?}: {seq:?}");
        }
    }

    #[test]
    fn infeasible_inputs_rejected() {
        let c = cfg(1, 1, 1, 2, fin(1.0));
        assert!(c_recursion(&c, &pt(&[1.0]), 2).is_err());
        assert!(cbar_recursion(&c, &pt(&[1.2]), 2).is_err());
        assert!(d_opt(&c, &pt(&[1.0])).is_err());
    }
}
