//! Sampled tradeoff curves along one multiplexing coordinate.

use serde::{Deserialize, Serialize};

use super::recursion::{d_opt_unchecked, Branch};
use crate::config::{subsets, MultiplexPoint, SystemConfig};
use crate::error::{DmtError, Result};

/// Sweep of one user's gain with every other coordinate held fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    /// 0-based index of the swept user.
    pub user: usize,
    /// Full gain vector; the entry at `user` is ignored.
    pub base: Vec<f64>,
}

impl SweepAxis {
    pub fn single_user() -> Self {
        SweepAxis {
            user: 0,
            base: vec![0.0],
        }
    }

    /// Supremum of the swept gain over the open feasibility region.
    pub fn upper_limit(&self, cfg: &SystemConfig) -> Result<f64> {
        cfg.validate()?;
        if self.base.len() != cfg.users {
            return Err(DmtError::DimensionMismatch {
                expected: cfg.users,
                got: self.base.len(),
            });
        }
        if self.user >= cfg.users {
            return Err(DmtError::InvalidConfig(format!(
                "sweep user {} out of range for {} users",
                self.user + 1,
                cfg.users
            )));
        }
        let base = MultiplexPoint::new(self.base.clone())?.with_coordinate(self.user, 0.0);
        let bit = 1u32 << self.user;
        let mut upper = f64::INFINITY;
        for mask in subsets(cfg.users) {
            let limit = cfg.subset_limit(mask.count_ones() as usize);
            let others = base.subset_sum(mask);
            if mask & bit != 0 {
                upper = upper.min(limit - others);
            } else if others >= limit {
                return Err(DmtError::EmptyRange(format!(
                    "fixed gains of users {:?} already violate the feasibility region",
                    crate::config::members(mask)
                )));
            }
        }
        if upper <= 0.0 {
            return Err(DmtError::EmptyRange(format!(
                "no feasible gain for user {}",
                self.user + 1
            )));
        }
        Ok(upper)
    }

    fn point(&self, r: f64) -> MultiplexPoint {
        let mut gains = self.base.clone();
        gains[self.user] = r;
        MultiplexPoint::new(gains).expect("sweep values are nonnegative")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub r: f64,
    pub d: f64,
    pub branch: Branch,
}

/// Achievable diversity along a sweep, with slope-change locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmtCurve {
    pub config: SystemConfig,
    pub axis: SweepAxis,
    pub samples: Vec<CurveSample>,
    pub breakpoints: Vec<f64>,
}

/// Samples `d_opt` at `resolution` evenly spaced gains `0, h, ..., (resolution-1) h`
/// with `h = upper / resolution`, so the last sample sits one step inside the
/// open boundary. Breakpoints are located to `1e-10` by refining every window
/// where the sampled slope changes.
pub fn sample_curve(cfg: &SystemConfig, axis: &SweepAxis, resolution: usize) -> Result<DmtCurve> {
    if resolution < 2 {
        return Err(DmtError::InvalidConfig(
            "curve resolution must be at least 2".into(),
        ));
    }
    let upper = axis.upper_limit(cfg)?;
    let step = upper / resolution as f64;
    let eval = |r: f64| d_opt_unchecked(cfg, &axis.point(r)).0;

    let samples: Vec<CurveSample> = (0..resolution)
        .map(|i| {
            let r = i as f64 * step;
            let (d, branch) = d_opt_unchecked(cfg, &axis.point(r));
            CurveSample { r, d, branch }
        })
        .collect();

    let xs: Vec<f64> = samples.iter().map(|s| s.r).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.d).collect();
    let breakpoints = locate_breakpoints(&xs, &ys, &eval);

    Ok(DmtCurve {
        config: *cfg,
        axis: axis.clone(),
        samples,
        breakpoints,
    })
}

const LINEAR_TOL: f64 = 1e-9;
const LOCATE_TOL: f64 = 1e-10;

fn slope(x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    (y1 - y0) / (x1 - x0)
}

fn is_linear(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, flo: f64, fhi: f64) -> bool {
    [0.125, 0.25, 0.5, 0.75, 0.875, 0.3819660112501051]
        .iter()
        .all(|&t| {
            let x = lo + t * (hi - lo);
            let chord = flo + t * (fhi - flo);
            (f(x) - chord).abs() <= LINEAR_TOL * (1.0 + chord.abs())
        })
}

fn locate_breakpoints(xs: &[f64], ys: &[f64], f: &dyn Fn(f64) -> f64) -> Vec<f64> {
    // windows [x_{i-1}, x_{i+1}] around every sampled slope change, merged
    let mut windows: Vec<(usize, usize)> = Vec::new();
    for i in 1..xs.len().saturating_sub(1) {
        let left = slope(xs[i - 1], ys[i - 1], xs[i], ys[i]);
        let right = slope(xs[i], ys[i], xs[i + 1], ys[i + 1]);
        if (left - right).abs() > LINEAR_TOL * (1.0 + left.abs().max(right.abs())) {
            match windows.last_mut() {
                Some(w) if w.1 >= i - 1 => w.1 = i + 1,
                _ => windows.push((i - 1, i + 1)),
            }
        }
    }
    let mut found = Vec::new();
    for (a, b) in windows {
        refine(f, xs[a], xs[b], ys[a], ys[b], 0, &mut found);
    }
    found.sort_by(f64::total_cmp);
    found.dedup_by(|a, b| (*a - *b).abs() <= 1e3 * LOCATE_TOL);
    found
}

fn refine(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    flo: f64,
    fhi: f64,
    depth: u32,
    out: &mut Vec<f64>,
) {
    if is_linear(f, lo, hi, flo, fhi) {
        return;
    }
    if hi - lo <= LOCATE_TOL || depth > 80 {
        out.push(0.5 * (lo + hi));
        return;
    }
    // single kink: intersect the two outer lines and confirm both halves are linear
    let h = (hi - lo) * 1e-3;
    let sl = slope(lo, flo, lo + h, f(lo + h));
    let sr = slope(hi - h, f(hi - h), hi, fhi);
    if (sl - sr).abs() > 1e-12 {
        let x = (fhi - flo + sl * lo - sr * hi) / (sl - sr);
        if x > lo && x < hi {
            let fx = f(x);
            if is_linear(f, lo, x, flo, fx) && is_linear(f, x, hi, fx, fhi) {
                out.push(x);
                return;
            }
        }
    }
    let mid = 0.5 * (lo + hi);
    let fmid = f(mid);
    refine(f, lo, mid, flo, fmid, depth + 1, out);
    refine(f, mid, hi, fmid, fhi, depth + 1, out);
}
