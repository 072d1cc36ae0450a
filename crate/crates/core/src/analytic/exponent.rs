//! Outage exponents of a single link (`G`) and of the multiple-access channel (`D`).

use crate::config::{subsets, MultiplexPoint, SystemConfig};
use crate::error::{DmtError, Result};

const SNAP_TOL: f64 = 1e-12;

/// Outage exponent `G_{m,n}(r, p)` of an `m x n` Rayleigh link at multiplexing
/// gain `r` when the transmit power scales as `SNR^p`.
///
/// The curve is piecewise linear through `(k p, p (m-k)(n-k))` for
/// `k = 0..=min(m, n)` and zero beyond `min(m, n) p`.
pub fn g_exponent(m: usize, n: usize, r: f64, p: f64) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(DmtError::InvalidConfig(format!(
            "antenna counts must be positive (m={m}, n={n})"
        )));
    }
    if !p.is_finite() || p <= 0.0 {
        return Err(DmtError::NonPositivePower(p));
    }
    if !r.is_finite() || r < 0.0 {
        return Err(DmtError::InvalidGain(r));
    }
    Ok(g_unchecked(m, n, r, p))
}

pub(crate) fn g_unchecked(m: usize, n: usize, r: f64, p: f64) -> f64 {
    let q = m.min(n);
    let t = r / p;
    if t >= q as f64 {
        return 0.0;
    }
    let corner = |k: usize| p * ((m - k) * (n - k)) as f64;
    let nearest = t.round();
    if (t - nearest).abs() <= SNAP_TOL {
        return corner(nearest as usize);
    }
    let k = t.floor() as usize;
    // slope of segment k per unit r: (m-k)(n-k) - (m-k-1)(n-k-1)
    let slope = (m + n - 2 * k - 1) as f64;
    (corner(k) - (r - k as f64 * p) * slope).max(0.0)
}

/// Multiple-access outage exponent `D(r, p 1)` with a common power exponent:
/// the minimum over non-empty user subsets `S` of `G_{|S| m, n}(sum_S r_i, p)`.
pub fn d_exponent(cfg: &SystemConfig, r: &MultiplexPoint, p: f64) -> Result<f64> {
    cfg.ensure_feasible(r)?;
    if !p.is_finite() || p <= 0.0 {
        return Err(DmtError::NonPositivePower(p));
    }
    Ok(d_unchecked(cfg, r, p))
}

pub(crate) fn d_unchecked(cfg: &SystemConfig, r: &MultiplexPoint, p: f64) -> f64 {
    subsets(cfg.users)
        .map(|mask| {
            let size = mask.count_ones() as usize;
            g_unchecked(size * cfg.m, cfg.n, r.subset_sum(mask), p)
        })
        .fold(f64::INFINITY, f64::min)
}
