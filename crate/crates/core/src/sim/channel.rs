//! Block-fading Rayleigh multiple-access channel and its outage event.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use smallvec::SmallVec;

use super::linalg::hermitian_ln_det;
use crate::config::subsets;

type Scratch = SmallVec<[Complex64; 16]>;

/// One fading block: `users` independent `n x m` matrices with i.i.d.
/// `CN(0, 1)` entries, plus their Gram matrices `H_i H_i^H`.
#[derive(Debug, Clone)]
pub struct FadingDraw {
    m: usize,
    n: usize,
    users: usize,
    /// Row-major `n x m` per user, concatenated.
    h: Vec<Complex64>,
    /// Row-major `n x n` per user, concatenated.
    gram: Vec<Complex64>,
}

impl FadingDraw {
    pub fn zeros(m: usize, n: usize, users: usize) -> Self {
        FadingDraw {
            m,
            n,
            users,
            h: vec![Complex64::new(0.0, 0.0); users * n * m],
            gram: vec![Complex64::new(0.0, 0.0); users * n * n],
        }
    }

    pub fn sample<R: Rng + ?Sized>(m: usize, n: usize, users: usize, rng: &mut R) -> Self {
        let mut draw = Self::zeros(m, n, users);
        draw.resample(rng);
        draw
    }

    /// Builds a draw from explicit matrices (row-major `n x m` each).
    pub fn from_matrices(m: usize, n: usize, matrices: &[Vec<Complex64>]) -> Self {
        let mut draw = Self::zeros(m, n, matrices.len());
        for (u, mat) in matrices.iter().enumerate() {
            assert_eq!(mat.len(), n * m, "user {u} matrix must be n x m");
            draw.h[u * n * m..(u + 1) * n * m].copy_from_slice(mat);
        }
        draw.refresh_gram();
        draw
    }

    /// Redraws every entry in place.
    pub fn resample<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for z in self.h.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        }
        self.refresh_gram();
    }

    fn refresh_gram(&mut self) {
        let (m, n) = (self.m, self.n);
        for u in 0..self.users {
            let h = &self.h[u * n * m..(u + 1) * n * m];
            let g = &mut self.gram[u * n * n..(u + 1) * n * n];
            for i in 0..n {
                for j in 0..=i {
                    let mut s = Complex64::new(0.0, 0.0);
                    for k in 0..m {
                        s += h[i * m + k] * h[j * m + k].conj();
                    }
                    g[i * n + j] = s;
                    g[j * n + i] = s.conj();
                }
            }
        }
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.h
    }

    /// `log2 det(I_n + sum_{i in S} (P_i / m) H_i H_i^H)` in bits, with `S`
    /// given as a bitmask over users.
    pub fn mutual_info_subset(&self, powers: &[f64], mask: u32) -> f64 {
        let n = self.n;
        if n == 1 {
            let mut gain = 0.0;
            for (u, &p) in powers.iter().enumerate().take(self.users) {
                if mask & (1 << u) != 0 {
                    gain += p / self.m as f64 * self.gram[u].re;
                }
            }
            return gain.ln_1p() / std::f64::consts::LN_2;
        }
        let mut a: Scratch = SmallVec::from_elem(Complex64::new(0.0, 0.0), n * n);
        for i in 0..n {
            a[i * n + i] = Complex64::new(1.0, 0.0);
        }
        for (u, &p) in powers.iter().enumerate().take(self.users) {
            if mask & (1 << u) == 0 {
                continue;
            }
            let scale = p / self.m as f64;
            let g = &self.gram[u * n * n..(u + 1) * n * n];
            for (dst, src) in a.iter_mut().zip(g) {
                *dst += src * scale;
            }
        }
        let ln_det = hermitian_ln_det(&mut a, n).expect("I + PSD is positive definite");
        (ln_det / std::f64::consts::LN_2).max(0.0)
    }

    /// `U(R, P)`: true if some non-empty subset cannot support its sum rate.
    pub fn in_outage(&self, rates: &[f64], powers: &[f64]) -> bool {
        subsets(self.users).any(|mask| {
            let need: f64 = rates
                .iter()
                .enumerate()
                .filter(|(u, _)| mask & (1 << u) != 0)
                .map(|(_, r)| r)
                .sum();
            self.mutual_info_subset(powers, mask) < need
        })
    }

    /// [`in_outage`](Self::in_outage) with every user at `power`.
    pub fn in_outage_common(&self, rates: &[f64], power: f64) -> bool {
        let powers: SmallVec<[f64; 8]> = SmallVec::from_elem(power, self.users);
        self.in_outage(rates, &powers)
    }
}

/// Free-function form of [`FadingDraw::mutual_info_subset`].
pub fn mutual_info_subset(h: &FadingDraw, powers: &[f64], mask: u32) -> f64 {
    h.mutual_info_subset(powers, mask)
}

/// Outage indicator as `0`/`1`.
pub fn outage_indicator(h: &FadingDraw, rates: &[f64], powers: &[f64]) -> u8 {
    u8::from(h.in_outage(rates, powers))
}

/// Rates in bits per channel use: `R_s = r_s log2(snr)`.
pub fn rates_for(gains: &[f64], snr: f64) -> Vec<f64> {
    gains.iter().map(|r| r * snr.log2()).collect()
}
