//! Log-determinant of small Hermitian positive-definite matrices.

use num_complex::Complex64;

/// `ln det(A)` for a row-major Hermitian positive-definite `n x n` matrix via
/// an in-place Cholesky factorization. Only the lower triangle is read.
/// Returns `None` if a pivot is not positive.
pub fn hermitian_ln_det(a: &mut [Complex64], n: usize) -> Option<f64> {
    debug_assert_eq!(a.len(), n * n);
    let mut ln_det = 0.0;
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d -= a[j * n + k].norm_sqr();
        }
        if d.is_nan() || d <= 0.0 {
            return None;
        }
        ln_det += d.ln();
        let pivot = d.sqrt();
        a[j * n + j] = Complex64::new(pivot, 0.0);
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k].conj();
            }
            a[i * n + j] = s / pivot;
        }
    }
    Some(ln_det)
}
