//! Extreme eigenvalues of the Gaussian Orthogonal Ensemble via its
//! tridiagonal model.
//!
//! A GOE matrix with unit off-diagonal variance has the same eigenvalue law
//! as the symmetric tridiagonal matrix with `N(0, 2)` diagonal and
//! `chi_{n-1}, chi_{n-2}, ..., chi_1` off-diagonal. The largest eigenvalue is
//! determined by the leading `O(n^{1/3})` block, so the matrix can be cut to
//! its first rows without changing the scaled edge statistic.

use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::rng::Rng;

/// Number of leading rows that pin down the top eigenvalue to well below
/// Monte Carlo resolution.
pub fn edge_truncation(n: usize) -> usize {
    let k = (12.0 * (n as f64).cbrt()).ceil() as usize;
    k.clamp(2.min(n), n)
}

/// Draws the leading `rows` rows of the tridiagonal GOE model of size `n`.
/// Returns (diagonal, off-diagonal).
pub fn tridiagonal_goe(n: usize, rows: usize, rng: &mut Rng) -> (Vec<f64>, Vec<f64>) {
    let rows = rows.min(n);
    let diag: Vec<f64> = (0..rows)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            z * std::f64::consts::SQRT_2
        })
        .collect();
    let off: Vec<f64> = (1..rows)
        .map(|i| {
            let dof = (n - i) as f64;
            ChiSquared::new(dof).expect("positive dof").sample(rng).sqrt()
        })
        .collect();
    (diag, off)
}

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let denom = if q == 0.0 { f64::EPSILON * (off[i - 1].abs() + 1.0) } else { q };
        q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection,
/// starting from the bracket `[lo, hi]` (widened as needed).
pub fn tridiagonal_lambda_max(diag: &[f64], off: &[f64], mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let k = diag.len();
    let mut width = (hi - lo).max(1.0);
    while sturm_count(diag, off, hi) < k {
        hi += width;
        width *= 2.0;
    }
    while sturm_count(diag, off, lo) == k {
        lo -= width;
        width *= 2.0;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off, mid) < k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One draw of `n^{1/6} (lambda_max - 2 sqrt(n))` for an `n x n` GOE matrix,
/// which converges in law to TW1.
pub fn scaled_goe_lambda_max(n: usize, rng: &mut Rng) -> f64 {
    let rows = edge_truncation(n);
    let (diag, off) = tridiagonal_goe(n, rows, rng);
    let scale = (n as f64).powf(1.0 / 6.0);
    let centre = 2.0 * (n as f64).sqrt();
    let lam = tridiagonal_lambda_max(&diag, &off, centre - 8.0 / scale, centre + 6.0 / scale, 1e-7 / scale);
    scale * (lam - centre)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use nalgebra::DMatrix;

    #[test]
    fn bisection_matches_dense_eigensolver() {
        let mut rng = rng_from_seed(11);
        let (d, o) = tridiagonal_goe(30, 30, &mut rng);
        let m = DMatrix::from_fn(30, 30, |i, j| {
            if i == j {
                d[i]
            } else if i + 1 == j {
                o[i]
            } else if j + 1 == i {
                o[j]
            } else {
                0.0
            }
        });
        let evs = m.symmetric_eigenvalues();
        let top = evs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let got = tridiagonal_lambda_max(&d, &o, 0.0, 1.0, 1e-12);
        assert!((got - top).abs() < 1e-9, "{got} vs {top}");
        let below = evs.iter().filter(|&&e| e < 1.0).count();
        assert_eq!(sturm_count(&d, &o, 1.0), below);
    }

    #[test]
    fn truncation_does_not_move_the_edge() {
        // The full and truncated models share their leading rows when drawn
        // from the same stream.
        let n = 3000;
        for seed in 0..5 {
            let (d, o) = tridiagonal_goe(n, n, &mut rng_from_seed(seed));
            let k = edge_truncation(n);
            let full = tridiagonal_lambda_max(&d, &o, 100.0, 110.0, 1e-10);
            let cut = tridiagonal_lambda_max(&d[..k], &o[..k - 1], 100.0, 110.0, 1e-10);
            let scale = (n as f64).powf(1.0 / 6.0);
            assert!(scale * (full - cut).abs() < 1e-4, "seed {seed}: {full} vs {cut}");
        }
    }
}
