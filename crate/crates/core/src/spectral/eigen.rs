//! Extreme eigenvalues and singular values.
//!
//! Small problems go straight to a dense solver. Larger symmetric problems
//! use Lanczos with full reorthogonalization and fall back to the dense
//! solver whenever the iteration does not certify both extremes.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Below this size the dense solver is faster than Lanczos.
const DENSE_CUTOFF: usize = 160;
const MAX_KRYLOV: usize = 600;
const REL_TOL: f64 = 1e-11;

/// `(lambda_min, lambda_max)` of a symmetric matrix.
pub fn extreme_eigenvalues(a: &DMatrix<f64>) -> Result<(f64, f64)> {
    check_symmetric(a)?;
    Ok(extreme_eigenvalues_unchecked(a))
}

pub(crate) fn extreme_eigenvalues_unchecked(a: &DMatrix<f64>) -> (f64, f64) {
    let n = a.nrows();
    if n == 0 {
        return (0.0, 0.0);
    }
    if n > DENSE_CUTOFF {
        let op = |x: &DVector<f64>, y: &mut DVector<f64>| y.gemv(1.0, a, x, 0.0);
        if let Some(pair) = lanczos_extremes(n, op) {
            return pair;
        }
    }
    dense_extremes(a)
}

/// Dense route, always available; used directly by tests as the reference.
pub fn dense_extremes(a: &DMatrix<f64>) -> (f64, f64) {
    let evs = a.clone().symmetric_eigenvalues();
    evs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)))
}

fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Invalid(format!("matrix is {}x{}, not square", n, a.ncols())));
    }
    let scale = a.amax().max(1.0);
    for i in 0..n {
        for j in i + 1..n {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::Invalid(format!("matrix not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Lanczos for the two ends of the spectrum of the symmetric operator `op`
/// of dimension `n`. Returns `None` when the extremes are not certified
/// within the Krylov budget or the iteration breaks down early.
pub(crate) fn lanczos_extremes<F>(n: usize, mut op: F) -> Option<(f64, f64)>
where
    F: FnMut(&DVector<f64>, &mut DVector<f64>),
{
    let max_k = n.min(MAX_KRYLOV);
    // Fixed start vector keeps the solver deterministic.
    let mut rng = ChaCha8Rng::seed_from_u64(0x1A2C_205D ^ n as u64);
    let mut q = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
    q /= q.norm();

    let mut basis = DMatrix::<f64>::zeros(n, max_k);
    let mut alpha = Vec::with_capacity(max_k);
    let mut beta: Vec<f64> = Vec::with_capacity(max_k);
    let mut w = DVector::<f64>::zeros(n);

    for j in 0..max_k {
        basis.set_column(j, &q);
        op(&q, &mut w);
        let a_j = q.dot(&w);
        alpha.push(a_j);
        w.axpy(-a_j, &q, 1.0);
        if j > 0 {
            w.axpy(-beta[j - 1], &basis.column(j - 1), 1.0);
        }
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            let cols = basis.columns(0, j + 1);
            let coeffs = cols.tr_mul(&w);
            w.gemv(-1.0, &cols, &coeffs, 1.0);
        }
        let b_j = w.norm();
        let k = j + 1;
        let scale = alpha.iter().map(|x| x.abs()).fold(0.0, f64::max).max(b_j).max(1e-300);
        let breakdown = b_j <= 1e-12 * scale;

        if breakdown || k == max_k || (k >= 24 && k % 12 == 0) {
            let t = DMatrix::from_fn(k, k, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let vals = &eig.eigenvalues;
            let (mut imin, mut imax) = (0, 0);
            for i in 0..k {
                if vals[i] < vals[imin] {
                    imin = i;
                }
                if vals[i] > vals[imax] {
                    imax = i;
                }
            }
            if breakdown {
                // Invariant subspace: exact only if it is the whole space.
                return (k == n).then(|| (vals[imin], vals[imax]));
            }
            let certified = |idx: usize| {
                let resid = b_j * eig.eigenvectors[(k - 1, idx)].abs();
                let gap = (0..k)
                    .filter(|&i| i != idx)
                    .map(|i| (vals[i] - vals[idx]).abs())
                    .fold(f64::INFINITY, f64::min);
                let bound = if gap.is_finite() { resid.min(resid * resid / gap) } else { resid };
                bound <= REL_TOL * scale
            };
            if certified(imin) && certified(imax) {
                return Some((vals[imin], vals[imax]));
            }
            if k == max_k {
                return None;
            }
        }
        beta.push(b_j);
        q = &w / b_j;
    }
    None
}

/// `(s_min, s_max)`: for an `m x k` matrix `s_min` is the smallest of the
/// `min(m, k)` singular values.
pub fn extreme_singular_values(a: &DMatrix<f64>) -> (f64, f64) {
    if a.nrows() == 0 || a.ncols() == 0 {
        return (0.0, 0.0);
    }
    let sv = a.clone().singular_values();
    sv.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)))
}

/// Largest singular value only. Large matrices run Lanczos on the Gram
/// operator of the smaller side.
pub fn largest_singular_value(a: &DMatrix<f64>) -> f64 {
    let (m, k) = a.shape();
    let small = m.min(k);
    if small == 0 {
        return 0.0;
    }
    if small > DENSE_CUTOFF {
        let found = if m <= k {
            // x -> A (A^T x)
            lanczos_extremes(m, |x, y| y.gemv(1.0, a, &a.tr_mul(x), 0.0))
        } else {
            lanczos_extremes(k, |x, y| y.gemv_tr(1.0, a, &(a * x), 0.0))
        };
        if let Some((_, top)) = found {
            return top.max(0.0).sqrt();
        }
    }
    extreme_singular_values(a).1
}
