//! Largest eigenvalue of Hermitian positive semidefinite operators by power iteration.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::krylov::{dot, norm};
use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

pub const DEFAULT_EIG_TOL: f64 = 1e-4;
pub const DEFAULT_EIG_MAX_ITERS: usize = 300;
const START_SEED: u64 = 0x5eed_e16e;

/// Power iteration on `apply` (dimension `n`), stopping once the relative change
/// of the Rayleigh quotient drops below `tol`.
pub fn max_eig(
    n: usize,
    mut apply: impl FnMut(&[Complex64], &mut [Complex64]),
    tol: f64,
    max_iters: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("operator has dimension zero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut x: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut y = vec![Complex64::default(); n];
    let mut estimate = f64::NAN;
    for _ in 0..max_iters {
        apply(&x, &mut y);
        let rq = dot(&x, &y).re / dot(&x, &x).re;
        let ny = norm(&y);
        if ny == 0.0 {
            return Ok(0.0);
        }
        if !ny.is_finite() {
            return Err(Error::NonFinite { iteration: 0 });
        }
        let converged = estimate.is_finite() && (rq - estimate).abs() <= tol * rq.abs();
        estimate = rq;
        if converged {
            return Ok(estimate);
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
    }
    Err(Error::EigenNotConverged {
        iterations: max_iters,
        estimate,
    })
}

/// Largest eigenvalue of `AᴴA`, formed implicitly.
pub fn max_eig_normal(op: &SparseOperator, tol: f64, max_iters: usize) -> Result<f64> {
    let mut tmp = vec![Complex64::default(); op.rows()];
    max_eig(
        op.cols(),
        |x, y| {
            op.apply(x, &mut tmp);
            op.apply_adjoint(&tmp, y);
        },
        tol,
        max_iters,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal() {
        let id = max_eig(7, |x, y| y.copy_from_slice(x), DEFAULT_EIG_TOL, DEFAULT_EIG_MAX_ITERS).unwrap();
        assert_eq!(id, 1.0);
        let d = [1.0, 2.0, 3.0];
        let est = max_eig(
            3,
            |x, y| {
                for i in 0..3 {
                    y[i] = x[i] * d[i];
                }
            },
            1e-10,
            DEFAULT_EIG_MAX_ITERS,
        )
        .unwrap();
        assert!((est - 3.0).abs() < 1e-6);
    }

    #[test]
    fn zero_operator_and_iteration_limit() {
        assert_eq!(max_eig(4, |_, y| y.fill(Complex64::default()), 1e-4, 10).unwrap(), 0.0);
        let d = [1.0, 0.999_999];
        let err = max_eig(
            2,
            |x, y| {
                y[0] = x[0] * d[0];
                y[1] = x[1] * d[1];
            },
            0.0,
            3,
        );
        assert!(matches!(err, Err(Error::EigenNotConverged { iterations: 3, .. })));
    }
}
