//! Proximal maps: complex soft-thresholding and box-constrained isotropic
//! total-variation denoising by fast gradient projection on the dual.

use num_complex::Complex64;

/// `c·max(0, 1 − τ/|c|)`: modulus shrinkage with the phase kept.
pub fn soft_threshold(c: Complex64, tau: f64) -> Complex64 {
    let m = c.norm();
    if m <= tau {
        Complex64::default()
    } else {
        c * (1.0 - tau / m)
    }
}

/// `γ‖x‖₁` for complex vectors (sum of moduli).
pub fn l1_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm()).sum()
}

/// Stopping controls for [`tv_prox`].
#[derive(Debug, Clone, Copy)]
pub struct TvOptions {
    /// Relative duality gap at which iterations stop.
    pub gap_tol: f64,
    pub max_iters: usize,
}

impl Default for TvOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-6,
            max_iters: 100,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TvOutcome {
    pub iterations: usize,
    /// Final duality gap divided by the primal objective.
    pub relative_gap: f64,
}

/// Forward differences along each axis of an x-fastest lattice, zero on the
/// last layer.
pub(crate) fn gradient(x: &[f64], dims: [usize; 3]) -> [Vec<f64>; 3] {
    let stride = [1, dims[0], dims[0] * dims[1]];
    let mut g = [vec![0.0; x.len()], vec![0.0; x.len()], vec![0.0; x.len()]];
    for (idx, &v) in x.iter().enumerate() {
        let c = [idx % dims[0], (idx / dims[0]) % dims[1], idx / (dims[0] * dims[1])];
        for a in 0..3 {
            if c[a] + 1 < dims[a] {
                g[a][idx] = x[idx + stride[a]] - v;
            }
        }
    }
    g
}

/// Adjoint of [`gradient`].
pub(crate) fn gradient_adjoint(p: &[Vec<f64>; 3], dims: [usize; 3]) -> Vec<f64> {
    let n = p[0].len();
    let stride = [1, dims[0], dims[0] * dims[1]];
    let mut out = vec![0.0; n];
    for idx in 0..n {
        let c = [idx % dims[0], (idx / dims[0]) % dims[1], idx / (dims[0] * dims[1])];
        for a in 0..3 {
            if c[a] + 1 < dims[a] {
                out[idx] -= p[a][idx];
                out[idx + stride[a]] += p[a][idx];
            }
        }
    }
    out
}

/// Isotropic total variation `Σ_v |∇x|_v`.
pub fn total_variation(x: &[f64], dims: [usize; 3]) -> f64 {
    let g = gradient(x, dims);
    (0..x.len())
        .map(|i| (g[0][i] * g[0][i] + g[1][i] * g[1][i] + g[2][i] * g[2][i]).sqrt())
        .sum()
}

/// Objective of [`tv_prox`]: `½‖x − b‖² + λ·TV(x)`.
pub fn tv_objective(x: &[f64], b: &[f64], lambda: f64, dims: [usize; 3]) -> f64 {
    let fit: f64 = x.iter().zip(b).map(|(a, c)| (a - c) * (a - c)).sum();
    0.5 * fit + lambda * total_variation(x, dims)
}

/// `argmin_{lo ≤ x ≤ hi} ½‖x − b‖² + λ·TV(x)` on an x-fastest lattice.
///
/// Fast gradient projection on the dual field `p` (|p_v| ≤ 1) with step
/// `1/(12λ)`; the primal iterate is `P_[lo,hi](b − λ∇ᵀp)`. Stops when the
/// duality gap `λ(TV(x) − ⟨∇x, p⟩)` falls below `gap_tol` times the primal
/// objective.
pub fn tv_prox(b: &[f64], lambda: f64, lo: f64, hi: f64, dims: [usize; 3], opts: TvOptions) -> (Vec<f64>, TvOutcome) {
    assert_eq!(b.len(), dims.iter().product::<usize>());
    let clamp = |v: f64| v.clamp(lo, hi);
    if lambda <= 0.0 {
        return (
            b.iter().map(|&v| clamp(v)).collect(),
            TvOutcome {
                iterations: 0,
                relative_gap: 0.0,
            },
        );
    }
    let n = b.len();
    let primal = |p: &[Vec<f64>; 3]| -> Vec<f64> {
        let gt = gradient_adjoint(p, dims);
        b.iter().zip(&gt).map(|(bv, g)| clamp(bv - lambda * g)).collect()
    };
    let gap = |x: &[f64], p: &[Vec<f64>; 3]| -> (f64, f64) {
        let g = gradient(x, dims);
        let mut tv = 0.0;
        let mut inner = 0.0;
        for i in 0..n {
            tv += (g[0][i] * g[0][i] + g[1][i] * g[1][i] + g[2][i] * g[2][i]).sqrt();
            inner += g[0][i] * p[0][i] + g[1][i] * p[1][i] + g[2][i] * p[2][i];
        }
        let fit: f64 = x.iter().zip(b).map(|(a, c)| (a - c) * (a - c)).sum();
        let obj = 0.5 * fit + lambda * tv;
        (lambda * (tv - inner), obj)
    };
    let step = 1.0 / (12.0 * lambda);
    let mut p = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut r = p.clone();
    let mut t = 1.0f64;
    let mut x = primal(&p);
    let (g0, obj0) = gap(&x, &p);
    let mut rel = g0 / obj0.max(f64::MIN_POSITIVE);
    let mut iterations = 0;
    while iterations < opts.max_iters && rel > opts.gap_tol {
        let xr = primal(&r);
        let g = gradient(&xr, dims);
        let mut p_new = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let q = [
                r[0][i] + step * g[0][i],
                r[1][i] + step * g[1][i],
                r[2][i] + step * g[2][i],
            ];
            let m = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt().max(1.0);
            for a in 0..3 {
                p_new[a][i] = q[a] / m;
            }
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let w = (t - 1.0) / t_new;
        for a in 0..3 {
            for i in 0..n {
                r[a][i] = p_new[a][i] + w * (p_new[a][i] - p[a][i]);
            }
        }
        p = p_new;
        t = t_new;
        iterations += 1;
        x = primal(&p);
        let (gk, objk) = gap(&x, &p);
        rel = gk / objk.max(f64::MIN_POSITIVE);
    }
    (
        x,
        TvOutcome {
            iterations,
            relative_gap: rel,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(Complex64::default(), 1.0), Complex64::default());
        assert_eq!(soft_threshold(Complex64::new(0.6, 0.8), 1.0), Complex64::default());
        let s = soft_threshold(Complex64::new(3.0, 4.0), 1.0);
        assert!((s - Complex64::new(2.4, 3.2)).norm() < 1e-12);
    }

    #[test]
    fn gradient_adjoint_is_the_transpose() {
        let dims = [4, 3, 5];
        let n = 60;
        let x: Vec<f64> = (0..n).map(|i| ((i * 7) % 11) as f64 - 3.0).collect();
        let p = [
            (0..n).map(|i| (i as f64).sin()).collect::<Vec<_>>(),
            (0..n).map(|i| (i as f64).cos()).collect::<Vec<_>>(),
            (0..n).map(|i| (0.3 * i as f64).sin()).collect::<Vec<_>>(),
        ];
        let g = gradient(&x, dims);
        let lhs: f64 = (0..3).map(|a| g[a].iter().zip(&p[a]).map(|(u, v)| u * v).sum::<f64>()).sum();
        let gt = gradient_adjoint(&p, dims);
        let rhs: f64 = x.iter().zip(&gt).map(|(u, v)| u * v).sum();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn zero_weight_and_constant_input() {
        let dims = [3, 3, 3];
        let b: Vec<f64> = (0..27).map(|i| i as f64).collect();
        let (x, _) = tv_prox(&b, 0.0, 2.0, 20.0, dims, TvOptions::default());
        assert_eq!(x, b.iter().map(|v| v.clamp(2.0, 20.0)).collect::<Vec<_>>());
        let c = vec![5.0; 27];
        let (y, out) = tv_prox(&c, 3.0, 0.0, 10.0, dims, TvOptions::default());
        assert_eq!(y, c);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn two_point_closed_form() {
        let (a, b, lambda) = (7.0, 2.0, 0.75);
        let opts = TvOptions {
            gap_tol: 1e-15,
            max_iters: 20_000,
        };
        let (x, _) = tv_prox(&[a, b], lambda, -100.0, 100.0, [2, 1, 1], opts);
        assert!((x[0] - (a - lambda)).abs() < 1e-8);
        assert!((x[1] - (b + lambda)).abs() < 1e-8);
        let (y, _) = tv_prox(&[a, b], 10.0, -100.0, 100.0, [2, 1, 1], opts);
        assert!((y[0] - 4.5).abs() < 1e-8 && (y[1] - 4.5).abs() < 1e-8);
    }
}
