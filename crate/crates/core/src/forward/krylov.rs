//! Restarted GMRES with right preconditioning for complex systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub tol: f64,
    pub restart: usize,
    pub max_iters: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct GmresOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves `A x = b` starting from the contents of `x`.
///
/// `apply(v, out)` computes `out = A v`; `precond(v, out)` computes `out ≈ A⁻¹ v`.
pub fn gmres(
    mut apply: impl FnMut(&[Complex64], &mut [Complex64]),
    mut precond: impl FnMut(&[Complex64], &mut [Complex64]),
    b: &[Complex64],
    x: &mut [Complex64],
    opts: GmresOptions,
) -> Result<GmresOutcome> {
    let n = b.len();
    assert_eq!(x.len(), n);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = Complex64::default());
        return Ok(GmresOutcome {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let m = opts.restart.max(1);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
    let mut h = vec![vec![Complex64::default(); m]; m + 1];
    let mut cs = vec![0.0; m];
    let mut sn = vec![Complex64::default(); m];
    let mut g = vec![Complex64::default(); m + 1];
    let mut work = vec![Complex64::default(); n];
    let mut z = vec![Complex64::default(); n];
    let mut r = vec![Complex64::default(); n];
    let mut total = 0;

    loop {
        apply(x, &mut work);
        for i in 0..n {
            r[i] = b[i] - work[i];
        }
        let beta = norm(&r);
        let rel = beta / bnorm;
        if !rel.is_finite() {
            return Err(Error::Singular("non-finite residual in GMRES".into()));
        }
        if rel < opts.tol {
            return Ok(GmresOutcome {
                iterations: total,
                relative_residual: rel,
            });
        }
        if total >= opts.max_iters {
            return Err(Error::Stagnation {
                context: "GMRES".into(),
                iterations: total,
                residual: rel,
            });
        }
        basis.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        g.iter_mut().for_each(|v| *v = Complex64::default());
        g[0] = Complex64::new(beta, 0.0);
        let mut k = 0;
        while k < m && total < opts.max_iters {
            precond(&basis[k], &mut z);
            apply(&z, &mut work);
            for i in 0..=k {
                let hik = dot(&basis[i], &work);
                h[i][k] = hik;
                for (w, v) in work.iter_mut().zip(&basis[i]) {
                    *w -= hik * v;
                }
            }
            let hnext = norm(&work);
            h[k + 1][k] = Complex64::new(hnext, 0.0);
            for i in 0..k {
                let t = h[i][k] * cs[i] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i].conj() * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let a = h[k][k];
            let denom = (a.norm_sqr() + hnext * hnext).sqrt();
            if denom == 0.0 {
                return Err(Error::Singular("GMRES breakdown".into()));
            }
            if a.norm() == 0.0 {
                cs[k] = 0.0;
                sn[k] = Complex64::new(1.0, 0.0);
            } else {
                cs[k] = a.norm() / denom;
                sn[k] = a / a.norm() * hnext / denom;
            }
            h[k][k] = cs[k] * a + sn[k] * hnext;
            h[k + 1][k] = Complex64::default();
            g[k + 1] = -sn[k].conj() * g[k];
            g[k] *= cs[k];
            total += 1;
            k += 1;
            let est = g[k].norm() / bnorm;
            if est < opts.tol || hnext == 0.0 {
                break;
            }
            basis.push(work.iter().map(|v| v / hnext).collect());
        }
        let mut y = vec![Complex64::default(); k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        work.iter_mut().for_each(|v| *v = Complex64::default());
        for (yi, vi) in y.iter().zip(&basis) {
            for (w, v) in work.iter_mut().zip(vi) {
                *w += yi * v;
            }
        }
        precond(&work, &mut z);
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi += zi;
        }
    }
}

/// Preconditioned conjugate gradients for a Hermitian positive
/// (semi)definite `A`, starting from the contents of `x`. `diag_inv` is the
/// Jacobi preconditioner. Returns the iteration count and the final relative
/// residual `‖b − A x‖ / ‖b‖`.
pub(crate) fn pcg(
    mut apply: impl FnMut(&[Complex64], &mut [Complex64]),
    diag_inv: &[f64],
    b: &[Complex64],
    x: &mut [Complex64],
    tol: f64,
    max_iters: usize,
) -> Result<(usize, f64)> {
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.fill(Complex64::default());
        return Ok((0, 0.0));
    }
    let mut r = vec![Complex64::default(); n];
    apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<Complex64> = r.iter().zip(diag_inv).map(|(v, d)| v * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z).re;
    let mut ap = vec![Complex64::default(); n];
    let mut rel = norm(&r) / bnorm;
    for it in 0..max_iters {
        if rel < tol {
            return Ok((it, rel));
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap).re;
        if !(pap.is_finite() && pap > 0.0) {
            return Err(Error::Stagnation {
                context: "CG (operator not positive definite)".into(),
                iterations: it,
                residual: rel,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += p[i] * alpha;
            r[i] -= ap[i] * alpha;
            z[i] = r[i] * diag_inv[i];
        }
        let rz_new = dot(&r, &z).re;
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + p[i] * beta;
        }
        rel = norm(&r) / bnorm;
    }
    if rel < tol {
        return Ok((max_iters, rel));
    }
    Err(Error::Stagnation {
        context: "CG".into(),
        iterations: max_iters,
        residual: rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_small_nonsymmetric_system() {
        let n = 30;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a: Vec<Vec<Complex64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let base = Complex64::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
                        if i == j {
                            base + Complex64::new(4.0, 1.0)
                        } else {
                            base
                        }
                    })
                    .collect()
            })
            .collect();
        let xs: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, -1.0)).collect();
        let b: Vec<Complex64> = a.iter().map(|row| row.iter().zip(&xs).map(|(p, q)| p * q).sum()).collect();
        let mut x = vec![Complex64::default(); n];
        let mv = |v: &[Complex64], out: &mut [Complex64]| {
            for (o, row) in out.iter_mut().zip(&a) {
                *o = row.iter().zip(v).map(|(p, q)| p * q).sum();
            }
        };
        let out = gmres(
            mv,
            |v, o| o.copy_from_slice(v),
            &b,
            &mut x,
            GmresOptions {
                tol: 1e-12,
                restart: 7,
                max_iters: 500,
            },
        )
        .unwrap();
        assert!(out.relative_residual < 1e-12);
        for (p, q) in x.iter().zip(&xs) {
            assert!((p - q).norm() < 1e-9);
        }
    }

    #[test]
    fn pcg_solves_a_hermitian_system() {
        let n = 40;
        let apply = |x: &[Complex64], y: &mut [Complex64]| {
            for i in 0..n {
                let mut v = x[i] * (4.0 + i as f64 * 0.1);
                if i > 0 {
                    v += x[i - 1] * Complex64::new(-1.0, 0.5);
                }
                if i + 1 < n {
                    v += x[i + 1] * Complex64::new(-1.0, -0.5);
                }
                y[i] = v;
            }
        };
        let want: Vec<Complex64> = (0..n).map(|i| Complex64::new((i as f64).sin(), 1.0)).collect();
        let mut b = vec![Complex64::default(); n];
        apply(&want, &mut b);
        let diag: Vec<f64> = (0..n).map(|i| 1.0 / (4.0 + i as f64 * 0.1)).collect();
        let mut x = vec![Complex64::default(); n];
        let (_, rel) = pcg(apply, &diag, &b, &mut x, 1e-12, 200).unwrap();
        assert!(rel < 1e-12);
        for (a, w) in x.iter().zip(&want) {
            assert!((a - w).norm() < 1e-10);
        }
    }
}
