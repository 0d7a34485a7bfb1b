//! Per-zone operators, state and the local ADMM subproblems.
//!
//! Wave-equation rows are restricted to zone-interior nodes, whose element
//! stencils lie entirely inside the zone. All quantities are in the solver's
//! internal units (see [`super::params`]).

use num_complex::Complex64;

use super::fft::Fft3;
use super::params::AdmmParams;
use super::prox::{l1_norm, soft_threshold};
use crate::error::{Error, Result};
use crate::factor::HermitianPattern;
use crate::fem::{assemble_mass, assemble_pressure_coupling, inversion_operator, lattice_gradient_operator, stiffness_unchecked, DofMap};
use crate::forward::krylov::{norm, pcg};
use crate::grid::VoxelGrid;
use crate::sparse::SparseOperator;

/// Relative normal-equation residual required of the local solves.
pub const LOCAL_TOL: f64 = 1e-8;
/// Target normal-equation residual of the displacement solves; iterates
/// that stall below [`LOCAL_TOL`] are accepted.
const DISPLACEMENT_TOL: f64 = 1e-10;
const REFINEMENT_STEPS: usize = 6;
const CG_MAX_ITERS: usize = 5000;

/// Operators shared by all zones of one size.
pub(crate) struct ZoneKit {
    pub dof: DofMap,
    /// Dof indices of the zone-interior nodes.
    pub interior: Vec<usize>,
    /// Mass matrix at unit density, all zone rows.
    pub mass: SparseOperator,
    /// `K_p` restricted to interior rows.
    pub kp: SparseOperator,
    /// Element-lattice forward differences.
    pub grad: SparseOperator,
    pub fft: Fft3,
    /// Symbolic analysis of the elasticity normal equations.
    pub pattern: HermitianPattern,
    pub n_freq: usize,
}

impl ZoneKit {
    /// `dims` in voxels; `spacing` in internal units.
    pub fn new(dims: [usize; 3], spacing: [f64; 3], n_freq: usize) -> Result<Self> {
        let dof = DofMap::new(VoxelGrid::new(dims, spacing)?);
        let interior: Vec<usize> = (0..dof.n_nodes())
            .filter(|&n| !dof.is_boundary_node(n))
            .flat_map(|n| [3 * n, 3 * n + 1, 3 * n + 2])
            .collect();
        let all_cols: Vec<Option<usize>> = (0..dof.n_elements()).map(Some).collect();
        let kp = assemble_pressure_coupling(&dof).select(&interior, &all_cols, dof.n_elements());
        let mass = assemble_mass(1.0, &dof)?;
        let grad = lattice_gradient_operator(&dof.element_lattice());
        let fft = Fft3::new(dims);
        let mut kit = Self {
            dof,
            interior,
            mass,
            kp,
            grad,
            fft,
            pattern: HermitianPattern::new(&SparseOperator::identity(1))?,
            n_freq,
        };
        let probe = vec![Complex64::new(1.0, 0.0); 3 * kit.dof.n_nodes() * n_freq];
        let lam = vec![Complex64::default(); kit.n_rows() * n_freq];
        let (b, _) = kit.elasticity_system(&probe, &lam, &vec![1.0; n_freq], 1.0)?;
        let h = kit.elasticity_normal(&b, 1.0, 1.0, 1.0)?;
        kit.pattern = HermitianPattern::new(&h)?;
        Ok(kit)
    }

    pub fn n_nodes(&self) -> usize {
        self.dof.n_nodes()
    }

    pub fn n_elements(&self) -> usize {
        self.dof.n_elements()
    }

    pub fn n_rows(&self) -> usize {
        self.interior.len()
    }

    fn restrict_rows(&self, op: &SparseOperator) -> SparseOperator {
        let cols: Vec<Option<usize>> = (0..op.cols()).map(Some).collect();
        op.select(&self.interior, &cols, op.cols())
    }

    /// Stacked `B = [K_u(w_j) | I_J ⊗ K_p]` (interior rows) and the target
    /// `c = 𝔽(W) − λ_c`, for unknowns `[ν; Q_1; …; Q_J]`.
    fn elasticity_system(
        &self,
        w: &[Complex64],
        lam_c: &[Complex64],
        omegas: &[f64],
        density: f64,
    ) -> Result<(SparseOperator, Vec<Complex64>)> {
        let n_u = 3 * self.n_nodes();
        let m = self.n_elements();
        let rows = self.n_rows();
        let j_count = omegas.len();
        let mut triplets = Vec::new();
        let mut target = Vec::with_capacity(rows * j_count);
        for (j, &omega) in omegas.iter().enumerate() {
            let wj = &w[j * n_u..(j + 1) * n_u];
            let ku = self.restrict_rows(&inversion_operator(wj, &self.dof)?);
            for r in 0..rows {
                let (idx, vals) = ku.row(r);
                triplets.extend(idx.iter().zip(vals).map(|(&c, &v)| (j * rows + r, c, v)));
                let (idx, vals) = self.kp.row(r);
                triplets.extend(idx.iter().zip(vals).map(|(&c, &v)| (j * rows + r, (1 + j) * m + c, v)));
            }
            let mw = self.mass.mul_vec(wj);
            let scale = omega * omega * density;
            target.extend(
                self.interior
                    .iter()
                    .zip(&lam_c[j * rows..(j + 1) * rows])
                    .map(|(&d, l)| mw[d] * scale - l),
            );
        }
        let b = SparseOperator::from_triplets(rows * j_count, m * (1 + j_count), triplets)?;
        Ok((b, target))
    }

    /// `α_c BᴴB + blockdiag(α_μ I, γ_p ∇ᵀ∇, …)`.
    fn elasticity_normal(&self, b: &SparseOperator, alpha_c: f64, alpha_mu: f64, gamma_p: f64) -> Result<SparseOperator> {
        let m = self.n_elements();
        let j_count = self.n_freq;
        let btb = b.adjoint().matmul(b)?;
        let gtg = self.grad.adjoint().matmul(&self.grad)?;
        let mut reg = Vec::new();
        for e in 0..m {
            reg.push((e, e, Complex64::new(alpha_mu, 0.0)));
        }
        for j in 0..j_count {
            let off = (1 + j) * m;
            for r in 0..m {
                let (idx, vals) = gtg.row(r);
                reg.extend(idx.iter().zip(vals).map(|(&c, &v)| (off + r, off + c, v * gamma_p)));
            }
        }
        let reg = SparseOperator::from_triplets(btb.rows(), btb.cols(), reg)?;
        SparseOperator::linear_combination(&[(Complex64::new(alpha_c, 0.0), &btb), (Complex64::new(1.0, 0.0), &reg)])
    }

    /// `[K_μ(ν) − ω²ρM]` on interior rows.
    pub fn wave_operator(&self, nu: &[Complex64], omega: f64, density: f64) -> Result<SparseOperator> {
        let k = stiffness_unchecked(nu, &self.dof);
        let a = SparseOperator::linear_combination(&[
            (Complex64::new(1.0, 0.0), &k),
            (Complex64::new(-omega * omega * density, 0.0), &self.mass),
        ])?;
        Ok(self.restrict_rows(&a))
    }
}

/// Primal and dual variables of one zone.
#[derive(Debug, Clone)]
pub(crate) struct ZoneState {
    pub zone_id: usize,
    /// Global voxel index of each zone voxel.
    pub voxels: Vec<usize>,
    /// Global element index of each zone element.
    pub elements: Vec<usize>,
    /// Measured displacement `S_i v_j`, frequencies stacked.
    pub v: Vec<Complex64>,
    pub nu: Vec<Complex64>,
    pub q: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub w_hat: Vec<Complex64>,
    pub lam_c: Vec<Complex64>,
    pub lam_w: Vec<Complex64>,
    pub lam_mu: Vec<Complex64>,
}

/// Objective value before and after one local update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectivePair {
    pub before: f64,
    pub after: f64,
}

/// Squared norms of the constraint residuals after a dual update.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ResidualNorms {
    pub wave: f64,
    pub load: f64,
    pub kspace: f64,
    pub displacement: f64,
    pub consensus: f64,
    pub modulus: f64,
}

fn sq(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

impl ZoneState {
    pub fn new(zone_id: usize, voxels: Vec<usize>, elements: Vec<usize>, v: Vec<Complex64>, kit: &ZoneKit, mu0: &[Complex64]) -> Self {
        let j = kit.n_freq;
        let m = kit.n_elements();
        let n_u = 3 * kit.n_nodes();
        let zero = Complex64::default();
        Self {
            zone_id,
            voxels,
            elements,
            w: v.clone(),
            v,
            nu: mu0.to_vec(),
            q: vec![zero; j * m],
            w_hat: vec![zero; j * n_u],
            lam_c: vec![zero; j * kit.n_rows()],
            lam_w: vec![zero; j * n_u],
            lam_mu: vec![zero; m],
        }
    }

    fn elasticity_objective(
        &self,
        kit: &ZoneKit,
        b: &SparseOperator,
        c: &[Complex64],
        x: &[Complex64],
        mu_zone: &[Complex64],
        p: &AdmmParams,
    ) -> f64 {
        let m = kit.n_elements();
        let bx = b.mul_vec(x);
        let fit: f64 = bx.iter().zip(c).map(|(a, t)| (a - t).norm_sqr()).sum();
        let prior: f64 = (0..m).map(|e| (x[e] - mu_zone[e] + self.lam_mu[e]).norm_sqr()).sum();
        let smooth: f64 = (0..kit.n_freq).map(|j| sq(&kit.grad.mul_vec(&x[(1 + j) * m..(2 + j) * m]))).sum();
        0.5 * p.alpha_c * fit + 0.5 * p.alpha_mu * prior + 0.5 * p.gamma_p * smooth
    }

    /// Joint least-squares update of `(ν_i, Q_i)` with `W_i`, `μ` and the duals fixed.
    pub fn update_elasticity(
        &mut self,
        kit: &ZoneKit,
        mu_zone: &[Complex64],
        p: &AdmmParams,
        omegas: &[f64],
        density: f64,
    ) -> Result<ObjectivePair> {
        let m = kit.n_elements();
        let (b, c) = kit.elasticity_system(&self.w, &self.lam_c, omegas, density)?;
        let h = kit.elasticity_normal(&b, p.alpha_c, p.alpha_mu, p.gamma_p)?;
        let mut rhs = b.mul_vec_adjoint(&c);
        rhs.iter_mut().for_each(|v| *v *= p.alpha_c);
        for e in 0..m {
            rhs[e] += (mu_zone[e] - self.lam_mu[e]) * p.alpha_mu;
        }
        let mut x: Vec<Complex64> = self.nu.iter().chain(&self.q).copied().collect();
        let before = self.elasticity_objective(kit, &b, &c, &x, mu_zone, p);
        let rhs_norm = norm(&rhs);
        if rhs_norm == 0.0 && h.values().iter().all(|v| *v == Complex64::default()) {
            return Ok(ObjectivePair { before, after: before });
        }
        let fresh;
        let pattern = if kit.pattern.matches(&h) {
            &kit.pattern
        } else {
            fresh = HermitianPattern::new(&h)?;
            &fresh
        };
        let factor = pattern.factor(&h).map_err(|e| zone_error(self.zone_id, "elasticity", e))?;
        let mut residual = vec![Complex64::default(); rhs.len()];
        let mut rel = f64::INFINITY;
        for _ in 0..REFINEMENT_STEPS {
            h.apply(&x, &mut residual);
            for (r, b) in residual.iter_mut().zip(&rhs) {
                *r = b - *r;
            }
            rel = norm(&residual) / rhs_norm.max(f64::MIN_POSITIVE);
            if rel < 0.1 * LOCAL_TOL {
                break;
            }
            factor.solve(&mut residual);
            for (xi, d) in x.iter_mut().zip(&residual) {
                *xi += d;
            }
        }
        h.apply(&x, &mut residual);
        for (r, b) in residual.iter_mut().zip(&rhs) {
            *r = b - *r;
        }
        rel = rel.min(norm(&residual) / rhs_norm.max(f64::MIN_POSITIVE));
        if !(rel < LOCAL_TOL) {
            return Err(Error::Stagnation {
                context: format!("zone {} elasticity update", self.zone_id),
                iterations: REFINEMENT_STEPS,
                residual: rel,
            });
        }
        let after = self.elasticity_objective(kit, &b, &c, &x, mu_zone, p);
        self.nu.copy_from_slice(&x[..m]);
        self.q.copy_from_slice(&x[m..]);
        Ok(ObjectivePair { before, after })
    }

    /// Per-frequency least-squares update of `W_i` followed by the k-space
    /// soft-threshold and the dual ascent step. `mu_zone` is `T_i μ` for the
    /// freshly updated global modulus.
    pub fn update_displacement_kspace_duals(
        &mut self,
        kit: &ZoneKit,
        mu_zone: &[Complex64],
        p: &AdmmParams,
        omegas: &[f64],
        density: f64,
    ) -> Result<(ObjectivePair, ObjectivePair, ResidualNorms)> {
        let n_u = 3 * kit.n_nodes();
        let m = kit.n_elements();
        let rows = kit.n_rows();
        let shift = p.data_weight + p.alpha_w;
        let mut disp = ObjectivePair { before: 0.0, after: 0.0 };
        let mut waves = Vec::with_capacity(omegas.len());
        for (j, &omega) in omegas.iter().enumerate() {
            let a = kit.wave_operator(&self.nu, omega, density)?;
            let kq = kit.kp.mul_vec(&self.q[j * m..(j + 1) * m]);
            let offset: Vec<Complex64> = kq.iter().zip(&self.lam_c[j * rows..(j + 1) * rows]).map(|(x, l)| x + l).collect();
            let mut spectral: Vec<Complex64> = self.w_hat[j * n_u..(j + 1) * n_u]
                .iter()
                .zip(&self.lam_w[j * n_u..(j + 1) * n_u])
                .map(|(h, l)| h - l)
                .collect();
            spectral = kit.fft.inverse_vector(&spectral);
            let vj = &self.v[j * n_u..(j + 1) * n_u];
            let objective = |w: &[Complex64]| -> f64 {
                let aw = a.mul_vec(w);
                let wave: f64 = aw.iter().zip(&offset).map(|(x, o)| (x + o).norm_sqr()).sum();
                let data: f64 = w.iter().zip(vj).map(|(x, v)| (x - v).norm_sqr()).sum();
                let split: f64 = w.iter().zip(&spectral).map(|(x, s)| (x - s).norm_sqr()).sum();
                0.5 * p.alpha_c * wave + 0.5 * p.data_weight * data + 0.5 * p.alpha_w * split
            };
            let wj_old = self.w[j * n_u..(j + 1) * n_u].to_vec();
            disp.before += objective(&wj_old);

            let mut rhs = a.mul_vec_adjoint(&offset);
            for (i, r) in rhs.iter_mut().enumerate() {
                *r = -*r * p.alpha_c + vj[i] * p.data_weight + spectral[i] * p.alpha_w;
            }
            let diag_inv: Vec<f64> = a
                .column_norms_sqr()
                .iter()
                .map(|c| {
                    let d = p.alpha_c * c + shift;
                    if d > 0.0 {
                        1.0 / d
                    } else {
                        1.0
                    }
                })
                .collect();
            let mut tmp = vec![Complex64::default(); rows];
            let mut wj = wj_old;
            let outcome = pcg(
                |x, y| {
                    a.apply(x, &mut tmp);
                    a.apply_adjoint(&tmp, y);
                    for (yi, xi) in y.iter_mut().zip(x) {
                        *yi = *yi * p.alpha_c + xi * shift;
                    }
                },
                &diag_inv,
                &rhs,
                &mut wj,
                DISPLACEMENT_TOL,
                CG_MAX_ITERS,
            );
            match outcome {
                Ok(_) => {}
                Err(Error::Stagnation { residual, .. }) if residual < LOCAL_TOL => {}
                Err(e) => return Err(zone_error(self.zone_id, &format!("displacement (frequency {j})"), e)),
            }
            disp.after += objective(&wj);
            self.w[j * n_u..(j + 1) * n_u].copy_from_slice(&wj);
            waves.push((a, kq));
        }

        let tau = if p.alpha_x > 0.0 {
            p.gamma_u / p.alpha_x
        } else if p.gamma_u > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        let mut kspace = ObjectivePair { before: 0.0, after: 0.0 };
        let mut spectra = Vec::with_capacity(omegas.len());
        for j in 0..omegas.len() {
            let fw = kit.fft.forward_vector(&self.w[j * n_u..(j + 1) * n_u]);
            let lam = &self.lam_w[j * n_u..(j + 1) * n_u];
            let objective = |h: &[Complex64]| -> f64 {
                let split: f64 = (0..n_u).map(|i| (fw[i] - h[i] + lam[i]).norm_sqr()).sum();
                p.gamma_u * l1_norm(h) + 0.5 * p.alpha_x * split
            };
            kspace.before += objective(&self.w_hat[j * n_u..(j + 1) * n_u]);
            let new_hat: Vec<Complex64> = (0..n_u).map(|i| soft_threshold(fw[i] + lam[i], tau)).collect();
            kspace.after += objective(&new_hat);
            self.w_hat[j * n_u..(j + 1) * n_u].copy_from_slice(&new_hat);
            spectra.push(fw);
        }

        let mut res = ResidualNorms::default();
        for (j, (a, kq)) in waves.iter().enumerate() {
            let wj = &self.w[j * n_u..(j + 1) * n_u];
            let aw = a.mul_vec(wj);
            let mw = kit.mass.mul_vec(wj);
            let scale = omegas[j] * omegas[j] * density;
            for r in 0..rows {
                let c = aw[r] + kq[r];
                self.lam_c[j * rows + r] += c;
                res.wave += c.norm_sqr();
                res.load += (mw[kit.interior[r]] * scale).norm_sqr();
            }
            for i in 0..n_u {
                let d = spectra[j][i] - self.w_hat[j * n_u + i];
                self.lam_w[j * n_u + i] += d;
                res.kspace += d.norm_sqr();
            }
            res.displacement += sq(wj);
        }
        for e in 0..m {
            let d = self.nu[e] - mu_zone[e];
            self.lam_mu[e] += d;
            res.consensus += d.norm_sqr();
            res.modulus += mu_zone[e].norm_sqr();
        }
        Ok((disp, kspace, res))
    }
}

fn zone_error(zone: usize, what: &str, e: Error) -> Error {
    match e {
        Error::Stagnation { iterations, residual, .. } => Error::Stagnation {
            context: format!("zone {zone} {what} update"),
            iterations,
            residual,
        },
        Error::Singular(msg) => Error::Singular(format!("zone {zone} {what} update: {msg}")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{solve_forward_elements, BoundaryConditions, ForwardOptions};

    const N: usize = 12;
    const RHO: f64 = 2.25e-3;
    const OMEGA: f64 = 2.0 * std::f64::consts::PI * 200.0;

    fn params() -> AdmmParams {
        AdmmParams {
            alpha_c: 1.0,
            alpha_mu: 1e-3,
            data_weight: 1.0,
            alpha_x: 1e-3,
            alpha_w: 1e-2,
            gamma_u: 1e-3,
            gamma_mu: 0.0,
            gamma_p: 1e-6,
            mu_re_bounds: (0.33, 40.0),
            mu_im_bounds: (0.0, 10.0),
            tol_mu: 1e-3,
            max_iter: 10,
        }
    }

    fn kit() -> ZoneKit {
        ZoneKit::new([N; 3], [1.0; 3], 1).unwrap()
    }

    fn state(kit: &ZoneKit, v: Vec<Complex64>, mu0: Complex64) -> ZoneState {
        let m = kit.n_elements();
        ZoneState::new(0, (0..N * N * N).collect(), (0..m).collect(), v, kit, &vec![mu0; m])
    }

    /// Noiseless wave field of a homogeneous 10 kPa zone, largest magnitude 1.
    fn consistent_field(kit: &ZoneKit) -> (Vec<Complex64>, Vec<Complex64>) {
        let mu = vec![Complex64::new(10.0, 0.0); kit.n_elements()];
        let bc = BoundaryConditions::bottom_driven_shear(&kit.dof, Complex64::new(1.0, 0.0));
        let sol = solve_forward_elements(&mu, RHO, 0.495, OMEGA, &bc, &kit.dof, &ForwardOptions::default()).unwrap();
        let u = sol.displacement.into_values();
        let peak = u.iter().map(|v| v.norm()).fold(0.0, f64::max);
        (u.iter().map(|v| v / peak).collect(), sol.element_pressure.iter().map(|v| v / peak).collect())
    }

    fn inner_elements(kit: &ZoneKit) -> Vec<usize> {
        (0..kit.n_elements())
            .filter(|&e| kit.dof.element_coords(e).iter().all(|&c| c >= 1 && c + 2 < N))
            .collect()
    }

    fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        let d: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        norm(&d) / norm(b).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn zero_displacement_gives_the_prior_solution() {
        let kit = kit();
        let m = kit.n_elements();
        let n_u = 3 * kit.n_nodes();
        let mut s = state(&kit, vec![Complex64::default(); n_u], Complex64::new(3.0, 0.0));
        s.lam_mu = (0..m).map(|e| Complex64::new(0.01 * e as f64, -0.02)).collect();
        let mu: Vec<Complex64> = (0..m).map(|e| Complex64::new(5.0 + (e % 3) as f64, 0.5)).collect();
        let pair = s.update_elasticity(&kit, &mu, &params(), &[OMEGA], RHO).unwrap();
        for e in 0..m {
            assert!((s.nu[e] - (mu[e] - s.lam_mu[e])).norm() < 1e-10);
        }
        assert!(s.q.iter().all(|q| q.norm() < 1e-10), "max |Q| = {}", s.q.iter().map(|q| q.norm()).fold(0.0, f64::max));
        assert!(pair.after <= pair.before);
    }

    #[test]
    fn consistent_field_recovers_the_modulus() {
        let kit = kit();
        let (u, _) = consistent_field(&kit);
        let mut s = state(&kit, u, Complex64::new(3.0, 0.0));
        let mut p = params();
        p.alpha_mu = 1e-9;
        p.gamma_p = 1e-9;
        s.update_elasticity(&kit, &vec![Complex64::new(3.0, 0.0); kit.n_elements()], &p, &[OMEGA], RHO)
            .unwrap();
        for e in inner_elements(&kit) {
            assert!((s.nu[e].re - 10.0).abs() < 0.2 && s.nu[e].im.abs() < 0.2, "element {e}: {}", s.nu[e]);
        }
    }

    #[test]
    fn scaling_the_displacement_leaves_the_modulus_unchanged() {
        let kit = kit();
        let (u, _) = consistent_field(&kit);
        let mut p = params();
        p.alpha_mu = 1e-9;
        p.gamma_p = 1e-9;
        let mu = vec![Complex64::new(3.0, 0.0); kit.n_elements()];
        let mut a = state(&kit, u.clone(), mu[0]);
        a.update_elasticity(&kit, &mu, &p, &[OMEGA], RHO).unwrap();
        let c = Complex64::new(-0.3, 0.7);
        let mut b = state(&kit, u.iter().map(|v| v * c).collect(), mu[0]);
        b.update_elasticity(&kit, &mu, &p, &[OMEGA], RHO).unwrap();
        let inner = inner_elements(&kit);
        let na: Vec<Complex64> = inner.iter().map(|&e| a.nu[e]).collect();
        let nb: Vec<Complex64> = inner.iter().map(|&e| b.nu[e]).collect();
        assert!(rel_diff(&nb, &na) < 1e-4, "{}", rel_diff(&nb, &na));
    }

    #[test]
    fn pure_data_term_returns_the_measurement() {
        let kit = kit();
        let (u, _) = consistent_field(&kit);
        let noisy: Vec<Complex64> = u.iter().enumerate().map(|(i, v)| v + Complex64::new(0.01 * ((i % 5) as f64 - 2.0), 0.0)).collect();
        let mut s = state(&kit, noisy.clone(), Complex64::new(10.0, 0.0));
        s.w = u;
        let mut p = params();
        p.alpha_c = 0.0;
        p.alpha_w = 0.0;
        let mu = vec![Complex64::new(10.0, 0.0); kit.n_elements()];
        s.update_displacement_kspace_duals(&kit, &mu, &p, &[OMEGA], RHO).unwrap();
        assert!(rel_diff(&s.w, &noisy) < 1e-8);
    }

    #[test]
    fn consistent_state_keeps_the_measurement() {
        let kit = kit();
        let (u, q) = consistent_field(&kit);
        let mut s = state(&kit, u.clone(), Complex64::new(10.0, 0.0));
        s.q = q;
        s.w_hat = kit.fft.forward_vector(&u);
        let mu = vec![Complex64::new(10.0, 0.0); kit.n_elements()];
        s.update_displacement_kspace_duals(&kit, &mu, &params(), &[OMEGA], RHO).unwrap();
        assert!(rel_diff(&s.w, &u) < 1e-2, "{}", rel_diff(&s.w, &u));
    }

    #[test]
    fn wave_only_update_solves_the_constraint() {
        let kit = kit();
        let (u, q) = consistent_field(&kit);
        let mut s = state(&kit, u.iter().map(|v| v * 0.5).collect(), Complex64::new(10.0, 0.0));
        s.q = q.clone();
        let mu = vec![Complex64::new(10.0, 0.0); kit.n_elements()];
        let wave_residual = |s: &ZoneState| {
            let a = kit.wave_operator(&s.nu, OMEGA, RHO).unwrap();
            let r: Vec<Complex64> = a.mul_vec(&s.w).iter().zip(kit.kp.mul_vec(&s.q)).map(|(x, y)| x + y).collect();
            norm(&r)
        };
        let before = wave_residual(&s);
        let mut p = params();
        p.data_weight = 0.0;
        p.alpha_w = 0.0;
        p.gamma_u = 0.0;
        s.update_displacement_kspace_duals(&kit, &mu, &p, &[OMEGA], RHO).unwrap();
        assert!(wave_residual(&s) < 1e-8 * before, "{} vs {before}", wave_residual(&s));
    }

    #[test]
    fn duals_accumulate_raw_residuals() {
        let kit = kit();
        let (u, _) = consistent_field(&kit);
        let m = kit.n_elements();
        let mut s = state(&kit, u, Complex64::new(7.0, 0.0));
        let mu1 = vec![Complex64::new(9.0, 0.1); m];
        let mu2 = vec![Complex64::new(8.0, 0.3); m];
        let p = params();
        let mut expected = vec![Complex64::default(); m];
        for mu in [&mu1, &mu2] {
            s.update_elasticity(&kit, mu, &p, &[OMEGA], RHO).unwrap();
            let nu = s.nu.clone();
            let lam_w = s.lam_w.clone();
            let (_, _, res) = s.update_displacement_kspace_duals(&kit, mu, &p, &[OMEGA], RHO).unwrap();
            for e in 0..m {
                expected[e] += nu[e] - mu[e];
            }
            let spectrum = kit.fft.forward_vector(&s.w);
            let step: Vec<Complex64> = spectrum.iter().zip(&s.w_hat).map(|(a, b)| a - b).collect();
            let got: Vec<Complex64> = s.lam_w.iter().zip(&lam_w).map(|(a, b)| a - b).collect();
            assert!(rel_diff(&got, &step) < 1e-12);
            assert!((res.kspace - sq(&step)).abs() <= 1e-10 * res.kspace.max(1.0));
        }
        assert!(rel_diff(&s.lam_mu, &expected) < 1e-14);
    }

    #[test]
    fn satisfied_constraints_leave_the_duals_unchanged() {
        let kit = kit();
        let (u, q) = consistent_field(&kit);
        let m = kit.n_elements();
        let mut s = state(&kit, u.clone(), Complex64::new(10.0, 0.0));
        s.q = q;
        s.w_hat = kit.fft.forward_vector(&u);
        let mut p = params();
        p.data_weight = 1e6;
        p.gamma_u = 0.0;
        s.lam_mu = vec![Complex64::new(0.25, -0.5); m];
        let before_mu = s.lam_mu.clone();
        let mu = vec![Complex64::new(10.0, 0.0); m];
        let (_, _, res) = s.update_displacement_kspace_duals(&kit, &mu, &p, &[OMEGA], RHO).unwrap();
        assert_eq!(s.lam_mu, before_mu);
        assert!(res.consensus == 0.0);
        assert!(res.wave < 1e-12 * res.load, "{} vs {}", res.wave, res.load);
        assert!(res.kspace < 1e-12 * res.displacement);
    }

    #[test]
    fn local_updates_do_not_increase_their_objectives() {
        let kit = kit();
        let (u, _) = consistent_field(&kit);
        let noisy: Vec<Complex64> = u.iter().enumerate().map(|(i, v)| v + Complex64::new(0.0, 0.02 * ((i * 7 % 11) as f64 - 5.0))).collect();
        let mut s = state(&kit, noisy, Complex64::new(3.0, 0.0));
        let mu = vec![Complex64::new(6.0, 0.2); kit.n_elements()];
        let a = kit.wave_operator(&mu, OMEGA, RHO).unwrap();
        let mut p = params();
        p.data_weight = crate::forward::max_eig_normal(&a, 1e-4, 300).unwrap() / 16.0;
        p.alpha_w = 1e-2 * p.data_weight;
        p.alpha_x = 1e-3 * p.data_weight;
        for _ in 0..3 {
            let e = s.update_elasticity(&kit, &mu, &p, &[OMEGA], RHO).unwrap();
            let (d, k, _) = s.update_displacement_kspace_duals(&kit, &mu, &p, &[OMEGA], RHO).unwrap();
            for pair in [e, d, k] {
                assert!(pair.after <= pair.before + 1e-10 * pair.before.abs().max(1.0), "{pair:?}");
            }
        }
    }
}
