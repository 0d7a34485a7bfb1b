//! Time-harmonic mixed displacement–pressure solve.

use num_complex::Complex64;

use super::bc::BoundaryConditions;
use super::krylov::{gmres, norm, GmresOptions};
use crate::factor::RealLdlt;
use crate::error::{Error, Result};
use crate::fem::{assemble_mass, assemble_pressure_coupling, assemble_stiffness, DofMap};
use crate::grid::{ComplexScalarField, DisplacementField};
use crate::sparse::SparseOperator;

/// Relative residual required of the reduced saddle system.
pub const FORWARD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct ForwardOptions {
    /// Relative residual target of the condensed displacement system.
    pub tol: f64,
    pub max_iters: usize,
    pub restart: usize,
}

impl Default for ForwardOptions {
    fn default() -> Self {
        Self {
            tol: 0.1 * FORWARD_TOL,
            max_iters: 400,
            restart: 60,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ForwardSolution {
    pub displacement: DisplacementField,
    /// Pressure averaged onto voxels.
    pub pressure: ComplexScalarField,
    /// Element-constant pressure.
    pub element_pressure: Vec<Complex64>,
    pub iterations: usize,
    /// Relative residual of the reduced saddle system (both block rows).
    pub residual: f64,
}

/// Lamé first parameter per element from the real part of μ.
pub fn lame_lambda(mu: Complex64, poisson: f64) -> f64 {
    2.0 * mu.re * poisson / (1.0 - 2.0 * poisson)
}

/// Solves the mixed system for a voxel-valued shear modulus (averaged onto elements).
pub fn solve_forward(
    mu: &ComplexScalarField,
    rho: f64,
    poisson: f64,
    omega: f64,
    bc: &BoundaryConditions,
    dof: &DofMap,
) -> Result<ForwardSolution> {
    if mu.grid() != dof.grid() {
        return Err(Error::DimensionMismatch("modulus grid differs from dof map grid".into()));
    }
    let mu_e = dof.nodal_to_elements(mu.values())?;
    solve_forward_elements(&mu_e, rho, poisson, omega, bc, dof, &ForwardOptions::default())
}

/// Solves
/// `[K_μ − ω²M, K_p; K_pᵀ, −(1/λ)M_p] [u; p] = [0; 0]` with Dirichlet dofs
/// eliminated. The element pressures are condensed out, the displacement
/// system is solved by GMRES preconditioned with a sparse `LDLᵀ` factor of its
/// real part, and the pressures are recovered element by element.
pub fn solve_forward_elements(
    mu_e: &[Complex64],
    rho: f64,
    poisson: f64,
    omega: f64,
    bc: &BoundaryConditions,
    dof: &DofMap,
    opts: &ForwardOptions,
) -> Result<ForwardSolution> {
    if !(poisson > 0.0 && poisson < 0.5) {
        return Err(Error::InvalidArgument(format!("Poisson ratio must lie in (0, 0.5), got {poisson}")));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidArgument(format!("angular frequency must be positive, got {omega}")));
    }
    bc.validate(dof)?;
    let n_u = dof.n_dofs();
    let n_e = dof.n_elements();
    let frequency = omega / (2.0 * std::f64::consts::PI);
    let pinned = bc.constrained_mask();
    let prescribed = bc.prescribed();

    let w2 = Complex64::new(omega * omega, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let a_full = {
        let k = assemble_stiffness(mu_e, dof)?;
        let m = assemble_mass(rho, dof)?;
        SparseOperator::linear_combination(&[(one, &k), (-w2, &m)])?
    };
    if prescribed.iter().all(|v| *v == Complex64::default()) {
        let zeros = vec![Complex64::default(); n_u];
        return Ok(ForwardSolution {
            displacement: DisplacementField::new(*dof.grid(), zeros, frequency)?,
            pressure: ComplexScalarField::constant(*dof.grid(), Complex64::default()),
            element_pressure: vec![Complex64::default(); n_e],
            iterations: 0,
            residual: 0.0,
        });
    }
    let kp = assemble_pressure_coupling(dof);
    let vol: f64 = dof.grid().spacing().iter().product();
    let penalty: Vec<f64> = mu_e.iter().map(|m| lame_lambda(*m, poisson) / vol).collect();
    let inv_penalty: Vec<f64> = penalty.iter().map(|p| 1.0 / p).collect();

    let (condensed, rhs_u) = {
        let mut kp_scaled = kp.clone();
        scale_columns(&mut kp_scaled, &penalty);
        let grad_div = kp_scaled.matmul(&kp.transpose())?;
        drop(kp_scaled);
        let c_full = SparseOperator::linear_combination(&[(one, &a_full), (one, &grad_div)])?;
        drop(grad_div);
        let cu = c_full.mul_vec(&prescribed);
        let rhs: Vec<Complex64> = (0..n_u).map(|d| if pinned[d] { prescribed[d] } else { -cu[d] }).collect();
        (c_full.pin_dofs(&pinned), rhs)
    };
    let factor = RealLdlt::new(&condensed, dof.node_dims(), 3)?;

    let mut u = vec![Complex64::default(); n_u];
    let outcome = gmres(
        |x, y| condensed.apply(x, y),
        |r, z| {
            z.copy_from_slice(r);
            factor.solve(z);
        },
        &rhs_u,
        &mut u,
        GmresOptions {
            tol: opts.tol,
            restart: opts.restart,
            max_iters: opts.max_iters,
        },
    )?;
    drop(factor);
    drop(condensed);

    let element_pressure: Vec<Complex64> = kp
        .mul_vec_transpose(&u)
        .iter()
        .zip(&penalty)
        .map(|(v, p)| v * p)
        .collect();

    let mut rhs = vec![Complex64::default(); n_u + n_e];
    let au = a_full.mul_vec(&prescribed);
    let bu = kp.mul_vec_transpose(&prescribed);
    for d in 0..n_u {
        rhs[d] = if pinned[d] { prescribed[d] } else { -au[d] };
    }
    for e in 0..n_e {
        rhs[n_u + e] = -bu[e];
    }
    let a = a_full.pin_dofs(&pinned);
    drop(a_full);
    let b = kp.zero_rows(&pinned);
    drop(kp);
    let mut x = u;
    x.extend_from_slice(&element_pressure);
    let mut check = vec![Complex64::default(); n_u + n_e];
    saddle_apply(&a, &b, &inv_penalty, &x, &mut check);
    for (c, r) in check.iter_mut().zip(&rhs) {
        *c = r - *c;
    }
    let residual = norm(&check) / norm(&rhs);
    if !residual.is_finite() {
        return Err(Error::NonFinite { iteration: outcome.iterations });
    }
    if residual >= FORWARD_TOL {
        return Err(Error::Stagnation {
            context: "forward solve".into(),
            iterations: outcome.iterations,
            residual,
        });
    }
    x.truncate(n_u);
    let nodal_p = dof.elements_to_nodal(&element_pressure)?;
    Ok(ForwardSolution {
        displacement: DisplacementField::new(*dof.grid(), x, frequency)?,
        pressure: ComplexScalarField::new(*dof.grid(), nodal_p)?,
        element_pressure,
        iterations: outcome.iterations,
        residual,
    })
}

fn scale_columns(op: &mut SparseOperator, s: &[f64]) {
    let rows = op.rows();
    let cols: Vec<usize> = (0..rows).flat_map(|r| op.row(r).0.to_vec()).collect();
    for (v, c) in op.values_mut().iter_mut().zip(cols) {
        *v *= s[c];
    }
}

fn saddle_apply(a: &SparseOperator, b: &SparseOperator, inv_penalty: &[f64], x: &[Complex64], y: &mut [Complex64]) {
    let n_u = a.rows();
    let (xu, xp) = x.split_at(n_u);
    let (yu, yp) = y.split_at_mut(n_u);
    a.apply(xu, yu);
    let bp = b.mul_vec(xp);
    for (v, w) in yu.iter_mut().zip(&bp) {
        *v += w;
    }
    b.apply_transpose(xu, yp);
    for (e, v) in yp.iter_mut().enumerate() {
        *v -= xp[e] * inv_penalty[e];
    }
}
