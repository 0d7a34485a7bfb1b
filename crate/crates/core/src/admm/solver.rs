//! Outer consensus-ADMM loop, the direct baseline, and reconstruction outputs.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use super::params::{compute_params, AdmmParams, ParamInputs, ParamOverrides};
use super::partition::{partition_subzones, SubzonePartition};
use super::prox::{total_variation, tv_prox, TvOptions};
use super::zone::{ObjectivePair, ResidualNorms, ZoneKit, ZoneState};
use crate::error::{Error, Result};
use crate::fem::{assemble_mass, assemble_pressure_coupling, inversion_operator, lattice_gradient_operator, stiffness_unchecked, DofMap};
use crate::forward::{max_eig, max_eig_normal, DEFAULT_EIG_MAX_ITERS, DEFAULT_EIG_TOL};
use crate::grid::plane_fit_slopes;
use crate::grid::{ComplexScalarField, DisplacementField, MultiFrequencyDataset, VoxelGrid};
use crate::sparse::SparseOperator;

/// Reconstruction strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Single-frequency ADMM.
    Ersa,
    /// Joint multifrequency ADMM.
    Mersa,
    /// One linearized inversion per zone with Tikhonov and pressure smoothing, no ADMM loop.
    Direct,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ersa" => Ok(Self::Ersa),
            "mersa" => Ok(Self::Mersa),
            "direct" => Ok(Self::Direct),
            other => Err(Error::InvalidArgument(format!("unknown mode {other:?} (ersa, mersa, direct)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReconstructionConfig {
    pub mode: Mode,
    /// Positions of the dataset entries to use; `None` uses all of them.
    pub frequency_indices: Option<Vec<usize>>,
    pub overrides: ParamOverrides,
    pub zone_mm: f64,
    pub stride_mm: f64,
    /// Starting modulus in Pa.
    pub initial_mu: Complex64,
    /// Plane-fit window for the TV weight.
    pub gradient_span: usize,
    pub tv: TvOptions,
}

impl ReconstructionConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            frequency_indices: None,
            overrides: ParamOverrides::default(),
            zone_mm: 21.0,
            stride_mm: 17.0,
            initial_mu: Complex64::new(3000.0, 0.0),
            gradient_span: 3,
            tv: TvOptions::default(),
        }
    }
}

/// One row of the convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    /// `‖μᵏ − μᵏ⁻¹‖₁` over elements, in Pa.
    pub d_mu_l1: f64,
    /// `‖μᵏ⁻¹‖₁`, in Pa.
    pub mu_l1_prev: f64,
    /// `‖[𝕂_μ − 𝕄]W + 𝕂_pQ‖ / ‖𝕄W‖` over all zones and frequencies.
    pub wave_residual: f64,
    /// `‖ν − Tμ‖ / ‖Tμ‖` over all zones.
    pub consensus_residual: f64,
    /// `‖FFT W − Ŵ‖ / ‖W‖` over all zones and frequencies.
    pub kspace_residual: f64,
}

/// Which update an objective check refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subproblem {
    Elasticity,
    Global,
    Displacement,
    KSpace,
}

/// Objective of one update evaluated before and after it ran.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveCheck {
    pub iteration: usize,
    /// `None` for the global update.
    pub zone: Option<usize>,
    pub subproblem: Subproblem,
    pub before: f64,
    pub after: f64,
}

impl ObjectiveCheck {
    /// True when the update did not raise its objective beyond `slack` relative to `max(|f|, 1)`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.after <= self.before + slack * self.before.abs().max(1.0)
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// Voxel modulus in Pa.
    pub mu: ComplexScalarField,
    /// Element modulus in Pa.
    pub element_mu: Vec<Complex64>,
    /// Stitched displacement per frequency, in the units of the input.
    pub displacement: Vec<DisplacementField>,
    /// Stitched pressure per frequency, in Pa.
    pub pressure: Vec<ComplexScalarField>,
    pub trace: Vec<TraceRow>,
    pub objective_checks: Vec<ObjectiveCheck>,
    pub params: AdmmParams,
    pub iterations: usize,
    pub converged: bool,
}

/// Writes the trace as CSV with header `iter,d_mu_l1,wave_residual,consensus_residual,kspace_residual`.
pub fn write_trace_csv<W: Write>(mut w: W, trace: &[TraceRow]) -> std::io::Result<()> {
    writeln!(w, "iter,d_mu_l1,wave_residual,consensus_residual,kspace_residual")?;
    for r in trace {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{:e}",
            r.iter, r.d_mu_l1, r.wave_residual, r.consensus_residual, r.kspace_residual
        )?;
    }
    Ok(())
}

/// Unit system of one reconstruction: lengths in multiples of `hx`, moduli
/// in kPa and displacements divided by the largest measured magnitude.
#[derive(Debug, Clone, Copy)]
struct Units {
    hx: f64,
    displacement: f64,
}

impl Units {
    const MODULUS: f64 = 1000.0;

    fn density(&self, rho: f64) -> f64 {
        rho * self.hx * self.hx / Self::MODULUS
    }

    fn pressure_to_pa(&self, q: Complex64) -> Complex64 {
        q * (Self::MODULUS * self.displacement / self.hx)
    }
}

struct Problem {
    grid: VoxelGrid,
    internal: DofMap,
    partition: SubzonePartition,
    kit: ZoneKit,
    omegas: Vec<f64>,
    frequencies: Vec<f64>,
    density: f64,
    units: Units,
    /// Measured displacement in internal units, per frequency.
    v: Vec<Vec<Complex64>>,
}

fn select_data(data: &MultiFrequencyDataset, config: &ReconstructionConfig) -> Result<MultiFrequencyDataset> {
    let data = match &config.frequency_indices {
        Some(idx) => data.select(idx)?,
        None => data.clone(),
    };
    if config.mode == Mode::Ersa && data.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "ersa mode needs exactly one frequency, got {}; select one with frequency_indices",
            data.len()
        )));
    }
    Ok(data)
}

fn setup(data: &MultiFrequencyDataset, config: &ReconstructionConfig) -> Result<Problem> {
    let grid = *data.grid();
    let hx = grid.spacing()[0];
    let max_abs = data
        .entries()
        .iter()
        .flat_map(|e| e.values().iter().map(|v| v.norm()))
        .fold(0.0, f64::max);
    if max_abs == 0.0 {
        return Err(Error::ZeroSignal);
    }
    if !max_abs.is_finite() {
        return Err(Error::NonFinite { iteration: 0 });
    }
    let units = Units { hx, displacement: max_abs };
    let internal_spacing = grid.spacing().map(|h| h / hx);
    let internal = DofMap::new(VoxelGrid::new(grid.dims(), internal_spacing)?);
    let partition = partition_subzones(&grid, config.zone_mm, config.stride_mm)?;
    let kit = ZoneKit::new(partition.zone_voxels(), internal_spacing, data.len())?;
    let v = data
        .entries()
        .iter()
        .map(|e| e.values().iter().map(|x| x / max_abs).collect())
        .collect();
    Ok(Problem {
        grid,
        internal,
        partition,
        kit,
        omegas: data.entries().iter().map(|e| e.omega()).collect(),
        frequencies: data.frequencies(),
        density: units.density(data.density()),
        units,
        v,
    })
}

impl Problem {
    fn zone_states(&self, mu0: Complex64) -> Vec<ZoneState> {
        let m = self.kit.n_elements();
        self.partition
            .zones()
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let voxels = z.voxel_indices(&self.grid);
                let elements = z.element_indices(&self.grid);
                let v: Vec<Complex64> = self
                    .v
                    .iter()
                    .flat_map(|vj| voxels.iter().flat_map(move |&g| vj[3 * g..3 * g + 3].iter().copied()))
                    .collect();
                ZoneState::new(i, voxels, elements, v, &self.kit, &vec![mu0; m])
            })
            .collect()
    }

    fn interior_rows(&self) -> Vec<usize> {
        (0..self.internal.n_nodes())
            .filter(|&n| !self.internal.is_boundary_node(n))
            .flat_map(|n| [3 * n, 3 * n + 1, 3 * n + 2])
            .collect()
    }

    fn restrict(&self, op: &SparseOperator, rows: &[usize]) -> SparseOperator {
        let cols: Vec<Option<usize>> = (0..op.cols()).map(Some).collect();
        op.select(rows, &cols, op.cols())
    }

    /// Statistics that depend on the data only.
    fn data_inputs(&self, states: &[ZoneState], o: &ParamOverrides) -> Result<ParamInputs> {
        let mut inputs = ParamInputs::default();
        let rows = self.interior_rows();
        if o.alpha_mu.is_none() {
            let mut total = 0.0;
            let mut ops = Vec::with_capacity(self.v.len());
            for vj in &self.v {
                ops.push(self.restrict(&inversion_operator(vj, &self.internal)?, &rows));
            }
            let n = self.internal.n_elements();
            let mut tmp = vec![Complex64::default(); rows.len()];
            let mut acc = vec![Complex64::default(); n];
            total += max_eig(
                n,
                |x, y| {
                    y.iter_mut().for_each(|v| *v = Complex64::default());
                    for op in &ops {
                        op.apply(x, &mut tmp);
                        op.apply_adjoint(&tmp, &mut acc);
                        for (yi, a) in y.iter_mut().zip(&acc) {
                            *yi += a;
                        }
                    }
                },
                DEFAULT_EIG_TOL,
                DEFAULT_EIG_MAX_ITERS,
            )?;
            inputs.max_eig_inversion = total;
        }
        if o.gamma_p.is_none() {
            let kp = self.restrict(&assemble_pressure_coupling(&self.internal), &rows);
            inputs.max_eig_pressure = max_eig_normal(&kp, DEFAULT_EIG_TOL, DEFAULT_EIG_MAX_ITERS)?;
            let grad = lattice_gradient_operator(&self.internal.element_lattice());
            inputs.max_eig_gradient = max_eig_normal(&grad, DEFAULT_EIG_TOL, DEFAULT_EIG_MAX_ITERS)?;
        }
        if o.gamma_u.is_none() {
            let n_u = 3 * self.kit.n_nodes();
            inputs.max_abs_fft = states
                .iter()
                .flat_map(|s| s.v.chunks_exact(n_u).map(|vj| self.kit.fft.forward_vector(vj)))
                .flat_map(|spec| spec.into_iter().map(|c| c.norm()))
                .fold(0.0, f64::max);
        }
        Ok(inputs)
    }

    /// Largest plane-fit gradient magnitude of an element field (kPa per `hx`).
    fn max_abs_gradient(&self, mu: &[Complex64], span: usize) -> Result<f64> {
        let nodal = self.internal.elements_to_nodal(mu)?;
        let slopes = plane_fit_slopes(&nodal, self.internal.grid(), span)?;
        Ok(slopes.iter().flat_map(|s| s.iter().map(|c| c.norm())).fold(0.0, f64::max))
    }

    /// `max_j MaxEig([𝕂_μ − ω_j²ρ𝕄]ᴴ[𝕂_μ − ω_j²ρ𝕄])` on interior rows.
    fn max_eig_wave(&self, mu: &[Complex64]) -> Result<f64> {
        let rows = self.interior_rows();
        let k = stiffness_unchecked(mu, &self.internal);
        let mass = assemble_mass(1.0, &self.internal)?;
        let mut best = 0.0f64;
        for &omega in &self.omegas {
            let a = SparseOperator::linear_combination(&[
                (Complex64::new(1.0, 0.0), &k),
                (Complex64::new(-omega * omega * self.density, 0.0), &mass),
            ])?;
            let a = self.restrict(&a, &rows);
            best = best.max(max_eig_normal(&a, DEFAULT_EIG_TOL, DEFAULT_EIG_MAX_ITERS)?);
        }
        Ok(best)
    }

    /// Cover-averaged `ν_i + λ_μ,i` per global element, summed in zone order.
    fn consensus(&self, states: &[ZoneState]) -> Vec<Complex64> {
        let mut acc = vec![Complex64::default(); self.internal.n_elements()];
        for s in states {
            for (local, &g) in s.elements.iter().enumerate() {
                acc[g] += s.nu[local] + s.lam_mu[local];
            }
        }
        for (a, &c) in acc.iter_mut().zip(self.partition.element_cover()) {
            *a /= c as f64;
        }
        acc
    }

    fn stitch_displacement(&self, states: &[ZoneState]) -> Result<Vec<DisplacementField>> {
        let n_u = 3 * self.kit.n_nodes();
        let cover = self.partition.voxel_cover();
        (0..self.omegas.len())
            .map(|j| {
                let mut acc = vec![Complex64::default(); 3 * self.grid.len()];
                for s in states {
                    let wj = &s.w[j * n_u..(j + 1) * n_u];
                    for (local, &g) in s.voxels.iter().enumerate() {
                        for c in 0..3 {
                            acc[3 * g + c] += wj[3 * local + c];
                        }
                    }
                }
                for (g, &cnt) in cover.iter().enumerate() {
                    for c in 0..3 {
                        acc[3 * g + c] = acc[3 * g + c] / cnt as f64 * self.units.displacement;
                    }
                }
                DisplacementField::new(self.grid, acc, self.frequencies[j])
            })
            .collect()
    }

    fn stitch_pressure(&self, states: &[ZoneState]) -> Result<Vec<ComplexScalarField>> {
        let m = self.kit.n_elements();
        let cover = self.partition.element_cover();
        (0..self.omegas.len())
            .map(|j| {
                let mut acc = vec![Complex64::default(); self.internal.n_elements()];
                for s in states {
                    for (local, &g) in s.elements.iter().enumerate() {
                        acc[g] += s.q[j * m + local];
                    }
                }
                for (a, &c) in acc.iter_mut().zip(cover) {
                    *a = self.units.pressure_to_pa(*a / c as f64);
                }
                ComplexScalarField::new(self.grid, self.internal.elements_to_nodal(&acc)?)
            })
            .collect()
    }

    fn finish(
        &self,
        states: &[ZoneState],
        mu: &[Complex64],
        trace: Vec<TraceRow>,
        objective_checks: Vec<ObjectiveCheck>,
        params: AdmmParams,
        converged: bool,
    ) -> Result<Reconstruction> {
        let element_mu: Vec<Complex64> = mu.iter().map(|m| m * Units::MODULUS).collect();
        let mu = ComplexScalarField::new(self.grid, self.internal.elements_to_nodal(&element_mu)?)?;
        Ok(Reconstruction {
            mu,
            element_mu,
            displacement: self.stitch_displacement(states)?,
            pressure: self.stitch_pressure(states)?,
            iterations: trace.len(),
            trace,
            objective_checks,
            params,
            converged,
        })
    }
}

fn clamp_complex(v: Complex64, p: &AdmmParams) -> Complex64 {
    let k = Units::MODULUS;
    Complex64::new(
        v.re.clamp(p.mu_re_bounds.0 / k, p.mu_re_bounds.1 / k),
        v.im.clamp(p.mu_im_bounds.0 / k, p.mu_im_bounds.1 / k),
    )
}

/// `(α_μ/2)‖μ − b‖² + γ_μ(TV(Re μ) + TV(Im μ))`.
fn global_objective(mu: &[Complex64], b: &[Complex64], p: &AdmmParams, dims: [usize; 3]) -> f64 {
    let fit: f64 = mu.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let re: Vec<f64> = mu.iter().map(|v| v.re).collect();
    let im: Vec<f64> = mu.iter().map(|v| v.im).collect();
    0.5 * p.alpha_mu * fit + p.gamma_mu * (total_variation(&re, dims) + total_variation(&im, dims))
}

/// Box-constrained TV prox of the consensus average, applied to real and
/// imaginary parts separately. Keeps `prev` if the inexact prox would raise
/// the objective.
fn global_update(b: &[Complex64], prev: &[Complex64], p: &AdmmParams, dims: [usize; 3], tv: TvOptions) -> (Vec<Complex64>, ObjectivePair) {
    let k = Units::MODULUS;
    let lambda = if p.alpha_mu > 0.0 { p.gamma_mu / p.alpha_mu } else { 0.0 };
    let re: Vec<f64> = b.iter().map(|v| v.re).collect();
    let im: Vec<f64> = b.iter().map(|v| v.im).collect();
    let (re, _) = tv_prox(&re, lambda, p.mu_re_bounds.0 / k, p.mu_re_bounds.1 / k, dims, tv);
    let (im, _) = tv_prox(&im, lambda, p.mu_im_bounds.0 / k, p.mu_im_bounds.1 / k, dims, tv);
    let next: Vec<Complex64> = re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect();
    let before = global_objective(prev, b, p, dims);
    let after = global_objective(&next, b, p, dims);
    if after > before {
        (prev.to_vec(), ObjectivePair { before, after: before })
    } else {
        (next, ObjectivePair { before, after })
    }
}

fn all_finite(x: &[Complex64]) -> bool {
    x.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

/// Reconstructs the complex shear modulus from measured displacements.
pub fn run_reconstruction(data: &MultiFrequencyDataset, config: &ReconstructionConfig) -> Result<Reconstruction> {
    let data = select_data(data, config)?;
    if !(config.initial_mu.re > 0.0 && config.initial_mu.re.is_finite() && config.initial_mu.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("initial modulus must have positive real part, got {}", config.initial_mu)));
    }
    let problem = setup(&data, config)?;
    let mu0 = config.initial_mu / Units::MODULUS;
    let mut states = problem.zone_states(mu0);
    let mut inputs = problem.data_inputs(&states, &config.overrides)?;
    let mut params = compute_params(&inputs, &config.overrides)?;
    let omegas = problem.omegas.clone();
    let kit = &problem.kit;
    let density = problem.density;

    if config.mode == Mode::Direct {
        let mu_zone = vec![mu0; kit.n_elements()];
        let results: Vec<Result<ObjectivePair>> = states
            .par_iter_mut()
            .map(|s| s.update_elasticity(kit, &mu_zone, &params, &omegas, density))
            .collect();
        let mut checks = Vec::with_capacity(results.len());
        for (i, r) in results.into_iter().enumerate() {
            let pair = r?;
            checks.push(ObjectiveCheck { iteration: 1, zone: Some(i), subproblem: Subproblem::Elasticity, before: pair.before, after: pair.after });
        }
        let mu: Vec<Complex64> = problem.consensus(&states).into_iter().map(|v| clamp_complex(v, &params)).collect();
        if !all_finite(&mu) {
            return Err(Error::NonFinite { iteration: 1 });
        }
        return problem.finish(&states, &mu, Vec::new(), checks, params, true);
    }

    let dims = problem.internal.element_dims();
    let mut mu = vec![mu0; problem.internal.n_elements()];
    let mut trace = Vec::new();
    let mut checks = Vec::new();
    let mut converged = false;
    for iter in 1..=params.max_iter {
        let zone_mu: Vec<Vec<Complex64>> = states.iter().map(|s| s.elements.iter().map(|&e| mu[e]).collect()).collect();
        let results: Vec<Result<ObjectivePair>> = states
            .par_iter_mut()
            .zip(zone_mu.par_iter())
            .map(|(s, tm)| s.update_elasticity(kit, tm, &params, &omegas, density))
            .collect();
        for (i, r) in results.into_iter().enumerate() {
            let pair = r?;
            checks.push(ObjectiveCheck { iteration: iter, zone: Some(i), subproblem: Subproblem::Elasticity, before: pair.before, after: pair.after });
        }

        let average = problem.consensus(&states);
        if !all_finite(&average) {
            return Err(Error::NonFinite { iteration: iter });
        }
        if iter == 1 && config.overrides.gamma_mu.is_none() {
            let provisional: Vec<Complex64> = average.iter().map(|&v| clamp_complex(v, &params)).collect();
            inputs.max_abs_grad_mu = problem.max_abs_gradient(&provisional, config.gradient_span)?;
            params = compute_params(&inputs, &config.overrides)?;
        }
        let (next, pair) = global_update(&average, &mu, &params, dims, config.tv);
        checks.push(ObjectiveCheck { iteration: iter, zone: None, subproblem: Subproblem::Global, before: pair.before, after: pair.after });

        let o = &config.overrides;
        if iter == 1 && (o.data_weight.is_none() || o.alpha_w.is_none() || o.alpha_x.is_none()) {
            inputs.max_eig_wave = problem.max_eig_wave(&next)?;
            params = compute_params(&inputs, &config.overrides)?;
        }

        let zone_mu: Vec<Vec<Complex64>> = states.iter().map(|s| s.elements.iter().map(|&e| next[e]).collect()).collect();
        let results: Vec<Result<(ObjectivePair, ObjectivePair, ResidualNorms)>> = states
            .par_iter_mut()
            .zip(zone_mu.par_iter())
            .map(|(s, tm)| s.update_displacement_kspace_duals(kit, tm, &params, &omegas, density))
            .collect();
        let mut res = ResidualNorms::default();
        for (i, r) in results.into_iter().enumerate() {
            let (disp, ks, norms) = r?;
            checks.push(ObjectiveCheck { iteration: iter, zone: Some(i), subproblem: Subproblem::Displacement, before: disp.before, after: disp.after });
            checks.push(ObjectiveCheck { iteration: iter, zone: Some(i), subproblem: Subproblem::KSpace, before: ks.before, after: ks.after });
            res.wave += norms.wave;
            res.load += norms.load;
            res.kspace += norms.kspace;
            res.displacement += norms.displacement;
            res.consensus += norms.consensus;
            res.modulus += norms.modulus;
        }
        if !all_finite(&next) || states.iter().any(|s| !all_finite(&s.w) || !all_finite(&s.nu)) {
            return Err(Error::NonFinite { iteration: iter });
        }

        let d_mu: f64 = next.iter().zip(&mu).map(|(a, b)| (a - b).norm()).sum::<f64>() * Units::MODULUS;
        let prev_l1: f64 = mu.iter().map(|v| v.norm()).sum::<f64>() * Units::MODULUS;
        let ratio = |a: f64, b: f64| if b > 0.0 { (a / b).sqrt() } else { a.sqrt() };
        trace.push(TraceRow {
            iter,
            d_mu_l1: d_mu,
            mu_l1_prev: prev_l1,
            wave_residual: ratio(res.wave, res.load),
            consensus_residual: ratio(res.consensus, res.modulus),
            kspace_residual: ratio(res.kspace, res.displacement),
        });
        mu = next;
        if d_mu <= params.tol_mu * prev_l1 {
            converged = true;
            break;
        }
    }
    problem.finish(&states, &mu, trace, checks, params, converged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_parsing() {
        assert_eq!("MERSA".parse::<Mode>().unwrap(), Mode::Mersa);
        assert!("lfe".parse::<Mode>().is_err());
    }

    #[test]
    fn trace_csv_header() {
        let mut buf = Vec::new();
        let row = TraceRow { iter: 1, d_mu_l1: 2.0, mu_l1_prev: 4.0, wave_residual: 0.5, consensus_residual: 0.25, kspace_residual: 0.0 };
        write_trace_csv(&mut buf, &[row]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().next().unwrap(), "iter,d_mu_l1,wave_residual,consensus_residual,kspace_residual");
        assert_eq!(s.lines().nth(1).unwrap(), "1,2e0,5e-1,2.5e-1,0e0");
    }

    #[test]
    fn objective_check_slack() {
        let c = ObjectiveCheck { iteration: 1, zone: None, subproblem: Subproblem::Global, before: 1.0, after: 1.0 + 5e-11 };
        assert!(c.is_monotone(1e-10));
        let c = ObjectiveCheck { after: 1.0 + 1e-9, ..c };
        assert!(!c.is_monotone(1e-10));
    }
}
