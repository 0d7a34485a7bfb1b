//! Synthetic data generation: the time-harmonic mixed forward problem and
//! the power-iteration eigenvalue estimator.

mod bc;
mod dataset;
mod eig;
pub(crate) mod krylov;
mod solve;

pub use bc::{BoundaryConditions, DofConstraint, Face};
pub use dataset::{
    add_dataset_noise, frequency_seed, generate_dataset, measure_wavelength_z, simulate_clean, zero_crossings,
};
pub use eig::{max_eig, max_eig_normal, DEFAULT_EIG_MAX_ITERS, DEFAULT_EIG_TOL};
pub use krylov::{gmres, GmresOptions, GmresOutcome};
pub use solve::{lame_lambda, solve_forward, solve_forward_elements, ForwardOptions, ForwardSolution, FORWARD_TOL};
