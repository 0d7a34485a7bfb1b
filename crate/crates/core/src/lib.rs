//! Time-harmonic viscoelastic wave simulation on voxel grids and shear-modulus
//! reconstruction from (multi)frequency displacement data.

pub mod admm;
pub mod error;
mod factor;
pub mod fem;
pub mod forward;
pub mod grid;
pub mod metrics;
pub mod mvol;
pub mod sparse;

pub use error::{Error, Result};
pub use num_complex::Complex64;
