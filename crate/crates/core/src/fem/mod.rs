//! Mixed Q1–P0 finite elements on the voxel lattice: trilinear displacement at
//! voxel centers, element-constant shear modulus and pressure.

mod assembly;
mod dof;
mod element;

pub use assembly::{
    assemble_inversion_operator, assemble_mass, assemble_pressure_coupling, assemble_stiffness,
    build_multifrequency_blocks, inversion_operator, lattice_gradient_operator, MultiFrequencyBlocks,
};
pub(crate) use assembly::stiffness_unchecked;
pub use dof::{DofMap, Lattice};
pub use element::HexElement;
