//! Voxel lattices and the complex fields that live on them.
//!
//! Voxel `(i, j, k)` has its center at `(i·hx, j·hy, k·hz)` meters; all
//! geometry (phantom inclusions, line profiles) is expressed in that frame.
//! Linear indices are x-fastest: `i + nx·(j + ny·k)`.

mod field;
mod gradient;
mod noise;
mod phantom;

pub use field::{ComplexScalarField, DisplacementField, MultiFrequencyDataset};
pub use gradient::plane_fit_gradient;
pub(crate) use gradient::plane_fit_slopes;
pub use noise::{add_gaussian_noise, measured_snr_db};
pub use phantom::{rasterize_phantom, Inclusion, PhantomSpec, Shape};

use crate::error::{Error, Result};

/// Regular 3D lattice with physical spacing in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelGrid {
    nx: usize,
    ny: usize,
    nz: usize,
    hx: f64,
    hy: f64,
    hz: f64,
}

impl VoxelGrid {
    /// At least two voxels per axis are required so every axis carries one element.
    pub fn new(dims: [usize; 3], spacing: [f64; 3]) -> Result<Self> {
        if dims.iter().any(|&n| n < 2) {
            return Err(Error::InvalidGrid(format!(
                "every axis needs at least 2 voxels, got {dims:?}"
            )));
        }
        if spacing.iter().any(|&h| !(h.is_finite() && h > 0.0)) {
            return Err(Error::InvalidGrid(format!(
                "spacing must be positive and finite, got {spacing:?}"
            )));
        }
        Ok(Self {
            nx: dims[0],
            ny: dims[1],
            nz: dims[2],
            hx: spacing[0],
            hy: spacing[1],
            hz: spacing[2],
        })
    }

    /// Isotropic grid, spacing in meters.
    pub fn cubic(dims: [usize; 3], h: f64) -> Result<Self> {
        Self::new(dims, [h, h, h])
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn spacing(&self) -> [f64; 3] {
        [self.hx, self.hy, self.hz]
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nx * (j + self.ny * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.nx;
        let j = (idx / self.nx) % self.ny;
        let k = idx / (self.nx * self.ny);
        [i, j, k]
    }

    /// Physical position of a voxel center.
    #[inline]
    pub fn position(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [i as f64 * self.hx, j as f64 * self.hy, k as f64 * self.hz]
    }

    /// Physical extent between the first and last voxel centers.
    pub fn extent(&self) -> [f64; 3] {
        [
            (self.nx - 1) as f64 * self.hx,
            (self.ny - 1) as f64 * self.hy,
            (self.nz - 1) as f64 * self.hz,
        ]
    }

    pub fn min_spacing(&self) -> f64 {
        self.hx.min(self.hy).min(self.hz)
    }

    /// Lattice of the given size sharing this grid's spacing.
    pub fn sub_grid(&self, dims: [usize; 3]) -> Result<Self> {
        Self::new(dims, self.spacing())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_axes() {
        assert!(VoxelGrid::new([1, 4, 4], [1e-3; 3]).is_err());
        assert!(VoxelGrid::new([4, 4, 4], [1e-3, 0.0, 1e-3]).is_err());
        assert!(VoxelGrid::new([4, 4, 4], [1e-3, f64::NAN, 1e-3]).is_err());
    }

    #[test]
    fn index_round_trip() {
        let g = VoxelGrid::new([3, 4, 5], [1.0, 2.0, 3.0]).unwrap();
        for idx in 0..g.len() {
            let [i, j, k] = g.coords(idx);
            assert_eq!(g.index(i, j, k), idx);
        }
        assert_eq!(g.position(1, 2, 3), [1.0, 4.0, 9.0]);
        assert_eq!(g.extent(), [2.0, 6.0, 12.0]);
    }
}
