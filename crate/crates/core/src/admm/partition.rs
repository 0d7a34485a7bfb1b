//! Overlapping cubic sub-zones and their cover counts.

use crate::error::{Error, Result};
use crate::grid::VoxelGrid;

/// Axis-aligned box of voxels (displacement nodes). Its elements are the
/// `dims − 1` cells between those voxel centers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Zone {
    pub origin: [usize; 3],
    pub dims: [usize; 3],
}

impl Zone {
    pub fn n_voxels(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn element_dims(&self) -> [usize; 3] {
        self.dims.map(|d| d - 1)
    }

    pub fn n_elements(&self) -> usize {
        self.element_dims().iter().product()
    }

    pub fn contains_voxel(&self, c: [usize; 3]) -> bool {
        (0..3).all(|a| c[a] >= self.origin[a] && c[a] < self.origin[a] + self.dims[a])
    }

    /// Global voxel index of every zone voxel, x-fastest within the zone.
    pub fn voxel_indices(&self, grid: &VoxelGrid) -> Vec<usize> {
        box_indices(self.origin, self.dims, grid.dims())
    }

    /// Global element index of every zone element, x-fastest within the zone.
    pub fn element_indices(&self, grid: &VoxelGrid) -> Vec<usize> {
        box_indices(self.origin, self.element_dims(), grid.dims().map(|d| d - 1))
    }
}

fn box_indices(origin: [usize; 3], dims: [usize; 3], outer: [usize; 3]) -> Vec<usize> {
    let mut out = Vec::with_capacity(dims.iter().product());
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                out.push((origin[0] + i) + outer[0] * ((origin[1] + j) + outer[1] * (origin[2] + k)));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubzonePartition {
    grid: VoxelGrid,
    zones: Vec<Zone>,
    zone_voxels: [usize; 3],
    stride_voxels: [usize; 3],
    voxel_cover: Vec<u32>,
    element_cover: Vec<u32>,
}

/// Zone start offsets along one axis of `n` voxels.
pub fn axis_starts(n: usize, zone: usize, stride: usize) -> Vec<usize> {
    let mut starts = Vec::new();
    let mut s = 0;
    while s + zone < n {
        starts.push(s);
        s += stride;
    }
    let last = n - zone;
    if starts.last() != Some(&last) {
        starts.push(last);
    }
    starts
}

/// Places cubes of `zone_mm` at `stride_mm` intervals along every axis, the
/// last cube on each axis flush with the far boundary.
///
/// Per axis the zone spans `round(zone_mm / h)` voxels (capped at the axis
/// length) and the stride `floor(stride_mm / h)` voxels, reduced to
/// `zone − 1` if needed so that consecutive zones share at least one voxel
/// layer and their element boxes tile the element lattice.
pub fn partition_subzones(grid: &VoxelGrid, zone_mm: f64, stride_mm: f64) -> Result<SubzonePartition> {
    if !(stride_mm.is_finite() && stride_mm > 0.0 && zone_mm >= stride_mm) {
        return Err(Error::InvalidArgument(format!(
            "need zone_mm >= stride_mm > 0, got zone {zone_mm} mm, stride {stride_mm} mm"
        )));
    }
    let dims = grid.dims();
    let h = grid.spacing();
    let mut zone_voxels = [0; 3];
    let mut stride_voxels = [0; 3];
    for a in 0..3 {
        let z = ((zone_mm * 1e-3 / h[a]).round() as usize).min(dims[a]);
        if z < 3 {
            return Err(Error::InvalidArgument(format!(
                "zone of {zone_mm} mm covers {z} voxels on axis {a}; at least 3 are required"
            )));
        }
        let s = ((stride_mm * 1e-3 / h[a]).floor() as usize).max(1);
        zone_voxels[a] = z;
        stride_voxels[a] = s.min(z - 1);
    }
    let starts: Vec<Vec<usize>> = (0..3).map(|a| axis_starts(dims[a], zone_voxels[a], stride_voxels[a])).collect();
    let mut zones = Vec::new();
    for &sz in &starts[2] {
        for &sy in &starts[1] {
            for &sx in &starts[0] {
                zones.push(Zone {
                    origin: [sx, sy, sz],
                    dims: zone_voxels,
                });
            }
        }
    }
    let mut voxel_cover = vec![0u32; grid.len()];
    let mut element_cover = vec![0u32; dims.iter().map(|d| d - 1).product()];
    for z in &zones {
        for v in z.voxel_indices(grid) {
            voxel_cover[v] += 1;
        }
        for e in z.element_indices(grid) {
            element_cover[e] += 1;
        }
    }
    Ok(SubzonePartition {
        grid: *grid,
        zones,
        zone_voxels,
        stride_voxels,
        voxel_cover,
        element_cover,
    })
}

impl SubzonePartition {
    pub fn grid(&self) -> &VoxelGrid {
        &self.grid
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn len(&self) -> usize {
        self.zones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    pub fn zone_voxels(&self) -> [usize; 3] {
        self.zone_voxels
    }

    pub fn stride_voxels(&self) -> [usize; 3] {
        self.stride_voxels
    }

    /// Number of zones containing each voxel.
    pub fn voxel_cover(&self) -> &[u32] {
        &self.voxel_cover
    }

    /// Number of zones containing each element.
    pub fn element_cover(&self) -> &[u32] {
        &self.element_cover
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forty_voxel_axis_gives_four_zones() {
        assert_eq!(axis_starts(40, 14, 11), vec![0, 11, 22, 26]);
        let g = VoxelGrid::cubic([40, 40, 40], 1.5e-3).unwrap();
        let p = partition_subzones(&g, 21.0, 17.0).unwrap();
        assert_eq!(p.zone_voxels(), [14; 3]);
        assert_eq!(p.stride_voxels(), [11; 3]);
        assert_eq!(p.len(), 64);
    }

    #[test]
    fn zone_equal_to_grid_is_a_single_zone() {
        let g = VoxelGrid::cubic([14, 14, 14], 1.5e-3).unwrap();
        let p = partition_subzones(&g, 21.0, 17.0).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p.voxel_cover().iter().all(|&c| c == 1));
        assert!(p.element_cover().iter().all(|&c| c == 1));
    }

    #[test]
    fn rejects_tiny_zones_and_bad_strides() {
        let g = VoxelGrid::cubic([10, 10, 10], 1e-3).unwrap();
        assert!(partition_subzones(&g, 2.0, 1.0).is_err());
        assert!(partition_subzones(&g, 5.0, 6.0).is_err());
        assert!(partition_subzones(&g, 5.0, 0.0).is_err());
    }

    #[test]
    fn cover_counts_match_brute_force() {
        let g = VoxelGrid::new([17, 9, 12], [1e-3, 1.5e-3, 1e-3]).unwrap();
        let p = partition_subzones(&g, 6.0, 4.0).unwrap();
        for (v, &c) in p.voxel_cover().iter().enumerate() {
            let brute = p.zones().iter().filter(|z| z.contains_voxel(g.coords(v))).count();
            assert_eq!(brute as u32, c);
        }
    }
}
