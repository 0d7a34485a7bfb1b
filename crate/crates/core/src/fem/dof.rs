use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::VoxelGrid;

/// Box lattice of cells (elements) or points, x-fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let j = (idx / self.dims[0]) % self.dims[1];
        [i, j, idx / (self.dims[0] * self.dims[1])]
    }
}

/// Numbering of displacement nodes (grid vertices, 3 dofs each) and of
/// element-constant unknowns (shear modulus, pressure).
///
/// Nodes coincide with voxel centers; the element lattice has one cell fewer per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DofMap {
    grid: VoxelGrid,
}

impl DofMap {
    pub fn new(grid: VoxelGrid) -> Self {
        Self { grid }
    }

    pub fn grid(&self) -> &VoxelGrid {
        &self.grid
    }

    pub fn node_dims(&self) -> [usize; 3] {
        self.grid.dims()
    }

    pub fn element_dims(&self) -> [usize; 3] {
        let [nx, ny, nz] = self.grid.dims();
        [nx - 1, ny - 1, nz - 1]
    }

    pub fn element_lattice(&self) -> Lattice {
        Lattice {
            dims: self.element_dims(),
            spacing: self.grid.spacing(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.grid.len()
    }

    pub fn n_dofs(&self) -> usize {
        3 * self.n_nodes()
    }

    pub fn n_elements(&self) -> usize {
        self.element_dims().iter().product()
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize, k: usize) -> usize {
        self.grid.index(i, j, k)
    }

    #[inline]
    pub fn node_coords(&self, node: usize) -> [usize; 3] {
        self.grid.coords(node)
    }

    #[inline]
    pub fn element(&self, i: usize, j: usize, k: usize) -> usize {
        let [ex, ey, _] = self.element_dims();
        i + ex * (j + ey * k)
    }

    #[inline]
    pub fn element_coords(&self, e: usize) -> [usize; 3] {
        let [ex, ey, _] = self.element_dims();
        [e % ex, (e / ex) % ey, e / (ex * ey)]
    }

    /// Global node indices of an element in local order `ax + 2·ay + 4·az`.
    #[inline]
    pub fn element_nodes(&self, e: usize) -> [usize; 8] {
        let [i, j, k] = self.element_coords(e);
        let mut out = [0; 8];
        for (a, n) in out.iter_mut().enumerate() {
            *n = self.node(i + (a & 1), j + ((a >> 1) & 1), k + ((a >> 2) & 1));
        }
        out
    }

    /// Elements sharing a node, ascending.
    pub fn node_elements(&self, node: usize) -> Vec<usize> {
        let [i, j, k] = self.node_coords(node);
        let [ex, ey, ez] = self.element_dims();
        let mut out = Vec::with_capacity(8);
        for ek in k.saturating_sub(1)..=k.min(ez - 1) {
            for ej in j.saturating_sub(1)..=j.min(ey - 1) {
                for ei in i.saturating_sub(1)..=i.min(ex - 1) {
                    out.push(self.element(ei, ej, ek));
                }
            }
        }
        out
    }

    /// Element values from nodal values by averaging the 8 vertices.
    pub fn nodal_to_elements(&self, nodal: &[Complex64]) -> Result<Vec<Complex64>> {
        if nodal.len() != self.n_nodes() {
            return Err(Error::DimensionMismatch(format!(
                "{} nodal values for {} nodes",
                nodal.len(),
                self.n_nodes()
            )));
        }
        Ok((0..self.n_elements())
            .map(|e| self.element_nodes(e).iter().map(|&n| nodal[n]).sum::<Complex64>() / 8.0)
            .collect())
    }

    /// Nodal values from element values by averaging the adjacent elements.
    pub fn elements_to_nodal(&self, elem: &[Complex64]) -> Result<Vec<Complex64>> {
        if elem.len() != self.n_elements() {
            return Err(Error::DimensionMismatch(format!(
                "{} element values for {} elements",
                elem.len(),
                self.n_elements()
            )));
        }
        Ok((0..self.n_nodes())
            .map(|n| {
                let adj = self.node_elements(n);
                adj.iter().map(|&e| elem[e]).sum::<Complex64>() / adj.len() as f64
            })
            .collect())
    }

    /// Node indices on the outer faces of the lattice.
    pub fn is_boundary_node(&self, node: usize) -> bool {
        let [i, j, k] = self.node_coords(node);
        let [nx, ny, nz] = self.node_dims();
        i == 0 || j == 0 || k == 0 || i == nx - 1 || j == ny - 1 || k == nz - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_bijections() {
        let g = VoxelGrid::cubic([4, 3, 5], 1e-3).unwrap();
        let d = DofMap::new(g);
        assert_eq!(d.n_dofs(), 3 * 60);
        assert_eq!(d.n_elements(), 3 * 2 * 4);
        for e in 0..d.n_elements() {
            let [i, j, k] = d.element_coords(e);
            assert_eq!(d.element(i, j, k), e);
            let nodes = d.element_nodes(e);
            assert_eq!(nodes[0], d.node(i, j, k));
            assert_eq!(nodes[7], d.node(i + 1, j + 1, k + 1));
            for n in nodes {
                assert!(d.node_elements(n).contains(&e));
            }
        }
        for n in 0..d.n_nodes() {
            let [i, j, k] = d.node_coords(n);
            assert_eq!(d.node(i, j, k), n);
        }
    }

    #[test]
    fn averaging_preserves_constants() {
        let g = VoxelGrid::cubic([3, 4, 3], 1e-3).unwrap();
        let d = DofMap::new(g);
        let c = Complex64::new(3.0, 0.5);
        let el = d.nodal_to_elements(&vec![c; d.n_nodes()]).unwrap();
        assert!(el.iter().all(|v| (v - c).norm() < 1e-15));
        let back = d.elements_to_nodal(&el).unwrap();
        assert!(back.iter().all(|v| (v - c).norm() < 1e-15));
        assert!(d.nodal_to_elements(&[c]).is_err());
    }
}
