use num_complex::Complex64;

use super::VoxelGrid;
use crate::error::{Error, Result};

/// One complex number per voxel (shear modulus, pressure, masks).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexScalarField {
    grid: VoxelGrid,
    values: Vec<Complex64>,
}

impl ComplexScalarField {
    pub fn new(grid: VoxelGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "scalar field has {} values, grid holds {} voxels",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: VoxelGrid, value: Complex64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: VoxelGrid, mut f: impl FnMut([f64; 3]) -> Complex64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let [i, j, k] = grid.coords(idx);
                f(grid.position(i, j, k))
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &VoxelGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.values[self.grid.index(i, j, k)]
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn imag_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.im).collect()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Complex displacement phasor, three components per voxel (meters).
///
/// Components are interleaved: `values[3·voxel + c]` for `c ∈ {x, y, z}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    grid: VoxelGrid,
    values: Vec<Complex64>,
    frequency: f64,
}

impl DisplacementField {
    pub fn new(grid: VoxelGrid, values: Vec<Complex64>, frequency: f64) -> Result<Self> {
        if values.len() != 3 * grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "displacement field has {} values, expected 3 x {}",
                values.len(),
                grid.len()
            )));
        }
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "frequency must be positive, got {frequency}"
            )));
        }
        Ok(Self {
            grid,
            values,
            frequency,
        })
    }

    pub fn zeros(grid: VoxelGrid, frequency: f64) -> Result<Self> {
        Self::new(grid, vec![Complex64::new(0.0, 0.0); 3 * grid.len()], frequency)
    }

    pub fn grid(&self) -> &VoxelGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Drive frequency in Hz.
    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    /// Angular frequency in rad/s.
    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency
    }

    pub fn component(&self, c: usize) -> ComplexScalarField {
        assert!(c < 3, "component index {c} out of range");
        ComplexScalarField {
            grid: self.grid,
            values: self.values.iter().skip(c).step_by(3).copied().collect(),
        }
    }

    /// Euclidean norm over all components and voxels.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Ordered set of displacement fields acquired at distinct frequencies.
#[derive(Debug, Clone)]
pub struct MultiFrequencyDataset {
    entries: Vec<DisplacementField>,
    density: f64,
}

impl MultiFrequencyDataset {
    pub fn new(entries: Vec<DisplacementField>, density: f64) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("dataset needs at least one frequency".into()));
        }
        if !(density.is_finite() && density > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "density must be positive, got {density}"
            )));
        }
        let grid = *entries[0].grid();
        for (j, e) in entries.iter().enumerate() {
            if *e.grid() != grid {
                return Err(Error::DimensionMismatch(format!(
                    "entry {j} lives on a different grid"
                )));
            }
        }
        for w in entries.windows(2) {
            if w[1].frequency() <= w[0].frequency() {
                return Err(Error::InvalidArgument(format!(
                    "frequencies must be strictly increasing ({} Hz then {} Hz)",
                    w[0].frequency(),
                    w[1].frequency()
                )));
            }
        }
        Ok(Self { entries, density })
    }

    pub fn entries(&self) -> &[DisplacementField] {
        &self.entries
    }

    pub fn grid(&self) -> &VoxelGrid {
        self.entries[0].grid()
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.frequency()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Keeps only the entries at the given positions (ascending order is preserved).
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        let entries = idx
            .iter()
            .map(|&j| {
                self.entries.get(j).cloned().ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "frequency index {j} out of range ({} available)",
                        self.entries.len()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries, self.density)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> VoxelGrid {
        VoxelGrid::cubic([3, 3, 3], 1e-3).unwrap()
    }

    #[test]
    fn value_counts_are_checked() {
        let g = grid();
        assert!(ComplexScalarField::new(g, vec![Complex64::default(); 26]).is_err());
        assert!(DisplacementField::new(g, vec![Complex64::default(); 27], 100.0).is_err());
        assert!(DisplacementField::new(g, vec![Complex64::default(); 81], 0.0).is_err());
        assert!(DisplacementField::new(g, vec![Complex64::default(); 81], 50.0).is_ok());
    }

    #[test]
    fn dataset_requires_increasing_frequencies_on_one_grid() {
        let g = grid();
        let a = DisplacementField::zeros(g, 200.0).unwrap();
        let b = DisplacementField::zeros(g, 300.0).unwrap();
        assert!(MultiFrequencyDataset::new(vec![a.clone(), b.clone()], 1000.0).is_ok());
        assert!(MultiFrequencyDataset::new(vec![b.clone(), a.clone()], 1000.0).is_err());
        assert!(MultiFrequencyDataset::new(vec![a.clone(), a.clone()], 1000.0).is_err());
        assert!(MultiFrequencyDataset::new(vec![a.clone()], 0.0).is_err());
        let other = DisplacementField::zeros(VoxelGrid::cubic([4, 3, 3], 1e-3).unwrap(), 300.0).unwrap();
        assert!(MultiFrequencyDataset::new(vec![a, other], 1000.0).is_err());
    }

    #[test]
    fn component_extraction() {
        let g = grid();
        let vals: Vec<Complex64> = (0..81).map(|v| Complex64::new(v as f64, 0.0)).collect();
        let u = DisplacementField::new(g, vals, 10.0).unwrap();
        let uy = u.component(1);
        assert_eq!(uy.values()[0].re, 1.0);
        assert_eq!(uy.values()[2].re, 7.0);
    }
}
