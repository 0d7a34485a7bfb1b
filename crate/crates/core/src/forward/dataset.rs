//! Multi-frequency synthetic datasets and wavelength measurement.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::bc::BoundaryConditions;
use super::solve::{solve_forward_elements, ForwardOptions};
use crate::error::{Error, Result};
use crate::fem::DofMap;
use crate::grid::{add_gaussian_noise, rasterize_phantom, DisplacementField, MultiFrequencyDataset, PhantomSpec, VoxelGrid};

/// Noise seed of the `j`-th frequency of a dataset generated with `seed`.
pub fn frequency_seed(seed: u64, j: usize) -> u64 {
    seed.wrapping_add(j as u64)
}

/// Noiseless forward solves of `phantom` at each frequency (Hz, strictly increasing).
pub fn simulate_clean(
    phantom: &PhantomSpec,
    grid: &VoxelGrid,
    frequencies: &[f64],
    bc: &BoundaryConditions,
) -> Result<MultiFrequencyDataset> {
    phantom.validate()?;
    if frequencies.is_empty() {
        return Err(Error::InvalidArgument("at least one frequency is required".into()));
    }
    let dof = DofMap::new(*grid);
    let mu = rasterize_phantom(phantom, grid)?;
    let mu_e = dof.nodal_to_elements(mu.values())?;
    let entries = frequencies
        .iter()
        .map(|&f| {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::InvalidArgument(format!("frequency must be positive, got {f}")));
            }
            let sol = solve_forward_elements(
                &mu_e,
                phantom.density,
                phantom.poisson_ratio,
                2.0 * PI * f,
                bc,
                &dof,
                &ForwardOptions::default(),
            )?;
            Ok(sol.displacement)
        })
        .collect::<Result<Vec<_>>>()?;
    MultiFrequencyDataset::new(entries, phantom.density)
}

/// Adds noise at `snr_db` to every entry, seeding entry `j` with
/// [`frequency_seed`]`(seed, j)`.
pub fn add_dataset_noise(clean: &MultiFrequencyDataset, snr_db: f64, seed: u64) -> Result<MultiFrequencyDataset> {
    let entries = clean
        .entries()
        .iter()
        .enumerate()
        .map(|(j, e)| add_gaussian_noise(e, snr_db, frequency_seed(seed, j)))
        .collect::<Result<Vec<_>>>()?;
    MultiFrequencyDataset::new(entries, clean.density())
}

/// One forward solve per frequency followed by per-frequency Gaussian noise.
pub fn generate_dataset(
    phantom: &PhantomSpec,
    grid: &VoxelGrid,
    frequencies: &[f64],
    bc: &BoundaryConditions,
    snr_db: f64,
    seed: u64,
) -> Result<MultiFrequencyDataset> {
    add_dataset_noise(&simulate_clean(phantom, grid, frequencies, bc)?, snr_db, seed)
}

/// Wavelength along z from zero crossings of `Re u_c` on the central
/// `(x, y)` column, where `c` is the component with the largest energy on
/// that column. Returns `2·(z_last − z_first)/(crossings − 1)` in meters.
pub fn measure_wavelength_z(u: &DisplacementField) -> Result<f64> {
    let grid = u.grid();
    let [nx, ny, nz] = grid.dims();
    let (i, j) = (nx / 2, ny / 2);
    let column = |c: usize| -> Vec<Complex64> { (0..nz).map(|k| u.values()[3 * grid.index(i, j, k) + c]).collect() };
    let comp = (0..3)
        .max_by(|&a, &b| {
            let ea: f64 = column(a).iter().map(|v| v.re * v.re).sum();
            let eb: f64 = column(b).iter().map(|v| v.re * v.re).sum();
            ea.total_cmp(&eb)
        })
        .unwrap();
    let line: Vec<f64> = column(comp).iter().map(|v| v.re).collect();
    let crossings = zero_crossings(&line, grid.spacing()[2]);
    if crossings.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need two zero crossings to measure a wavelength, found {}",
            crossings.len()
        )));
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Ok(2.0 * span / (crossings.len() - 1) as f64)
}

/// Linearly interpolated sign changes of a sampled signal (sample spacing `h`).
/// Exact zeros count once.
pub fn zero_crossings(samples: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut last_sign = 0.0;
    let mut last_pos = 0.0;
    for (k, &v) in samples.iter().enumerate() {
        let s = if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        };
        if s == 0.0 {
            if last_sign != 0.0 {
                out.push(k as f64 * h);
                last_sign = 0.0;
            }
            continue;
        }
        if last_sign != 0.0 && s != last_sign {
            let prev = samples[k - 1];
            out.push(last_pos + h * prev / (prev - v));
        }
        last_sign = s;
        last_pos = k as f64 * h;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_crossings_of_a_sine() {
        let h = 0.01;
        let samples: Vec<f64> = (0..400).map(|k| (2.0 * PI * (k as f64 * h) / 0.8 + 0.3).sin()).collect();
        let z = zero_crossings(&samples, h);
        let spacing = (z[z.len() - 1] - z[0]) / (z.len() - 1) as f64;
        assert!((2.0 * spacing - 0.8).abs() < 1e-3);
    }

    #[test]
    fn exact_zeros_are_counted_once() {
        assert_eq!(zero_crossings(&[1.0, 0.0, -1.0, 0.0, 0.0, 2.0], 1.0), vec![1.0, 3.0]);
        assert!(zero_crossings(&[1.0, 2.0, 3.0], 1.0).is_empty());
    }
}
