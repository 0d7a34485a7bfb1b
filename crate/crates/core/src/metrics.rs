//! Reconstruction quality metrics: relative RMSE, contrast-to-noise ratio,
//! intraclass correlation, line profiles and modulus conversions.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexScalarField, VoxelGrid};

/// Boolean voxel selection on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    grid: VoxelGrid,
    mask: Vec<bool>,
}

impl RegionMask {
    pub fn new(grid: VoxelGrid, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "mask has {} entries for {} voxels",
                mask.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, mask })
    }

    /// Selects voxels whose center (meters) satisfies `pred`.
    pub fn from_positions(grid: VoxelGrid, mut pred: impl FnMut([f64; 3]) -> bool) -> Self {
        let mask = (0..grid.len())
            .map(|v| {
                let [i, j, k] = grid.coords(v);
                pred(grid.position(i, j, k))
            })
            .collect();
        Self { grid, mask }
    }

    /// Voxels at least `margin` voxels away from every face.
    pub fn interior(grid: VoxelGrid, margin: usize) -> Self {
        let dims = grid.dims();
        let mask = (0..grid.len())
            .map(|v| {
                let c = grid.coords(v);
                (0..3).all(|a| c[a] >= margin && c[a] + margin < dims[a])
            })
            .collect();
        Self { grid, mask }
    }

    pub fn grid(&self) -> &VoxelGrid {
        &self.grid
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.mask
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Indices of the selected voxels in ascending order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }

    /// Voxels selected by both masks.
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check_grid(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect(),
        })
    }

    /// Voxels selected by this mask but not by `other`.
    pub fn subtract(&self, other: &Self) -> Result<Self> {
        self.check_grid(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a && !*b).collect(),
        })
    }

    fn check_grid(&self, grid: &VoxelGrid) -> Result<()> {
        if *grid != self.grid {
            return Err(Error::DimensionMismatch("mask and field live on different grids".into()));
        }
        Ok(())
    }
}

/// Which part of a complex field a metric reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    /// Storage modulus.
    Real,
    /// Loss modulus.
    Imag,
}

impl Part {
    pub fn of(self, v: Complex64) -> f64 {
        match self {
            Part::Real => v.re,
            Part::Imag => v.im,
        }
    }
}

/// RMSE flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RmseFormula {
    /// `sqrt((1/m)·Σ|e_v|)` with relative errors `e_v`.
    #[default]
    Verbatim,
    /// Conventional `sqrt((1/m)·Σe_v²)`.
    Rms,
}

fn masked_values(field: &ComplexScalarField, mask: &RegionMask, part: Part) -> Result<Vec<f64>> {
    mask.check_grid(field.grid())?;
    Ok(mask.indices().map(|v| part.of(field.values()[v])).collect())
}

/// Relative RMSE over `mask`: `sqrt((1/m)·Σ|(x_rec − x_gt)/x_gt|)`.
pub fn rmse(rec: &ComplexScalarField, gt: &ComplexScalarField, mask: &RegionMask, part: Part) -> Result<f64> {
    rmse_with(rec, gt, mask, part, RmseFormula::Verbatim)
}

pub fn rmse_with(
    rec: &ComplexScalarField,
    gt: &ComplexScalarField,
    mask: &RegionMask,
    part: Part,
    formula: RmseFormula,
) -> Result<f64> {
    mask.check_grid(rec.grid())?;
    mask.check_grid(gt.grid())?;
    let m = mask.count();
    if m == 0 {
        return Err(Error::Degenerate("RMSE over an empty mask".into()));
    }
    let mut acc = 0.0;
    for v in mask.indices() {
        let g = part.of(gt.values()[v]);
        if g == 0.0 {
            return Err(Error::ZeroGroundTruth(v));
        }
        let e = (part.of(rec.values()[v]) - g) / g;
        acc += match formula {
            RmseFormula::Verbatim => e.abs(),
            RmseFormula::Rms => e * e,
        };
    }
    Ok((acc / m as f64).sqrt())
}

fn mean_and_sample_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// `2(x̄_inc − x̄_bkg)² / (σ²_bkg + σ²_inc)` with sample variances.
pub fn cnr_values(inclusion: &[f64], background: &[f64]) -> Result<f64> {
    if inclusion.len() < 2 || background.len() < 2 {
        return Err(Error::Degenerate(format!(
            "CNR needs at least 2 voxels per region, got {} and {}",
            inclusion.len(),
            background.len()
        )));
    }
    let (mi, vi) = mean_and_sample_var(inclusion);
    let (mb, vb) = mean_and_sample_var(background);
    if vi + vb == 0.0 {
        return Err(Error::Degenerate("CNR is undefined when both regions are constant".into()));
    }
    Ok(2.0 * (mi - mb) * (mi - mb) / (vb + vi))
}

/// CNR of `part` of `field` between two regions.
pub fn cnr(field: &ComplexScalarField, part: Part, inclusion: &RegionMask, background: &RegionMask) -> Result<f64> {
    cnr_values(&masked_values(field, inclusion, part)?, &masked_values(field, background, part)?)
}

/// Two-way, absolute-agreement, single-measure intraclass correlation
/// ICC(A,1) of paired (method, reference) measurements.
pub fn icc(pairs: &[(f64, f64)]) -> Result<f64> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::Degenerate(format!("ICC needs at least 2 pairs, got {n}")));
    }
    let k = 2.0;
    let nf = n as f64;
    let grand = pairs.iter().map(|(a, b)| a + b).sum::<f64>() / (k * nf);
    let col = [
        pairs.iter().map(|p| p.0).sum::<f64>() / nf,
        pairs.iter().map(|p| p.1).sum::<f64>() / nf,
    ];
    let ss_total: f64 = pairs.iter().map(|(a, b)| (a - grand).powi(2) + (b - grand).powi(2)).sum();
    let ss_rows: f64 = k * pairs.iter().map(|(a, b)| ((a + b) / k - grand).powi(2)).sum::<f64>();
    let ss_cols: f64 = nf * col.iter().map(|c| (c - grand).powi(2)).sum::<f64>();
    let ss_err = ss_total - ss_rows - ss_cols;
    let ms_rows = ss_rows / (nf - 1.0);
    let ms_cols = ss_cols / (k - 1.0);
    let ms_err = ss_err / ((nf - 1.0) * (k - 1.0));
    let denom = ms_rows + (k - 1.0) * ms_err + k * (ms_cols - ms_err) / nf;
    if ss_total == 0.0 || denom <= 0.0 {
        return Err(Error::Degenerate("ICC is undefined for these measurements".into()));
    }
    Ok((ms_rows - ms_err) / denom)
}

/// Nearest-voxel samples along the discrete segment from `start` to `end`,
/// as (arc length in mm, value). The sample count is one more than the
/// largest per-axis index difference.
pub fn line_profile(field: &ComplexScalarField, start: [usize; 3], end: [usize; 3]) -> Result<Vec<(f64, Complex64)>> {
    let grid = field.grid();
    let dims = grid.dims();
    for p in [start, end] {
        if (0..3).any(|a| p[a] >= dims[a]) {
            return Err(Error::InvalidArgument(format!("voxel {p:?} lies outside grid {dims:?}")));
        }
    }
    let delta: [f64; 3] = std::array::from_fn(|a| end[a] as f64 - start[a] as f64);
    let steps = (0..3).map(|a| start[a].abs_diff(end[a])).max().unwrap_or(0);
    let h = grid.spacing();
    let length_mm = (0..3).map(|a| (delta[a] * h[a]).powi(2)).sum::<f64>().sqrt() * 1e3;
    Ok((0..=steps)
        .map(|s| {
            let t = if steps == 0 { 0.0 } else { s as f64 / steps as f64 };
            let c: [usize; 3] = std::array::from_fn(|a| (start[a] as f64 + t * delta[a]).round() as usize);
            (t * length_mm, field.get(c[0], c[1], c[2]))
        })
        .collect())
}

/// Young's modulus of an incompressible medium, `E = 3μ`.
pub fn young_from_shear(mu: Complex64) -> Complex64 {
    mu * 3.0
}

/// One `metric, region, value` CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub metric: String,
    pub region: String,
    pub value: f64,
}

impl MetricRow {
    pub fn new(metric: impl Into<String>, region: impl Into<String>, value: f64) -> Self {
        Self {
            metric: metric.into(),
            region: region.into(),
            value,
        }
    }
}

pub fn write_metrics_csv<W: Write>(mut w: W, rows: &[MetricRow]) -> std::io::Result<()> {
    writeln!(w, "metric,region,value")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.metric, r.region, r.value)?;
    }
    Ok(())
}
