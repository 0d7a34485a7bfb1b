use num_complex::Complex64;

use super::{ComplexScalarField, VoxelGrid};
use crate::error::{Error, Result};

/// Spatial gradient from a local least-squares plane fit.
///
/// Each voxel fits `a + bx·x + by·y + bz·z` over a `span³` window (shifted inward
/// at the faces so the window always holds `span³` voxels) and reports the slopes
/// in units of field-per-meter.
pub fn plane_fit_gradient(field: &ComplexScalarField, span: usize) -> Result<[ComplexScalarField; 3]> {
    let grid = *field.grid();
    let [gx, gy, gz] = plane_fit_slopes(field.values(), &grid, span)?;
    Ok([
        ComplexScalarField::new(grid, gx)?,
        ComplexScalarField::new(grid, gy)?,
        ComplexScalarField::new(grid, gz)?,
    ])
}

pub(crate) fn plane_fit_slopes(values: &[Complex64], grid: &VoxelGrid, span: usize) -> Result<[Vec<Complex64>; 3]> {
    let dims = grid.dims();
    if span < 3 || span % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "plane-fit span must be odd and at least 3, got {span}"
        )));
    }
    if dims.iter().any(|&n| n < span) {
        return Err(Error::InvalidArgument(format!(
            "plane-fit span {span} exceeds grid dims {dims:?}"
        )));
    }
    if values.len() != grid.len() {
        return Err(Error::DimensionMismatch("gradient input length".into()));
    }
    let h = grid.spacing();
    let half = span / 2;
    // On a full box window the centered coordinates are orthogonal, so each slope is
    // an independent 1D regression: Σ (x−x̄) f / Σ (x−x̄)² over all window points.
    let offsets: Vec<f64> = (0..span).map(|t| t as f64 - half as f64).collect();
    let sum_sq: f64 = offsets.iter().map(|o| o * o).sum::<f64>() * (span * span) as f64;
    let window_start = |c: usize, n: usize| c.saturating_sub(half).min(n - span);

    let mut out = [
        vec![Complex64::default(); grid.len()],
        vec![Complex64::default(); grid.len()],
        vec![Complex64::default(); grid.len()],
    ];
    for k in 0..dims[2] {
        let k0 = window_start(k, dims[2]);
        for j in 0..dims[1] {
            let j0 = window_start(j, dims[1]);
            for i in 0..dims[0] {
                let i0 = window_start(i, dims[0]);
                let mut acc = [Complex64::default(); 3];
                for (c, oz) in offsets.iter().enumerate() {
                    for (b, oy) in offsets.iter().enumerate() {
                        let row = grid.index(i0, j0 + b, k0 + c);
                        for (a, ox) in offsets.iter().enumerate() {
                            let f = values[row + a];
                            acc[0] += f * *ox;
                            acc[1] += f * *oy;
                            acc[2] += f * *oz;
                        }
                    }
                }
                let idx = grid.index(i, j, k);
                for d in 0..3 {
                    out[d][idx] = acc[d] / (sum_sq * h[d]);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix4, Vector4};

    fn grid(n: usize) -> VoxelGrid {
        VoxelGrid::new([n, n + 1, n + 2], [1e-3, 2e-3, 0.5e-3]).unwrap()
    }

    #[test]
    fn affine_field_is_fit_exactly() {
        let g = grid(6);
        let f = ComplexScalarField::from_fn(g, |p| Complex64::new(2.0 * p[0] - 3.0 * p[2] + 1.0, 0.5 * p[1]));
        let [dx, dy, dz] = plane_fit_gradient(&f, 3).unwrap();
        for idx in 0..g.len() {
            assert!((dx.values()[idx] - Complex64::new(2.0, 0.0)).norm() < 1e-9);
            assert!((dy.values()[idx] - Complex64::new(0.0, 0.5)).norm() < 1e-9);
            assert!((dz.values()[idx] - Complex64::new(-3.0, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn constant_field_has_zero_gradient() {
        let g = grid(5);
        let f = ComplexScalarField::constant(g, Complex64::new(4.0, -1.0));
        for d in plane_fit_gradient(&f, 5).unwrap() {
            assert!(d.values().iter().all(|v| v.norm() < 1e-9));
        }
    }

    #[test]
    fn span_validation() {
        let g = grid(4);
        let f = ComplexScalarField::constant(g, Complex64::new(1.0, 0.0));
        assert!(plane_fit_gradient(&f, 4).is_err());
        assert!(plane_fit_gradient(&f, 1).is_err());
        assert!(plane_fit_gradient(&f, 5).is_err());
    }

    /// Dense normal-equation solve for the 4-parameter plane on each window.
    #[test]
    fn quadratic_field_matches_normal_equations() {
        let g = VoxelGrid::cubic([5, 5, 5], 1e-3).unwrap();
        let f = ComplexScalarField::from_fn(g, |p| Complex64::new(p[0] * p[0] * 1e6, 0.0));
        let [dx, dy, dz] = plane_fit_gradient(&f, 3).unwrap();
        for k in 1..4 {
            for j in 1..4 {
                for i in 1..4 {
                    let mut ata = Matrix4::<f64>::zeros();
                    let mut atb = Vector4::<f64>::zeros();
                    for c in k - 1..=k + 1 {
                        for b in j - 1..=j + 1 {
                            for a in i - 1..=i + 1 {
                                let p = g.position(a, b, c);
                                let row = Vector4::new(1.0, p[0], p[1], p[2]);
                                ata += row * row.transpose();
                                atb += row * f.get(a, b, c).re;
                            }
                        }
                    }
                    let sol = ata.lu().solve(&atb).unwrap();
                    let idx = g.index(i, j, k);
                    assert!((dx.values()[idx].re - sol[1]).abs() < 1e-6 * sol[1].abs().max(1.0));
                    assert!((dy.values()[idx].re - sol[2]).abs() < 1e-6);
                    assert!((dz.values()[idx].re - sol[3]).abs() < 1e-6);
                }
            }
        }
    }
}
