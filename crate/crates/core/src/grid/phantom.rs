//! Piecewise-constant viscoelastic phantoms rasterized at voxel centers.

use num_complex::Complex64;

use super::{ComplexScalarField, VoxelGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Sphere {
        center: [f64; 3],
        radius: f64,
    },
    /// Infinite cylinder through `point` along `direction` (need not be unit length).
    Cylinder {
        point: [f64; 3],
        direction: [f64; 3],
        radius: f64,
    },
}

impl Shape {
    pub fn radius(&self) -> f64 {
        match *self {
            Shape::Sphere { radius, .. } | Shape::Cylinder { radius, .. } => radius,
        }
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        match *self {
            Shape::Sphere { center, radius } => {
                let d2: f64 = (0..3).map(|a| (p[a] - center[a]).powi(2)).sum();
                d2 <= radius * radius
            }
            Shape::Cylinder {
                point,
                direction,
                radius,
            } => {
                let n = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
                let dir = [direction[0] / n, direction[1] / n, direction[2] / n];
                let r = [p[0] - point[0], p[1] - point[1], p[2] - point[2]];
                let along = r[0] * dir[0] + r[1] * dir[1] + r[2] * dir[2];
                let perp2: f64 = (0..3).map(|a| (r[a] - along * dir[a]).powi(2)).sum();
                perp2 <= radius * radius
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inclusion {
    pub shape: Shape,
    /// Complex shear modulus in Pa.
    pub mu: Complex64,
}

/// Background medium plus an ordered list of inclusions (later entries win overlaps).
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub background_mu: Complex64,
    /// kg/m³
    pub density: f64,
    pub poisson_ratio: f64,
    pub inclusions: Vec<Inclusion>,
}

impl PhantomSpec {
    pub fn homogeneous(mu: Complex64, density: f64, poisson_ratio: f64) -> Self {
        Self {
            background_mu: mu,
            density,
            poisson_ratio,
            inclusions: Vec::new(),
        }
    }

    /// 20 kPa sphere of `radius` (meters) centered in `grid`, in the
    /// homogeneous 10 kPa reference medium.
    pub fn single_inclusion(grid: &VoxelGrid, radius: f64) -> Self {
        let mut spec = Self::homogeneous(Complex64::new(10e3, 0.0), 1000.0, 0.495);
        spec.inclusions.push(Inclusion {
            shape: Shape::Sphere {
                center: grid.extent().map(|e| 0.5 * e),
                radius,
            },
            mu: Complex64::new(20e3, 0.0),
        });
        spec
    }

    /// Three 4 mm cylinders along y at x = ¼, ½, ¾ of the extent on the
    /// mid-z plane, storage moduli 5, 20 and 30 kPa, with a uniform 0.6 kPa
    /// loss modulus in the 10 kPa background and every inclusion.
    pub fn three_cylinders(grid: &VoxelGrid) -> Self {
        let loss = 600.0;
        let [ex, ey, ez] = grid.extent();
        let mut spec = Self::homogeneous(Complex64::new(10e3, loss), 1000.0, 0.495);
        for (frac, storage) in [(0.25, 5e3), (0.5, 20e3), (0.75, 30e3)] {
            spec.inclusions.push(Inclusion {
                shape: Shape::Cylinder {
                    point: [frac * ex, 0.5 * ey, 0.5 * ez],
                    direction: [0.0, 1.0, 0.0],
                    radius: 4e-3,
                },
                mu: Complex64::new(storage, loss),
            });
        }
        spec
    }

    pub fn validate(&self) -> Result<()> {
        let check_mu = |mu: Complex64, what: &str| {
            if !(mu.re > 0.0 && mu.im >= 0.0 && mu.re.is_finite() && mu.im.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{what} modulus must have Re > 0 and Im >= 0, got {mu}"
                )));
            }
            Ok(())
        };
        check_mu(self.background_mu, "background")?;
        if !(self.density.is_finite() && self.density > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "density must be positive, got {}",
                self.density
            )));
        }
        if !(self.poisson_ratio > 0.0 && self.poisson_ratio < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "Poisson ratio must lie in (0, 0.5), got {}",
                self.poisson_ratio
            )));
        }
        for (n, inc) in self.inclusions.iter().enumerate() {
            check_mu(inc.mu, &format!("inclusion {n}"))?;
            if !(inc.shape.radius() > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "inclusion {n} radius must be positive"
                )));
            }
            if let Shape::Cylinder { direction, .. } = inc.shape {
                if direction.iter().all(|&d| d == 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "inclusion {n} cylinder axis has zero length"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Index of the inclusion that owns point `p`, if any.
    pub fn region_at(&self, p: [f64; 3]) -> Option<usize> {
        self.inclusions
            .iter()
            .enumerate()
            .rev()
            .find(|(_, inc)| inc.shape.contains(p))
            .map(|(n, _)| n)
    }

    pub fn mu_at(&self, p: [f64; 3]) -> Complex64 {
        match self.region_at(p) {
            Some(n) => self.inclusions[n].mu,
            None => self.background_mu,
        }
    }
}

/// Assigns each voxel center the modulus of the last-listed inclusion containing it,
/// or the background modulus.
pub fn rasterize_phantom(spec: &PhantomSpec, grid: &VoxelGrid) -> Result<ComplexScalarField> {
    spec.validate()?;
    Ok(ComplexScalarField::from_fn(*grid, |p| spec.mu_at(p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn homogeneous_is_constant() {
        let g = VoxelGrid::cubic([6, 5, 4], 1.5e-3).unwrap();
        let spec = PhantomSpec::homogeneous(c(10_000.0, 0.0), 1000.0, 0.495);
        let f = rasterize_phantom(&spec, &g).unwrap();
        assert!(f.values().iter().all(|&v| v == c(10_000.0, 0.0)));
    }

    #[test]
    fn tiny_sphere_between_centers_is_invisible() {
        let h = 1.5e-3;
        let g = VoxelGrid::cubic([6, 6, 6], h).unwrap();
        let mut spec = PhantomSpec::homogeneous(c(10_000.0, 0.0), 1000.0, 0.495);
        spec.inclusions.push(Inclusion {
            shape: Shape::Sphere {
                center: [2.5 * h, 2.5 * h, 2.5 * h],
                radius: 0.4 * h,
            },
            mu: c(20_000.0, 0.0),
        });
        let f = rasterize_phantom(&spec, &g).unwrap();
        assert!(f.values().iter().all(|&v| v == c(10_000.0, 0.0)));
    }

    #[test]
    fn later_inclusions_win_overlaps() {
        let g = VoxelGrid::cubic([5, 5, 5], 1.0).unwrap();
        let mut spec = PhantomSpec::homogeneous(c(1.0, 0.0), 1000.0, 0.45);
        for mu in [2.0, 3.0] {
            spec.inclusions.push(Inclusion {
                shape: Shape::Sphere {
                    center: [2.0, 2.0, 2.0],
                    radius: 1.1,
                },
                mu: c(mu, 0.0),
            });
        }
        let f = rasterize_phantom(&spec, &g).unwrap();
        assert_eq!(f.get(2, 2, 2), c(3.0, 0.0));
        assert_eq!(f.get(0, 0, 0), c(1.0, 0.0));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = PhantomSpec::homogeneous(c(0.0, 0.0), 1000.0, 0.495);
        assert!(spec.validate().is_err());
        spec.background_mu = c(1.0, -1.0);
        assert!(spec.validate().is_err());
        spec.background_mu = c(1.0, 0.0);
        spec.poisson_ratio = 0.5;
        assert!(spec.validate().is_err());
        spec.poisson_ratio = 0.3;
        spec.inclusions.push(Inclusion {
            shape: Shape::Sphere {
                center: [0.0; 3],
                radius: 0.0,
            },
            mu: c(1.0, 0.0),
        });
        assert!(spec.validate().is_err());
    }

    #[test]
    fn three_cylinder_voxel_counts_match_brute_force() {
        let h = 1.5e-3;
        let g = VoxelGrid::cubic([40, 40, 40], h).unwrap();
        let spec = PhantomSpec::three_cylinders(&g);
        let f = rasterize_phantom(&spec, &g).unwrap();
        let [ex, _, ez] = g.extent();
        let centers = [(0.25 * ex, 5e3), (0.5 * ex, 20e3), (0.75 * ex, 30e3)];
        for (cx, storage) in centers {
            let mut brute = 0;
            for k in 0..40 {
                for i in 0..40 {
                    let (x, z) = (i as f64 * h, k as f64 * h);
                    if (x - cx).powi(2) + (z - 0.5 * ez).powi(2) <= 16e-6 {
                        brute += 40;
                    }
                }
            }
            let counted = f.values().iter().filter(|v| v.re == storage).count();
            assert_eq!(counted, brute);
            assert!(counted > 0);
        }
        assert!(f.values().iter().all(|v| v.im == 600.0));
    }

    #[test]
    fn single_inclusion_is_centered() {
        let g = VoxelGrid::cubic([21, 21, 21], 1e-3).unwrap();
        let f = rasterize_phantom(&PhantomSpec::single_inclusion(&g, 5.5e-3), &g).unwrap();
        assert_eq!(f.get(10, 10, 10).re, 20e3);
        assert_eq!(f.get(15, 10, 10).re, 20e3);
        assert_eq!(f.get(16, 10, 10).re, 10e3);
        // Lattice points with i² + j² + k² ≤ 30.
        assert_eq!(f.values().iter().filter(|v| v.re == 20e3).count(), 739);
    }

    #[test]
    fn cylinder_membership() {
        let s = Shape::Cylinder {
            point: [0.0, 0.0, 0.0],
            direction: [0.0, 0.0, 2.0],
            radius: 1.0,
        };
        assert!(s.contains([0.5, 0.5, 100.0]));
        assert!(!s.contains([0.8, 0.8, -3.0]));
    }
}
