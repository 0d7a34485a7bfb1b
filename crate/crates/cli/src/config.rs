//! TOML pipeline configuration.
//!
//! Geometry is in millimeters, moduli in kPa (as `[re, im]` pairs),
//! frequencies in Hz, noise in dB, density in kg/m³.

use std::path::{Path, PathBuf};

use mre_core::admm::{Mode, ParamOverrides, ReconstructionConfig, TvOptions};
use mre_core::grid::{Inclusion, PhantomSpec, Shape, VoxelGrid};
use mre_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub grid: Option<GridConfig>,
    pub phantom: Option<PhantomConfig>,
    pub simulate: Option<SimulateConfig>,
    pub reconstruct: Option<ReconstructConfig>,
    pub evaluate: Option<EvaluateConfig>,
    pub export: Option<ExportConfig>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dims: [usize; 3],
    /// One value for isotropic grids or three per-axis values.
    pub spacing_mm: Spacing,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Spacing {
    Isotropic(f64),
    PerAxis([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhantomPreset {
    Homogeneous,
    SingleInclusion,
    ThreeCylinders,
    Custom,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomConfig {
    pub preset: PhantomPreset,
    /// Background modulus; presets keep their own unless this is set.
    #[serde(default)]
    pub background_kpa: Option<[f64; 2]>,
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default = "default_poisson")]
    pub poisson_ratio: f64,
    /// Sphere radius of the single-inclusion preset.
    #[serde(default = "default_inclusion_radius")]
    pub inclusion_radius_mm: f64,
    #[serde(default)]
    pub inclusions: Vec<InclusionConfig>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InclusionConfig {
    Sphere {
        center_mm: [f64; 3],
        radius_mm: f64,
        mu_kpa: [f64; 2],
    },
    Cylinder {
        point_mm: [f64; 3],
        direction: [f64; 3],
        radius_mm: f64,
        mu_kpa: [f64; 2],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BcPreset {
    /// Bottom driven along x; top, front (y = 0) and left (x = 0) fixed.
    CornerFixed,
    /// Bottom driven along x, top fixed, lateral faces slide along x only.
    PlaneShear,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub frequencies_hz: Vec<f64>,
    #[serde(default = "default_bc")]
    pub bc: BcPreset,
    #[serde(default = "default_amplitude")]
    pub amplitude_um: f64,
    /// Omitted means noiseless.
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub alpha_c: Option<f64>,
    pub alpha_mu: Option<f64>,
    pub data_weight: Option<f64>,
    pub alpha_x: Option<f64>,
    pub alpha_w: Option<f64>,
    pub gamma_u: Option<f64>,
    pub gamma_mu: Option<f64>,
    pub gamma_p: Option<f64>,
    pub mu_re_bounds_kpa: Option<[f64; 2]>,
    pub mu_im_bounds_kpa: Option<[f64; 2]>,
    pub tol_mu: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructConfig {
    /// Dataset manifest; defaults to `manifest.toml` in the output directory.
    pub dataset: Option<PathBuf>,
    pub mode: String,
    pub frequency_indices: Option<Vec<usize>>,
    #[serde(default = "default_zone")]
    pub zone_mm: f64,
    #[serde(default = "default_stride")]
    pub stride_mm: f64,
    #[serde(default = "default_initial")]
    pub initial_kpa: [f64; 2],
    #[serde(default)]
    pub params: ParamsConfig,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub name: String,
    pub start: [usize; 3],
    pub end: [usize; 3],
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateConfig {
    /// Reconstructed modulus; defaults to `mu.mvol` in the output directory.
    pub reconstruction: Option<PathBuf>,
    /// Ground-truth modulus; defaults to rasterizing `[phantom]` on the reconstruction grid.
    pub ground_truth: Option<PathBuf>,
    /// Voxels this close to a face are excluded from every region.
    #[serde(default)]
    pub margin_voxels: usize,
    /// Defaults to the x line through the grid center.
    #[serde(default)]
    pub profiles: Vec<ProfileConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExportConfig {
    /// Scalar volume to export; defaults to `mu.mvol` in the output directory.
    pub field: Option<PathBuf>,
    #[serde(default = "default_axis")]
    pub axis: Axis,
    /// Defaults to the middle slice.
    pub slice: Option<usize>,
    #[serde(default = "default_window")]
    pub window_kpa: [f64; 2],
}

fn default_density() -> f64 {
    1000.0
}
fn default_poisson() -> f64 {
    0.495
}
fn default_inclusion_radius() -> f64 {
    5.0
}
fn default_bc() -> BcPreset {
    BcPreset::CornerFixed
}
fn default_amplitude() -> f64 {
    50.0
}
fn default_zone() -> f64 {
    21.0
}
fn default_stride() -> f64 {
    17.0
}
fn default_initial() -> [f64; 2] {
    [3.0, 0.0]
}
fn default_axis() -> Axis {
    Axis::Z
}
fn default_window() -> [f64; 2] {
    [0.0, 40.0]
}

fn kpa(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0] * 1e3, v[1] * 1e3)
}

pub fn load(path: &Path) -> Result<PipelineConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn parse(text: &str) -> Result<PipelineConfig, toml::de::Error> {
    toml::from_str(text)
}

/// Resolves a path from the config relative to the config file's directory.
pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl PipelineConfig {
    pub fn section<'a, T>(opt: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        opt.as_ref().ok_or_else(|| CliError::Config(format!("missing [{name}] section")))
    }

    pub fn voxel_grid(&self) -> Result<VoxelGrid, CliError> {
        let g = Self::section(&self.grid, "grid")?;
        let h = match g.spacing_mm {
            Spacing::Isotropic(h) => [h; 3],
            Spacing::PerAxis(h) => h,
        };
        Ok(VoxelGrid::new(g.dims, h.map(|v| v * 1e-3))?)
    }

    pub fn phantom_spec(&self, grid: &VoxelGrid) -> Result<PhantomSpec, CliError> {
        let p = Self::section(&self.phantom, "phantom")?;
        let mut spec = match p.preset {
            PhantomPreset::Homogeneous | PhantomPreset::Custom => {
                PhantomSpec::homogeneous(kpa(p.background_kpa.unwrap_or([10.0, 0.0])), p.density, p.poisson_ratio)
            }
            PhantomPreset::SingleInclusion => PhantomSpec::single_inclusion(grid, p.inclusion_radius_mm * 1e-3),
            PhantomPreset::ThreeCylinders => PhantomSpec::three_cylinders(grid),
        };
        if p.preset != PhantomPreset::Custom && !p.inclusions.is_empty() {
            return Err(CliError::Config("inclusions are only allowed with preset = \"custom\"".into()));
        }
        if let Some(bg) = p.background_kpa {
            spec.background_mu = kpa(bg);
        }
        spec.density = p.density;
        spec.poisson_ratio = p.poisson_ratio;
        for inc in &p.inclusions {
            spec.inclusions.push(match *inc {
                InclusionConfig::Sphere { center_mm, radius_mm, mu_kpa } => Inclusion {
                    shape: Shape::Sphere {
                        center: center_mm.map(|v| v * 1e-3),
                        radius: radius_mm * 1e-3,
                    },
                    mu: kpa(mu_kpa),
                },
                InclusionConfig::Cylinder { point_mm, direction, radius_mm, mu_kpa } => Inclusion {
                    shape: Shape::Cylinder {
                        point: point_mm.map(|v| v * 1e-3),
                        direction,
                        radius: radius_mm * 1e-3,
                    },
                    mu: kpa(mu_kpa),
                },
            });
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl ReconstructConfig {
    pub fn to_core(&self) -> Result<ReconstructionConfig, CliError> {
        let mode: Mode = self.mode.parse()?;
        let p = &self.params;
        let to_pa = |b: Option<[f64; 2]>| b.map(|v| (v[0] * 1e3, v[1] * 1e3));
        Ok(ReconstructionConfig {
            mode,
            frequency_indices: self.frequency_indices.clone(),
            overrides: ParamOverrides {
                alpha_c: p.alpha_c,
                alpha_mu: p.alpha_mu,
                data_weight: p.data_weight,
                alpha_x: p.alpha_x,
                alpha_w: p.alpha_w,
                gamma_u: p.gamma_u,
                gamma_mu: p.gamma_mu,
                gamma_p: p.gamma_p,
                mu_re_bounds: to_pa(p.mu_re_bounds_kpa),
                mu_im_bounds: to_pa(p.mu_im_bounds_kpa),
                tol_mu: p.tol_mu,
                max_iter: p.max_iter,
            },
            zone_mm: self.zone_mm,
            stride_mm: self.stride_mm,
            initial_mu: kpa(self.initial_kpa),
            gradient_span: 3,
            tv: TvOptions::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[grid]
dims = [20, 20, 20]
spacing_mm = 1.5

[phantom]
preset = "custom"
background_kpa = [10.0, 0.6]

[[phantom.inclusions]]
shape = "sphere"
center_mm = [15.0, 15.0, 15.0]
radius_mm = 4.0
mu_kpa = [20.0, 0.6]

[simulate]
frequencies_hz = [200.0, 300.0]

[reconstruct]
mode = "mersa"

[reconstruct.params]
max_iter = 5
mu_re_bounds_kpa = [0.5, 30.0]
"#;

    #[test]
    fn parses_sample_and_applies_defaults() {
        let c = parse(SAMPLE).unwrap();
        let sim = c.simulate.as_ref().unwrap();
        assert_eq!(sim.bc, BcPreset::CornerFixed);
        assert_eq!(sim.snr_db, None);
        assert_eq!(sim.amplitude_um, 50.0);
        let g = c.voxel_grid().unwrap();
        assert_eq!(g.spacing(), [1.5e-3; 3]);
        let spec = c.phantom_spec(&g).unwrap();
        assert_eq!(spec.inclusions.len(), 1);
        assert_eq!(spec.background_mu, Complex64::new(10e3, 600.0));
        let r = c.reconstruct.as_ref().unwrap().to_core().unwrap();
        assert_eq!(r.mode, Mode::Mersa);
        assert_eq!(r.overrides.max_iter, Some(5));
        assert_eq!(r.overrides.mu_re_bounds, Some((500.0, 30e3)));
        assert_eq!(r.zone_mm, 21.0);
        assert_eq!(r.initial_mu, Complex64::new(3e3, 0.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "[grid]\ndims = [4, 4, 4]\nspacing_mm = 1.0\nbogus = 3\n";
        let msg = parse(bad).unwrap_err().to_string();
        assert!(msg.contains("line 4"), "{msg}");
        let bad = "[simulate]\nfrequencies_hz = \"200\"\n";
        let msg = parse(bad).unwrap_err().to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn unknown_mode_is_rejected() {
        let c = parse("[reconstruct]\nmode = \"lfe\"\n").unwrap();
        assert!(c.reconstruct.unwrap().to_core().is_err());
    }
}
