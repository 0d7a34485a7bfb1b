//! The four pipeline commands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use mre_core::admm::{run_reconstruction, write_trace_csv, Mode};
use mre_core::fem::DofMap;
use mre_core::forward::{add_dataset_noise, measure_wavelength_z, simulate_clean, BoundaryConditions};
use mre_core::grid::{rasterize_phantom, ComplexScalarField, MultiFrequencyDataset, PhantomSpec, VoxelGrid};
use mre_core::metrics::{cnr, icc, line_profile, rmse, write_metrics_csv, MetricRow, Part, RegionMask};
use mre_core::mvol::{self, Volume};
use mre_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{resolve, Axis, BcPreset, PipelineConfig};
use crate::error::CliError;

pub struct Context {
    pub config: PipelineConfig,
    /// Directory of the config file; relative paths resolve against it.
    pub base: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

impl Context {
    fn input(&self, configured: &Option<PathBuf>, default_name: &str) -> PathBuf {
        match configured {
            Some(p) => resolve(&self.base, p),
            None => self.out.join(default_name),
        }
    }
}

/// Dataset manifest written by `simulate`, read by `reconstruct`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub density: f64,
    pub bc: BcPreset,
    pub seed: u64,
    pub snr_db: Option<f64>,
    pub ground_truth: String,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub frequency_hz: f64,
    pub file: String,
}

fn volume_name(prefix: &str, j: usize, f: f64) -> String {
    format!("{prefix}_{j}_{f}Hz.mvol")
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)?;
    Ok(())
}

pub fn simulate(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let sim = PipelineConfig::section(&cfg.simulate, "simulate")?;
    let grid = cfg.voxel_grid()?;
    let phantom = cfg.phantom_spec(&grid)?;
    let mut freqs = sim.frequencies_hz.clone();
    if freqs.is_empty() {
        return Err(CliError::Config("simulate.frequencies_hz must list at least one frequency".into()));
    }
    freqs.sort_by(f64::total_cmp);
    let seed = ctx.seed.unwrap_or(sim.seed);
    let dof = DofMap::new(grid);
    let amplitude = Complex64::new(sim.amplitude_um * 1e-6, 0.0);
    let bc = match sim.bc {
        BcPreset::CornerFixed => BoundaryConditions::bottom_driven_shear(&dof, amplitude),
        BcPreset::PlaneShear => BoundaryConditions::bottom_driven_plane_shear(&dof, amplitude),
    };
    let clean = simulate_clean(&phantom, &grid, &freqs, &bc)?;
    let data = match sim.snr_db {
        Some(snr) if snr.is_finite() => add_dataset_noise(&clean, snr, seed)?,
        _ => clean.clone(),
    };
    let mut entries = Vec::new();
    let h = grid.min_spacing();
    for (j, (u, u_clean)) in data.entries().iter().zip(clean.entries()).enumerate() {
        let f = u.frequency();
        let file = volume_name("u", j, f);
        mvol::save(ctx.out.join(&file), &Volume::from(u))?;
        entries.push(ManifestEntry { frequency_hz: f, file });
        let nominal = (phantom.background_mu.re / phantom.density).sqrt() / f;
        let measured = match measure_wavelength_z(u_clean) {
            Ok(w) => format!("{:.2} mm", w * 1e3),
            Err(_) => "n/a".into(),
        };
        println!(
            "{f} Hz: background shear wavelength {:.2} mm, r_m = {:.4}; measured along z: {measured}",
            nominal * 1e3,
            h / nominal
        );
    }
    let gt_name = "mu_true.mvol".to_string();
    mvol::save(ctx.out.join(&gt_name), &Volume::from(&rasterize_phantom(&phantom, &grid)?))?;
    let manifest = Manifest {
        density: phantom.density,
        bc: sim.bc,
        seed,
        snr_db: sim.snr_db,
        ground_truth: gt_name,
        entries,
    };
    let text = toml::to_string(&manifest).map_err(|e| CliError::Config(format!("cannot serialize manifest: {e}")))?;
    write_text(&ctx.out.join("manifest.toml"), &text)?;
    println!("wrote {} frequencies to {}", manifest.entries.len(), ctx.out.display());
    Ok(())
}

pub fn load_dataset(manifest_path: &Path) -> Result<(Manifest, MultiFrequencyDataset), CliError> {
    let text = std::fs::read_to_string(manifest_path)
        .map_err(|e| CliError::Config(format!("cannot read manifest {}: {e}", manifest_path.display())))?;
    let manifest: Manifest =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", manifest_path.display())))?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let entries = manifest
        .entries
        .iter()
        .map(|e| Ok(mvol::load(dir.join(&e.file))?.into_displacement()?))
        .collect::<Result<Vec<_>, CliError>>()?;
    let data = MultiFrequencyDataset::new(entries, manifest.density)?;
    Ok((manifest, data))
}

#[derive(Debug, Serialize)]
struct Summary {
    mode: String,
    iterations: usize,
    converged: bool,
    frequencies_hz: Vec<f64>,
    alpha_c: f64,
    alpha_mu: f64,
    data_weight: f64,
    alpha_x: f64,
    alpha_w: f64,
    gamma_u: f64,
    gamma_mu: f64,
    gamma_p: f64,
    tol_mu: f64,
    max_iter: usize,
}

pub fn reconstruct(ctx: &Context) -> Result<(), CliError> {
    let rc = PipelineConfig::section(&ctx.config.reconstruct, "reconstruct")?;
    let core = rc.to_core()?;
    let (_, data) = load_dataset(&ctx.input(&rc.dataset, "manifest.toml"))?;
    let rec = run_reconstruction(&data, &core)?;
    mvol::save(ctx.out.join("mu.mvol"), &Volume::from(&rec.mu))?;
    let mut freqs = Vec::new();
    for (j, (u, p)) in rec.displacement.iter().zip(&rec.pressure).enumerate() {
        let f = u.frequency();
        freqs.push(f);
        mvol::save(ctx.out.join(volume_name("u_rec", j, f)), &Volume::from(u))?;
        let mut pv = Volume::from(p);
        pv.frequency = f;
        mvol::save(ctx.out.join(volume_name("p_rec", j, f)), &pv)?;
    }
    write_trace_csv(BufWriter::new(File::create(ctx.out.join("trace.csv"))?), &rec.trace)?;
    let p = rec.params;
    let summary = Summary {
        mode: rc.mode.to_ascii_lowercase(),
        iterations: rec.iterations,
        converged: rec.converged,
        frequencies_hz: freqs,
        alpha_c: p.alpha_c,
        alpha_mu: p.alpha_mu,
        data_weight: p.data_weight,
        alpha_x: p.alpha_x,
        alpha_w: p.alpha_w,
        gamma_u: p.gamma_u,
        gamma_mu: p.gamma_mu,
        gamma_p: p.gamma_p,
        tol_mu: p.tol_mu,
        max_iter: p.max_iter,
    };
    let text = toml::to_string(&summary).map_err(|e| CliError::Config(format!("cannot serialize summary: {e}")))?;
    write_text(&ctx.out.join("summary.toml"), &text)?;
    println!(
        "{} finished after {} iterations ({})",
        summary.mode,
        rec.iterations,
        if rec.converged { "converged" } else { "tolerance not reached" }
    );
    if core.mode != Mode::Direct && !rec.converged {
        return Err(CliError::NotConverged(rec.iterations));
    }
    Ok(())
}

fn region_masks(spec: &PhantomSpec, grid: VoxelGrid, margin: usize) -> Result<Vec<(String, RegionMask)>, CliError> {
    let inner = RegionMask::interior(grid, margin);
    let mut out = vec![(
        "background".to_string(),
        inner.intersect(&RegionMask::from_positions(grid, |p| spec.region_at(p).is_none()))?,
    )];
    for n in 0..spec.inclusions.len() {
        let m = inner.intersect(&RegionMask::from_positions(grid, |p| spec.region_at(p) == Some(n)))?;
        out.push((format!("inclusion{}", n + 1), m));
    }
    Ok(out)
}

pub fn evaluate(ctx: &Context) -> Result<(), CliError> {
    let default = Default::default();
    let ev = ctx.config.evaluate.as_ref().unwrap_or(&default);
    let rec = mvol::load(ctx.input(&ev.reconstruction, "mu.mvol"))?.into_scalar()?;
    let grid = *rec.grid();
    let phantom = match &ctx.config.phantom {
        Some(_) => Some(ctx.config.phantom_spec(&grid)?),
        None => None,
    };
    let gt = match (&ev.ground_truth, &phantom) {
        (Some(p), _) => mvol::load(resolve(&ctx.base, p))?.into_scalar()?,
        (None, Some(spec)) => rasterize_phantom(spec, &grid)?,
        (None, None) => return Err(CliError::Config("evaluate needs [phantom] or evaluate.ground_truth".into())),
    };
    if *gt.grid() != grid {
        return Err(CliError::Config("reconstruction and ground truth grids differ".into()));
    }
    let all = RegionMask::interior(grid, ev.margin_voxels);
    let mut rows = vec![MetricRow::new("rmse_e", "all", rmse(&rec, &gt, &all, Part::Real)?)];
    if all.indices().all(|v| gt.values()[v].im != 0.0) {
        rows.push(MetricRow::new("rmse_v", "all", rmse(&rec, &gt, &all, Part::Imag)?));
    }
    if let Some(spec) = &phantom {
        let regions = region_masks(spec, grid, ev.margin_voxels)?;
        let bkg = &regions[0].1;
        let mut pairs = Vec::new();
        for (name, mask) in &regions {
            if mask.count() == 0 {
                continue;
            }
            let mean = |f: &ComplexScalarField| mask.indices().map(|v| f.values()[v].re).sum::<f64>() / mask.count() as f64;
            pairs.push((mean(&rec) * 1e-3, mean(&gt) * 1e-3));
            rows.push(MetricRow::new("mean_re_kpa", name.clone(), mean(&rec) * 1e-3));
            if name == "background" {
                continue;
            }
            for (metric, part) in [("cnr_re", Part::Real), ("cnr_im", Part::Imag)] {
                if let Ok(v) = cnr(&rec, part, mask, bkg) {
                    rows.push(MetricRow::new(metric, name.clone(), v));
                }
            }
        }
        if let Ok(v) = icc(&pairs) {
            rows.push(MetricRow::new("icc", "regions", v));
        }
    }
    write_metrics_csv(BufWriter::new(File::create(ctx.out.join("metrics.csv"))?), &rows)?;

    let [nx, ny, nz] = grid.dims();
    let profiles: Vec<(String, [usize; 3], [usize; 3])> = if ev.profiles.is_empty() {
        vec![("mid_x".into(), [0, ny / 2, nz / 2], [nx - 1, ny / 2, nz / 2])]
    } else {
        ev.profiles.iter().map(|p| (p.name.clone(), p.start, p.end)).collect()
    };
    let mut w = BufWriter::new(File::create(ctx.out.join("profiles.csv"))?);
    writeln!(w, "profile,s_mm,re_pa,im_pa,true_re_pa,true_im_pa")?;
    for (name, start, end) in profiles {
        let prof = line_profile(&rec, start, end)?;
        let truth = line_profile(&gt, start, end)?;
        for ((s, v), (_, t)) in prof.iter().zip(&truth) {
            writeln!(w, "{name},{s},{},{},{},{}", v.re, v.im, t.re, t.im)?;
        }
    }
    w.flush()?;
    for r in &rows {
        println!("{},{},{}", r.metric, r.region, r.value);
    }
    Ok(())
}

/// In-plane size and the voxel at in-plane position `(a, b)` of slice `s`.
fn slice_geometry(dims: [usize; 3], axis: Axis) -> ([usize; 2], impl Fn(usize, usize, usize) -> [usize; 3]) {
    let [nx, ny, nz] = dims;
    let size = match axis {
        Axis::X => [ny, nz],
        Axis::Y => [nx, nz],
        Axis::Z => [nx, ny],
    };
    (size, move |a: usize, b: usize, s: usize| match axis {
        Axis::X => [s, a, b],
        Axis::Y => [a, s, b],
        Axis::Z => [a, b, s],
    })
}

/// Linear window `[lo, hi]` (Pa) onto 0..=255.
pub fn gray_level(v: f64, lo: f64, hi: f64) -> u8 {
    (255.0 * (v - lo) / (hi - lo)).round().clamp(0.0, 255.0) as u8
}

pub fn export(ctx: &Context) -> Result<(), CliError> {
    let ex = PipelineConfig::section(&ctx.config.export, "export")?;
    let path = ctx.input(&ex.field, "mu.mvol");
    let field = mvol::load(&path)?.into_scalar()?;
    let grid = *field.grid();
    let dims = grid.dims();
    let axis_index = match ex.axis {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => 2,
    };
    let s = ex.slice.unwrap_or(dims[axis_index] / 2);
    if s >= dims[axis_index] {
        return Err(CliError::Config(format!(
            "slice {s} out of range: axis has {} voxels",
            dims[axis_index]
        )));
    }
    let [lo, hi] = ex.window_kpa;
    if !(lo < hi) {
        return Err(CliError::Config(format!("export.window_kpa needs lo < hi, got [{lo}, {hi}]")));
    }
    let (size, voxel) = slice_geometry(dims, ex.axis);
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("field").to_string();
    let axis_name = ["x", "y", "z"][axis_index];
    let tag = format!("{axis_name}{s}");
    for (part_name, part) in [("re", Part::Real), ("im", Part::Imag)] {
        let name = format!("{stem}_{part_name}_{tag}_w{lo}-{hi}kPa.pgm");
        let mut w = BufWriter::new(File::create(ctx.out.join(&name))?);
        write!(w, "P5\n{} {}\n255\n", size[0], size[1])?;
        let mut pixels = Vec::with_capacity(size[0] * size[1]);
        for b in 0..size[1] {
            for a in 0..size[0] {
                let [i, j, k] = voxel(a, b, s);
                pixels.push(gray_level(part.of(field.get(i, j, k)), lo * 1e3, hi * 1e3));
            }
        }
        w.write_all(&pixels)?;
        w.flush()?;
    }
    let mut w = BufWriter::new(File::create(ctx.out.join(format!("{stem}_{tag}.csv")))?);
    writeln!(w, "a,b,re_pa,im_pa")?;
    for b in 0..size[1] {
        for a in 0..size[0] {
            let [i, j, k] = voxel(a, b, s);
            let v = field.get(i, j, k);
            writeln!(w, "{a},{b},{},{}", v.re, v.im)?;
        }
    }
    w.flush()?;
    println!("exported {stem} slice {tag}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_maps_linearly() {
        assert_eq!(gray_level(20e3, 0.0, 40e3), 128);
        assert_eq!(gray_level(0.0, 0.0, 40e3), 0);
        assert_eq!(gray_level(40e3, 0.0, 40e3), 255);
        assert_eq!(gray_level(-5.0, 0.0, 40e3), 0);
        assert_eq!(gray_level(1e9, 0.0, 40e3), 255);
    }

    #[test]
    fn slice_geometry_orients_planes() {
        let (size, voxel) = slice_geometry([4, 5, 6], Axis::Y);
        assert_eq!(size, [4, 6]);
        assert_eq!(voxel(1, 2, 3), [1, 3, 2]);
    }

    #[test]
    fn region_masks_follow_the_phantom() {
        let g = VoxelGrid::cubic([40, 40, 40], 1.5e-3).unwrap();
        let spec = PhantomSpec::three_cylinders(&g);
        let regions = region_masks(&spec, g, 0).unwrap();
        assert_eq!(regions.len(), 4);
        let total: usize = regions.iter().map(|(_, m)| m.count()).sum();
        assert_eq!(total, g.len());
    }
}
