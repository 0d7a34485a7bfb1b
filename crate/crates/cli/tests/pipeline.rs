use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const CONFIG: &str = r#"
[grid]
dims = [14, 14, 14]
spacing_mm = 1.5

[phantom]
preset = "single-inclusion"

[simulate]
frequencies_hz = [200.0]
snr_db = 30.0
seed = 11

[reconstruct]
mode = "ersa"
zone_mm = 15
stride_mm = 12

[reconstruct.params]
max_iter = 2

[export]
axis = "y"
"#;

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mre-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("run.toml"), CONFIG).unwrap();
    dir
}

fn mre(dir: &Path, out: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mre"))
        .current_dir(dir)
        .args(["--config", "run.toml", "--out", out, "--threads", "1"])
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn full_pipeline_writes_every_artifact() {
    let dir = workdir("full");
    let sim = mre(&dir, "out", &["simulate"]);
    assert_eq!(sim.status.code(), Some(0), "{}", String::from_utf8_lossy(&sim.stderr));
    assert!(String::from_utf8_lossy(&sim.stdout).contains("r_m = 0.0949"));

    let rec = mre(&dir, "out", &["reconstruct"]);
    assert_eq!(rec.status.code(), Some(3), "max_iter = 2 cannot meet the tolerance");

    assert_eq!(mre(&dir, "out", &["evaluate"]).status.code(), Some(0));
    assert_eq!(mre(&dir, "out", &["export"]).status.code(), Some(0));
    let out = dir.join("out");
    for f in [
        "manifest.toml",
        "u_0_200Hz.mvol",
        "mu_true.mvol",
        "mu.mvol",
        "u_rec_0_200Hz.mvol",
        "p_rec_0_200Hz.mvol",
        "trace.csv",
        "summary.toml",
        "metrics.csv",
        "profiles.csv",
        "mu_re_y7_w0-40kPa.pgm",
        "mu_y7.csv",
        "reconstruct.config.toml",
    ] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("metric,region,value\n"));
    assert!(metrics.contains("cnr_re,inclusion1,"));
    let pgm = std::fs::read(out.join("mu_re_y7_w0-40kPa.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n14 14\n255\n"));
    assert_eq!(pgm.len(), b"P5\n14 14\n255\n".len() + 14 * 14);
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 3);
}

#[test]
fn same_config_and_seed_reproduce_bytes() {
    let dir = workdir("repro");
    for out in ["a", "b"] {
        assert_eq!(mre(&dir, out, &["--seed", "5", "simulate"]).status.code(), Some(0));
        mre(&dir, out, &["reconstruct"]);
    }
    for f in ["u_0_200Hz.mvol", "mu.mvol"] {
        let a = std::fs::read(dir.join("a").join(f)).unwrap();
        let b = std::fs::read(dir.join("b").join(f)).unwrap();
        assert!(a == b, "{f} differs between runs");
    }
}

#[test]
fn export_rejects_out_of_range_slice() {
    let dir = workdir("slice");
    assert_eq!(mre(&dir, "out", &["simulate"]).status.code(), Some(0));
    let text = CONFIG.replace("axis = \"y\"", "axis = \"y\"\nslice = 14\nfield = \"out/mu_true.mvol\"");
    std::fs::write(dir.join("run.toml"), text).unwrap();
    let out = mre(&dir, "out", &["export"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("out of range"));
}

#[test]
fn usage_and_config_errors_have_distinct_codes() {
    let dir = workdir("codes");
    assert_eq!(mre(&dir, "out", &["frobnicate"]).status.code(), Some(2));
    std::fs::write(dir.join("run.toml"), "[grid]\ndims = [4, 4]\n").unwrap();
    assert_eq!(mre(&dir, "out", &["simulate"]).status.code(), Some(1));
}
