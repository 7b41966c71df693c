use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cavity_compression::cli::{read_key_values, read_series};
use tempfile::TempDir;

fn ccomp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccomp"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn value(map: &BTreeMap<String, String>, key: &str) -> f64 {
    map.get(key).unwrap_or_else(|| panic!("missing {key}")).parse().unwrap()
}

fn small_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, format!("grid.n_samples = 8192\ngrid.time_span_factor = 80\n{extra}")).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn simulate_defaults() {
    let tmp = TempDir::new().unwrap();
    let out = ccomp(tmp.path(), &["simulate"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = read_key_values(&tmp.path().join("summary.txt")).unwrap();
    let step = value(&s, "frequency_step_mhz");
    assert!((value(&s, "b50_input_mhz") - 20.6).abs() < step);
    assert!(value(&s, "b50_compressed_mhz") < value(&s, "b50_input_mhz"));
    assert!((value(&s, "gamma_p_mhz") - 20.6).abs() < 1e-9);
    assert!((value(&s, "gamma_c_mhz") - 7.3).abs() < 1e-9);
    for f in ["temporal_input.csv", "spectrum_compressed.csv", "b50_windows.csv", "manifest.txt"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
}

#[test]
fn simulate_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        let cfg = small_config(dir.path(), "");
        assert!(ccomp(dir.path(), &["--config", &cfg, "simulate"]).status.success());
    }
    let ma = fs::read_to_string(a.path().join("manifest.txt")).unwrap();
    let mb = fs::read_to_string(b.path().join("manifest.txt")).unwrap();
    assert_eq!(ma, mb);
    assert!(ma.contains("config_sha256"));
}

#[test]
fn no_modulator_leaves_spectrum() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "");
    assert!(ccomp(tmp.path(), &["--config", &cfg, "--no-modulator", "simulate"]).status.success());
    let (_, input) = read_series(&tmp.path().join("spectrum_input.csv")).unwrap();
    let (_, output) = read_series(&tmp.path().join("spectrum_compressed.csv")).unwrap();
    let peak = input.y.iter().cloned().fold(0.0, f64::max);
    for (a, b) in input.y.iter().zip(&output.y) {
        assert!((a - b).abs() <= 1e-9 * peak);
    }
    let s = read_key_values(&tmp.path().join("summary.txt")).unwrap();
    assert_eq!(s["modulator"], "off");
}

#[test]
fn tsv_output() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "output.format = tsv\n");
    assert!(ccomp(tmp.path(), &["--config", &cfg, "simulate"]).status.success());
    let text = fs::read_to_string(tmp.path().join("spectrum_input.tsv")).unwrap();
    assert!(text.lines().any(|l| l == "detuning_mhz\tpower_density"));
}

#[test]
fn optimize_writes_optimum_and_trace() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "");
    let out = ccomp(
        tmp.path(),
        &["--config", &cfg, "optimize", "--gamma-c-points", "5", "--detuning-points", "3"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let o = read_key_values(&tmp.path().join("optimum.txt")).unwrap();
    let gc = value(&o, "gamma_c_opt_over_gamma_p");
    assert!((0.05..=1.0).contains(&gc));
    assert!(value(&o, "b50_opt_over_gamma_p") < 1.0);
    let trace = fs::read_to_string(tmp.path().join("trace.csv")).unwrap();
    let rows = trace.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows as f64, value(&o, "evaluation_count"));
}

#[test]
fn optimize_single_point() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "");
    let out = ccomp(
        tmp.path(),
        &["--config", &cfg, "--gamma-c-mhz", "5.15", "--detuning-mhz", "0", "optimize"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let o = read_key_values(&tmp.path().join("optimum.txt")).unwrap();
    assert!((value(&o, "gamma_c_opt_mhz") - 5.15).abs() < 1e-9);
    assert_eq!(value(&o, "evaluation_count"), 1.0);
}

#[test]
fn scan_fp_shows_compression() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "");
    assert!(ccomp(tmp.path(), &["--config", &cfg, "scan-fp"]).status.success());
    let s = read_key_values(&tmp.path().join("summary.txt")).unwrap();
    assert!(value(&s, "peak_rate_ratio") >= 2.0);
    assert!(tmp.path().join("scan_compressed.csv").exists());
}

#[test]
fn fit_temporal_synthetic_and_file() {
    let tmp = TempDir::new().unwrap();
    let out = ccomp(tmp.path(), &["fit-temporal", "--seed", "11"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let f = read_key_values(&tmp.path().join("fit.txt")).unwrap();
    assert!((value(&f, "gamma_p_mhz") / 20.6 - 1.0).abs() < 0.02);

    // refit the written histogram as user input
    let other = TempDir::new().unwrap();
    let input = tmp.path().join("synthetic_histogram.csv");
    let out = ccomp(other.path(), &["--input", input.to_str().unwrap(), "fit-temporal"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let g = read_key_values(&other.path().join("fit.txt")).unwrap();
    assert!((value(&g, "gamma_p_mhz") - value(&f, "gamma_p_mhz")).abs() < 1e-6);
}

#[test]
fn fit_spectrum_synthetic() {
    let tmp = TempDir::new().unwrap();
    let out = ccomp(tmp.path(), &["fit-spectrum", "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let f = read_key_values(&tmp.path().join("fit.txt")).unwrap();
    assert!(value(&f, "od") > 0.0);
    let curve = fs::read_to_string(tmp.path().join("fit_curve.csv")).unwrap();
    assert!(curve.contains("detuning_mhz,rate,fit,lorentzian"));
}

#[test]
fn malformed_input_reports_line() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("bad.csv");
    fs::write(&input, "t_ns,counts\n0.25,10\n0.75,oops\n").unwrap();
    let out = ccomp(tmp.path(), &["--input", input.to_str().unwrap(), "fit-temporal"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn rising_data_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("rise.csv");
    fs::write(&input, "t_ns,counts\n0,1\n1,2\n2,3\n3,4\n4,5\n").unwrap();
    let out = ccomp(tmp.path(), &["--input", input.to_str().unwrap(), "fit-temporal"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_config_exits_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "cavity.gamma_c_mhz = -1\n");
    assert_eq!(ccomp(tmp.path(), &["--config", &cfg, "simulate"]).status.code(), Some(2));
    let cfg = small_config(tmp.path(), "cavity.colour = red\n");
    let out = ccomp(tmp.path(), &["--config", &cfg, "simulate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}
