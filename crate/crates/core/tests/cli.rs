//! End-to-end runs of the `qled` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qled::io::{decode_qtt, read_curve_csv, read_tempsweep_csv};

fn qled(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qled"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn config(dir: &Path, name: &str, source: &str, duration_s: f64, extra: &str) -> PathBuf {
    let text = format!(
        r#"[source]
{source}

[detector]
efficiency = 1.0
jitter_fwhm_ps = 0
dark_rate_hz = 0
dead_time_ps = 0
time_bin_ps = 1

[measurement]
xx_basis = "DA"
x_basis = "DA"
duration_s = {duration_s}
seed = 12
{extra}"#
    );
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const QUIET_SOURCE: &str = "fss_ueV = 17.7\nx_lifetime_ps = 400\ncycle_rate_hz = 1e6";

#[test]
fn zero_duration_gives_empty_file_and_empty_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.toml", QUIET_SOURCE, 0.0, "");
    let run = dir.path().join("empty.qtt");
    assert_eq!(code(&qled(&["simulate", "--config", p(&cfg), "--out", p(&run)])), 0);
    let stream = decode_qtt(&std::fs::read(&run).unwrap()).unwrap();
    assert!(stream.is_empty());
    assert_eq!(stream.channel_map().len(), 4);
    assert!(dir.path().join("empty.qtt.manifest").is_file());

    let csv = dir.path().join("x.csv");
    let out = qled(&["xcorr", "--in", p(&run), "--a", "0", "--b", "2", "--out", p(&csv)]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), "delay_ps,value,sigma\n");
}

#[test]
fn truncated_file_reports_offset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.toml", QUIET_SOURCE, 0.001, "");
    let run = dir.path().join("r.qtt");
    assert_eq!(code(&qled(&["simulate", "--config", p(&cfg), "--out", p(&run)])), 0);
    let bytes = std::fs::read(&run).unwrap();
    assert!(bytes.len() > 100);
    let cut = dir.path().join("cut.qtt");
    std::fs::write(&cut, &bytes[..bytes.len() - 5]).unwrap();
    let out = qled(&["g2", "--in", p(&cut), "--a", "0", "--b", "2", "--out", p(&dir.path().join("g.csv"))]);
    assert_eq!(code(&out), 3);
    let record_start = bytes.len() - 16;
    assert!(String::from_utf8_lossy(&out.stderr).contains(&record_start.to_string()));
    assert!(!dir.path().join("g.csv").exists());
}

#[test]
fn usage_config_and_io_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&qled(&["frobnicate"])), 2);
    assert_eq!(code(&qled(&["g2", "--in", "x.qtt"])), 2);
    let missing = dir.path().join("missing.toml");
    let out = qled(&["simulate", "--config", p(&missing), "--out", p(&dir.path().join("o.qtt"))]);
    assert_eq!(code(&out), 3);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[source]\nfss_ueV = -1\ncolour = 3\n[measurement]\nseed = 1\n").unwrap();
    let out = qled(&["simulate", "--config", p(&bad), "--out", p(&dir.path().join("o.qtt"))]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    for needle in ["colour", "fss_ueV", "xx_basis", "duration_s"] {
        assert!(err.contains(needle), "{needle} not reported in {err}");
    }
}

#[test]
fn missing_basis_run_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.toml", QUIET_SOURCE, 0.001, "");
    let runs = dir.path().join("runs");
    let out = qled(&["simulate", "--config", p(&cfg), "--out", p(&runs), "--basis-set"]);
    assert_eq!(code(&out), 0);
    std::fs::remove_file(runs.join("lr.qtt")).unwrap();
    let out = qled(&[
        "fidelity", "--in-dir", p(&runs), "--fss-ueV", "17.7", "--out", p(&dir.path().join("f.csv")),
    ]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("lr"));
}

#[test]
fn uncorrelated_source_is_classical() {
    let dir = tempfile::tempdir().unwrap();
    let source = "fss_ueV = 17.7\nx_lifetime_ps = 400\ncycle_rate_hz = 2e7\nreexcitation_rate_hz = 1e15";
    let cfg = config(dir.path(), "c.toml", source, 0.005, "");
    let runs = dir.path().join("runs");
    assert_eq!(code(&qled(&["simulate", "--config", p(&cfg), "--out", p(&runs), "--basis-set"])), 0);
    let csv = dir.path().join("f.csv");
    let out = qled(&[
        "fidelity", "--in-dir", p(&runs), "--fss-ueV", "17.7", "--bin-ps", "500", "--window-ns", "2",
        "--out", p(&csv),
    ]);
    assert_eq!(code(&out), 1);
    let (_, curve) = read_curve_csv(&std::fs::read(&csv).unwrap()).unwrap();
    for (d, v, s) in curve.defined() {
        assert!((v - 0.25).abs() < 5.0 * s + 1e-9, "F({d}) = {v} ± {s}");
    }
}

#[test]
fn ideal_static_source_reaches_unit_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let source = "fss_ueV = 0\nx_lifetime_ps = 300\ncycle_rate_hz = 5e5";
    let cfg = config(dir.path(), "c.toml", source, 0.05, "");
    let runs = dir.path().join("runs");
    assert_eq!(code(&qled(&["simulate", "--config", p(&cfg), "--out", p(&runs), "--basis-set"])), 0);
    let csv = dir.path().join("f.csv");
    let out = qled(&[
        "fidelity", "--in-dir", p(&runs), "--fss-ueV", "0", "--mode", "chi=0", "--bin-ps", "4000",
        "--window-ns", "4", "--out", p(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (_, curve) = read_curve_csv(&std::fs::read(&csv).unwrap()).unwrap();
    let peak = curve.defined().map(|(_, v, _)| v).fold(f64::MIN, f64::max);
    assert!(peak >= 0.98, "peak {peak}");
}

#[test]
fn single_temperature_sweep_matches_manual_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let source = "fss_ueV = 17.7\nx_lifetime_ps = 400\ncycle_rate_hz = 1e7";
    let extra = "\n[analysis]\nbin_ps = 32\nwindow_ns = 3\n\n[temperature]\nrows = [[40, 500, 0.1], [80, 300, 0.4]]\n";
    let cfg = config(dir.path(), "c.toml", source, 0.01, extra);

    let sweep = dir.path().join("sweep.csv");
    let out = qled(&["tempsweep", "--config", p(&cfg), "--temps", "60", "--seed", "5", "--out", p(&sweep)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_tempsweep_csv(&std::fs::read(&sweep).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].x_lifetime_ps - 400.0).abs() < 1e-9);

    let runs = dir.path().join("runs");
    let out = qled(&[
        "simulate", "--config", p(&cfg), "--out", p(&runs), "--basis-set", "--temperature", "60",
        "--seed", "5",
    ]);
    assert_eq!(code(&out), 0);
    let csv = dir.path().join("f.csv");
    let out = qled(&[
        "fidelity", "--in-dir", p(&runs), "--fss-ueV", "17.7", "--bin-ps", "32", "--window-ns", "3",
        "--out", p(&csv),
    ]);
    assert!(code(&out) <= 1);
    let (_, curve) = read_curve_csv(&std::fs::read(&csv).unwrap()).unwrap();
    let peak = curve.defined().map(|(_, v, _)| v).fold(f64::MIN, f64::max);
    assert_eq!(peak, rows[0].peak_fidelity);
}

#[test]
fn temperature_outside_table_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let extra = "\n[temperature]\nrows = [[40, 500, 0.1], [80, 300, 0.4]]\n";
    let cfg = config(dir.path(), "c.toml", QUIET_SOURCE, 0.001, extra);
    let out = qled(&["tempsweep", "--config", p(&cfg), "--temps", "30", "--out", p(&dir.path().join("s.csv"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn fss_synth_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fss.toml");
    std::fs::write(
        &cfg,
        "[model]\ns_ueV = 12.0\ntheta_rad = 0.6\nphi_rad = 1.9\n\n[series]\npoints = 181\nnoise_sigma_ueV = 0.3\nseed = 3\n",
    )
    .unwrap();
    let series = dir.path().join("series.csv");
    assert_eq!(code(&qled(&["fss", "synth", "--config", p(&cfg), "--out", p(&series)])), 0);
    let fit = dir.path().join("fit.csv");
    assert_eq!(code(&qled(&["fss", "fit", "--in", p(&series), "--out", p(&fit)])), 0);
    let text = std::fs::read_to_string(&fit).unwrap();
    assert!(text.starts_with("parameter,estimate,sigma\n"));
    let s: f64 = text
        .lines()
        .find(|l| l.starts_with("s_ueV,"))
        .and_then(|l| l.split(',').nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!((s - 12.0).abs() < 0.2, "s = {s}");
}

#[test]
fn constant_series_reports_unresolved_splitting() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("flat.csv");
    let mut text = String::from("chi_rad,delta_e_ueV,sigma_ueV\n");
    for i in 0..37 {
        text.push_str(&format!("{},{},0.2\n", std::f64::consts::PI * i as f64 / 36.0, 1.5));
    }
    std::fs::write(&series, text).unwrap();
    let fit = dir.path().join("fit.csv");
    assert_eq!(code(&qled(&["fss", "fit", "--in", p(&series), "--out", p(&fit)])), 0);
    let text = std::fs::read_to_string(&fit).unwrap();
    assert!(text.lines().any(|l| l.starts_with("fss_unresolved,")), "{text}");
}
