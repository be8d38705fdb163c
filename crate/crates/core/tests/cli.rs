//! The `magcav` binary: exit codes, output files and determinism.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{fixture, key_values};
use sha2::{Digest, Sha256};

fn magcav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magcav"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn digest(path: &Path) -> Vec<u8> {
    Sha256::digest(std::fs::read(path).unwrap()).to_vec()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn cavity_reports_calibrated_frequencies() {
    let out = magcav(&[
        "cavity",
        path_str(&fixture("as_built_cavity.toml")),
        "--resolution",
        "201",
    ]);
    assert_eq!(code(&out), 0);
    let kv = key_values(&stdout(&out));
    assert!((kv["f_dark_Hz"] / 13.75e9 - 1.0).abs() < 1e-9);
    assert!((kv["f_bright_Hz"] / 20.6e9 - 1.0).abs() < 1e-9);
    assert!(kv["xi_bright"] > kv["xi_dark"]);
}

#[test]
fn cavity_gap_scan_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scan.csv");
    let out = magcav(&[
        "cavity",
        path_str(&fixture("as_built_cavity.toml")),
        "--scan",
        "gap",
        "--from",
        "10",
        "--to",
        "150",
        "--steps",
        "8",
        "--resolution",
        "96",
        "--csv",
        path_str(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "gap_um,f_dark_Hz,f_bright_Hz,xi_dark,xi_bright"
    );
    assert_eq!(lines.count(), 8);
}

#[test]
fn missing_geometry_is_a_config_error() {
    let out = magcav(&["cavity", path_str(&fixture("measured_device.toml"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.toml");
    let text = std::fs::read_to_string(fixture("as_built_cavity.toml")).unwrap();
    std::fs::write(&cfg, text.replace("gap_um", "gap_microns")).unwrap();
    assert_eq!(code(&magcav(&["cavity", path_str(&cfg)])), 2);
}

#[test]
fn missing_file_is_an_io_error() {
    assert_eq!(code(&magcav(&["cavity", "/nonexistent/cavity.toml"])), 4);
    assert_eq!(code(&magcav(&["fit", "/nonexistent/map.csv"])), 4);
}

#[test]
fn malformed_map_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "B_T,f_Hz,s21_dB\n0.5,1e9,abc\n").unwrap();
    assert_eq!(code(&magcav(&["fit", path_str(&csv)])), 4);
}

#[test]
fn unknown_fit_model_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("map.csv");
    std::fs::write(&csv, "B_T,f_Hz,s21_dB\n").unwrap();
    assert_eq!(
        code(&magcav(&["fit", path_str(&csv), "--model", "four-mode"])),
        2
    );
}

#[test]
fn one_sided_map_is_unidentifiable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("truncated.toml");
    let text = std::fs::read_to_string(fixture("bright_kittel_crossing.toml")).unwrap();
    std::fs::write(&cfg, text.replace("B_stop_T = 0.95", "B_stop_T = 0.65")).unwrap();
    let csv = dir.path().join("map.csv");
    assert_eq!(
        code(&magcav(&[
            "spectrum",
            path_str(&cfg),
            "--csv",
            path_str(&csv)
        ])),
        0
    );
    assert_eq!(code(&magcav(&["fit", path_str(&csv)])), 3);
}

#[test]
fn spectrum_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("bright_kittel_crossing.toml");
    let mut sums = Vec::new();
    for run in 0..2 {
        let csv = dir.path().join(format!("map{run}.csv"));
        let pgm = dir.path().join(format!("map{run}.pgm"));
        let out = magcav(&[
            "spectrum",
            path_str(&cfg),
            "--csv",
            path_str(&csv),
            "--pgm",
            path_str(&pgm),
        ]);
        assert_eq!(code(&out), 0);
        sums.push((digest(&csv), digest(&pgm)));
    }
    assert_eq!(sums[0], sums[1]);
}

#[test]
fn fit_report_feeds_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("map.csv");
    let fit = dir.path().join("fit.txt");
    let spectrum = magcav(&[
        "spectrum",
        path_str(&fixture("bright_kittel_crossing.toml")),
        "--csv",
        path_str(&csv),
    ]);
    assert_eq!(code(&spectrum), 0);
    let out = magcav(&["fit", path_str(&csv), "--out", path_str(&fit)]);
    assert_eq!(code(&out), 0);
    let g = key_values(&stdout(&out))["param.g_over_pi"];
    assert!((g / 2.05e9 - 1.0).abs() < 0.01);

    let report = magcav(&[
        "report",
        path_str(&fixture("measured_device.toml")),
        "--fit",
        path_str(&fit),
    ]);
    assert_eq!(code(&report), 0);
    let kv = key_values(&stdout(&report));
    assert_eq!(kv["bright.g_over_pi_Hz"], g);
}

#[test]
fn walker_and_predict_run() {
    let dir = tempfile::tempdir().unwrap();
    let chart = dir.path().join("walker.csv");
    let out = magcav(&[
        "walker",
        path_str(&fixture("walker_crossings.toml")),
        "--csv",
        path_str(&chart),
    ]);
    assert_eq!(code(&out), 0);
    assert!(std::fs::read_to_string(&chart).unwrap().lines().count() > 100);

    let prefix = dir.path().join("predicted");
    let out = magcav(&[
        "predict",
        path_str(&fixture("measured_device.toml")),
        "--map",
        path_str(&prefix),
    ]);
    assert_eq!(code(&out), 0);
    let kv = key_values(&stdout(&out));
    assert!((kv["g_over_pi_optimized_Hz"] / 5.29e9 - 1.0).abs() < 0.01);
    assert!(prefix.with_extension("csv").exists());
    assert!(prefix.with_extension("pgm").exists());
}
