//! Transmission maps against the mode solvers, and the fits against
//! synthetic data with known parameters.

mod common;

use magcav::coupled::{dispersion_branches, rwa_two_mode};
use magcav::estimators::{
    find_peaks, fit_lorentzian, fit_three_mode, fit_two_mode, ridge_from_map, RidgeOptions,
    RidgePoint, TwoModeParams,
};
use magcav::model::{HybridModel, ModeKind, OscillatorMode};
use magcav::spectra::{
    add_noise, bogoliubov_map, density_map, linspace, lorentzian, s21, PortCouplings, Scale,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn two_mode(fc: f64, kappa: f64, gamma: f64, g: f64, slope: f64, cross: f64) -> HybridModel {
    HybridModel::two_mode(
        OscillatorMode::new(fc, kappa, ModeKind::CavityBright, "c").unwrap(),
        OscillatorMode::new(fc, gamma, ModeKind::Magnon, "m").unwrap(),
        g,
        slope,
        cross,
    )
    .unwrap()
}

fn magnitude(model: &HybridModel, freqs: &[f64]) -> Vec<f64> {
    let ports = PortCouplings::default();
    freqs
        .iter()
        .map(|&f| s21(f, model, &ports).unwrap().norm())
        .collect()
}

#[test]
fn transmission_peaks_sit_on_eigenfrequencies() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let fc = rng.random_range(5e9..25e9);
        let kappa = rng.random_range(5e6..40e6);
        let gamma = rng.random_range(0.5e6..5e6);
        let g = rng.random_range(10.0..50.0) * kappa;
        let detuning = rng.random_range(-1.0..1.0) * g;
        let model = two_mode(fc, kappa, gamma, g, 28e9, 0.5)
            .at_field(0.5 + detuning / 28e9)
            .unwrap();
        let eigen = rwa_two_mode(fc, fc + detuning, g).unwrap().frequencies;
        for &e in &eigen {
            let freqs = linspace(e - kappa, e + kappa, 2001);
            let peaks = find_peaks(&freqs, &magnitude(&model, &freqs), 0.0).unwrap();
            let nearest = peaks
                .iter()
                .map(|p| (p.frequency - e).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(
                nearest <= 0.5 * kappa,
                "peak {nearest} Hz from eigenvalue, kappa {kappa}"
            );
        }
    }
}

#[test]
fn uncoupled_linewidth_is_cavity_linewidth() {
    let (fc, kappa) = (20.9e9, 27e6);
    let model = two_mode(fc, kappa, 1.1e6, 0.0, 28.13e9, 0.743);
    let freqs = linspace(fc - 5.0 * kappa, fc + 5.0 * kappa, 801);
    let power: Vec<f64> = magnitude(&model, &freqs).iter().map(|m| m * m).collect();
    let report = fit_lorentzian(&freqs, &power, None).unwrap();
    assert!(report.converged);
    assert!((report.value("fwhm").unwrap() - kappa).abs() <= 1e-6 * kappa);
    assert!((report.value("f0").unwrap() - fc).abs() <= 1.0);
}

#[test]
fn hybrid_linewidth_averages_at_resonance() {
    let (fc, kappa, gamma, g) = (20.9e9, 27e6, 1.1e6, 2.05e9);
    let model = two_mode(fc, kappa, gamma, g, 28.13e9, 0.743);
    for e in rwa_two_mode(fc, fc, g).unwrap().frequencies {
        let freqs = linspace(e - 5.0 * kappa, e + 5.0 * kappa, 801);
        let power: Vec<f64> = magnitude(&model, &freqs).iter().map(|m| m * m).collect();
        let w = fit_lorentzian(&freqs, &power, None)
            .unwrap()
            .value("fwhm")
            .unwrap();
        let expected = 0.5 * (kappa + gamma);
        assert!((w - expected).abs() <= 0.01 * expected, "{w} vs {expected}");
    }
}

#[test]
fn lorentzian_width_under_noise() {
    let (f0, w) = (20.9e9, 27e6);
    let freqs = linspace(f0 - 5.0 * w, f0 + 5.0 * w, 401);
    let clean: Vec<f64> = freqs
        .iter()
        .map(|&f| lorentzian(f, 1.0, f0, w, 0.0))
        .collect();
    let noise = Normal::new(0.0, 1e-3).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noisy: Vec<f64> = clean.iter().map(|v| v + noise.sample(&mut rng)).collect();
        let fitted = fit_lorentzian(&freqs, &noisy, None)
            .unwrap()
            .value("fwhm")
            .unwrap();
        worst = worst.max((fitted - w).abs() / w);
    }
    assert!(worst <= 0.02, "worst relative width error {worst}");
}

#[test]
fn doublet_peaks_split_by_coupling() {
    let cfg = common::load("bright_kittel_crossing.toml");
    let model = cfg.model().unwrap().at_field(0.743).unwrap();
    let freqs = linspace(17.9e9, 23.9e9, 4001);
    let peaks = find_peaks(&freqs, &magnitude(&model, &freqs), 1e-4).unwrap();
    assert_eq!(peaks.len(), 2);
    let split = peaks[1].frequency - peaks[0].frequency;
    assert!((split - 2.05e9).abs() <= 0.01 * 2.05e9, "{split}");
}

#[test]
fn map_ridge_follows_dispersion() {
    let cfg = common::load("bright_kittel_crossing.toml");
    let model = cfg.model().unwrap();
    let grid = cfg.grid().unwrap();
    let (fields, freqs) = (grid.fields(), grid.frequencies());
    let map = density_map(&model, &fields, &freqs, &cfg.ports().unwrap()).unwrap();
    let ridge = ridge_from_map(&map, &RidgeOptions::default()).unwrap();
    let dispersion = dispersion_branches(&model, &fields).unwrap();
    let step = freqs[1] - freqs[0];
    assert!(ridge.len() >= fields.len());
    for p in &ridge {
        let bi = fields.iter().position(|&b| b == p.field).unwrap();
        let nearest = dispersion.points[bi]
            .frequencies
            .iter()
            .map(|e| (e - p.frequency).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(
            nearest <= step,
            "ridge point {p:?} is {nearest} Hz from a branch"
        );
    }
}

#[test]
fn uncoupled_lines_are_straight() {
    let cfg = common::load("zero_coupling.toml");
    let model = cfg.model().unwrap();
    let grid = cfg.grid().unwrap();
    let (fields, freqs) = (grid.fields(), grid.frequencies());
    let map = density_map(&model, &fields, &freqs, &PortCouplings::default()).unwrap();
    let ridge = ridge_from_map(&map, &RidgeOptions::default()).unwrap();
    let step = freqs[1] - freqs[0];
    // only the cavity transmits; an uncoupled magnon never reaches the ports
    assert_eq!(ridge.len(), fields.len());
    assert!(ridge
        .iter()
        .all(|p| (p.frequency - 20.9e9).abs() <= 0.1 * step));

    let tracks = dispersion_branches(&model, &fields).unwrap().tracked();
    let cavity = tracks.iter().find(|t| t.1[0][0] == 1.0).unwrap();
    let magnon = tracks.iter().find(|t| t.1[0][1] == 1.0).unwrap();
    for (i, &b) in fields.iter().enumerate() {
        assert_eq!(cavity.0[i], 20.9e9);
        let line = 20.9e9 + 28.13e9 * (b - 0.743);
        assert!((magnon.0[i] - line).abs() <= 1e-3);
    }
}

#[test]
fn spectator_branch_crosses_the_gap() {
    let cfg = common::load("dark_doublet_crossing.toml");
    let model = cfg.model().unwrap().at_field(0.471).unwrap();
    let freqs = linspace(13.55e9, 14.25e9, 2801);
    let trace = magnitude(&model, &freqs);
    let top = trace.iter().cloned().fold(0.0, f64::max);
    let peaks = find_peaks(&freqs, &trace, 1e-3 * top).unwrap();
    assert_eq!(peaks.len(), 3, "{peaks:?}");
    let centre = peaks[1].frequency;
    assert!(peaks[0].frequency < centre && centre < peaks[2].frequency);
    assert!((centre - 13.9e9).abs() < 0.1 * 143e6);
}

#[test]
fn counter_rotating_map_is_asymmetric() {
    let (fc, g) = (20.9e9, 5.29e9);
    let fields = vec![0.743];
    let freqs = linspace(14e9, 28e9, 14001);
    let map = bogoliubov_map(
        fc,
        27e6 / 12.0,
        1.1e6,
        28.13e9,
        g,
        &fields,
        &freqs,
        &PortCouplings::default(),
    )
    .unwrap()
    .to_scale(Scale::Linear);
    let peaks = find_peaks(&freqs, map.column(0), 1e-6).unwrap();
    assert_eq!(peaks.len(), 2);
    let mean = 0.5 * (fc + 28.13e9 * 0.743);
    let (below, above) = (mean - peaks[0].frequency, peaks[1].frequency - mean);
    let split = peaks[1].frequency - peaks[0].frequency;
    assert!((below - above).abs() > 0.01 * split, "{below} vs {above}");
    assert!(below > above);
}

fn synthetic_ridge(params: &TwoModeParams, fields: &[f64]) -> Vec<RidgePoint> {
    fields
        .iter()
        .flat_map(|&b| {
            let (lo, hi) = params.branches(b);
            [lo, hi].map(|f| RidgePoint {
                field: b,
                frequency: f,
                height: 1.0,
            })
        })
        .collect()
}

const BRIGHT: TwoModeParams = TwoModeParams {
    f_c: 20.9e9,
    gyro: 28.13e9,
    offset: 20.9e9 - 28.13e9 * 0.743,
    g_over_pi: 2.05e9,
};

#[test]
fn two_mode_fit_recovers_synthetic_ridge() {
    let ridge = synthetic_ridge(&BRIGHT, &linspace(0.55, 0.95, 50));
    let fit = TwoModeParams::from_report(&fit_two_mode(&ridge, None).unwrap()).unwrap();
    assert!((fit.g_over_pi - BRIGHT.g_over_pi).abs() <= 1e-3 * BRIGHT.g_over_pi);
    assert!((fit.f_c - BRIGHT.f_c).abs() <= 1e-3 * BRIGHT.f_c);
    assert!((fit.gyro - BRIGHT.gyro).abs() <= 1e-3 * BRIGHT.gyro);
}

#[test]
fn two_mode_fit_of_uncoupled_crossing() {
    let params = TwoModeParams {
        g_over_pi: 0.0,
        ..BRIGHT
    };
    let ridge = synthetic_ridge(&params, &linspace(0.55, 0.95, 50));
    let g = fit_two_mode(&ridge, None)
        .unwrap()
        .value("g_over_pi")
        .unwrap();
    assert!(g < 1e-3 * BRIGHT.f_c, "{g}");
}

#[test]
fn two_mode_fit_with_frequency_jitter() {
    let jitter = Normal::new(0.0, 0.01).unwrap();
    let errors: Vec<f64> = (0..20)
        .map(|seed| {
            let mut ridge = synthetic_ridge(&BRIGHT, &linspace(0.55, 0.95, 50));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for p in &mut ridge {
                p.frequency *= 1.0 + jitter.sample(&mut rng);
            }
            let g = fit_two_mode(&ridge, None)
                .unwrap()
                .value("g_over_pi")
                .unwrap();
            g / BRIGHT.g_over_pi - 1.0
        })
        .collect();
    let n = errors.len() as f64;
    let bias = errors.iter().sum::<f64>() / n;
    let rms = (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    assert!(bias.abs() <= 0.01, "bias {bias}");
    assert!(rms <= 0.05, "rms {rms}");
}

#[test]
fn two_mode_fit_is_scale_equivariant() {
    let ridge = synthetic_ridge(&BRIGHT, &linspace(0.55, 0.95, 40));
    let base = TwoModeParams::from_report(&fit_two_mode(&ridge, None).unwrap()).unwrap();
    for lambda in [0.25, 3.0, 1e-3] {
        let scaled: Vec<RidgePoint> = ridge
            .iter()
            .map(|p| RidgePoint {
                field: lambda * p.field,
                frequency: lambda * p.frequency,
                height: p.height,
            })
            .collect();
        let fit = TwoModeParams::from_report(&fit_two_mode(&scaled, None).unwrap()).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        assert!(rel(fit.f_c, lambda * base.f_c) < 1e-6);
        assert!(rel(fit.g_over_pi, lambda * base.g_over_pi) < 1e-6);
        assert!(rel(fit.offset, lambda * base.offset) < 1e-6);
        assert!(rel(fit.gyro, base.gyro) < 1e-6);
    }
}

#[test]
fn noisy_map_round_trip() {
    let cfg = common::load("bright_kittel_crossing.toml");
    let grid = cfg.grid().unwrap();
    let clean = density_map(
        &cfg.model().unwrap(),
        &grid.fields(),
        &grid.frequencies(),
        &cfg.ports().unwrap(),
    )
    .unwrap();
    for seed in [1, 2, 3] {
        let map = add_noise(&clean, seed, 1e-3).unwrap();
        let ridge = ridge_from_map(&map, &RidgeOptions::default()).unwrap();
        let g = fit_two_mode(&ridge, None)
            .unwrap()
            .value("g_over_pi")
            .unwrap();
        assert!((g - 2.05e9).abs() <= 0.01 * 2.05e9, "seed {seed}: {g}");
    }
}

#[test]
fn degenerate_doublet_falls_back_to_two_modes() {
    let text = std::fs::read_to_string(common::fixture("dark_doublet_crossing.toml"))
        .unwrap()
        .replace("g_over_pi_MHz = 12.5", "g_over_pi_MHz = 0");
    let cfg = magcav::config::RunConfig::parse(&text).unwrap();
    let grid = cfg.grid().unwrap();
    let map = density_map(
        &cfg.model().unwrap(),
        &grid.fields(),
        &grid.frequencies(),
        &PortCouplings::default(),
    )
    .unwrap();
    let ridge = ridge_from_map(
        &map,
        &RidgeOptions {
            relative_prominence: 0.02,
            ..RidgeOptions::default()
        },
    )
    .unwrap();
    let report = fit_three_mode(&ridge, None).unwrap();
    assert!(report.has_flag("fallback:two-mode"));
    let g = report.value("g_c_over_pi").unwrap();
    assert!((g - 143e6).abs() <= 0.01 * 143e6, "{g}");
}
