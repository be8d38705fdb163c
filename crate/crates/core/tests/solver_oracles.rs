//! Eigenfrequency solvers against independent oracles: inertia bisection on
//! the leading-minor sign sequence, a Bogoliubov-de Gennes inertia count and
//! a general dense symmetric solver. Every comparison is to 1 Hz.

#![allow(clippy::needless_range_loop)]

mod common;

use common::{nalgebra_eigenvalues, oracle_bogoliubov, oracle_eigenvalues};
use magcav::coupled::{bogoliubov_two_mode, normal_modes, rwa_three_mode, rwa_two_mode};
use magcav::model::{HybridModel, ModeKind, OscillatorMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INSTANCES: usize = 10_000;
const TOL_HZ: f64 = 1.0;

fn ghz(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi) * 1e9
}

fn assert_close(label: &str, got: &[f64], want: &[f64]) {
    assert_eq!(got.len(), want.len(), "{label}");
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= TOL_HZ, "{label}: {got:?} vs {want:?}");
    }
}

#[test]
fn two_mode_rwa_matches_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..INSTANCES {
        let (fc, fm) = (ghz(&mut rng, 1.0, 30.0), ghz(&mut rng, 1.0, 30.0));
        let g = if i % 10 == 0 {
            0.0
        } else {
            ghz(&mut rng, 0.0, 3.0)
        };
        let got = rwa_two_mode(fc, fm, g).unwrap().frequencies;
        let m = vec![vec![fc, 0.5 * g], vec![0.5 * g, fm]];
        assert_close("bisection", &got, &oracle_eigenvalues(&m));
        assert_close("dense", &got, &nalgebra_eigenvalues(&m));
    }
}

#[test]
fn two_mode_rwa_exact_at_resonance() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let f = ghz(&mut rng, 1.0, 30.0);
        let g = ghz(&mut rng, 0.0, 3.0);
        let r = rwa_two_mode(f, f, g).unwrap();
        assert!((r.gap(0) - g).abs() <= 1e-6 * f);
        assert!((r.weights[0][0] - 0.5).abs() < 1e-12);
    }
}

#[test]
fn three_mode_chain_matches_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..INSTANCES {
        let fc = ghz(&mut rng, 5.0, 25.0);
        let (fr, fl) = match i % 4 {
            0 => (fc, fc),
            1 => {
                let f = fc + ghz(&mut rng, -0.3, 0.3);
                (f, f)
            }
            _ => (fc + ghz(&mut rng, -0.5, 0.5), fc + ghz(&mut rng, -0.5, 0.5)),
        };
        let gc = ghz(&mut rng, 0.0, 0.5);
        let grl = if i % 7 == 0 {
            0.0
        } else {
            ghz(&mut rng, 0.0, 0.05)
        };
        let got = rwa_three_mode(fc, fr, fl, gc, grl).unwrap().frequencies;
        let m = vec![
            vec![fc, 0.5 * gc, 0.0],
            vec![0.5 * gc, fr, 0.5 * grl],
            vec![0.0, 0.5 * grl, fl],
        ];
        assert_close("bisection", &got, &oracle_eigenvalues(&m));
        assert_close("dense", &got, &nalgebra_eigenvalues(&m));
    }
}

#[test]
fn bogoliubov_matches_bdg_inertia() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..INSTANCES {
        let (fc, fm) = (ghz(&mut rng, 1.0, 30.0), ghz(&mut rng, 1.0, 30.0));
        let g = rng.random_range(0.0..0.95) * (fc * fm).sqrt();
        let got = bogoliubov_two_mode(fc, fm, g).unwrap().frequencies;
        let want = oracle_bogoliubov(fc, fm, g);
        // the lower branch softens to zero at collapse; the oracle bisects
        // in absolute Hz, so the bound stays absolute
        assert_close("bdg", &got, &want);
    }
}

#[test]
fn bogoliubov_collapse_boundary() {
    let (fc, fm) = (20.9e9, 20.9e9);
    assert!(bogoliubov_two_mode(fc, fm, 20.9e9).is_err());
    let near = bogoliubov_two_mode(fc, fm, 0.999 * 20.9e9).unwrap();
    let oracle = oracle_bogoliubov(fc, fm, 0.999 * 20.9e9);
    assert!((near.frequencies[0] - oracle[0]).abs() <= TOL_HZ);
    assert!(near.frequencies[0] < 0.05 * fc);
}

fn random_model(rng: &mut ChaCha8Rng, n: usize) -> HybridModel {
    let mut modes = Vec::with_capacity(n);
    for k in 0..n {
        let kind = if k == 0 {
            ModeKind::CavityBright
        } else {
            ModeKind::Magnon
        };
        modes.push(OscillatorMode::new(ghz(rng, 10.0, 22.0), 1e6, kind, format!("m{k}")).unwrap());
    }
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(0.6) {
                let v = ghz(rng, 0.0, 2.0);
                g[i][j] = v;
                g[j][i] = v;
            }
        }
    }
    HybridModel::new(modes, g, vec![0.0; n], 0.5).unwrap()
}

#[test]
fn general_models_match_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..INSTANCES {
        let n = 2 + i % 5;
        let model = random_model(&mut rng, n);
        let got = normal_modes(&model).frequencies;
        let m = model.frequency_matrix();
        assert_close("bisection", &got, &oracle_eigenvalues(&m));
        assert_close("dense", &got, &nalgebra_eigenvalues(&m));
    }
}
