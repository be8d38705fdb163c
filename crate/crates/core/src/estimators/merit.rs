//! Figures of merit derived from fitted couplings and linewidths.
//!
//! Couplings are normal-mode splittings `g/pi` in Hz and linewidths are full
//! widths in Hz throughout.

use std::f64::consts::PI;

use crate::units::CONSTANTS;

/// `(g/pi)^2 / (cavity_fwhm * magnon_fwhm)`.
pub fn cooperativity(g_over_pi: f64, cavity_fwhm: f64, magnon_fwhm: f64) -> f64 {
    g_over_pi * g_over_pi / (cavity_fwhm * magnon_fwhm)
}

/// Spins in a sphere of the given diameter.
pub fn spin_count(density: f64, diameter: f64) -> f64 {
    density * PI / 6.0 * diameter.powi(3)
}

/// Single-spin coupling `(g/pi / 2) / sqrt(N)`, Hz.
pub fn coupling_per_spin(g_over_pi: f64, spins: f64) -> f64 {
    0.5 * g_over_pi / spins.sqrt()
}

/// `f_mode * sqrt(chi * xi)`.
pub fn coupling_from_filling(f_mode: f64, chi: f64, xi: f64) -> f64 {
    f_mode * (chi * xi).sqrt()
}

/// Inverse of [`coupling_from_filling`]: `(g/pi / f_mode)^2 / xi`.
pub fn susceptibility(f_mode: f64, g_over_pi: f64, xi: f64) -> f64 {
    (g_over_pi / f_mode).powi(2) / xi
}

/// Predicted ratio of two modes' couplings to the same sphere:
/// `(f_b / f_d) * sqrt(xi_b / xi_d)`.
pub fn coupling_ratio(f_b: f64, f_d: f64, xi_b: f64, xi_d: f64) -> f64 {
    (f_b / f_d) * (xi_b / xi_d).sqrt()
}

/// Steady-state intracavity photon number on resonance for incident power
/// `p_inc` (W) through port 1 of a two-port cavity.
pub fn photon_number(p_inc: f64, f0: f64, q_loaded: f64, beta1: f64, beta2: f64) -> f64 {
    let kappa = f0 / q_loaded;
    let kappa1 = beta1 * kappa / (1.0 + beta1 + beta2);
    let (w0, wk, wk1) = (2.0 * PI * f0, 2.0 * PI * kappa, 2.0 * PI * kappa1);
    4.0 * wk1 * p_inc / (CONSTANTS.hbar * w0 * wk * wk)
}

/// Coupling and linewidths measured on the current device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredSet {
    pub f_mode: f64,
    pub g_over_pi: f64,
    pub cavity_fwhm: f64,
    pub magnon_fwhm: f64,
    pub filling_factor: f64,
    pub spins: f64,
}

/// Design changes: a new filling factor and a cavity linewidth divided by
/// `linewidth_factor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimization {
    pub filling_factor: f64,
    pub linewidth_factor: f64,
}

impl Optimization {
    pub fn identity(current: &MeasuredSet) -> Self {
        Self {
            filling_factor: current.filling_factor,
            linewidth_factor: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub chi: f64,
    pub g_over_pi: f64,
    pub cavity_fwhm: f64,
    pub cooperativity_current: f64,
    pub cooperativity: f64,
    pub per_spin_current: f64,
    pub per_spin: f64,
}

/// Carries the measured coupling to a device with a different filling factor
/// and cavity linewidth, at the same mode frequency and sphere.
pub fn predict_optimized(current: &MeasuredSet, optimized: &Optimization) -> Prediction {
    let chi = susceptibility(current.f_mode, current.g_over_pi, current.filling_factor);
    // Equal to f_mode * sqrt(chi * xi_opt), written so identical filling
    // factors return the measured coupling unchanged.
    let g_opt = current.g_over_pi * (optimized.filling_factor / current.filling_factor).sqrt();
    let cavity_fwhm = current.cavity_fwhm / optimized.linewidth_factor;
    let per_spin_current = coupling_per_spin(current.g_over_pi, current.spins);
    let per_spin = if current.g_over_pi > 0.0 {
        per_spin_current * (g_opt / current.g_over_pi)
    } else {
        0.0
    };
    Prediction {
        chi,
        g_over_pi: g_opt,
        cavity_fwhm,
        cooperativity_current: cooperativity(
            current.g_over_pi,
            current.cavity_fwhm,
            current.magnon_fwhm,
        ),
        cooperativity: cooperativity(g_opt, cavity_fwhm, current.magnon_fwhm),
        per_spin_current,
        per_spin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bright_cooperativity() {
        assert_relative_eq!(
            cooperativity(2.05e9, 27e6, 1.1e6),
            1.415e5,
            max_relative = 1e-3
        );
        assert_eq!(cooperativity(0.0, 27e6, 1.1e6), 0.0);
        assert_relative_eq!(
            cooperativity(143e6, 33e6, 1.2e6),
            516.4,
            max_relative = 1e-3
        );
    }

    #[test]
    fn spins_and_per_spin() {
        let n = spin_count(2.1e28, 0.8e-3);
        assert_relative_eq!(n, 5.63e18, max_relative = 1e-3);
        assert_eq!(spin_count(2.1e28, 0.0), 0.0);
        assert_relative_eq!(
            spin_count(1.0, 2.0) / spin_count(1.0, 1.0),
            8.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(coupling_per_spin(2.05e9, n), 0.432, max_relative = 2e-3);
        assert_eq!(coupling_per_spin(2.05e9, 1.0), 1.025e9);
        let ratio = coupling_per_spin(5.2e9, n) / coupling_per_spin(2.05e9, n);
        assert_relative_eq!(ratio, 2.537, max_relative = 1e-3);
    }

    #[test]
    fn filling_chain() {
        let chi = susceptibility(20.9e9, 2.05e9, 0.03);
        assert_relative_eq!(chi, 0.3207, max_relative = 1e-3);
        assert_relative_eq!(
            coupling_from_filling(20.9e9, 0.3206, 0.03),
            2.05e9,
            max_relative = 1e-3
        );
        assert_relative_eq!(
            coupling_from_filling(20.9e9, 0.3206, 0.2),
            5.29e9,
            max_relative = 1e-3
        );
        assert_eq!(coupling_from_filling(20.9e9, 0.3206, 0.0), 0.0);
    }

    #[test]
    fn ratio() {
        assert_relative_eq!(
            coupling_ratio(20.6e9, 13.75e9, 3e-2, 3e-4),
            14.98,
            max_relative = 1e-3
        );
        assert_eq!(coupling_ratio(1.0, 1.0, 0.5, 0.5), 1.0);
    }

    #[test]
    fn photons() {
        let n = photon_number(1e-12, 20.9e9, 714.0, 0.01, 0.01);
        assert!(n > 7.5 && n < 30.0, "{n}");
        assert_eq!(photon_number(0.0, 20.9e9, 714.0, 0.01, 0.01), 0.0);
        assert_relative_eq!(
            photon_number(2e-12, 20.9e9, 714.0, 0.01, 0.01),
            2.0 * n,
            max_relative = 1e-15
        );
    }

    fn measured() -> MeasuredSet {
        MeasuredSet {
            f_mode: 20.9e9,
            g_over_pi: 2.05e9,
            cavity_fwhm: 27e6,
            magnon_fwhm: 1.1e6,
            filling_factor: 0.03,
            spins: 5.63e18,
        }
    }

    #[test]
    fn identity_prediction_is_exact() {
        let m = measured();
        let p = predict_optimized(&m, &Optimization::identity(&m));
        assert_eq!(p.g_over_pi, m.g_over_pi);
        assert_eq!(p.cavity_fwhm, m.cavity_fwhm);
        assert_eq!(p.cooperativity, p.cooperativity_current);
        assert_eq!(p.per_spin, p.per_spin_current);
    }

    #[test]
    fn optimized_chain() {
        let m = measured();
        let p = predict_optimized(
            &m,
            &Optimization {
                filling_factor: 0.2,
                linewidth_factor: 1.0,
            },
        );
        assert_relative_eq!(
            p.g_over_pi,
            coupling_from_filling(m.f_mode, p.chi, 0.2),
            max_relative = 1e-14
        );
        assert_relative_eq!(p.g_over_pi, 5.293e9, max_relative = 1e-3);
        assert_relative_eq!(p.cooperativity, 9.43e5, max_relative = 1e-3);
        let p12 = predict_optimized(
            &m,
            &Optimization {
                filling_factor: 0.2,
                linewidth_factor: 12.0,
            },
        );
        assert_relative_eq!(
            p12.cooperativity,
            12.0 * p.cooperativity,
            max_relative = 1e-14
        );
    }
}
