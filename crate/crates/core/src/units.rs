//! Physical constants and unit conventions.
//!
//! Every stored frequency and linewidth is a linear frequency in Hz. Angular
//! frequencies only appear inside solvers, through [`to_angular`] and
//! [`from_angular`]. Couplings are carried as the observable normal-mode
//! splitting `g/pi` in Hz. Bias fields are in tesla.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// CODATA 2018 values, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Vacuum permeability, H/m.
    pub mu0: f64,
    /// Vacuum permittivity, F/m.
    pub eps0: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Bohr magneton, J/T.
    pub mu_b: f64,
    /// Electron Lande factor used by [`PhysicalConstants::gyro_default`].
    pub g_electron: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    mu0: 1.256_637_062_12e-6,
    eps0: 8.854_187_812_8e-12,
    hbar: 1.054_571_817e-34,
    mu_b: 9.274_010_078_3e-24,
    g_electron: 2.0,
};

/// Gyromagnetic coefficient through the bright-mode Kittel crossing
/// (20.9 GHz at 0.743 T), Hz/T. Used when no fitted value is supplied.
pub const DEFAULT_GYRO: f64 = 28.13e9;

impl PhysicalConstants {
    /// Gyromagnetic ratio for the stored Lande factor, Hz/T.
    pub fn gyro_default(&self) -> f64 {
        self.g_electron * self.mu_b / (2.0 * PI * self.hbar)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        CONSTANTS
    }
}

/// Frequency per unit field `g mu_B / (2 pi hbar)` in Hz/T.
pub fn gyromagnetic_ratio(g_factor: f64) -> Result<f64> {
    if !(g_factor > 0.0 && g_factor < 10.0) {
        return Err(Error::domain(format!(
            "g-factor {g_factor} outside (0, 10)"
        )));
    }
    Ok(g_factor * (CONSTANTS.mu_b / (2.0 * PI * CONSTANTS.hbar)))
}

/// Linear field tuning of a magnon line, Hz.
pub fn magnon_frequency(field: f64, slope: f64, offset: f64) -> f64 {
    slope * field + offset
}

#[inline]
pub fn to_angular(f: f64) -> f64 {
    2.0 * PI * f
}

#[inline]
pub fn from_angular(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn free_electron_gyro_is_about_28_ghz_per_tesla() {
        let gamma = gyromagnetic_ratio(2.0).unwrap();
        assert_relative_eq!(gamma, 27.99e9, max_relative = 1e-3);
        assert!((27.9e9..=28.1e9).contains(&CONSTANTS.gyro_default()));
        assert_eq!(gamma, CONSTANTS.gyro_default());
    }

    #[test]
    fn g_factor_from_crossing() {
        // 20.9 GHz at 0.743 T
        let gamma = gyromagnetic_ratio(2.0093).unwrap();
        assert_relative_eq!(gamma, 28.13e9, max_relative = 1e-3);
    }

    #[test]
    fn g_factor_domain() {
        assert!(matches!(gyromagnetic_ratio(0.0), Err(Error::Domain(_))));
        assert!(gyromagnetic_ratio(-1.0).is_err());
        assert!(gyromagnetic_ratio(10.0).is_err());
        assert!(gyromagnetic_ratio(f64::NAN).is_err());
    }

    #[test]
    fn gyro_is_linear_in_g() {
        for a in [0.5, 1.0, 2.0, 2.0093, 4.9] {
            assert_eq!(
                gyromagnetic_ratio(2.0 * a).unwrap(),
                2.0 * gyromagnetic_ratio(a).unwrap()
            );
        }
    }

    #[test]
    fn magnon_line() {
        assert_relative_eq!(
            magnon_frequency(0.743, 28.13e9, 0.0),
            20.9e9,
            max_relative = 1e-3
        );
        assert_eq!(magnon_frequency(0.0, 28.13e9, 0.0), 0.0);
        let offset = 28.13e9 * 0.255 / 15.0;
        assert_relative_eq!(offset, 0.478e9, max_relative = 1e-3);
        assert_relative_eq!(
            magnon_frequency(0.471, 28.13e9, offset),
            13.73e9,
            max_relative = 1e-3
        );
    }

    #[test]
    fn angular_round_trip() {
        for f in [1.0, 13.9e9, 20.9e9, 1e-3, 7.5e12] {
            let back = from_angular(to_angular(f));
            assert!(((back - f) / f).abs() <= 1e-12);
        }
    }

    #[test]
    fn minus_ninety_dbm() {
        assert_relative_eq!(dbm_to_watts(-90.0), 1e-12, max_relative = 1e-12);
    }
}
