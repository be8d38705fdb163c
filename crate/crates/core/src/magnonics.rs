//! Magnetostatic (Walker) modes of a ferrimagnetic sphere, `m = n` branch.
//!
//! In a sphere the internal field is `B - mu0 Ms / 3`, and the `(m, m)` mode
//! sits `mu0 Ms * m / (2m + 1)` above it, so
//! `f = gyro * (B + mu0 Ms * c_m)` with `c_m = m/(2m+1) - 1/3`.
//! `c_1 = 0` is the Kittel (uniform precession) mode.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One `(m, m)` mode and its measured linewidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkerMode {
    pub m: u32,
    pub linewidth: f64,
}

impl WalkerMode {
    pub fn new(m: u32, linewidth: f64) -> Result<Self> {
        walker_offset(m)?;
        Ok(Self { m, linewidth })
    }

    /// `n` equals `m` on the implemented branch.
    pub fn n(&self) -> u32 {
        self.m
    }

    pub fn offset_coeff(&self) -> f64 {
        walker_offset(self.m).expect("validated at construction")
    }

    pub fn frequency(&self, field: f64, mu0_ms: f64, gyro: f64) -> f64 {
        gyro * (field + mu0_ms * self.offset_coeff())
    }
}

/// Dimensionless offset `m/(2m+1) - 1/3`.
pub fn walker_offset(m: u32) -> Result<f64> {
    if m < 1 {
        return Err(Error::domain("Walker mode index m must be >= 1"));
    }
    let m = f64::from(m);
    Ok(m / (2.0 * m + 1.0) - 1.0 / 3.0)
}

pub fn walker_frequency(m: u32, field: f64, mu0_ms: f64, gyro: f64) -> Result<f64> {
    Ok(gyro * (field + mu0_ms * walker_offset(m)?))
}

/// Observed crossing of mode `m` with a known frequency at field `field`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub m: u32,
    pub field: f64,
    pub frequency: f64,
}

impl Crossing {
    pub fn new(m: u32, field: f64, frequency: f64) -> Self {
        Self {
            m,
            field,
            frequency,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkerFit {
    /// Hz/T.
    pub gyro: f64,
    /// T.
    pub mu0_ms: f64,
    /// RMS of frequency residuals, Hz.
    pub residual_rms: f64,
}

impl WalkerFit {
    pub fn frequency(&self, m: u32, field: f64) -> Result<f64> {
        walker_frequency(m, field, self.mu0_ms, self.gyro)
    }
}

/// Linear least squares of `f = gyro*B + (gyro*mu0Ms)*c_m` over the crossings.
///
/// Needs crossings of at least two different mode orders; with a single
/// order the magnetization is not separable from the field axis.
pub fn fit_gyro_and_ms(crossings: &[Crossing]) -> Result<WalkerFit> {
    if crossings.len() < 2 {
        return Err(Error::Underdetermined(format!(
            "{} crossing(s); need at least 2",
            crossings.len()
        )));
    }
    let first = crossings[0].m;
    if crossings.iter().all(|c| c.m == first) {
        return Err(Error::Underdetermined(format!(
            "all crossings belong to mode order {first}"
        )));
    }
    let rows = crossings.len();
    let mut design = DMatrix::zeros(rows, 2);
    let mut rhs = DVector::zeros(rows);
    for (i, c) in crossings.iter().enumerate() {
        if !(c.field >= 0.0) {
            return Err(Error::domain(format!("negative field {}", c.field)));
        }
        design[(i, 0)] = c.field;
        design[(i, 1)] = walker_offset(c.m)?;
        rhs[i] = c.frequency;
    }
    let svd = design.clone().svd(true, true);
    let x = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Underdetermined(e.to_string()))?;
    let (gyro, product) = (x[0], x[1]);
    if gyro <= 0.0 {
        return Err(Error::Underdetermined(format!(
            "fitted gyromagnetic ratio {gyro} is not positive"
        )));
    }
    let residuals = &design * &x - &rhs;
    Ok(WalkerFit {
        gyro,
        mu0_ms: product / gyro,
        residual_rms: (residuals.norm_squared() / rows as f64).sqrt(),
    })
}

/// Through-origin slope from Kittel-mode crossings only.
pub fn fit_gyro(crossings: &[Crossing]) -> Result<f64> {
    if crossings.is_empty() || crossings.iter().any(|c| c.m != 1) {
        return Err(Error::Underdetermined(
            "gyro-only fit needs one or more m = 1 crossings".into(),
        ));
    }
    let sxy: f64 = crossings.iter().map(|c| c.field * c.frequency).sum();
    let sxx: f64 = crossings.iter().map(|c| c.field * c.field).sum();
    if sxx == 0.0 {
        return Err(Error::Underdetermined("all crossings at zero field".into()));
    }
    Ok(sxy / sxx)
}
