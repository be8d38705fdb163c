//! TOML run configuration.
//!
//! Every dimensional key carries its unit as a suffix (`gap_um`,
//! `B_start_T`, `f0_GHz`, ...). Unknown keys are rejected. Blocks are
//! optional at parse time; each command asks for the ones it needs.

#![allow(non_snake_case)]

use std::path::Path;

use serde::Deserialize;

use crate::cavity::CavityGeometry;
use crate::error::{Error, Result};
use crate::model::{HybridModel, ModeKind, OscillatorMode, SphereSample};
use crate::spectra::{linspace, PortCouplings};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub geometry: Option<GeometryBlock>,
    pub sphere: Option<SphereBlock>,
    pub model: Option<ModelBlock>,
    pub ports: Option<PortsBlock>,
    pub grid: Option<GridBlock>,
    pub measured: Option<MeasuredBlock>,
    pub optimized: Option<OptimizedBlock>,
    pub walker: Option<WalkerBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryBlock {
    pub cavity_radius_mm: f64,
    pub height_mm: f64,
    pub post_radius_mm: f64,
    pub gap_um: f64,
    /// Distance between facing post surfaces.
    pub post_clearance_mm: Option<f64>,
    /// Distance between post axes.
    pub post_spacing_mm: Option<f64>,
    #[serde(default = "one")]
    pub eps_r_gap: f64,
    pub calibrate_dark_GHz: Option<f64>,
    pub calibrate_bright_GHz: Option<f64>,
    pub l_correction: Option<f64>,
    pub coupling_k: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereBlock {
    pub diameter_mm: f64,
    pub mu0_Ms_T: f64,
    pub spin_density_m3: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeBlock {
    pub label: String,
    pub kind: String,
    /// Frequency at the model's reference field.
    pub f0_GHz: f64,
    pub linewidth_MHz: f64,
    #[serde(default)]
    pub slope_GHz_per_T: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingBlock {
    pub a: String,
    pub b: String,
    pub g_over_pi_MHz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    #[serde(default)]
    pub reference_field_T: f64,
    pub modes: Vec<ModeBlock>,
    #[serde(default)]
    pub couplings: Vec<CouplingBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortsBlock {
    pub beta1: f64,
    pub beta2: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub B_start_T: f64,
    pub B_stop_T: f64,
    pub B_steps: usize,
    pub f_start_GHz: f64,
    pub f_stop_GHz: f64,
    pub f_steps: usize,
    #[serde(default)]
    pub noise_sigma: f64,
    pub pgm_min_dB: Option<f64>,
    pub pgm_max_dB: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasuredMode {
    pub f_GHz: f64,
    pub g_over_pi_MHz: f64,
    pub linewidth_MHz: f64,
    pub magnon_linewidth_MHz: f64,
    /// Modeled filling factor of the sphere in this mode.
    pub filling_factor: f64,
    /// Modeled cavity frequency, when it differs from the measured one.
    pub modeled_f_GHz: Option<f64>,
    pub Q_loaded: Option<f64>,
    pub geometric_factor_ohm: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasuredBlock {
    pub incident_power_dBm: Option<f64>,
    pub bright: MeasuredMode,
    pub dark: Option<MeasuredMode>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizedBlock {
    pub filling_factor: f64,
    #[serde(default = "one")]
    pub linewidth_factor: f64,
    /// Slope of the magnon line for the predicted map; defaults to the
    /// standard YIG value.
    pub gyro_GHz_per_T: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossingBlock {
    pub m: u32,
    pub B_T: f64,
    pub f_GHz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkerBlock {
    pub crossings: Vec<CrossingBlock>,
    #[serde(default = "default_max_m")]
    pub max_m: u32,
    pub B_start_T: f64,
    pub B_stop_T: f64,
    pub B_steps: usize,
}

fn default_max_m() -> u32 {
    4
}

fn missing(block: &str) -> Error {
    Error::Config(format!("missing [{block}] block"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.root())))
    }

    pub fn geometry(&self) -> Result<CavityGeometry> {
        let g = self.geometry.as_ref().ok_or_else(|| missing("geometry"))?;
        let mm = 1e-3;
        let post_radius = g.post_radius_mm * mm;
        let post_spacing = match (g.post_clearance_mm, g.post_spacing_mm) {
            (Some(c), None) => c * mm + 2.0 * post_radius,
            (None, Some(s)) => s * mm,
            _ => {
                return Err(Error::Config(
                    "[geometry] needs exactly one of post_clearance_mm, post_spacing_mm".into(),
                ))
            }
        };
        let base = CavityGeometry {
            cavity_radius: g.cavity_radius_mm * mm,
            height: g.height_mm * mm,
            post_radius,
            gap: g.gap_um * 1e-6,
            post_spacing,
            eps_r_gap: g.eps_r_gap,
            l_correction: 1.0,
            coupling_k: 0.0,
        };
        match (
            g.calibrate_dark_GHz,
            g.calibrate_bright_GHz,
            g.l_correction,
            g.coupling_k,
        ) {
            (Some(d), Some(b), None, None) => base.calibrated(d * 1e9, b * 1e9),
            (None, None, Some(l), Some(k)) => {
                let out = CavityGeometry {
                    l_correction: l,
                    coupling_k: k,
                    ..base
                };
                out.validate()?;
                Ok(out)
            }
            _ => Err(Error::Config(
                "[geometry] needs either calibrate_dark_GHz and calibrate_bright_GHz, \
                 or l_correction and coupling_k"
                    .into(),
            )),
        }
    }

    pub fn sphere(&self) -> Result<SphereSample> {
        let s = self.sphere.as_ref().ok_or_else(|| missing("sphere"))?;
        SphereSample::new(s.diameter_mm * 1e-3, s.mu0_Ms_T, s.spin_density_m3)
    }

    /// The `[sphere]` block, or the standard 0.8 mm YIG sphere.
    pub fn sphere_or_default(&self) -> Result<SphereSample> {
        if self.sphere.is_some() {
            self.sphere()
        } else {
            Ok(SphereSample::yig_800um())
        }
    }

    pub fn model(&self) -> Result<HybridModel> {
        let m = self.model.as_ref().ok_or_else(|| missing("model"))?;
        let mut builder = HybridModel::builder().reference_field(m.reference_field_T);
        for mode in &m.modes {
            let kind: ModeKind = mode.kind.parse()?;
            let osc = OscillatorMode::new(
                mode.f0_GHz * 1e9,
                mode.linewidth_MHz * 1e6,
                kind,
                &mode.label,
            )?;
            builder = if mode.slope_GHz_per_T != 0.0 {
                builder.tuned_mode(osc, mode.slope_GHz_per_T * 1e9)
            } else {
                builder.mode(osc)
            };
        }
        for c in &m.couplings {
            builder = builder.couple(&c.a, &c.b, c.g_over_pi_MHz * 1e6);
        }
        builder.build()
    }

    /// `[ports]`, or the default weak coupling on both ports.
    pub fn ports(&self) -> Result<PortCouplings> {
        match &self.ports {
            Some(p) => PortCouplings::new(p.beta1, p.beta2),
            None => Ok(PortCouplings::default()),
        }
    }

    pub fn grid(&self) -> Result<&GridBlock> {
        let g = self.grid.as_ref().ok_or_else(|| missing("grid"))?;
        if g.B_steps < 2 || g.f_steps < 3 {
            return Err(Error::Config(
                "[grid] needs B_steps >= 2 and f_steps >= 3".into(),
            ));
        }
        if !(g.B_start_T < g.B_stop_T && g.f_start_GHz < g.f_stop_GHz) {
            return Err(Error::Config("[grid] ranges must be ascending".into()));
        }
        if !(g.noise_sigma >= 0.0) {
            return Err(Error::Config("[grid] noise_sigma must be >= 0".into()));
        }
        Ok(g)
    }

    pub fn measured(&self) -> Result<&MeasuredBlock> {
        self.measured.as_ref().ok_or_else(|| missing("measured"))
    }

    pub fn optimized(&self) -> Result<&OptimizedBlock> {
        self.optimized.as_ref().ok_or_else(|| missing("optimized"))
    }

    pub fn walker(&self) -> Result<&WalkerBlock> {
        self.walker.as_ref().ok_or_else(|| missing("walker"))
    }
}

impl GridBlock {
    pub fn fields(&self) -> Vec<f64> {
        linspace(self.B_start_T, self.B_stop_T, self.B_steps)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        linspace(self.f_start_GHz * 1e9, self.f_stop_GHz * 1e9, self.f_steps)
    }

    pub fn pgm_clamp(&self) -> Option<(f64, f64)> {
        match (self.pgm_min_dB, self.pgm_max_dB) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            _ => None,
        }
    }
}
