//! Domain types shared by the solvers, the response synthesis and the fits.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    /// Symmetric (co-directed post currents) cavity mode.
    CavityDark,
    /// Antisymmetric cavity mode with the field focused between the posts.
    CavityBright,
    Magnon,
}

impl ModeKind {
    pub fn is_cavity(self) -> bool {
        matches!(self, ModeKind::CavityDark | ModeKind::CavityBright)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModeKind::CavityDark => "cavity-dark",
            ModeKind::CavityBright => "cavity-bright",
            ModeKind::Magnon => "magnon",
        }
    }
}

impl std::str::FromStr for ModeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cavity-dark" => Ok(ModeKind::CavityDark),
            "cavity-bright" => Ok(ModeKind::CavityBright),
            "magnon" => Ok(ModeKind::Magnon),
            other => Err(Error::InvalidModel(format!("unknown mode kind '{other}'"))),
        }
    }
}

impl fmt::Display for ModeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single resonance: center frequency and full linewidth, both in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorMode {
    f0: f64,
    linewidth: f64,
    kind: ModeKind,
    label: String,
}

impl OscillatorMode {
    pub fn new(f0: f64, linewidth: f64, kind: ModeKind, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if !(f0 > 0.0 && f0.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "mode '{label}': f0 = {f0} must be > 0"
            )));
        }
        if !(linewidth >= 0.0 && linewidth < f0) {
            return Err(Error::InvalidModel(format!(
                "mode '{label}': linewidth {linewidth} must lie in [0, f0)"
            )));
        }
        Ok(Self {
            f0,
            linewidth,
            kind,
            label,
        })
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    /// Full width at half maximum, Hz.
    pub fn linewidth(&self) -> f64 {
        self.linewidth
    }

    pub fn kind(&self) -> ModeKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_f0(&self, f0: f64) -> Result<Self> {
        Self::new(f0, self.linewidth, self.kind, self.label.clone())
    }
}

/// Coupling expressed as the normal-mode splitting at resonance, `g/pi`, in Hz.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct CouplingStrength(f64);

impl CouplingStrength {
    pub const ZERO: CouplingStrength = CouplingStrength(0.0);

    pub fn new(g_over_pi: f64) -> Result<Self> {
        if !(g_over_pi >= 0.0 && g_over_pi.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "coupling g/pi = {g_over_pi} must be finite and >= 0"
            )));
        }
        Ok(Self(g_over_pi))
    }

    pub fn g_over_pi(self) -> f64 {
        self.0
    }

    /// Off-diagonal element of the frequency-domain coupling matrix, Hz.
    pub fn half_splitting(self) -> f64 {
        0.5 * self.0
    }

    /// Coupling rate `g` in rad/s.
    pub fn angular(self) -> f64 {
        PI * self.0
    }
}

/// Modes, their pairwise couplings and how each one tunes with the bias field.
///
/// Field-tuned modes follow `f(B) = f0 + slope * (B - reference_field)`, so
/// `f0` is the frequency at the model's reference field. Cavity modes have
/// zero slope.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridModel {
    modes: Vec<OscillatorMode>,
    couplings: Vec<CouplingStrength>,
    field_slopes: Vec<f64>,
    reference_field: f64,
}

impl HybridModel {
    /// `couplings` is the full symmetric matrix of `g/pi` values with a zero
    /// diagonal.
    pub fn new(
        modes: Vec<OscillatorMode>,
        couplings: Vec<Vec<f64>>,
        field_slopes: Vec<f64>,
        reference_field: f64,
    ) -> Result<Self> {
        let n = modes.len();
        if n == 0 {
            return Err(Error::InvalidModel("model has no modes".into()));
        }
        if couplings.len() != n || couplings.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidModel(format!(
                "coupling matrix must be {n}x{n}"
            )));
        }
        if field_slopes.len() != n {
            return Err(Error::InvalidModel(format!(
                "expected {n} field slopes, got {}",
                field_slopes.len()
            )));
        }
        if !reference_field.is_finite() {
            return Err(Error::InvalidModel("reference field must be finite".into()));
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in couplings.iter().enumerate() {
            for (j, &g) in row.iter().enumerate() {
                if i == j && g != 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "coupling diagonal ({i},{i}) must be zero"
                    )));
                }
                if g != couplings[j][i] {
                    return Err(Error::InvalidModel(format!(
                        "coupling matrix not symmetric at ({i},{j})"
                    )));
                }
                flat.push(CouplingStrength::new(g)?);
            }
        }
        for (mode, &slope) in modes.iter().zip(&field_slopes) {
            if !slope.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "mode '{}': non-finite field slope",
                    mode.label()
                )));
            }
            if mode.kind().is_cavity() && slope != 0.0 {
                return Err(Error::InvalidModel(format!(
                    "cavity mode '{}' must have zero field slope",
                    mode.label()
                )));
            }
        }
        Ok(Self {
            modes,
            couplings: flat,
            field_slopes,
            reference_field,
        })
    }

    pub fn builder() -> HybridModelBuilder {
        HybridModelBuilder::default()
    }

    /// Cavity coupled to one field-tuned magnon that is degenerate with it at
    /// `crossing_field`.
    pub fn two_mode(
        cavity: OscillatorMode,
        magnon: OscillatorMode,
        g_over_pi: f64,
        slope: f64,
        crossing_field: f64,
    ) -> Result<Self> {
        let (c, m) = (cavity.label().to_owned(), magnon.label().to_owned());
        Self::builder()
            .reference_field(crossing_field)
            .mode(cavity)
            .tuned_mode(magnon, slope)
            .couple(&c, &m, g_over_pi)
            .build()
    }

    /// Cavity coupled to the first member of a magnon doublet, which is in
    /// turn coupled to its partner.
    #[allow(clippy::too_many_arguments)]
    pub fn three_mode_chain(
        cavity: OscillatorMode,
        right: OscillatorMode,
        left: OscillatorMode,
        gc_over_pi: f64,
        grl_over_pi: f64,
        slope: f64,
        reference_field: f64,
    ) -> Result<Self> {
        let (c, r, l) = (
            cavity.label().to_owned(),
            right.label().to_owned(),
            left.label().to_owned(),
        );
        Self::builder()
            .reference_field(reference_field)
            .mode(cavity)
            .tuned_mode(right, slope)
            .tuned_mode(left, slope)
            .couple(&c, &r, gc_over_pi)
            .couple(&r, &l, grl_over_pi)
            .build()
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[OscillatorMode] {
        &self.modes
    }

    pub fn coupling(&self, i: usize, j: usize) -> CouplingStrength {
        self.couplings[i * self.len() + j]
    }

    pub fn field_slopes(&self) -> &[f64] {
        &self.field_slopes
    }

    pub fn reference_field(&self) -> f64 {
        self.reference_field
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.label() == label)
    }

    pub fn cavity_indices(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.modes[i].kind().is_cavity())
            .collect()
    }

    /// Bare mode frequencies at bias field `field`, Hz. Not validated.
    pub fn frequencies_at(&self, field: f64) -> Vec<f64> {
        self.modes
            .iter()
            .zip(&self.field_slopes)
            .map(|(m, &s)| {
                if s == 0.0 {
                    m.f0()
                } else {
                    m.f0() + s * (field - self.reference_field)
                }
            })
            .collect()
    }

    /// The same model re-referenced to `field`, with tuned modes moved.
    pub fn at_field(&self, field: f64) -> Result<Self> {
        let modes = self
            .modes
            .iter()
            .zip(self.frequencies_at(field))
            .map(|(m, f)| m.with_f0(f))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::at_field(field, e))?;
        Ok(Self {
            modes,
            couplings: self.couplings.clone(),
            field_slopes: self.field_slopes.clone(),
            reference_field: field,
        })
    }

    /// Real symmetric frequency-domain matrix: bare frequencies on the
    /// diagonal and half-splittings off it.
    pub fn frequency_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            self.modes[i].f0()
                        } else {
                            self.coupling(i, j).half_splitting()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Copy with a subset of modes, in the given order.
    pub fn submodel(&self, keep: &[usize]) -> Result<Self> {
        let modes = keep.iter().map(|&i| self.modes[i].clone()).collect();
        let couplings = keep
            .iter()
            .map(|&i| {
                keep.iter()
                    .map(|&j| self.coupling(i, j).g_over_pi())
                    .collect()
            })
            .collect();
        let slopes = keep.iter().map(|&i| self.field_slopes[i]).collect();
        Self::new(modes, couplings, slopes, self.reference_field)
    }
}

/// Label-based assembly of a [`HybridModel`].
#[derive(Debug, Default)]
pub struct HybridModelBuilder {
    modes: Vec<OscillatorMode>,
    slopes: Vec<f64>,
    couplings: Vec<(String, String, f64)>,
    reference_field: f64,
}

impl HybridModelBuilder {
    pub fn mode(mut self, mode: OscillatorMode) -> Self {
        self.modes.push(mode);
        self.slopes.push(0.0);
        self
    }

    pub fn tuned_mode(mut self, mode: OscillatorMode, slope: f64) -> Self {
        self.modes.push(mode);
        self.slopes.push(slope);
        self
    }

    pub fn couple(mut self, a: &str, b: &str, g_over_pi: f64) -> Self {
        self.couplings.push((a.to_owned(), b.to_owned(), g_over_pi));
        self
    }

    pub fn reference_field(mut self, field: f64) -> Self {
        self.reference_field = field;
        self
    }

    pub fn build(self) -> Result<HybridModel> {
        let n = self.modes.len();
        let index = |label: &str| {
            self.modes
                .iter()
                .position(|m| m.label() == label)
                .ok_or_else(|| Error::InvalidModel(format!("no mode labelled '{label}'")))
        };
        for (i, m) in self.modes.iter().enumerate() {
            if self.modes[..i].iter().any(|o| o.label() == m.label()) {
                return Err(Error::InvalidModel(format!(
                    "duplicate mode label '{}'",
                    m.label()
                )));
            }
        }
        let mut g = vec![vec![0.0; n]; n];
        for (a, b, value) in &self.couplings {
            let (i, j) = (index(a)?, index(b)?);
            if i == j {
                return Err(Error::InvalidModel(format!("mode '{a}' coupled to itself")));
            }
            g[i][j] = *value;
            g[j][i] = *value;
        }
        HybridModel::new(self.modes, g, self.slopes, self.reference_field)
    }
}

/// Ferrimagnetic sphere sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSample {
    diameter: f64,
    mu0_ms: f64,
    spin_density: f64,
    magnon_linewidths: Vec<(String, f64)>,
}

impl SphereSample {
    pub fn new(diameter: f64, mu0_ms: f64, spin_density: f64) -> Result<Self> {
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "sphere diameter {diameter} must be > 0"
            )));
        }
        if !(mu0_ms > 0.0 && mu0_ms < 1.0) {
            return Err(Error::InvalidModel(format!(
                "mu0*Ms = {mu0_ms} T outside (0, 1)"
            )));
        }
        if !(spin_density > 0.0 && spin_density.is_finite()) {
            return Err(Error::InvalidModel("spin density must be > 0".into()));
        }
        Ok(Self {
            diameter,
            mu0_ms,
            spin_density,
            magnon_linewidths: Vec::new(),
        })
    }

    /// 0.8 mm YIG sphere, 0.255 T, 2.1e22 cm^-3, with the measured linewidths
    /// of the observed magnon lines.
    pub fn yig_800um() -> Self {
        Self::new(0.8e-3, 0.255, 2.1e28)
            .expect("valid sphere")
            .with_linewidth("M1", 1.1e6)
            .with_linewidth("M2", 760e3)
            .with_linewidth("M3R", 1.2e6)
            .with_linewidth("M3L", 490e3)
    }

    pub fn with_linewidth(mut self, label: impl Into<String>, fwhm: f64) -> Self {
        let label = label.into();
        self.magnon_linewidths.retain(|(l, _)| *l != label);
        self.magnon_linewidths.push((label, fwhm));
        self
    }

    pub fn with_diameter(&self, diameter: f64) -> Result<Self> {
        let mut s = Self::new(diameter, self.mu0_ms, self.spin_density)?;
        s.magnon_linewidths = self.magnon_linewidths.clone();
        Ok(s)
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }

    pub fn mu0_ms(&self) -> f64 {
        self.mu0_ms
    }

    pub fn spin_density(&self) -> f64 {
        self.spin_density
    }

    pub fn linewidth(&self, label: &str) -> Option<f64> {
        self.magnon_linewidths
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, w)| *w)
    }
}
