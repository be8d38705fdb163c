//! Double-post re-entrant cavity.
//!
//! Each post with its gap is an LC resonator: the gap is a parallel-plate
//! capacitor and the post with the cavity wall is a coaxial inductor. Mutual
//! inductance `k` between the two posts splits the common frequency into a
//! dark (co-directed currents, `f0/sqrt(1+k)`) and a bright (opposed
//! currents, `f0/sqrt(1-k)`) mode. The inductance correction `alpha_L` and
//! `k` are calibration constants, fitted once to a pair of reference mode
//! frequencies.
//!
//! The magnetic field in the midplane is the superposition of two infinite
//! line currents at the post centers, taken uniform along the cavity axis.
//! Post interiors are perfect conductors and carry no field. Wall image
//! currents are neglected.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::SphereSample;
use crate::units::CONSTANTS;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityGeometry {
    /// Internal radius, m.
    pub cavity_radius: f64,
    /// Internal height, m.
    pub height: f64,
    pub post_radius: f64,
    /// Gap between post tip and lid, m.
    pub gap: f64,
    /// Center-to-center distance between the posts, m.
    pub post_spacing: f64,
    /// Relative permittivity of the gap filling.
    pub eps_r_gap: f64,
    /// Calibration factor on the coaxial inductance.
    pub l_correction: f64,
    /// Mutual-inductance ratio between the posts.
    pub coupling_k: f64,
}

/// Dark and bright mode frequencies the as-built cavity is calibrated to, Hz.
pub const REFERENCE_FREQUENCIES: (f64, f64) = (13.75e9, 20.6e9);

impl CavityGeometry {
    pub fn validate(&self) -> Result<()> {
        let g = self;
        let lengths = [
            ("cavity_radius", g.cavity_radius),
            ("height", g.height),
            ("post_radius", g.post_radius),
            ("gap", g.gap),
            ("post_spacing", g.post_spacing),
        ];
        for (name, v) in lengths {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Geometry(format!("{name} = {v} must be > 0")));
            }
        }
        if !(g.post_spacing > 2.0 * g.post_radius) {
            return Err(Error::Geometry(format!(
                "post_spacing {} must exceed twice the post radius {}",
                g.post_spacing, g.post_radius
            )));
        }
        if !(g.gap < g.height) {
            return Err(Error::Geometry(format!(
                "gap {} must be smaller than the height {}",
                g.gap, g.height
            )));
        }
        if !(g.post_radius < g.cavity_radius) {
            return Err(Error::Geometry(format!(
                "post_radius {} must be smaller than cavity_radius {}",
                g.post_radius, g.cavity_radius
            )));
        }
        if !(0.5 * g.post_spacing + g.post_radius < g.cavity_radius) {
            return Err(Error::Geometry("posts do not fit inside the cavity".into()));
        }
        if !(g.coupling_k >= 0.0 && g.coupling_k < 1.0) {
            return Err(Error::Geometry(format!(
                "coupling_k = {} outside [0, 1)",
                g.coupling_k
            )));
        }
        if !(g.l_correction > 0.0 && g.l_correction.is_finite()) {
            return Err(Error::Geometry("l_correction must be > 0".into()));
        }
        if !(g.eps_r_gap >= 1.0 && g.eps_r_gap.is_finite()) {
            return Err(Error::Geometry("eps_r_gap must be >= 1".into()));
        }
        Ok(())
    }

    /// The fabricated cavity: 5 mm radius, 1.4 mm height, 0.4 mm posts with a
    /// 73 um gap and 1.5 mm between post surfaces, calibrated to
    /// [`REFERENCE_FREQUENCIES`].
    pub fn as_built() -> Self {
        let uncalibrated = Self {
            cavity_radius: 5e-3,
            height: 1.4e-3,
            post_radius: 0.4e-3,
            gap: 73e-6,
            post_spacing: 1.5e-3 + 2.0 * 0.4e-3,
            eps_r_gap: 1.0,
            l_correction: 1.0,
            coupling_k: 0.0,
        };
        let (fd, fb) = REFERENCE_FREQUENCIES;
        uncalibrated
            .calibrated(fd, fb)
            .expect("as-built geometry is valid")
    }

    /// Copy with `l_correction` and `coupling_k` chosen so that the dark and
    /// bright modes land exactly on `f_dark` and `f_bright`.
    pub fn calibrated(&self, f_dark: f64, f_bright: f64) -> Result<Self> {
        if !(f_dark > 0.0 && f_dark < f_bright) {
            return Err(Error::domain(format!(
                "calibration needs 0 < f_dark ({f_dark}) < f_bright ({f_bright})"
            )));
        }
        let (d2, b2) = (f_dark * f_dark, f_bright * f_bright);
        let k = (b2 - d2) / (b2 + d2);
        let f0_sq = d2 * (1.0 + k);
        let mut out = Self {
            l_correction: 1.0,
            coupling_k: k,
            ..*self
        };
        out.validate()?;
        let omega0_sq = 4.0 * PI * PI * f0_sq;
        out.l_correction = 1.0 / (omega0_sq * post_capacitance(&out) * post_inductance(&out));
        out.validate()?;
        Ok(out)
    }

    /// Distance between the facing post surfaces, m.
    pub fn post_clearance(&self) -> f64 {
        self.post_spacing - 2.0 * self.post_radius
    }

    /// Post centers on the x axis, m.
    pub fn post_centers(&self) -> [(f64, f64); 2] {
        let h = 0.5 * self.post_spacing;
        [(-h, 0.0), (h, 0.0)]
    }

    /// Uniformly scaled copy (all lengths times `factor`).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            cavity_radius: self.cavity_radius * factor,
            height: self.height * factor,
            post_radius: self.post_radius * factor,
            gap: self.gap * factor,
            post_spacing: self.post_spacing * factor,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CavityMode {
    Dark,
    Bright,
}

impl CavityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CavityMode::Dark => "dark",
            CavityMode::Bright => "bright",
        }
    }

    /// Sign of the second post current relative to the first.
    fn current_sign(self) -> f64 {
        match self {
            CavityMode::Dark => 1.0,
            CavityMode::Bright => -1.0,
        }
    }
}

/// Parallel-plate gap capacitance of one post, F.
pub fn post_capacitance(g: &CavityGeometry) -> f64 {
    CONSTANTS.eps0 * g.eps_r_gap * PI * g.post_radius * g.post_radius / g.gap
}

/// Coaxial inductance of one post against the cavity wall, H.
pub fn post_inductance(g: &CavityGeometry) -> f64 {
    g.l_correction * CONSTANTS.mu0 * g.height * (g.cavity_radius / g.post_radius).ln() / (2.0 * PI)
}

/// `(f_dark, f_bright)` in Hz.
pub fn mode_frequencies(g: &CavityGeometry) -> Result<(f64, f64)> {
    g.validate()?;
    if g.coupling_k >= 1.0 {
        return Err(Error::Geometry(
            "degenerate circuit: coupling_k >= 1".into(),
        ));
    }
    let f0 = 1.0 / (2.0 * PI * (post_inductance(g) * post_capacitance(g)).sqrt());
    Ok((
        f0 / (1.0 + g.coupling_k).sqrt(),
        f0 / (1.0 - g.coupling_k).sqrt(),
    ))
}

pub fn mode_frequency(g: &CavityGeometry, mode: CavityMode) -> Result<f64> {
    let (d, b) = mode_frequencies(g)?;
    Ok(match mode {
        CavityMode::Dark => d,
        CavityMode::Bright => b,
    })
}

/// In-plane field `(Hx, Hy)` in A/m of an infinite line current `current`
/// (A, along +z) through `(cx, cy)`, evaluated at `(x, y)`.
pub fn line_current_field(cx: f64, cy: f64, current: f64, x: f64, y: f64) -> (f64, f64) {
    let (rx, ry) = (x - cx, y - cy);
    let r2 = rx * rx + ry * ry;
    let scale = current / (2.0 * PI * r2);
    (-ry * scale, rx * scale)
}

/// Field of both posts for a given mode. The first post carries `current`.
pub fn mode_field(
    g: &CavityGeometry,
    mode: CavityMode,
    current: f64,
    x: f64,
    y: f64,
) -> (f64, f64) {
    let [(x1, y1), (x2, y2)] = g.post_centers();
    let (ax, ay) = line_current_field(x1, y1, current, x, y);
    let (bx, by) = line_current_field(x2, y2, current * mode.current_sign(), x, y);
    (ax + bx, ay + by)
}

/// Midplane field of one cavity mode on a uniform square grid covering the
/// cavity cross-section.
#[derive(Debug, Clone)]
pub struct FieldMap {
    pub geometry: CavityGeometry,
    pub mode: CavityMode,
    /// Post current, A.
    pub current: f64,
    /// Node coordinates along either axis, m.
    pub axis: Vec<f64>,
    pub step: f64,
    /// Row-major `[ix * n + iy]`.
    pub hx: Vec<f64>,
    pub hy: Vec<f64>,
    /// True outside the cavity wall or inside a post.
    pub excluded: Vec<bool>,
}

pub const MIN_RESOLUTION: usize = 64;
pub const DEFAULT_RESOLUTION: usize = 401;

/// Samples the mode field with `resolution` nodes across the cavity diameter.
pub fn field_map(g: &CavityGeometry, mode: CavityMode, resolution: usize) -> Result<FieldMap> {
    field_map_with_current(g, mode, resolution, 1.0)
}

pub fn field_map_with_current(
    g: &CavityGeometry,
    mode: CavityMode,
    resolution: usize,
    current: f64,
) -> Result<FieldMap> {
    g.validate()?;
    if resolution < MIN_RESOLUTION {
        return Err(Error::domain(format!(
            "resolution {resolution} below the minimum of {MIN_RESOLUTION}"
        )));
    }
    let r = g.cavity_radius;
    let step = 2.0 * r / (resolution - 1) as f64;
    let axis: Vec<f64> = (0..resolution).map(|i| -r + step * i as f64).collect();
    let posts = g.post_centers();
    let n = resolution;
    let mut hx = vec![0.0; n * n];
    let mut hy = vec![0.0; n * n];
    let mut excluded = vec![true; n * n];
    for (ix, &x) in axis.iter().enumerate() {
        for (iy, &y) in axis.iter().enumerate() {
            let inside_wall = x * x + y * y <= r * r;
            let in_post = posts.iter().any(|&(px, py)| {
                let (dx, dy) = (x - px, y - py);
                dx * dx + dy * dy < g.post_radius * g.post_radius
            });
            if inside_wall && !in_post {
                let k = ix * n + iy;
                let (fx, fy) = mode_field(g, mode, current, x, y);
                hx[k] = fx;
                hy[k] = fy;
                excluded[k] = false;
            }
        }
    }
    Ok(FieldMap {
        geometry: *g,
        mode,
        current,
        axis,
        step,
        hx,
        hy,
        excluded,
    })
}

impl FieldMap {
    pub fn resolution(&self) -> usize {
        self.axis.len()
    }

    pub fn magnitude_sq(&self, ix: usize, iy: usize) -> f64 {
        let k = ix * self.resolution() + iy;
        self.hx[k] * self.hx[k] + self.hy[k] * self.hy[k]
    }

    /// Largest `|H|` over the non-excluded nodes.
    pub fn max_magnitude(&self) -> f64 {
        self.hx
            .iter()
            .zip(&self.hy)
            .zip(&self.excluded)
            .filter(|(_, &e)| !e)
            .map(|((x, y), _)| x.hypot(*y))
            .fold(0.0, f64::max)
    }

    /// `sum |H|^2 * weight(x, y) * dA` over non-excluded nodes.
    pub fn weighted_energy(&self, weight: impl Fn(f64, f64) -> f64) -> f64 {
        let n = self.resolution();
        let mut total = 0.0;
        for ix in 0..n {
            for iy in 0..n {
                if self.excluded[ix * n + iy] {
                    continue;
                }
                let w = weight(self.axis[ix], self.axis[iy]);
                if w != 0.0 {
                    total += self.magnitude_sq(ix, iy) * w;
                }
            }
        }
        total * self.step * self.step
    }

    /// `integral |H|^2 dV` over the cavity volume.
    pub fn volume_energy(&self) -> f64 {
        self.geometry.height * self.weighted_energy(|_, _| 1.0)
    }

    /// CSV with columns `x_m,y_m,Hx,Hy,mask`; `mask` is 1 on excluded nodes.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x_m", "y_m", "Hx", "Hy", "mask"])?;
        let n = self.resolution();
        for ix in 0..n {
            for iy in 0..n {
                let k = ix * n + iy;
                w.write_record([
                    self.axis[ix].to_string(),
                    self.axis[iy].to_string(),
                    self.hx[k].to_string(),
                    self.hy[k].to_string(),
                    u8::from(self.excluded[k]).to_string(),
                ])?;
            }
        }
        w.flush()
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }
}

/// Fraction of the mode's magnetic energy stored inside the sphere.
///
/// The sphere is centered in the midplane at `center`; each node inside its
/// equatorial disc is weighted with the chord length through the sphere,
/// the cavity with its height.
pub fn filling_factor(map: &FieldMap, sphere: &SphereSample, center: (f64, f64)) -> Result<f64> {
    let g = &map.geometry;
    let a = sphere.radius();
    if sphere.diameter() > g.height {
        return Err(Error::Geometry(format!(
            "sphere diameter {} exceeds cavity height {}",
            sphere.diameter(),
            g.height
        )));
    }
    let (cx, cy) = center;
    if cx.hypot(cy) + a > g.cavity_radius {
        return Err(Error::Geometry(
            "sphere extends beyond the cavity wall".into(),
        ));
    }
    for (px, py) in g.post_centers() {
        if (cx - px).hypot(cy - py) < g.post_radius + a {
            return Err(Error::Geometry(format!(
                "sphere of diameter {} overlaps a post (clearance {})",
                sphere.diameter(),
                g.post_clearance()
            )));
        }
    }
    let sphere_energy = map.weighted_energy(|x, y| {
        let r2 = (x - cx).powi(2) + (y - cy).powi(2);
        if r2 < a * a {
            2.0 * (a * a - r2).sqrt()
        } else {
            0.0
        }
    });
    let total = map.volume_energy();
    if total <= 0.0 {
        return Err(Error::domain("field map carries no energy"));
    }
    Ok(sphere_energy / total)
}

const PERIMETER_SAMPLES: usize = 4096;

/// Mean of `|H|^2` around a circle, sampled from the analytic mode field.
fn ring_mean_sq(map: &FieldMap, cx: f64, cy: f64, radius: f64) -> f64 {
    let sum: f64 = (0..PERIMETER_SAMPLES)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / PERIMETER_SAMPLES as f64;
            let (x, y) = (cx + radius * phi.cos(), cy + radius * phi.sin());
            let (hx, hy) = mode_field(&map.geometry, map.mode, map.current, x, y);
            hx * hx + hy * hy
        })
        .sum();
    sum / PERIMETER_SAMPLES as f64
}

/// `integral |H|^2 dS` over the conducting surfaces: both end plates, the
/// side wall and the lateral post surfaces.
pub fn surface_energy(map: &FieldMap) -> f64 {
    let g = &map.geometry;
    let plates = 2.0 * map.weighted_energy(|_, _| 1.0);
    let wall = ring_mean_sq(map, 0.0, 0.0, g.cavity_radius) * 2.0 * PI * g.cavity_radius * g.height;
    let post_height = g.height - g.gap;
    let posts: f64 = g
        .post_centers()
        .iter()
        .map(|&(px, py)| {
            ring_mean_sq(map, px, py, g.post_radius) * 2.0 * PI * g.post_radius * post_height
        })
        .sum();
    plates + wall + posts
}

/// Geometric factor `G = w0 mu0 int|H|^2 dV / int|H|^2 dS` at an explicit
/// mode frequency `f0` (Hz), in ohm.
pub fn geometric_factor_at(map: &FieldMap, f0: f64) -> f64 {
    2.0 * PI * f0 * CONSTANTS.mu0 * map.volume_energy() / surface_energy(map)
}

/// Geometric factor at the lumped-model frequency of the map's mode.
pub fn geometric_factor(map: &FieldMap, geometry: &CavityGeometry) -> Result<f64> {
    let f0 = mode_frequency(geometry, map.mode)?;
    Ok(geometric_factor_at(map, f0))
}

/// Surface resistance from `G = Q Rs`, ohm.
pub fn surface_resistance(geometric_factor: f64, q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::domain(format!("quality factor {q} must be > 0")));
    }
    Ok(geometric_factor / q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanParameter {
    /// Center-to-center post distance, m.
    Spacing,
    Height,
    Gap,
}

impl std::str::FromStr for ScanParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spacing" => Ok(Self::Spacing),
            "height" => Ok(Self::Height),
            "gap" => Ok(Self::Gap),
            other => Err(Error::Config(format!(
                "unknown scan parameter '{other}' (expected spacing, height or gap)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub value: f64,
    pub f_dark: f64,
    pub f_bright: f64,
    pub xi_dark: f64,
    pub xi_bright: f64,
}

/// Full per-geometry evaluation: both mode frequencies and both filling
/// factors for a centered sphere.
pub fn evaluate_geometry(
    g: &CavityGeometry,
    sphere: &SphereSample,
    resolution: usize,
) -> Result<(f64, f64, f64, f64)> {
    let (f_dark, f_bright) = mode_frequencies(g)?;
    let dark = field_map(g, CavityMode::Dark, resolution)?;
    let bright = field_map(g, CavityMode::Bright, resolution)?;
    let xi_dark = filling_factor(&dark, sphere, (0.0, 0.0))?;
    let xi_bright = filling_factor(&bright, sphere, (0.0, 0.0))?;
    Ok((f_dark, f_bright, xi_dark, xi_bright))
}

/// Re-evaluates the cavity for each value of one dimension (m). Rows are in
/// input order; an invalid value yields an error row and the scan goes on.
pub fn geometry_scan(
    base: &CavityGeometry,
    sphere: &SphereSample,
    parameter: ScanParameter,
    values: &[f64],
    resolution: usize,
) -> Vec<Result<ScanRow>> {
    values
        .iter()
        .map(|&value| {
            let mut g = *base;
            match parameter {
                ScanParameter::Spacing => g.post_spacing = value,
                ScanParameter::Height => g.height = value,
                ScanParameter::Gap => g.gap = value,
            }
            let (f_dark, f_bright, xi_dark, xi_bright) = evaluate_geometry(&g, sphere, resolution)?;
            Ok(ScanRow {
                value,
                f_dark,
                f_bright,
                xi_dark,
                xi_bright,
            })
        })
        .collect()
}
