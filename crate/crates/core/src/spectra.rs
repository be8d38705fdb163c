//! Transmission through the driven cavity and field-frequency density maps.
//!
//! The response of cavity mode `c` is the `(c, c)` element of the resolvent
//! of `i(H - f) + Gamma/2`, where `H` is the real frequency matrix of the
//! model (bare frequencies, half-splitting couplings) and `Gamma` holds the
//! full linewidths. For one magnon this is
//!
//! `S21 = sqrt(k1 k2) / (i(fc - f) + k/2 + (g/2)^2 / (i(fm - f) + gm/2))`
//!
//! with the loaded cavity width `k = k0 + k1 + k2` and port rates
//! `ki = beta_i k0`. All rates are linear frequencies in Hz.

use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::HybridModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortCouplings {
    pub beta1: f64,
    pub beta2: f64,
}

impl PortCouplings {
    pub fn new(beta1: f64, beta2: f64) -> Result<Self> {
        if !(beta1 >= 0.0 && beta2 >= 0.0) {
            return Err(Error::domain("port couplings must be >= 0"));
        }
        if !(beta1 + beta2 < 1.0) {
            return Err(Error::domain(format!(
                "beta1 + beta2 = {} must be < 1",
                beta1 + beta2
            )));
        }
        Ok(Self { beta1, beta2 })
    }

    /// Intrinsic, input-port and output-port rates for a loaded width `kappa`.
    pub fn split(&self, kappa: f64) -> (f64, f64, f64) {
        let k0 = kappa / (1.0 + self.beta1 + self.beta2);
        (k0, self.beta1 * k0, self.beta2 * k0)
    }
}

impl Default for PortCouplings {
    fn default() -> Self {
        Self {
            beta1: 0.01,
            beta2: 0.01,
        }
    }
}

/// Response of the single cavity mode `cavity` (index into `model`), with the
/// remaining cavity modes removed.
fn cavity_response(
    f: f64,
    model: &HybridModel,
    cavity: usize,
    ports: &PortCouplings,
) -> Result<Complex64> {
    let keep: Vec<usize> = std::iter::once(cavity)
        .chain((0..model.len()).filter(|&i| !model.modes()[i].kind().is_cavity()))
        .collect();
    let kappa = model.modes()[cavity].linewidth();
    if kappa <= 0.0 {
        return Err(Error::SingularResponse(format!(
            "cavity '{}' has zero linewidth",
            model.modes()[cavity].label()
        )));
    }
    let (_, k1, k2) = ports.split(kappa);
    let n = keep.len();
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    for (r, &i) in keep.iter().enumerate() {
        for (c, &j) in keep.iter().enumerate() {
            a[(r, c)] = if i == j {
                let mode = &model.modes()[i];
                Complex64::new(0.5 * mode.linewidth(), mode.f0() - f)
            } else {
                Complex64::new(0.0, model.coupling(i, j).half_splitting())
            };
        }
    }
    let mut rhs = DVector::<Complex64>::zeros(n);
    rhs[0] = Complex64::new(1.0, 0.0);
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularResponse(format!("singular response matrix at f = {f}")))?;
    Ok(x[0] * (k1 * k2).sqrt())
}

/// Complex transmission at probe frequency `f` (Hz). Responses of several
/// cavity modes are summed without mutual interference.
pub fn s21(f: f64, model: &HybridModel, ports: &PortCouplings) -> Result<Complex64> {
    let cavities = model.cavity_indices();
    if cavities.is_empty() {
        return Err(Error::InvalidModel(
            "transmission needs at least one cavity mode".into(),
        ));
    }
    cavities
        .into_iter()
        .map(|c| cavity_response(f, model, c, ports))
        .sum()
}

/// `baseline + A (w/2)^2 / ((f - f0)^2 + (w/2)^2)`; `fwhm` must be > 0.
pub fn lorentzian(f: f64, amplitude: f64, f0: f64, fwhm: f64, baseline: f64) -> f64 {
    let hw2 = 0.25 * fwhm * fwhm;
    let d = f - f0;
    baseline + amplitude * hw2 / (d * d + hw2)
}

/// Smallest magnitude kept when converting to dB.
const MAGNITUDE_FLOOR: f64 = 1e-15;

pub fn to_db(magnitude: f64) -> f64 {
    20.0 * magnitude.max(MAGNITUDE_FLOOR).log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Db,
}

/// Transmission magnitude over a (field, frequency) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMap {
    /// Bias fields, T, ascending.
    pub fields: Vec<f64>,
    /// Probe frequencies, Hz, ascending.
    pub frequencies: Vec<f64>,
    /// Row-major `[field_index * frequencies.len() + frequency_index]`.
    pub values: Vec<f64>,
    pub scale: Scale,
    /// Free-text description of what produced the map.
    pub description: String,
}

impl DensityMap {
    pub fn new(
        fields: Vec<f64>,
        frequencies: Vec<f64>,
        values: Vec<f64>,
        scale: Scale,
    ) -> Result<Self> {
        if fields.is_empty() || frequencies.is_empty() {
            return Err(Error::domain("density map axes must be nonempty"));
        }
        for (name, axis) in [("field", &fields), ("frequency", &frequencies)] {
            if axis.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::domain(format!(
                    "{name} axis must be strictly ascending"
                )));
            }
        }
        if values.len() != fields.len() * frequencies.len() {
            return Err(Error::domain("value count does not match the axes"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("density map values must be finite"));
        }
        Ok(Self {
            fields,
            frequencies,
            values,
            scale,
            description: String::new(),
        })
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn value(&self, field_index: usize, frequency_index: usize) -> f64 {
        self.values[field_index * self.frequencies.len() + frequency_index]
    }

    /// Values at one field, across frequency.
    pub fn column(&self, field_index: usize) -> &[f64] {
        let n = self.frequencies.len();
        &self.values[field_index * n..(field_index + 1) * n]
    }

    pub fn to_scale(&self, scale: Scale) -> Self {
        let values = match (self.scale, scale) {
            (a, b) if a == b => self.values.clone(),
            (Scale::Linear, Scale::Db) => self.values.iter().map(|&v| to_db(v)).collect(),
            (Scale::Db, Scale::Linear) => self.values.iter().map(|&v| from_db(v)).collect(),
            _ => unreachable!(),
        };
        Self {
            values,
            scale,
            ..self.clone()
        }
    }

    /// Long-form CSV `B_T,f_Hz,s21_dB`, field-major.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let db = self.to_scale(Scale::Db);
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["B_T", "f_Hz", "s21_dB"])?;
        for (bi, b) in self.fields.iter().enumerate() {
            for (fi, f) in self.frequencies.iter().enumerate() {
                w.write_record([b.to_string(), f.to_string(), db.value(bi, fi).to_string()])?;
            }
        }
        w.flush()
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    /// Reads a map written by [`DensityMap::write_csv`]; values come back in dB.
    pub fn read_csv<R: BufRead>(input: R, origin: &Path) -> Result<Self> {
        let bad = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            message,
        };
        let mut reader = csv::Reader::from_reader(input);
        let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["B_T", "f_Hz", "s21_dB"] {
            return Err(bad(format!("unexpected header {headers:?}")));
        }
        let mut rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| bad(e.to_string()))?;
            let parse = |k: usize| -> Result<f64> {
                record
                    .get(k)
                    .ok_or_else(|| bad(format!("row {}: missing column {k}", line + 2)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("row {}: {e}", line + 2)))
            };
            rows.push((parse(0)?, parse(1)?, parse(2)?));
        }
        if rows.is_empty() {
            return Err(bad("no data rows".into()));
        }
        let mut fields: Vec<f64> = Vec::new();
        for &(b, _, _) in &rows {
            if fields.last() != Some(&b) {
                fields.push(b);
            }
        }
        let nf = rows.len() / fields.len();
        if nf * fields.len() != rows.len() {
            return Err(bad("rows do not form a complete grid".into()));
        }
        let frequencies: Vec<f64> = rows[..nf].iter().map(|r| r.1).collect();
        for (k, &(b, f, _)) in rows.iter().enumerate() {
            if b != fields[k / nf] || f != frequencies[k % nf] {
                return Err(bad(format!(
                    "row {} breaks the field-major grid order",
                    k + 2
                )));
            }
        }
        let values = rows.iter().map(|r| r.2).collect();
        DensityMap::new(fields, frequencies, values, Scale::Db).map_err(|e| bad(e.to_string()))
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file), path)
    }

    /// `(lowest, highest)` value in dB.
    pub fn db_range(&self) -> (f64, f64) {
        let db = self.to_scale(Scale::Db);
        db.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Binary 8-bit PGM. Columns are fields (ascending left to right), rows are
    /// frequencies (highest at the top). Grey level is linear in dB between
    /// `clamp = (low, high)`, with darker pixels for higher transmission.
    pub fn write_pgm<W: Write>(
        &self,
        mut out: W,
        clamp: Option<(f64, f64)>,
    ) -> std::io::Result<()> {
        let db = self.to_scale(Scale::Db);
        let (lo, hi) = clamp.unwrap_or_else(|| self.db_range());
        let (w, h) = (self.fields.len(), self.frequencies.len());
        write!(
            out,
            "P5\n# s21_dB clamp [{lo}, {hi}] dark=high columns=B_T rows=f_Hz_descending\n{w} {h}\n255\n"
        )?;
        let span = hi - lo;
        let mut pixels = Vec::with_capacity(w * h);
        for fi in (0..h).rev() {
            for bi in 0..w {
                let v = db.value(bi, fi);
                let level = if span > 0.0 {
                    (255.0 * (hi - v) / span).round().clamp(0.0, 255.0) as u8
                } else {
                    0
                };
                pixels.push(level);
            }
        }
        out.write_all(&pixels)?;
        out.flush()
    }

    pub fn save_pgm(&self, path: &Path, clamp: Option<(f64, f64)>) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_pgm(std::io::BufWriter::new(file), clamp)
            .map_err(|e| Error::io(path, e))
    }
}

/// Evaluates `response(field_index, frequency)` (linear magnitude) over the
/// grid, one field column per task, and returns the map in dB.
pub fn map_from_response<F>(fields: &[f64], frequencies: &[f64], response: F) -> Result<DensityMap>
where
    F: Fn(usize, f64) -> Result<f64> + Sync,
{
    let shell = DensityMap::new(
        fields.to_vec(),
        frequencies.to_vec(),
        vec![0.0; fields.len() * frequencies.len()],
        Scale::Db,
    )?;
    let columns = (0..fields.len())
        .into_par_iter()
        .map(|bi| {
            frequencies
                .iter()
                .enumerate()
                .map(|(fi, &f)| {
                    response(bi, f).map(to_db).map_err(|e| Error::AtGridPoint {
                        b_index: bi,
                        f_index: fi,
                        source: Box::new(e),
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityMap {
        values: columns.concat(),
        ..shell
    })
}

/// `|S21|` in dB over the grid, with field-tuned modes moved to each field.
pub fn density_map(
    model: &HybridModel,
    fields: &[f64],
    frequencies: &[f64],
    ports: &PortCouplings,
) -> Result<DensityMap> {
    let per_field = fields
        .iter()
        .map(|&b| model.at_field(b))
        .collect::<Result<Vec<_>>>()?;
    let map = map_from_response(fields, frequencies, |bi, f| {
        Ok(s21(f, &per_field[bi], ports)?.norm())
    })?;
    Ok(map.with_description(format!("|S21| of a {}-mode model", model.len())))
}

/// Adds seeded Gaussian noise of standard deviation `sigma` to the linear
/// magnitude. Draws follow the field-major value order, so the result only
/// depends on `(map, seed, sigma)`. Noisy magnitudes are folded to be
/// non-negative and capped at 1.
pub fn add_noise(map: &DensityMap, seed: u64, sigma: f64) -> Result<DensityMap> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("noise sigma {sigma} must be >= 0")));
    }
    if sigma == 0.0 {
        return Ok(map.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let linear = map.to_scale(Scale::Linear);
    let values = linear
        .values
        .iter()
        .map(|&v| {
            let n: f64 = StandardNormal.sample(&mut rng);
            (v + sigma * n).abs().clamp(MAGNITUDE_FLOOR, 1.0)
        })
        .collect();
    Ok(DensityMap { values, ..linear }.to_scale(map.scale))
}

/// Transmission of a cavity crossing a magnon line `gyro * B` with the
/// counter-rotating terms kept. Each normal branch contributes a single-pole
/// magnitude profile whose strength and width follow its cavity content;
/// branches are added incoherently.
#[allow(clippy::too_many_arguments)]
pub fn bogoliubov_map(
    f_cavity: f64,
    cavity_fwhm: f64,
    magnon_fwhm: f64,
    gyro: f64,
    g_over_pi: f64,
    fields: &[f64],
    frequencies: &[f64],
    ports: &PortCouplings,
) -> Result<DensityMap> {
    let (_, k1, k2) = ports.split(cavity_fwhm);
    let drive = (k1 * k2).sqrt();
    let branches = fields
        .iter()
        .map(|&b| {
            crate::coupled::bogoliubov_two_mode(f_cavity, gyro * b, g_over_pi).map_err(|e| {
                Error::AtField {
                    field: b,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let map = map_from_response(fields, frequencies, |bi, f| {
        let r = &branches[bi];
        Ok((0..r.len())
            .map(|k| {
                let w = r.weights[k][0];
                let width = w * cavity_fwhm + (1.0 - w) * magnon_fwhm;
                let x = 2.0 * (f - r.frequencies[k]) / width;
                2.0 * drive * w / width / (1.0 + x * x).sqrt()
            })
            .sum())
    })?;
    Ok(map.with_description(format!(
        "counter-rotating two-mode map, g/pi = {g_over_pi} Hz"
    )))
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n).map(|i| start + step * i as f64).collect()
        }
    }
}
