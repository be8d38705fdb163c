//! Lorentzian line fits and avoided-crossing fits on peak ridges.
//!
//! Crossing fits work on centred, rescaled data: frequencies relative to
//! their mean in units of their spread, fields likewise. Each ridge point is
//! compared with the nearest model branch, so no branch labels are needed.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::lsq::{levenberg_marquardt, LsqOptions, LsqOutcome};
use super::peaks::find_peaks;
use super::report::FitReport;
use crate::error::{Error, Result};
use crate::spectra::{lorentzian, DensityMap, Scale};

/// One peak of one field column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgePoint {
    pub field: f64,
    pub frequency: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeOptions {
    /// Prominence threshold as a fraction of the largest linear magnitude in the map.
    pub relative_prominence: f64,
    /// Absolute prominence floor, linear magnitude.
    pub min_prominence: f64,
}

impl Default for RidgeOptions {
    fn default() -> Self {
        Self {
            relative_prominence: 0.25,
            min_prominence: 0.0,
        }
    }
}

/// Peaks of every field column of `map`, searched on the linear magnitude.
pub fn ridge_from_map(map: &DensityMap, options: &RidgeOptions) -> Result<Vec<RidgePoint>> {
    let linear = map.to_scale(Scale::Linear);
    let top = linear.values.iter().cloned().fold(0.0, f64::max);
    let threshold = options
        .min_prominence
        .max(options.relative_prominence * top);
    let mut ridge = Vec::new();
    for (bi, &field) in linear.fields.iter().enumerate() {
        for p in find_peaks(&linear.frequencies, linear.column(bi), threshold)? {
            ridge.push(RidgePoint {
                field,
                frequency: p.frequency,
                height: p.height,
            });
        }
    }
    Ok(ridge)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianParams {
    pub amplitude: f64,
    pub center: f64,
    pub fwhm: f64,
    pub baseline: f64,
}

fn diverged(kind: &str, points: usize, reason: &str) -> FitReport {
    let mut report = FitReport::new(kind);
    report.points_used = points;
    report.flags.push(format!("diverged:{reason}"));
    report
}

fn guess_lorentzian(freqs: &[f64], values: &[f64]) -> Option<LorentzianParams> {
    let (imax, &vmax) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    let vmin = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let amplitude = vmax - vmin;
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return None;
    }
    let half = vmin + 0.5 * amplitude;
    let cross = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = imax;
        for k in range {
            if values[k] <= half {
                let t = (values[prev] - half) / (values[prev] - values[k]);
                return Some(freqs[prev] + t * (freqs[k] - freqs[prev]));
            }
            prev = k;
        }
        None
    };
    let left = cross(&mut (0..imax).rev());
    let right = cross(&mut (imax + 1..values.len()));
    let step = (freqs[freqs.len() - 1] - freqs[0]) / (freqs.len() - 1) as f64;
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (freqs[imax] - l),
        (None, Some(r)) => 2.0 * (r - freqs[imax]),
        (None, None) => 10.0 * step,
    }
    .max(step);
    Some(LorentzianParams {
        amplitude,
        center: freqs[imax],
        fwhm,
        baseline: vmin,
    })
}

/// Damped least-squares fit of [`lorentzian`] to a trace.
///
/// Reports `amplitude`, `f0`, `fwhm`, `baseline`. A trace with no peak to fit
/// gives a report with `converged = false` rather than an error.
pub fn fit_lorentzian(
    freqs: &[f64],
    values: &[f64],
    initial: Option<&LorentzianParams>,
) -> Result<FitReport> {
    const KIND: &str = "lorentzian";
    if freqs.len() != values.len() {
        return Err(Error::domain("frequency and value counts differ"));
    }
    if freqs.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} samples; need at least 5",
            freqs.len()
        )));
    }
    if freqs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("frequencies must be strictly ascending"));
    }
    let Some(start) = initial.copied().or_else(|| guess_lorentzian(freqs, values)) else {
        return Ok(diverged(KIND, freqs.len(), "no peak"));
    };
    let f_ref = start.center;
    let residual = |p: &[f64]| -> Option<Vec<f64>> {
        if !(p[2] > 0.0) {
            return None;
        }
        Some(
            freqs
                .iter()
                .zip(values)
                .map(|(&f, &v)| lorentzian(f, p[0], f_ref + p[1], p[2], p[3]) - v)
                .collect(),
        )
    };
    let amp_scale = start.amplitude.abs().max(f64::MIN_POSITIVE);
    let options = LsqOptions {
        residual_scale: amp_scale,
        ..LsqOptions::default()
    };
    let out = levenberg_marquardt(
        residual,
        &[start.amplitude, 0.0, start.fwhm, start.baseline],
        &[amp_scale, start.fwhm, start.fwhm, amp_scale],
        &options,
    );
    let mut report = FitReport::new(KIND);
    report.converged = out.converged;
    report.iterations = out.iterations;
    report.points_used = freqs.len();
    report.residual_rms = out.residual_rms();
    let e = &out.std_errors;
    report.push("amplitude", out.params[0], e[0]);
    report.push("f0", f_ref + out.params[1], e[1]);
    report.push("fwhm", out.params[2], e[2]);
    report.push("baseline", out.params[3], e[3]);
    Ok(report)
}

/// Cavity at `f_c` crossing a magnon line `gyro * B + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeParams {
    pub f_c: f64,
    pub gyro: f64,
    pub offset: f64,
    pub g_over_pi: f64,
}

impl TwoModeParams {
    pub fn from_report(report: &FitReport) -> Result<Self> {
        Ok(Self {
            f_c: report.value("f_c")?,
            gyro: report.value("gyro")?,
            offset: report.value("offset")?,
            g_over_pi: report.value("g_over_pi")?,
        })
    }

    /// `(lower, upper)` branch frequencies at `field`.
    pub fn branches(&self, field: f64) -> (f64, f64) {
        let fm = self.gyro * field + self.offset;
        two_branches(self.f_c, fm, self.g_over_pi * self.g_over_pi)
    }

    /// Field at which the bare lines cross.
    pub fn crossing_field(&self) -> f64 {
        (self.f_c - self.offset) / self.gyro
    }
}

fn two_branches(fc: f64, fm: f64, g_sq: f64) -> (f64, f64) {
    let mean = 0.5 * (fc + fm);
    let half = (0.25 * (fc - fm) * (fc - fm) + 0.25 * g_sq.max(0.0)).sqrt();
    (mean - half, mean + half)
}

/// Magnon doublet (`R` coupled to the cavity, `L` coupled only to `R`) with a
/// common field slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeModeParams {
    pub f_c: f64,
    pub gyro: f64,
    pub offset_r: f64,
    pub offset_l: f64,
    pub g_c_over_pi: f64,
    pub g_rl_over_pi: f64,
}

impl ThreeModeParams {
    pub fn from_report(report: &FitReport) -> Result<Self> {
        Ok(Self {
            f_c: report.value("f_c")?,
            gyro: report.value("gyro")?,
            offset_r: report.value("offset_R")?,
            offset_l: report.value("offset_L")?,
            g_c_over_pi: report.value("g_c_over_pi")?,
            g_rl_over_pi: report.value("g_RL_over_pi")?,
        })
    }

    /// Ascending branch frequencies at `field`.
    pub fn branches(&self, field: f64) -> [f64; 3] {
        chain_eigenvalues(
            self.f_c,
            self.gyro * field + self.offset_r,
            self.gyro * field + self.offset_l,
            0.25 * self.g_c_over_pi * self.g_c_over_pi,
            0.25 * self.g_rl_over_pi * self.g_rl_over_pi,
        )
    }
}

/// Ascending eigenvalues of `[[a, x, 0], [x, b, y], [0, y, c]]` given
/// `x^2` and `y^2`, by the trigonometric solution of the cubic.
fn chain_eigenvalues(a: f64, b: f64, c: f64, x_sq: f64, y_sq: f64) -> [f64; 3] {
    let (x_sq, y_sq) = (x_sq.max(0.0), y_sq.max(0.0));
    let q = (a + b + c) / 3.0;
    let (da, db, dc) = (a - q, b - q, c - q);
    let p2 = da * da + db * db + dc * dc + 2.0 * (x_sq + y_sq);
    if p2 == 0.0 {
        return [q; 3];
    }
    let p = (p2 / 6.0).sqrt();
    // det(A - qI) / p^3 / 2
    let det = da * db * dc - da * y_sq - dc * x_sq;
    let r = (det / (2.0 * p * p * p)).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    let mid = 3.0 * q - hi - lo;
    let mut out = [lo, mid, hi];
    out.sort_by(f64::total_cmp);
    out
}

struct Centred {
    b: Vec<f64>,
    f: Vec<f64>,
    b_mean: f64,
    b_scale: f64,
    f_mean: f64,
    f_scale: f64,
}

impl Centred {
    fn new(points: &[RidgePoint]) -> Self {
        let n = points.len() as f64;
        let b_mean = points.iter().map(|p| p.field).sum::<f64>() / n;
        let f_mean = points.iter().map(|p| p.frequency).sum::<f64>() / n;
        let spread = |it: &mut dyn Iterator<Item = f64>| -> f64 {
            let v = (it.map(|d| d * d).sum::<f64>() / n).sqrt();
            if v > 0.0 {
                v
            } else {
                1.0
            }
        };
        let b_scale = spread(&mut points.iter().map(|p| p.field - b_mean));
        let f_scale = spread(&mut points.iter().map(|p| p.frequency - f_mean));
        Self {
            b: points
                .iter()
                .map(|p| (p.field - b_mean) / b_scale)
                .collect(),
            f: points
                .iter()
                .map(|p| (p.frequency - f_mean) / f_scale)
                .collect(),
            b_mean,
            b_scale,
            f_mean,
            f_scale,
        }
    }
}

/// Nearest-branch residuals for the given internal parameters.
type BranchModel = fn(&[f64], f64) -> Vec<f64>;

fn two_mode_branches(p: &[f64], b: f64) -> Vec<f64> {
    let (lo, hi) = two_branches(p[0], p[2] + p[1] * b, p[3]);
    vec![lo, hi]
}

fn three_mode_branches(p: &[f64], b: f64) -> Vec<f64> {
    chain_eigenvalues(
        p[0],
        p[2] + p[1] * b,
        p[3] + p[1] * b,
        0.25 * p[4],
        0.25 * p[5],
    )
    .to_vec()
}

fn nearest(branches: &[f64], f: f64) -> (usize, f64) {
    branches
        .iter()
        .enumerate()
        .map(|(k, &v)| (k, f - v))
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("at least one branch")
}

fn branch_residuals(model: BranchModel, data: &Centred, keep: &[usize], p: &[f64]) -> Vec<f64> {
    keep.iter()
        .map(|&i| nearest(&model(p, data.b[i]), data.f[i]).1)
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Indices whose absolute residual is within `k` robust sigmas.
fn inliers(model: BranchModel, data: &Centred, p: &[f64], k: f64) -> Vec<usize> {
    let all: Vec<usize> = (0..data.f.len()).collect();
    let r = branch_residuals(model, data, &all, p);
    let sigma = 1.4826 * median(r.iter().map(|v| v.abs()).collect());
    let limit = (k * sigma).max(1e-9);
    all.into_iter().filter(|&i| r[i].abs() <= limit).collect()
}

/// LM on `keep`, then repeated robust trimming and refits.
fn robust_fit(model: BranchModel, data: &Centred, start: &[f64]) -> (LsqOutcome, Vec<usize>) {
    let n_par = start.len();
    let options = LsqOptions::default();
    let mut keep: Vec<usize> = (0..data.f.len()).collect();
    let run = |keep: &[usize], x0: &[f64]| {
        levenberg_marquardt(
            |p: &[f64]| Some(branch_residuals(model, data, keep, p)),
            x0,
            &vec![1.0; n_par],
            &options,
        )
    };
    let mut out = run(&keep, start);
    for _ in 0..4 {
        let next = inliers(model, data, &out.params, 5.0);
        if next == keep || next.len() <= n_par {
            break;
        }
        keep = next;
        out = run(&keep, &out.params.clone());
    }
    (out, keep)
}

/// Algebraic conic fit `f^2 = a1 f + a2 f B + a3 B + a4` on centred data,
/// giving `(fc, gyro, offset_at_zero, g^2)` without branch labels.
fn conic_start(data: &Centred, keep: &[usize]) -> Option<[f64; 4]> {
    let mut design = DMatrix::zeros(keep.len(), 4);
    let mut rhs = DVector::zeros(keep.len());
    for (row, &i) in keep.iter().enumerate() {
        let (b, f) = (data.b[i], data.f[i]);
        design[(row, 0)] = f;
        design[(row, 1)] = f * b;
        design[(row, 2)] = b;
        design[(row, 3)] = 1.0;
        rhs[row] = f * f;
    }
    let a = design.svd(true, true).solve(&rhs, 1e-12).ok()?;
    if !(a[1].abs() > 1e-9) {
        return None;
    }
    let fc = -a[2] / a[1];
    let gyro = a[1];
    let offset = a[0] - fc;
    let g_sq = (4.0 * (a[3] + fc * offset)).max(0.0);
    let p = [fc, gyro, offset, g_sq];
    p.iter().all(|v| v.is_finite()).then_some(p)
}

fn check_ridge(ridge: &[RidgePoint], min_points: usize) -> Result<()> {
    if ridge.len() < min_points {
        return Err(Error::InsufficientData(format!(
            "{} ridge points; need at least {min_points}",
            ridge.len()
        )));
    }
    if ridge
        .iter()
        .any(|p| !(p.field.is_finite() && p.frequency.is_finite()))
    {
        return Err(Error::domain("ridge contains non-finite points"));
    }
    Ok(())
}

fn check_crossing(
    data: &Centred,
    crossing: f64,
    branch_counts: &[usize],
    labels: &str,
) -> Result<()> {
    let (lo, hi) = data
        .b
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &b| {
            (l.min(b), h.max(b))
        });
    if !(crossing >= lo && crossing <= hi) {
        return Err(Error::Unidentifiable(format!(
            "fitted crossing at {} T lies outside the field range [{}, {}] T",
            data.b_mean + crossing * data.b_scale,
            data.b_mean + lo * data.b_scale,
            data.b_mean + hi * data.b_scale
        )));
    }
    if let Some(k) = branch_counts.iter().position(|&c| c < 3) {
        return Err(Error::Unidentifiable(format!(
            "only {} ridge points on the {} branch; the coupling needs both sides of the gap",
            branch_counts[k],
            labels.split(',').nth(k).unwrap_or("?")
        )));
    }
    Ok(())
}

fn branch_counts(
    model: BranchModel,
    data: &Centred,
    keep: &[usize],
    p: &[f64],
    n: usize,
) -> Vec<usize> {
    let mut counts = vec![0; n];
    for &i in keep {
        counts[nearest(&model(p, data.b[i]), data.f[i]).0] += 1;
    }
    counts
}

/// Standard error of `sqrt(v)` from that of `v`.
fn sqrt_error(v: f64, err: f64) -> f64 {
    if v > 0.0 {
        err / (2.0 * v.sqrt())
    } else {
        err.sqrt()
    }
}

fn variance(out: &LsqOutcome, a: usize, b: usize) -> f64 {
    out.covariance.as_ref().map_or(f64::NAN, |c| c[a][b])
}

/// Fits the two-branch avoided crossing of a cavity and one magnon line.
///
/// Reports `f_c`, `gyro`, `offset` and `g_over_pi`. The squared coupling is
/// the fitted quantity, so `g_over_pi >= 0` holds by construction.
pub fn fit_two_mode(ridge: &[RidgePoint], initial: Option<&TwoModeParams>) -> Result<FitReport> {
    check_ridge(ridge, 5)?;
    let data = Centred::new(ridge);
    let start = match initial {
        Some(p) => to_internal_two(&data, p),
        None => {
            let all: Vec<usize> = (0..data.f.len()).collect();
            let first = conic_start(&data, &all).ok_or_else(|| {
                Error::Unidentifiable("ridge points do not trace a crossing".into())
            })?;
            let keep = inliers(two_mode_branches, &data, &first, 5.0);
            conic_start(&data, &keep).unwrap_or(first).to_vec()
        }
    };
    let (out, keep) = robust_fit(two_mode_branches, &data, &start);
    let p = &out.params;
    let crossing = (p[0] - p[2]) / p[1];
    check_crossing(
        &data,
        crossing,
        &branch_counts(two_mode_branches, &data, &keep, p, 2),
        "lower,upper",
    )?;

    let (fs, bs) = (data.f_scale, data.b_scale);
    let gyro = p[1] * fs / bs;
    let f_c = data.f_mean + p[0] * fs;
    let offset = data.f_mean + p[2] * fs - gyro * data.b_mean;
    let g_sq = p[3].max(0.0) * fs * fs;
    let e = &out.std_errors;
    let offset_err = (variance(&out, 2, 2) * fs * fs
        + (data.b_mean * fs / bs).powi(2) * variance(&out, 1, 1)
        - 2.0 * data.b_mean * fs * fs / bs * variance(&out, 1, 2))
    .max(0.0)
    .sqrt();

    let mut report = FitReport::new("two-mode");
    report.converged = out.converged;
    report.iterations = out.iterations;
    report.points_used = keep.len();
    report.residual_rms = out.residual_rms() * fs;
    report.push("f_c", f_c, e[0] * fs);
    report.push("gyro", gyro, e[1] * fs / bs);
    report.push("offset", offset, offset_err);
    report.push("g_over_pi", g_sq.sqrt(), sqrt_error(g_sq, e[3] * fs * fs));
    if keep.len() < ridge.len() {
        report
            .flags
            .push(format!("trimmed:{}", ridge.len() - keep.len()));
    }
    Ok(report)
}

fn to_internal_two(data: &Centred, p: &TwoModeParams) -> Vec<f64> {
    let (fs, bs) = (data.f_scale, data.b_scale);
    vec![
        (p.f_c - data.f_mean) / fs,
        p.gyro * bs / fs,
        (p.gyro * data.b_mean + p.offset - data.f_mean) / fs,
        (p.g_over_pi / fs).powi(2),
    ]
}

/// Number of field columns with at least three ridge points.
fn triple_columns(ridge: &[RidgePoint]) -> usize {
    let mut per_field: BTreeMap<u64, usize> = BTreeMap::new();
    for p in ridge {
        *per_field.entry(p.field.to_bits()).or_default() += 1;
    }
    per_field.values().filter(|&&c| c >= 3).count()
}

/// Fits a cavity crossing a magnon doublet in which only `R` couples to the
/// cavity and `L` couples to `R`.
///
/// Reports `f_c`, `gyro`, `offset_R`, `offset_L`, `g_c_over_pi` and
/// `g_RL_over_pi`. Without a visible third branch the partner coupling is not
/// identifiable; the result is then a two-mode fit (parameters `f_c`, `gyro`,
/// `offset_R`, `g_c_over_pi`) flagged `fallback:two-mode`.
pub fn fit_three_mode(
    ridge: &[RidgePoint],
    initial: Option<&ThreeModeParams>,
) -> Result<FitReport> {
    check_ridge(ridge, 7)?;
    if initial.is_none() && triple_columns(ridge) < 3 {
        let two = fit_two_mode(ridge, None)?;
        let mut report = FitReport::new("three-mode");
        for (src, dst) in [
            ("f_c", "f_c"),
            ("gyro", "gyro"),
            ("offset", "offset_R"),
            ("g_over_pi", "g_c_over_pi"),
        ] {
            let e = two.get(src).expect("two-mode report parameter");
            report.push(dst, e.value, e.std_error);
        }
        report.converged = two.converged;
        report.iterations = two.iterations;
        report.points_used = two.points_used;
        report.residual_rms = two.residual_rms;
        report.flags = two.flags;
        report.flags.push("fallback:two-mode".into());
        return Ok(report);
    }

    let data = Centred::new(ridge);
    let (fs, bs) = (data.f_scale, data.b_scale);
    let starts: Vec<Vec<f64>> = match initial {
        Some(p) => vec![vec![
            (p.f_c - data.f_mean) / fs,
            p.gyro * bs / fs,
            (p.gyro * data.b_mean + p.offset_r - data.f_mean) / fs,
            (p.gyro * data.b_mean + p.offset_l - data.f_mean) / fs,
            (p.g_c_over_pi / fs).powi(2),
            (p.g_rl_over_pi / fs).powi(2),
        ]],
        None => {
            let two = fit_two_mode(ridge, None)?;
            let q = to_internal_two(&data, &TwoModeParams::from_report(&two)?);
            [0.02, 0.05, 0.1, 0.2, 0.4]
                .iter()
                .map(|&ratio| vec![q[0], q[1], q[2], q[2], q[3], q[3] * ratio * ratio])
                .collect()
        }
    };
    let (out, keep) = starts
        .iter()
        .map(|s| robust_fit(three_mode_branches, &data, s))
        .min_by(|a, b| {
            let rms = |o: &(LsqOutcome, Vec<usize>)| o.0.cost / o.1.len() as f64;
            rms(a).total_cmp(&rms(b))
        })
        .expect("at least one start");
    let p = &out.params;
    let crossing = (p[0] - p[2]) / p[1];
    check_crossing(
        &data,
        crossing,
        &branch_counts(three_mode_branches, &data, &keep, p, 3),
        "lower,central,upper",
    )?;

    let gyro = p[1] * fs / bs;
    let offset = |k: usize| data.f_mean + p[k] * fs - gyro * data.b_mean;
    let offset_err = |k: usize| {
        (variance(&out, k, k) * fs * fs + (data.b_mean * fs / bs).powi(2) * variance(&out, 1, 1)
            - 2.0 * data.b_mean * fs * fs / bs * variance(&out, 1, k))
        .max(0.0)
        .sqrt()
    };
    let (gc_sq, grl_sq) = (p[4].max(0.0) * fs * fs, p[5].max(0.0) * fs * fs);
    let e = &out.std_errors;

    let mut report = FitReport::new("three-mode");
    report.converged = out.converged;
    report.iterations = out.iterations;
    report.points_used = keep.len();
    report.residual_rms = out.residual_rms() * fs;
    report.push("f_c", data.f_mean + p[0] * fs, e[0] * fs);
    report.push("gyro", gyro, e[1] * fs / bs);
    report.push("offset_R", offset(2), offset_err(2));
    report.push("offset_L", offset(3), offset_err(3));
    report.push(
        "g_c_over_pi",
        gc_sq.sqrt(),
        sqrt_error(gc_sq, e[4] * fs * fs),
    );
    report.push(
        "g_RL_over_pi",
        grl_sq.sqrt(),
        sqrt_error(grl_sq, e[5] * fs * fs),
    );
    if keep.len() < ridge.len() {
        report
            .flags
            .push(format!("trimmed:{}", ridge.len() - keep.len()));
    }
    Ok(report)
}
