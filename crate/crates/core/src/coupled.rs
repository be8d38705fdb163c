//! Normal modes of coupled photon-magnon systems.
//!
//! All solvers work on frequency-domain matrices in Hz: bare frequencies on
//! the diagonal, half of the `g/pi` splitting off the diagonal. With that
//! convention the splitting of two degenerate modes is exactly `g/pi`.

use rayon::prelude::*;

use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::model::HybridModel;
use crate::units::{from_angular, to_angular};

/// Normal-mode frequencies and their composition over the bare modes.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Ascending eigenfrequencies, Hz.
    pub frequencies: Vec<f64>,
    /// `weights[k][i]`: fraction of normal mode `k` that lives in bare mode `i`.
    pub weights: Vec<Vec<f64>>,
}

impl EigenResult {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// `f[k+1] - f[k]`.
    pub fn gap(&self, k: usize) -> f64 {
        self.frequencies[k + 1] - self.frequencies[k]
    }

    fn from_vectors(frequencies: Vec<f64>, vectors: &[Vec<f64>]) -> Self {
        let weights = vectors
            .iter()
            .map(|v| {
                let norm: f64 = v.iter().map(|c| c * c).sum();
                v.iter().map(|c| c * c / norm).collect()
            })
            .collect();
        Self {
            frequencies,
            weights,
        }
    }
}

fn check_frequency(name: &str, f: f64) -> Result<()> {
    if f > 0.0 && f.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} = {f} must be a positive frequency"
        )))
    }
}

fn check_coupling(name: &str, g: f64) -> Result<()> {
    if g >= 0.0 && g.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {g} must be >= 0")))
    }
}

/// Eigen decomposition of `[[a, c], [c, b]]` in closed form.
fn symmetric_2x2(a: f64, b: f64, c: f64) -> EigenResult {
    let mean = 0.5 * (a + b);
    let half_diff = 0.5 * (a - b);
    let r = half_diff.hypot(c);
    if r == 0.0 {
        return EigenResult {
            frequencies: vec![a, b],
            weights: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
    }
    // fraction of the upper mode that sits on `a`
    let upper_a = 0.5 * (1.0 + half_diff / r);
    let upper_b = 0.5 * (1.0 - half_diff / r);
    EigenResult {
        frequencies: vec![mean - r, mean + r],
        weights: vec![vec![upper_b, upper_a], vec![upper_a, upper_b]],
    }
}

/// Cavity `fc` coupled to magnon `fm` within the rotating-wave approximation.
pub fn rwa_two_mode(fc: f64, fm: f64, g_over_pi: f64) -> Result<EigenResult> {
    check_frequency("fc", fc)?;
    check_frequency("fm", fm)?;
    check_coupling("g/pi", g_over_pi)?;
    Ok(symmetric_2x2(fc, fm, 0.5 * g_over_pi))
}

/// Chain cavity - magnon R - magnon L: the cavity only couples to R, and R
/// couples to its doublet partner L.
pub fn rwa_three_mode(
    fc: f64,
    f_right: f64,
    f_left: f64,
    gc_over_pi: f64,
    grl_over_pi: f64,
) -> Result<EigenResult> {
    check_frequency("fc", fc)?;
    check_frequency("fR", f_right)?;
    check_frequency("fL", f_left)?;
    check_coupling("gc/pi", gc_over_pi)?;
    check_coupling("gRL/pi", grl_over_pi)?;
    let (a, b) = (0.5 * gc_over_pi, 0.5 * grl_over_pi);

    if fc == f_right && f_right == f_left {
        let s = a.hypot(b);
        if s == 0.0 {
            return Ok(EigenResult {
                frequencies: vec![fc; 3],
                weights: vec![
                    vec![1.0, 0.0, 0.0],
                    vec![0.0, 1.0, 0.0],
                    vec![0.0, 0.0, 1.0],
                ],
            });
        }
        let (a2, b2, s2) = (a * a / (s * s), b * b / (s * s), 0.5);
        return Ok(EigenResult {
            frequencies: vec![fc - s, fc, fc + s],
            weights: vec![
                vec![0.5 * a2, s2, 0.5 * b2],
                vec![b2, 0.0, a2],
                vec![0.5 * a2, s2, 0.5 * b2],
            ],
        });
    }

    let m = vec![vec![fc, a, 0.0], vec![a, f_right, b], vec![0.0, b, f_left]];
    let e = symmetric_eigen(&m);
    Ok(EigenResult::from_vectors(e.values, &e.vectors))
}

/// Two modes coupled through `g (a + a^dag)(b + b^dag)`, counter-rotating
/// terms included.
///
/// The normal frequencies satisfy
/// `Omega^2 = (wc^2 + wm^2)/2 +- sqrt((wc^2 - wm^2)^2/4 + 4 g^2 wc wm)`,
/// which stays real only while `g/pi < sqrt(fc fm)`.
pub fn bogoliubov_two_mode(fc: f64, fm: f64, g_over_pi: f64) -> Result<EigenResult> {
    check_frequency("fc", fc)?;
    check_frequency("fm", fm)?;
    check_coupling("g/pi", g_over_pi)?;
    let limit = (fc * fm).sqrt();
    if g_over_pi >= limit {
        return Err(Error::ModeCollapse { g_over_pi, limit });
    }
    let (wc, wm) = (to_angular(fc), to_angular(fm));
    let g = std::f64::consts::PI * g_over_pi;
    let cross = 2.0 * g * (wc * wm).sqrt();
    let k = symmetric_2x2(wc * wc, wm * wm, cross);
    let upper_sq = k.frequencies[1];
    // product of the roots avoids cancellation in the lower one
    let lower_sq = wc * wm * (wc * wm - 4.0 * g * g) / upper_sq;
    Ok(EigenResult {
        frequencies: vec![from_angular(lower_sq.sqrt()), from_angular(upper_sq.sqrt())],
        weights: k.weights,
    })
}

/// RWA normal modes of an arbitrary model at its reference field.
pub fn normal_modes(model: &HybridModel) -> EigenResult {
    let m = model.frequency_matrix();
    if m.len() == 2 {
        return symmetric_2x2(m[0][0], m[1][1], m[0][1]);
    }
    let e = symmetric_eigen(&m);
    EigenResult::from_vectors(e.values, &e.vectors)
}

/// Normal modes over a sweep of bias fields.
#[derive(Debug, Clone)]
pub struct Dispersion {
    pub fields: Vec<f64>,
    /// One ascending [`EigenResult`] per field.
    pub points: Vec<EigenResult>,
}

impl Dispersion {
    pub fn branch_count(&self) -> usize {
        self.points.first().map_or(0, EigenResult::len)
    }

    /// Ascending branch `k` as a function of field.
    pub fn branch(&self, k: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.frequencies[k]).collect()
    }

    /// Branches relabelled for continuity of mode composition, so that a
    /// track follows the same physical mode through a crossing. Returns
    /// `(frequencies, weights)` per track, indexed `[track][field]`.
    pub fn tracked(&self) -> Vec<(Vec<f64>, Vec<Vec<f64>>)> {
        let n = self.branch_count();
        let mut tracks: Vec<(Vec<f64>, Vec<Vec<f64>>)> =
            (0..n).map(|_| (Vec::new(), Vec::new())).collect();
        let mut last: Vec<Vec<f64>> = Vec::new();
        for (idx, point) in self.points.iter().enumerate() {
            let assignment: Vec<usize> = if idx == 0 {
                (0..n).collect()
            } else {
                assign_by_overlap(&last, &point.weights)
            };
            let mut next_last = vec![Vec::new(); n];
            for (k, &track) in assignment.iter().enumerate() {
                tracks[track].0.push(point.frequencies[k]);
                tracks[track].1.push(point.weights[k].clone());
                next_last[track] = point.weights[k].clone();
            }
            last = next_last;
        }
        tracks
    }
}

/// Greedy maximum-overlap assignment of new eigenvectors to previous tracks.
/// Returns `track[k]` for each new eigenvector `k`.
fn assign_by_overlap(previous: &[Vec<f64>], current: &[Vec<f64>]) -> Vec<usize> {
    let n = current.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (t, w_prev) in previous.iter().enumerate() {
        for (k, w_new) in current.iter().enumerate() {
            let overlap: f64 = w_prev.iter().zip(w_new).map(|(p, q)| (p * q).sqrt()).sum();
            pairs.push((overlap, t, k));
        }
    }
    // highest overlap first; equal overlaps keep ascending order
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut result = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (_, t, k) in pairs {
        if result[k] == usize::MAX && !used[t] {
            result[k] = t;
            used[t] = true;
        }
    }
    result
}

/// RWA normal modes for every field in `fields` (nonempty, ascending).
pub fn dispersion_branches(model: &HybridModel, fields: &[f64]) -> Result<Dispersion> {
    if fields.is_empty() {
        return Err(Error::domain("field grid is empty"));
    }
    if fields.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::domain("field grid must be sorted ascending"));
    }
    let points = fields
        .par_iter()
        .map(|&b| model.at_field(b).map(|m| normal_modes(&m)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dispersion {
        fields: fields.to_vec(),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingMinimum {
    pub field: f64,
    /// Gap between the two requested branches at `field`, Hz.
    pub splitting: f64,
    /// The pre-scan found more than one local minimum; the returned value is
    /// the refined global minimum of that scan.
    pub multimodal: bool,
}

const PRESCAN_POINTS: usize = 257;
const GOLDEN_ITERATIONS: usize = 200;

/// Locates the field that minimizes the gap between ascending branches
/// `lower_branch` and `lower_branch + 1` over `range`.
pub fn minimum_splitting(
    model: &HybridModel,
    range: (f64, f64),
    lower_branch: usize,
) -> Result<SplittingMinimum> {
    let (lo, hi) = range;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain(format!("empty field range [{lo}, {hi}]")));
    }
    if lower_branch + 1 >= model.len() {
        return Err(Error::domain(format!(
            "branches {lower_branch} and {} requested from a {}-mode model",
            lower_branch + 1,
            model.len()
        )));
    }
    let gap = |b: f64| -> Result<f64> { Ok(normal_modes(&model.at_field(b)?).gap(lower_branch)) };

    let step = (hi - lo) / (PRESCAN_POINTS - 1) as f64;
    let scan: Vec<f64> = (0..PRESCAN_POINTS)
        .map(|i| gap(lo + step * i as f64))
        .collect::<Result<_>>()?;
    let local_minima = (1..PRESCAN_POINTS - 1)
        .filter(|&i| scan[i] < scan[i - 1] && scan[i] <= scan[i + 1])
        .count();
    let best = (0..PRESCAN_POINTS)
        .min_by(|&i, &j| scan[i].total_cmp(&scan[j]))
        .expect("nonempty scan");

    let mut a = lo + step * best.saturating_sub(1) as f64;
    let mut b = (lo + step * (best + 1) as f64).min(hi);
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut g1, mut g2) = (gap(x1)?, gap(x2)?);
    for _ in 0..GOLDEN_ITERATIONS {
        if (b - a) <= 1e-15 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if g1 <= g2 {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - inv_phi * (b - a);
            g1 = gap(x1)?;
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + inv_phi * (b - a);
            g2 = gap(x2)?;
        }
    }
    let (mut field, mut splitting) = if g1 <= g2 { (x1, g1) } else { (x2, g2) };
    let scan_best = lo + step * best as f64;
    if scan[best] < splitting {
        field = scan_best;
        splitting = scan[best];
    }
    Ok(SplittingMinimum {
        field,
        splitting,
        multimodal: local_minima > 1,
    })
}
