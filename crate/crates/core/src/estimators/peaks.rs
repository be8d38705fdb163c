use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Refined position, Hz.
    pub frequency: f64,
    /// Refined height.
    pub height: f64,
    /// Height above the higher of the two surrounding minima.
    pub prominence: f64,
    /// Sample index of the raw maximum.
    pub index: usize,
}

/// Vertex of the parabola through three points (non-uniform spacing allowed).
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let (d1, d2) = (x[1] - x[0], x[2] - x[1]);
    let s1 = (y[1] - y[0]) / d1;
    let s2 = (y[2] - y[1]) / d2;
    let a = (s2 - s1) / (x[2] - x[0]);
    if !(a < 0.0) {
        return None;
    }
    let b = s1 - a * (x[0] + x[1]);
    let xv = -b / (2.0 * a);
    if !(xv >= x[0] && xv <= x[2]) {
        return None;
    }
    let yv = y[1] + s1 * (xv - x[1]) + a * (xv - x[0]) * (xv - x[1]);
    Some((xv, yv))
}

/// Interior local maxima whose prominence is at least `min_prominence`,
/// refined by three-point quadratic interpolation, in ascending frequency.
///
/// A flat run of equal samples counts as one maximum at the run's midpoint.
pub fn find_peaks(frequencies: &[f64], values: &[f64], min_prominence: f64) -> Result<Vec<Peak>> {
    let n = values.len();
    if n != frequencies.len() {
        return Err(Error::domain("frequency and value counts differ"));
    }
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "{n} samples; need at least 3"
        )));
    }
    if frequencies.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("frequencies must be strictly ascending"));
    }
    let mut peaks = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if values[i] > values[i - 1] {
            let mut end = i;
            while end + 1 < n && values[end + 1] == values[i] {
                end += 1;
            }
            if end + 1 < n && values[end + 1] < values[i] {
                let h = values[i];
                let mut left_min = h;
                for k in (0..i).rev() {
                    if values[k] > h {
                        break;
                    }
                    left_min = left_min.min(values[k]);
                }
                let mut right_min = h;
                for &v in &values[end + 1..] {
                    if v > h {
                        break;
                    }
                    right_min = right_min.min(v);
                }
                let prominence = h - left_min.max(right_min);
                if prominence >= min_prominence && prominence > 0.0 {
                    let (frequency, height) = if end == i {
                        parabola_vertex(
                            [frequencies[i - 1], frequencies[i], frequencies[i + 1]],
                            [values[i - 1], values[i], values[i + 1]],
                        )
                        .unwrap_or((frequencies[i], h))
                    } else {
                        (0.5 * (frequencies[i] + frequencies[end]), h)
                    };
                    peaks.push(Peak {
                        frequency,
                        height,
                        prominence,
                        index: i,
                    });
                }
            }
            i = end + 1;
        } else {
            i += 1;
        }
    }
    Ok(peaks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{linspace, lorentzian};
    use approx::assert_relative_eq;

    #[test]
    fn parabola_exact_on_quadratic() {
        let f = |x: f64| 3.0 - 2.0 * (x - 0.37).powi(2);
        let (xv, yv) = parabola_vertex([0.0, 0.5, 1.2], [f(0.0), f(0.5), f(1.2)]).unwrap();
        assert_relative_eq!(xv, 0.37, max_relative = 1e-12);
        assert_relative_eq!(yv, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn single_lorentzian() {
        let (f0, w) = (20.9e9 + 1.3e6, 27e6);
        let freqs = linspace(20.5e9, 21.3e9, 301);
        let step = freqs[1] - freqs[0];
        assert!(step <= w / 10.0);
        let vals: Vec<f64> = freqs
            .iter()
            .map(|&f| lorentzian(f, 1.0, f0, w, 0.0))
            .collect();
        let peaks = find_peaks(&freqs, &vals, 0.1).unwrap();
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].frequency - f0).abs() < step / 10.0);
    }

    #[test]
    fn flat_and_monotone_traces() {
        let freqs = linspace(0.0, 1.0, 50);
        assert!(find_peaks(&freqs, &[2.0; 50], 0.0).unwrap().is_empty());
        assert!(find_peaks(&freqs, &freqs, 0.0).unwrap().is_empty());
    }

    #[test]
    fn prominence_filters_shoulders() {
        let freqs = linspace(0.0, 10.0, 11);
        let vals = [0.0, 1.0, 0.0, 0.0, 5.0, 4.8, 4.9, 0.0, 0.0, 0.0, 0.0];
        let all = find_peaks(&freqs, &vals, 0.0).unwrap();
        assert_eq!(all.len(), 3);
        let big = find_peaks(&freqs, &vals, 0.5).unwrap();
        assert_eq!(big.len(), 2);
        assert_eq!(big[1].index, 4);
        assert_eq!(big[1].prominence, 5.0);
    }

    #[test]
    fn preconditions() {
        assert!(find_peaks(&[0.0, 1.0], &[0.0, 1.0], 0.0).is_err());
        assert!(find_peaks(&[0.0, 2.0, 1.0], &[0.0, 1.0, 0.0], 0.0).is_err());
    }
}
