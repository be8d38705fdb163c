#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;
use std::path::PathBuf;

use magcav::config::RunConfig;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn load(name: &str) -> RunConfig {
    RunConfig::load(&fixture(name)).expect("fixture parses")
}

/// `key = value` lines of command output, numeric values only.
pub fn key_values(text: &str) -> HashMap<String, f64> {
    text.lines()
        .filter_map(|line| {
            let (k, v) = line.split_once(" = ")?;
            Some((k.trim().to_owned(), v.trim().parse().ok()?))
        })
        .collect()
}

/// Number of eigenvalues of the symmetric matrix `a` below `x`, from the
/// signs of the pivots of an unpivoted LDL^T factorization of `a - x I`
/// (equivalently, sign changes in the leading principal minors).
pub fn count_below(a: &[Vec<f64>], x: f64) -> usize {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| a[i][j] - if i == j { x } else { 0.0 })
                .collect()
        })
        .collect();
    let mut negatives = 0;
    for k in 0..n {
        let mut pivot = m[k][k];
        if pivot == 0.0 {
            pivot = -f64::EPSILON * (1.0 + x.abs());
        }
        if pivot < 0.0 {
            negatives += 1;
        }
        for i in (k + 1)..n {
            let l = m[i][k] / pivot;
            for j in (k + 1)..n {
                m[i][j] -= l * m[k][j];
            }
        }
    }
    negatives
}

/// Bisection on a monotone eigenvalue counter: the `k`-th (0-based)
/// eigenvalue inside `[lo, hi]`, to `tol`.
pub fn bisect_eigenvalue(
    count: impl Fn(f64) -> usize,
    k: usize,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if count(mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All eigenvalues of a symmetric matrix by inertia bisection.
pub fn oracle_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let radius = (0..n)
        .map(|i| {
            a[i][i].abs()
                + (0..n)
                    .filter(|&j| j != i)
                    .map(|j| a[i][j].abs())
                    .sum::<f64>()
        })
        .fold(0.0, f64::max);
    (0..n)
        .map(|k| bisect_eigenvalue(|x| count_below(a, x), k, -radius - 1.0, radius + 1.0, 1e-3))
        .collect()
}

/// Positive normal-mode frequencies of `fc a^dag a + fm b^dag b + h (a + a^dag)(b + b^dag)`
/// by counting negative eigenvalues of `H - f eta` over the 4x4
/// Bogoliubov-de Gennes matrix in the basis `(a, b, a^dag, b^dag)`.
pub fn oracle_bogoliubov(fc: f64, fm: f64, g_over_pi: f64) -> [f64; 2] {
    let h = 0.5 * g_over_pi;
    let bdg = nalgebra::Matrix4::new(
        fc, h, 0.0, h, //
        h, fm, h, 0.0, //
        0.0, h, fc, h, //
        h, 0.0, h, fm,
    );
    let eta = nalgebra::Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, -1.0, -1.0));
    let count = |f: f64| {
        let m = bdg - eta * f;
        m.symmetric_eigenvalues()
            .iter()
            .filter(|&&v| v < 0.0)
            .count()
    };
    let top = 2.0 * (fc + fm + g_over_pi);
    [
        bisect_eigenvalue(count, 0, 0.0, top, 1e-3),
        bisect_eigenvalue(count, 1, 0.0, top, 1e-3),
    ]
}

/// Eigenvalues by a general-purpose dense solver.
pub fn nalgebra_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}
