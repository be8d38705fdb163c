//! Carries the measured coupling to a design with a larger filling factor
//! and a narrower cavity line, then draws the predicted crossing with the
//! counter-rotating terms included.
//!
//! ```bash
//! cargo run --example predicted_map -- /tmp/predicted
//! ```

use std::path::PathBuf;

use magcav::estimators::{find_peaks, predict_optimized, spin_count, MeasuredSet, Optimization};
use magcav::spectra::{bogoliubov_map, linspace, PortCouplings, Scale};

fn main() -> magcav::Result<()> {
    let prefix = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("predicted_map"));

    let current = MeasuredSet {
        f_mode: 20.9e9,
        g_over_pi: 2.05e9,
        cavity_fwhm: 27e6,
        magnon_fwhm: 1.1e6,
        filling_factor: 3e-2,
        spins: spin_count(2.1e28, 0.8e-3),
    };
    let p = predict_optimized(
        &current,
        &Optimization {
            filling_factor: 0.2,
            linewidth_factor: 12.0,
        },
    );
    println!(
        "g/pi {:.2} -> {:.2} GHz",
        current.g_over_pi / 1e9,
        p.g_over_pi / 1e9
    );
    println!(
        "C {:.2e} -> {:.2e}",
        p.cooperativity_current, p.cooperativity
    );
    println!("per spin {:.2} -> {:.2} Hz", p.per_spin_current, p.per_spin);

    let gyro = 28.13e9;
    let fields = linspace(0.4, 1.1, 200);
    let freqs = linspace(12e9, 30e9, 900);
    let map = bogoliubov_map(
        20.9e9,
        p.cavity_fwhm,
        1.1e6,
        gyro,
        p.g_over_pi,
        &fields,
        &freqs,
        &PortCouplings::default(),
    )?;

    let at_crossing = bogoliubov_map(
        20.9e9,
        p.cavity_fwhm,
        1.1e6,
        gyro,
        p.g_over_pi,
        &[20.9e9 / gyro],
        &freqs,
        &PortCouplings::default(),
    )?
    .to_scale(Scale::Linear);
    let peaks = find_peaks(&freqs, at_crossing.column(0), 0.0)?;
    if let [lower, upper] = peaks.as_slice() {
        println!(
            "at resonance: {:.3} GHz below and {:.3} GHz above the cavity",
            (20.9e9 - lower.frequency) / 1e9,
            (upper.frequency - 20.9e9) / 1e9
        );
    }

    map.save_csv(&prefix.with_extension("csv"))?;
    map.save_pgm(&prefix.with_extension("pgm"), None)?;
    println!("wrote {}.csv and .pgm", prefix.display());
    Ok(())
}
