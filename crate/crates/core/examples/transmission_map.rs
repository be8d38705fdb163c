//! Transmission map of a cavity-magnon crossing, with measurement noise,
//! written as CSV and PGM.
//!
//! ```bash
//! cargo run --example transmission_map -- /tmp/crossing
//! ```

use std::path::PathBuf;

use magcav::model::{HybridModel, ModeKind, OscillatorMode};
use magcav::spectra::{add_noise, density_map, linspace, PortCouplings};

fn main() -> magcav::Result<()> {
    let prefix = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("transmission_map"));

    let model = HybridModel::two_mode(
        OscillatorMode::new(20.9e9, 27e6, ModeKind::CavityBright, "bright")?,
        OscillatorMode::new(20.9e9, 1.1e6, ModeKind::Magnon, "kittel")?,
        2.05e9,
        28.13e9,
        0.743,
    )?;
    let fields = linspace(0.55, 0.95, 200);
    let freqs = linspace(17.9e9, 23.9e9, 400);
    let clean = density_map(&model, &fields, &freqs, &PortCouplings::default())?;
    let map = add_noise(&clean, 20151, 1e-3)?;

    let (lo, hi) = map.db_range();
    println!(
        "{} x {} map, |S21| from {lo:.1} to {hi:.1} dB",
        fields.len(),
        freqs.len()
    );

    let csv = prefix.with_extension("csv");
    let pgm = prefix.with_extension("pgm");
    map.save_csv(&csv)?;
    map.save_pgm(&pgm, Some((-70.0, -30.0)))?;
    println!("wrote {} and {}", csv.display(), pgm.display());
    Ok(())
}
