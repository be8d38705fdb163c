//! Normal modes of a cavity crossing a magnon line: the RWA dispersion, the
//! minimum splitting, and the counter-rotating correction at resonance.
//!
//! ```bash
//! cargo run --example avoided_crossing
//! ```

use magcav::coupled::{bogoliubov_two_mode, dispersion_branches, minimum_splitting, rwa_two_mode};
use magcav::model::{HybridModel, ModeKind, OscillatorMode};
use magcav::spectra::linspace;

fn main() -> magcav::Result<()> {
    let cavity = OscillatorMode::new(20.9e9, 27e6, ModeKind::CavityBright, "bright")?;
    let kittel = OscillatorMode::new(20.9e9, 1.1e6, ModeKind::Magnon, "kittel")?;
    let model = HybridModel::two_mode(cavity, kittel, 2.05e9, 28.13e9, 0.743)?;

    let fields = linspace(0.6, 0.9, 7);
    let tracks = dispersion_branches(&model, &fields)?.tracked();
    println!(
        "{:>6} {:>22} {:>22}",
        "B (T)", "cavity-like (GHz, w)", "magnon-like (GHz, w)"
    );
    for (i, b) in fields.iter().enumerate() {
        let cell = |t: usize| format!("{:.3}, {:.2}", tracks[t].0[i] / 1e9, tracks[t].1[i][0]);
        println!("{b:6.3} {:>22} {:>22}", cell(0), cell(1));
    }

    let min = minimum_splitting(&model, (0.6, 0.9), 0)?;
    println!(
        "\nminimum splitting {:.4} GHz at {:.4} T",
        min.splitting / 1e9,
        min.field
    );

    for g in [0.5e9, 2.05e9, 5.29e9] {
        let rwa = rwa_two_mode(20.9e9, 20.9e9, g)?.frequencies;
        let full = bogoliubov_two_mode(20.9e9, 20.9e9, g)?.frequencies;
        println!(
            "g/pi = {:.2} GHz: RWA ({:.3}, {:.3}) GHz, with counter-rotating terms ({:.3}, {:.3}) GHz",
            g / 1e9,
            rwa[0] / 1e9,
            rwa[1] / 1e9,
            full[0] / 1e9,
            full[1] / 1e9
        );
    }
    Ok(())
}
