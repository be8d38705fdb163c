//! Dark cavity mode crossing a magnon doublet: only one member couples to
//! the cavity, the other couples to its partner. The three-mode fit recovers
//! both couplings from the map.
//!
//! ```bash
//! cargo run --example three_mode_doublet
//! ```

use magcav::estimators::{fit_three_mode, ridge_from_map, RidgeOptions};
use magcav::model::{HybridModel, ModeKind, OscillatorMode};
use magcav::spectra::{density_map, linspace, PortCouplings};

fn main() -> magcav::Result<()> {
    let model = HybridModel::three_mode_chain(
        OscillatorMode::new(13.9e9, 33e6, ModeKind::CavityDark, "dark")?,
        OscillatorMode::new(13.9e9, 1.2e6, ModeKind::Magnon, "R")?,
        OscillatorMode::new(13.9e9, 0.49e6, ModeKind::Magnon, "L")?,
        143e6,
        12.5e6,
        28.13e9,
        0.471,
    )?;
    let fields = linspace(0.462, 0.480, 120);
    let freqs = linspace(13.55e9, 14.25e9, 2801);
    let map = density_map(&model, &fields, &freqs, &PortCouplings::default())?;

    // the spectator branch is weak: keep peaks down to 2% of the map maximum
    let ridge = ridge_from_map(
        &map,
        &RidgeOptions {
            relative_prominence: 0.02,
            ..RidgeOptions::default()
        },
    )?;
    let report = fit_three_mode(&ridge, None)?;
    print!("{report}");
    println!(
        "\ncavity coupling {:.1} MHz, doublet coupling {:.2} MHz",
        report.value("g_c_over_pi")? / 1e6,
        report.value("g_RL_over_pi")? / 1e6
    );
    Ok(())
}
