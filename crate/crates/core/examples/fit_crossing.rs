//! Coupling strength from a noisy transmission map: ridge extraction, the
//! two-mode crossing fit, and a Lorentzian fit of the bare cavity line.
//!
//! ```bash
//! cargo run --example fit_crossing
//! ```

use magcav::estimators::{
    fit_lorentzian, fit_two_mode, ridge_from_map, RidgeOptions, TwoModeParams,
};
use magcav::model::{HybridModel, ModeKind, OscillatorMode};
use magcav::spectra::{add_noise, density_map, linspace, PortCouplings, Scale};

fn main() -> magcav::Result<()> {
    let model = HybridModel::two_mode(
        OscillatorMode::new(20.9e9, 27e6, ModeKind::CavityBright, "bright")?,
        OscillatorMode::new(20.9e9, 1.1e6, ModeKind::Magnon, "kittel")?,
        2.05e9,
        28.13e9,
        0.743,
    )?;
    let fields = linspace(0.55, 0.95, 200);
    let freqs = linspace(17.9e9, 23.9e9, 400);
    let map = add_noise(
        &density_map(&model, &fields, &freqs, &PortCouplings::default())?,
        7,
        1e-3,
    )?;

    let ridge = ridge_from_map(&map, &RidgeOptions::default())?;
    let report = fit_two_mode(&ridge, None)?;
    print!("{report}");
    let fit = TwoModeParams::from_report(&report)?;
    println!(
        "crossing at {:.4} T, splitting {:.4} GHz",
        fit.crossing_field(),
        fit.g_over_pi / 1e9
    );

    // far from the crossing the cavity line is nearly bare
    let window = linspace(20.7e9, 21.1e9, 161);
    let far = density_map(
        &model.at_field(0.2)?,
        &[0.2],
        &window,
        &PortCouplings::default(),
    )?;
    let power: Vec<f64> = far
        .to_scale(Scale::Linear)
        .column(0)
        .iter()
        .map(|m| m * m)
        .collect();
    let line = fit_lorentzian(&window, &power, None)?;
    println!(
        "\ncavity line at 0.2 T: f0 = {:.4} GHz, FWHM = {:.2} MHz",
        line.value("f0")? / 1e9,
        line.value("fwhm")? / 1e6
    );
    Ok(())
}
