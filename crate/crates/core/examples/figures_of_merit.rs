//! Cooperativity, coupling per spin, coupling ratio of the two cavity modes
//! and the intracavity photon number.
//!
//! ```bash
//! cargo run --example figures_of_merit
//! ```

use magcav::estimators::{
    cooperativity, coupling_per_spin, coupling_ratio, photon_number, spin_count,
};
use magcav::units::dbm_to_watts;

fn main() {
    let spins = spin_count(2.1e28, 0.8e-3);
    println!("spins in a 0.8 mm sphere: {spins:.3e}");

    for (name, f, g, kappa, gamma) in [
        ("bright", 20.9e9, 2.05e9, 27e6, 1.1e6),
        ("dark", 13.9e9, 143e6, 33e6, 1.2e6),
    ] {
        println!(
            "{name:6} {:.2} GHz: C = {:.3e}, per spin {:.3} Hz, splitting = {:.0} linewidths",
            f / 1e9,
            cooperativity(g, kappa, gamma),
            coupling_per_spin(g, spins),
            g / kappa
        );
    }

    let modeled = coupling_ratio(20.6e9, 13.75e9, 3e-2, 3e-4);
    println!(
        "\ncoupling ratio: modeled {modeled:.2}, measured {:.2}",
        2.05e9 / 143e6
    );

    let n = photon_number(dbm_to_watts(-90.0), 20.9e9, 714.0, 0.01, 0.01);
    println!("photons at -90 dBm: {n:.1}");
}
