//! Double-post cavity: mode frequencies, filling factors and geometric
//! factors of the as-built design, then a post-spacing scan.
//!
//! ```bash
//! cargo run --example cavity_design
//! ```

use magcav::cavity::{
    evaluate_geometry, field_map, geometric_factor, geometry_scan, surface_resistance,
    CavityGeometry, CavityMode, ScanParameter,
};
use magcav::model::SphereSample;
use magcav::spectra::linspace;

fn main() -> magcav::Result<()> {
    let geometry = CavityGeometry::as_built();
    let sphere = SphereSample::yig_800um();
    let resolution = 201;

    let (f_dark, f_bright, xi_dark, xi_bright) = evaluate_geometry(&geometry, &sphere, resolution)?;
    println!(
        "as built (calibrated L x {:.3}, k = {:.3})",
        geometry.l_correction, geometry.coupling_k
    );
    println!("  dark   {:6.2} GHz   xi = {xi_dark:.2e}", f_dark / 1e9);
    println!("  bright {:6.2} GHz   xi = {xi_bright:.2e}", f_bright / 1e9);

    for (mode, q) in [(CavityMode::Dark, 520.0), (CavityMode::Bright, 714.0)] {
        let g = geometric_factor(&field_map(&geometry, mode, resolution)?, &geometry)?;
        let rs = surface_resistance(g, q)?;
        println!(
            "  {:6} G = {g:.1} ohm, Rs at Q = {q} is {:.0} mohm",
            mode.as_str(),
            rs * 1e3
        );
    }

    println!("\npost spacing scan (centre to centre)");
    println!(
        "{:>8} {:>10} {:>10} {:>10}",
        "mm", "f_b GHz", "xi_b", "xi_d/xi_b"
    );
    let spacings = linspace(1.4e-3, 3.4e-3, 6);
    for row in geometry_scan(
        &geometry,
        &sphere,
        ScanParameter::Spacing,
        &spacings,
        resolution,
    ) {
        match row {
            Ok(r) => println!(
                "{:8.2} {:10.3} {:10.4} {:10.4}",
                r.value * 1e3,
                r.f_bright / 1e9,
                r.xi_bright,
                r.xi_dark / r.xi_bright
            ),
            Err(e) => println!("  skipped: {e}"),
        }
    }
    Ok(())
}
