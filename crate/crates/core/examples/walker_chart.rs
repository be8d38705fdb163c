//! Gyromagnetic ratio and magnetization from two observed crossings, and the
//! resulting chart of `(m, m)` magnon lines.
//!
//! ```bash
//! cargo run --example walker_chart
//! ```

use magcav::magnonics::{fit_gyro_and_ms, walker_offset, Crossing};

fn main() -> magcav::Result<()> {
    let crossings = [
        Crossing::new(1, 0.743, 20.9e9),
        Crossing::new(2, 0.471, 13.9e9),
    ];
    let fit = fit_gyro_and_ms(&crossings)?;
    println!("gyro  = {:.3} GHz/T", fit.gyro / 1e9);
    println!("mu0Ms = {:.3} T", fit.mu0_ms);

    print!("{:>6}", "B (T)");
    for m in 1..=4 {
        print!("  ({m},{m}) c={:+.3}", walker_offset(m)?);
    }
    println!();
    for step in 0..=8 {
        let b = 0.3 + 0.075 * f64::from(step);
        print!("{b:6.3}");
        for m in 1..=4 {
            print!("  {:>11.3} GHz", fit.frequency(m, b)? / 1e9);
        }
        println!();
    }
    Ok(())
}
