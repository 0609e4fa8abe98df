//! Fraction of a basin grid reaching the correct apex as the gain grows,
//! next to the closed-form regime.

use formation::runner::commands::{cmd_sweep_gain, gain_range, BasinOptions};

fn main() {
    let out = std::env::temp_dir().join("formation-gain-sweep");
    let gains = gain_range(0.2, 2.0, 0.2).unwrap();
    let rows = cmd_sweep_gain(&gains, &BasinOptions::new(1.0, 11, &out)).unwrap();
    for r in rows {
        let bar = "#".repeat((r.basin.fraction_correct * 40.0).round() as usize);
        println!(
            "K = {:<4} {:<14} {:>5.3} {bar}",
            r.k_gain,
            r.regime.to_string(),
            r.basin.fraction_correct
        );
    }
    println!("csv: {}", out.join("gain_sweep.csv").display());
}
