//! Load a scenario file, run it and write the usual artifacts.
//!
//! `cargo run --example scenario_file -- scenarios/custom-quad.toml`

use std::path::PathBuf;

use formation::runner::{cmd_simulate, SimulateOptions};

fn main() {
    let config = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/ten-agent-random.toml")
        });
    let out_dir = std::env::temp_dir().join("formation-scenario");
    let rep = cmd_simulate(&SimulateOptions {
        config,
        out_dir: Some(out_dir.clone()),
        ..Default::default()
    });
    println!("{} (exit {})", rep.manifest.termination, rep.status.code());
    if let Some(msg) = &rep.manifest.message {
        println!("{msg}");
    }
    for f in ["manifest.toml", "trajectory.csv", "metrics.csv"] {
        let p = out_dir.join(f);
        if p.exists() {
            println!("wrote {}", p.display());
        }
    }
}
