//! The ten-agent formation from the two-column start, with snapshots.

use formation::dynamics::{simulate, IntegratorConfig};
use formation::graph::{AgentId, DesiredFormation, FormationGraph};
use formation::hierarchy::{build_hierarchy, ControlGains, ControlLaw};
use formation::runner::config::two_columns;

fn main() {
    let df = DesiredFormation::new(FormationGraph::example_ten_agent(), 1.0).unwrap();
    let plan = build_hierarchy(&df, (AgentId(1), AgentId(2))).unwrap();
    let law = ControlLaw::new(plan, df, ControlGains::new(20.0)).unwrap();
    let init = two_columns(10, 1.0);
    let run = simulate(
        &law,
        &init,
        &IntegratorConfig {
            record_stride: 10,
            ..Default::default()
        },
    )
    .unwrap();

    let t = run.trajectory.times();
    for target in [0.0, 0.01, 0.02, 1.0, 5.0] {
        let i = t
            .iter()
            .position(|&s| s >= target - 1e-12)
            .unwrap_or(t.len() - 1);
        let m = run.trajectory.metrics()[i];
        println!(
            "t = {:<6} distance error {:.3e}  area error {:.3e}",
            t[i], m.max_distance_error, m.max_area_error
        );
    }
    println!("{} at t = {}", run.termination, run.trajectory.final_time());
    let fin = run.trajectory.final_state();
    for (i, p) in fin.iter().enumerate() {
        println!("  agent {:>2}: {p:.6}", i + 1);
    }
    for c in law.formation().graph().cliques() {
        println!("  clique {c}: signed area {:+.9}", c.signed_area(fin));
    }
}
