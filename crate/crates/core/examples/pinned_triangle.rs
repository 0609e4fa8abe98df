//! One free agent against two fixed ones, for a high and a low area gain.

use formation::dynamics::{classify_terminal, pinned_positions, simulate, IntegratorConfig};
use formation::geometry::Position;
use formation::graph::{AgentId, DesiredFormation, FormationGraph};
use formation::hierarchy::{build_hierarchy, ControlGains, ControlLaw};

fn main() {
    for k in [20.0, 0.6] {
        let df = DesiredFormation::new(FormationGraph::single_triangle(), 2.0).unwrap();
        let plan = build_hierarchy(&df, (AgentId(1), AgentId(2))).unwrap();
        let law = ControlLaw::new(plan, df, ControlGains::new(k)).unwrap();
        println!("K = {k}");
        for start in [
            Position::new(0.5, 0.5),
            Position::new(0.0, -2.0),
            Position::new(2.5, -2.5),
        ] {
            let init = pinned_positions(&law, start).unwrap();
            let run = simulate(&law, &init, &IntegratorConfig::default()).unwrap();
            let end = run.trajectory.final_state()[2];
            let (label, family) = classify_terminal(1.0, k, end).unwrap();
            let family = family.map_or("-", |f| f.name());
            println!(
                "    from {start:.2} to {end:.6}: {label} ({family}), t = {:.3}",
                run.trajectory.final_time()
            );
        }
    }
}
