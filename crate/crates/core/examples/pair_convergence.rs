//! Two agents, one fixed: every nonzero start ends at distance d*.

use formation::dynamics::{simulate, IntegratorConfig};
use formation::geometry::{distance, Position};
use formation::graph::{AgentId, DesiredFormation, FormationGraph};
use formation::hierarchy::{build_hierarchy, ControlGains, ControlLaw};

fn main() {
    let df = DesiredFormation::new(FormationGraph::single_pair(), 2.0).unwrap();
    let plan = build_hierarchy(&df, (AgentId(1), AgentId(2))).unwrap();
    let law = ControlLaw::new(plan, df, ControlGains::new(1.0)).unwrap();
    for start in [
        Position::new(0.1, 0.0),
        Position::new(-3.0, 4.0),
        Position::new(0.0, -0.5),
        Position::ORIGIN,
    ] {
        let run = simulate(
            &law,
            &[Position::ORIGIN, start],
            &IntegratorConfig::default(),
        )
        .unwrap();
        let end = run.trajectory.final_state()[1];
        println!(
            "{start:.2} -> {end:.9}  distance {:.9}  {} at t = {}",
            distance(Position::ORIGIN, end),
            run.termination,
            run.trajectory.final_time()
        );
    }
}
