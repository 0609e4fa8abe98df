//! Potential assignment and layers for the ten-agent formation.

use formation::graph::{AgentId, DesiredFormation, FormationGraph};
use formation::hierarchy::build_hierarchy;

fn main() {
    let df = DesiredFormation::new(FormationGraph::example_ten_agent(), 1.0).unwrap();
    let plan = build_hierarchy(&df, (AgentId(1), AgentId(2))).unwrap();
    for a in plan.assignments() {
        let deps: Vec<String> = a.dependencies().iter().map(|d| d.0.to_string()).collect();
        println!(
            "layer {}  {a}  (depends on {})",
            a.layer,
            if deps.is_empty() {
                "-".into()
            } else {
                deps.join(", ")
            }
        );
    }
    for (i, layer) in plan.layers().iter().enumerate() {
        let ids: Vec<String> = layer.iter().map(|a| a.0.to_string()).collect();
        println!("layer {}: {{{}}}", i + 1, ids.join(", "));
    }
}
