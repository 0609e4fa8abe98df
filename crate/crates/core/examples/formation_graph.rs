//! The ten-agent triangulated graph and its Henneberg construction.

use formation::graph::{validate_triangulated_laman, FormationGraph};

fn main() {
    let g = FormationGraph::example_ten_agent();
    println!(
        "{} agents, {} edges, {} triangles",
        g.agent_count(),
        g.edge_count(),
        g.cliques().len()
    );
    for c in g.cliques() {
        println!("  clique {c}");
    }

    let order = validate_triangulated_laman(&g).expect("triangulated");
    println!("construction order:");
    for step in &order.attachments {
        println!(
            "  agent {} attached to ({}, {})",
            step.agent.0, step.bases.0 .0, step.bases.1 .0
        );
    }
    let extra: Vec<String> = order
        .extra_edges
        .iter()
        .map(|e| {
            let (a, b) = e.endpoints();
            format!("{}-{}", a.0, b.0)
        })
        .collect();
    println!(
        "edges beyond 2n - 3: {}",
        if extra.is_empty() {
            "none".into()
        } else {
            extra.join(", ")
        }
    );
    println!("minimally rigid: {}", order.is_minimally_rigid());
}
