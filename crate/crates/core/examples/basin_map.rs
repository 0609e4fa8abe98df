//! Text map of where the free agent ends, for a bistable and a global gain.

use formation::dynamics::{basin_probe, fraction_correct, BasinGrid, BasinLabel, IntegratorConfig};
use formation::graph::{AgentId, DesiredFormation, FormationGraph};
use formation::hierarchy::{build_hierarchy, ControlGains, ControlLaw};

fn main() {
    let n = 21;
    for k in [0.6, 20.0] {
        let df = DesiredFormation::new(FormationGraph::single_triangle(), 2.0).unwrap();
        let plan = build_hierarchy(&df, (AgentId(1), AgentId(2))).unwrap();
        let law = ControlLaw::new(plan, df, ControlGains::new(k)).unwrap();
        let grid = BasinGrid::square(n, 3.0);
        let cells = basin_probe(&law, &grid, &IntegratorConfig::default()).unwrap();
        println!("K = {k}: fraction correct {:.3}  (o correct, x flipped, ? unresolved; pins at (-1, 0) and (1, 0))", fraction_correct(&cells));
        for row in (0..n).rev() {
            let line: String = cells[row * n..(row + 1) * n]
                .iter()
                .map(|c| match c.label {
                    BasinLabel::Correct => 'o',
                    BasinLabel::Incorrect => 'x',
                    BasinLabel::Unresolved => '?',
                })
                .collect();
            println!("    {line}");
        }
    }
}
