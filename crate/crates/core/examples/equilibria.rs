//! Equilibria of the pinned triangle across gains, checked against a
//! numerical root finder.

use formation::analysis::{
    classify_gain, critical_gain, enumerate_triangle_equilibria, find_equilibria_numeric,
    same_point_set, NewtonSettings, SeedGrid,
};

fn main() {
    let a = 1.0;
    for k in [0.6, 1.0, critical_gain(), 1.5, 2.0, 20.0] {
        let regime = classify_gain(k).unwrap().regime;
        let eqs = enumerate_triangle_equilibria(a, k).unwrap();
        let numeric = find_equilibria_numeric(
            a,
            k,
            &SeedGrid::for_half_base(a),
            &NewtonSettings::default(),
        )
        .unwrap();
        let closed: Vec<_> = eqs.iter().map(|e| e.position).collect();
        println!(
            "K = {k:.6} ({regime}), oracle agrees: {}",
            same_point_set(&closed, &numeric, 1e-6)
        );
        for e in &eqs {
            println!(
                "    {:<13} {:.6}  eigenvalues [{:>9.4}, {:>9.4}]  {}{}",
                e.family.name(),
                e.position,
                e.eigenvalues[0],
                e.eigenvalues[1],
                e.stability,
                if e.multiplicity > 1 {
                    format!(" (x{})", e.multiplicity)
                } else {
                    String::new()
                }
            );
        }
    }
}
