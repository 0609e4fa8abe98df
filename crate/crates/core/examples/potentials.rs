//! Pair and triangle potentials, their gradients and the pinned Hessian.

use formation::geometry::Position;
use formation::potentials::{
    pair_gradient, pair_potential, pinned_triangle_hessian, triangle_gradient, triangle_potential,
    PairAgent, PairPotentialSpec, TriangleAgent, TrianglePotentialSpec,
};

fn main() {
    let pair = PairPotentialSpec::new(2.0).unwrap();
    for x in [0.0, 1.0, 2.0, 3.0] {
        let (pi, pj) = (Position::ORIGIN, Position::new(x, 0.0));
        println!(
            "pair  x = {x}: V = {:<6} grad_j = {:.4}",
            pair_potential(&pair, pi, pj),
            pair_gradient(&pair, pi, pj, PairAgent::J)
        );
    }

    let k = 20.0;
    let tri = TrianglePotentialSpec::equilateral(2.0, k).unwrap();
    let (pi, pj) = (Position::new(-1.0, 0.0), Position::new(1.0, 0.0));
    let apex = Position::new(0.0, 3f64.sqrt());
    let mirror = Position::new(0.0, -(3f64.sqrt()));
    for (name, pk) in [
        ("apex", apex),
        ("mirror", mirror),
        ("(1, 1)", Position::new(1.0, 1.0)),
    ] {
        println!(
            "triangle {name:>7}: V = {:>10.4} grad_k = {:.4}",
            triangle_potential(&tri, pi, pj, pk),
            triangle_gradient(&tri, pi, pj, pk, TriangleAgent::K)
        );
    }
    let (lo, hi) = pinned_triangle_hessian(&tri, apex).eigenvalues();
    println!("Hessian eigenvalues at the apex, K = {k}: {lo}, {hi}");
}
