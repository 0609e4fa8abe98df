//! Signed area and how it tells a triangle from its mirror image.

use formation::geometry::{distance, equilateral_area, signed_area, Position};

fn main() {
    let (a, b) = (Position::new(0.0, 0.0), Position::new(1.0, 0.0));
    let up = Position::new(0.5, 3f64.sqrt() / 2.0);
    let down = up.reflected_across(a, b);

    println!(
        "side lengths  up: {:.6} {:.6}  down: {:.6} {:.6}",
        distance(a, up),
        distance(b, up),
        distance(a, down),
        distance(b, down)
    );
    println!(
        "signed area   up: {:+.6}  down: {:+.6}",
        signed_area(a, b, up),
        signed_area(a, b, down)
    );
    println!("equilateral area for side 1: {:.6}", equilateral_area(1.0));

    // Same distances, opposite sign: distances alone cannot separate the two.
    let turn = 0.7;
    println!(
        "after a rotation by {turn} rad: {:+.6}",
        signed_area(a.rotated(turn), b.rotated(turn), up.rotated(turn))
    );
}
