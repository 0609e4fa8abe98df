//! Planar primitives: positions, relative vectors, distances and signed areas.
//!
//! Everything here is exact-formula double precision. No tolerances live in
//! this module; callers decide what "close enough" means.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point in the plane. Both coordinates are always finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Position {
    x: f64,
    y: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0 };

    /// Panics if either coordinate is NaN or infinite.
    pub fn new(x: f64, y: f64) -> Self {
        Self::try_new(x, y).unwrap_or_else(|| panic!("non-finite position ({x}, {y})"))
    }

    pub fn try_new(x: f64, y: f64) -> Option<Self> {
        (x.is_finite() && y.is_finite()).then_some(Self { x, y })
    }

    #[inline]
    pub fn x(self) -> f64 {
        self.x
    }

    #[inline]
    pub fn y(self) -> f64 {
        self.y
    }

    /// Vector from the origin to this point.
    pub fn to_vector(self) -> PlanarVector {
        PlanarVector {
            dx: self.x,
            dy: self.y,
        }
    }

    /// Rotate about the origin by `angle` radians (counterclockwise).
    pub fn rotated(self, angle: f64) -> Self {
        let v = self.to_vector().rotated(angle);
        Position::new(v.dx, v.dy)
    }

    /// Mirror image across the line through `a` and `b`.
    pub fn reflected_across(self, a: Position, b: Position) -> Self {
        let d = b - a;
        let n2 = d.norm_squared();
        let w = self - a;
        let t = w.dot(d) / n2;
        let foot = a + d * t;
        let off = self - foot;
        foot + (-off)
    }
}

impl TryFrom<[f64; 2]> for Position {
    type Error = String;

    fn try_from([x, y]: [f64; 2]) -> Result<Self, Self::Error> {
        Position::try_new(x, y).ok_or_else(|| format!("non-finite position ({x}, {y})"))
    }
}

impl From<Position> for [f64; 2] {
    fn from(p: Position) -> Self {
        [p.x, p.y]
    }
}

fn write_pair(f: &mut fmt::Formatter<'_>, a: f64, b: f64) -> fmt::Result {
    match f.precision() {
        Some(p) => write!(f, "({a:.p$}, {b:.p$})"),
        None => write!(f, "({a}, {b})"),
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_pair(f, self.x, self.y)
    }
}

impl fmt::Display for PlanarVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_pair(f, self.dx, self.dy)
    }
}

/// A relative displacement `p_i - p_j`. Components are always finite.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarVector {
    dx: f64,
    dy: f64,
}

impl PlanarVector {
    pub const ZERO: PlanarVector = PlanarVector { dx: 0.0, dy: 0.0 };

    /// Panics if either component is NaN or infinite.
    pub fn new(dx: f64, dy: f64) -> Self {
        Self::try_new(dx, dy).unwrap_or_else(|| panic!("non-finite vector ({dx}, {dy})"))
    }

    pub fn try_new(dx: f64, dy: f64) -> Option<Self> {
        (dx.is_finite() && dy.is_finite()).then_some(Self { dx, dy })
    }

    #[inline]
    pub fn dx(self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn dy(self) -> f64 {
        self.dy
    }

    pub fn dot(self, other: PlanarVector) -> f64 {
        self.dx * other.dx + self.dy * other.dy
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: PlanarVector) -> f64 {
        self.dx * other.dy - self.dy * other.dx
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.dx.hypot(self.dy)
    }

    /// Counterclockwise quarter turn, `(dx, dy) -> (-dy, dx)`.
    pub fn perp(self) -> Self {
        PlanarVector {
            dx: -self.dy,
            dy: self.dx,
        }
    }

    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        PlanarVector::new(c * self.dx - s * self.dy, s * self.dx + c * self.dy)
    }
}

impl Add for PlanarVector {
    type Output = PlanarVector;
    fn add(self, rhs: PlanarVector) -> PlanarVector {
        PlanarVector::new(self.dx + rhs.dx, self.dy + rhs.dy)
    }
}

impl AddAssign for PlanarVector {
    fn add_assign(&mut self, rhs: PlanarVector) {
        *self = *self + rhs;
    }
}

impl Sub for PlanarVector {
    type Output = PlanarVector;
    fn sub(self, rhs: PlanarVector) -> PlanarVector {
        PlanarVector::new(self.dx - rhs.dx, self.dy - rhs.dy)
    }
}

impl Neg for PlanarVector {
    type Output = PlanarVector;
    fn neg(self) -> PlanarVector {
        PlanarVector {
            dx: -self.dx,
            dy: -self.dy,
        }
    }
}

impl Mul<f64> for PlanarVector {
    type Output = PlanarVector;
    fn mul(self, s: f64) -> PlanarVector {
        PlanarVector::new(self.dx * s, self.dy * s)
    }
}

impl Sub for Position {
    type Output = PlanarVector;
    fn sub(self, rhs: Position) -> PlanarVector {
        PlanarVector::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Add<PlanarVector> for Position {
    type Output = Position;
    fn add(self, rhs: PlanarVector) -> Position {
        Position::new(self.x + rhs.dx, self.y + rhs.dy)
    }
}

impl Sub<PlanarVector> for Position {
    type Output = Position;
    fn sub(self, rhs: PlanarVector) -> Position {
        Position::new(self.x - rhs.dx, self.y - rhs.dy)
    }
}

/// Half the determinant of `[[1,1,1],[p_i,p_j,p_k]]`.
///
/// Positive when `(p_i, p_j, p_k)` run counterclockwise. Collinear inputs
/// return whatever the arithmetic gives; nothing is snapped to zero.
pub fn signed_area(pi: Position, pj: Position, pk: Position) -> f64 {
    0.5 * ((pj.x - pi.x) * (pk.y - pi.y) - (pk.x - pi.x) * (pj.y - pi.y))
}

pub fn squared_distance(pi: Position, pj: Position) -> f64 {
    let dx = pi.x - pj.x;
    let dy = pi.y - pj.y;
    dx * dx + dy * dy
}

pub fn distance(pi: Position, pj: Position) -> f64 {
    squared_distance(pi, pj).sqrt()
}

/// Area of an equilateral triangle with side `side`.
pub fn equilateral_area(side: f64) -> f64 {
    3f64.sqrt() / 4.0 * side * side
}
