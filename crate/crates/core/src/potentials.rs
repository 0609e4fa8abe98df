//! Pair and triangle potentials with hand-derived gradients.
//!
//! Gradients are written in relative-position form only, so they hold for any
//! placement of the agents and rotate with the frame.

use thiserror::Error;

use crate::geometry::{signed_area, squared_distance, PlanarVector, Position};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("desired distance must be finite and positive, got {0}")]
    BadDistance(f64),
    #[error("signed-area gain must be finite and positive, got {0}")]
    BadGain(f64),
    #[error("desired signed area must be finite, got {0}")]
    BadArea(f64),
}

/// `V = 1/4 (|p_i - p_j|^2 - d*^2)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPotentialSpec {
    d_star: f64,
}

impl PairPotentialSpec {
    pub fn new(d_star: f64) -> Result<Self, PotentialError> {
        if d_star.is_finite() && d_star > 0.0 {
            Ok(Self { d_star })
        } else {
            Err(PotentialError::BadDistance(d_star))
        }
    }

    pub fn d_star(&self) -> f64 {
        self.d_star
    }
}

/// Equilateral triangle potential: three pair terms plus
/// `K/2 (Z_ijk - Z*)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrianglePotentialSpec {
    d_star: f64,
    z_star: f64,
    k_gain: f64,
}

impl TrianglePotentialSpec {
    pub fn new(d_star: f64, z_star: f64, k_gain: f64) -> Result<Self, PotentialError> {
        if !(d_star.is_finite() && d_star > 0.0) {
            return Err(PotentialError::BadDistance(d_star));
        }
        if !(k_gain.is_finite() && k_gain > 0.0) {
            return Err(PotentialError::BadGain(k_gain));
        }
        if !z_star.is_finite() {
            return Err(PotentialError::BadArea(z_star));
        }
        Ok(Self {
            d_star,
            z_star,
            k_gain,
        })
    }

    /// Counterclockwise equilateral target: `Z* = +(sqrt 3 / 4) d*^2`.
    pub fn equilateral(d_star: f64, k_gain: f64) -> Result<Self, PotentialError> {
        Self::new(d_star, 3f64.sqrt() / 4.0 * d_star * d_star, k_gain)
    }

    pub fn d_star(&self) -> f64 {
        self.d_star
    }

    pub fn z_star(&self) -> f64 {
        self.z_star
    }

    pub fn k_gain(&self) -> f64 {
        self.k_gain
    }

    /// Half the pinned base length, `d*/2`.
    pub fn half_base(&self) -> f64 {
        0.5 * self.d_star
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairAgent {
    I,
    J,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleAgent {
    I,
    J,
    K,
}

pub fn pair_potential(spec: &PairPotentialSpec, pi: Position, pj: Position) -> f64 {
    let e = squared_distance(pi, pj) - spec.d_star * spec.d_star;
    0.25 * e * e
}

/// Gradient with respect to the chosen agent; for `J` this is
/// `(|p_i - p_j|^2 - d*^2)(p_j - p_i)`.
pub fn pair_gradient(
    spec: &PairPotentialSpec,
    pi: Position,
    pj: Position,
    wrt: PairAgent,
) -> PlanarVector {
    let (me, other) = match wrt {
        PairAgent::I => (pi, pj),
        PairAgent::J => (pj, pi),
    };
    edge_term(me, other, spec.d_star)
}

#[inline]
fn edge_term(me: Position, other: Position, d_star: f64) -> PlanarVector {
    let rel = me - other;
    rel * (rel.norm_squared() - d_star * d_star)
}

pub fn triangle_potential(
    spec: &TrianglePotentialSpec,
    pi: Position,
    pj: Position,
    pk: Position,
) -> f64 {
    let d2 = spec.d_star * spec.d_star;
    let e_ij = squared_distance(pi, pj) - d2;
    let e_jk = squared_distance(pj, pk) - d2;
    let e_ki = squared_distance(pk, pi) - d2;
    let dz = signed_area(pi, pj, pk) - spec.z_star;
    0.25 * (e_ij * e_ij + e_jk * e_jk + e_ki * e_ki) + 0.5 * spec.k_gain * dz * dz
}

/// Analytic gradient of [`triangle_potential`] with respect to one agent.
///
/// For the agent `t` with cyclic successors `(u, v)` the area term contributes
/// `K (Z - Z*) * perp(p_v - p_u) / 2`, where `perp` is the counterclockwise
/// quarter turn.
pub fn triangle_gradient(
    spec: &TrianglePotentialSpec,
    pi: Position,
    pj: Position,
    pk: Position,
    wrt: TriangleAgent,
) -> PlanarVector {
    let (t, u, v) = match wrt {
        TriangleAgent::I => (pi, pj, pk),
        TriangleAgent::J => (pj, pk, pi),
        TriangleAgent::K => (pk, pi, pj),
    };
    let dz = signed_area(pi, pj, pk) - spec.z_star;
    let area = (v - u).perp() * (0.5 * spec.k_gain * dz);
    edge_term(t, u, spec.d_star) + edge_term(t, v, spec.d_star) + area
}

/// Symmetric 2x2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMatrix2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMatrix2 {
    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.xx + self.yy);
        let half_gap = (0.5 * (self.xx - self.yy)).hypot(self.xy);
        (mean - half_gap, mean + half_gap)
    }

    /// Unit eigenvector of the smaller eigenvalue.
    pub fn min_eigenvector(&self) -> PlanarVector {
        let (lo, _) = self.eigenvalues();
        let (a, b) = if self.xy.abs() > 0.0 {
            (self.xy, lo - self.xx)
        } else if self.xx <= self.yy {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        let v = PlanarVector::new(a, b);
        v * (1.0 / v.norm())
    }

    pub fn determinant(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }
}

/// Hessian of the triangle potential in agent `k`'s position when `i` and `j`
/// are pinned at `(-a, 0)` and `(a, 0)` with `a = d*/2`:
///
/// ```text
/// [[6x^2 + 2y^2 - 2a^2,  4xy                      ],
///  [4xy,                 6y^2 + 2x^2 - 6a^2 + K a^2]]
/// ```
///
/// Valid for the counterclockwise target `Z* = sqrt(3) a^2`.
pub fn pinned_triangle_hessian(spec: &TrianglePotentialSpec, pk: Position) -> SymMatrix2 {
    let a2 = spec.half_base().powi(2);
    let (x, y) = (pk.x(), pk.y());
    SymMatrix2 {
        xx: 6.0 * x * x + 2.0 * y * y - 2.0 * a2,
        xy: 4.0 * x * y,
        yy: 6.0 * y * y + 2.0 * x * x - 6.0 * a2 + spec.k_gain * a2,
    }
}
