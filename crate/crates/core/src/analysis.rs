//! Equilibria and stability of the pinned two- and three-agent systems.
//!
//! Canonical frames: for the pair, the fixed agent sits at the origin and the
//! moving one on the x-axis. For the triangle, the pins sit at `(-a, 0)` and
//! `(a, 0)` with `a = d*/2`, and the desired signed area is `sqrt(3) a^2 > 0`.
//! In that frame the moving agent follows
//!
//! ```text
//! x' = -2x (x^2 + y^2 - a^2)
//! y' = -2y (x^2 + y^2 - 3a^2) + K a^2 (sqrt(3) a - y)
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{distance, Position};
use crate::potentials::{pinned_triangle_hessian, TrianglePotentialSpec};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Gain above which the correct apex is the only equilibrium.
pub const GLOBAL_GAIN: f64 = 1.5;

/// Gain `2(sqrt 3 - 1)` where the below-axis equilibrium loses stability and
/// the off-axis equilibria on the circle `x^2 + y^2 = a^2` disappear.
pub fn critical_gain() -> f64 {
    2.0 * (SQRT_3 - 1.0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("half base length must be finite and positive, got {0}")]
    BadHalfBase(f64),
    #[error("desired distance must be finite and positive, got {0}")]
    BadDistance(f64),
    #[error("signed-area gain must be finite and positive, got {0}")]
    BadGain(f64),
    #[error("seed grid needs at least one point per axis and a positive width")]
    BadSeedGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumFamily {
    /// `(0, sqrt(3) a)`, the desired apex.
    ApexCorrect,
    /// `(0, (-sqrt(3/4 - K/2) - sqrt(3)/2) a)`, the flipped basin for small K.
    BelowAxis,
    /// `(0, (sqrt(3/4 - K/2) - sqrt(3)/2) a)`.
    Between,
    CircleLeft,
    CircleRight,
    PairOrigin,
    PairCorrect,
}

impl EquilibriumFamily {
    pub fn is_correct(self) -> bool {
        matches!(
            self,
            EquilibriumFamily::ApexCorrect | EquilibriumFamily::PairCorrect
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            EquilibriumFamily::ApexCorrect => "apex-correct",
            EquilibriumFamily::BelowAxis => "below-axis",
            EquilibriumFamily::Between => "between",
            EquilibriumFamily::CircleLeft => "circle-left",
            EquilibriumFamily::CircleRight => "circle-right",
            EquilibriumFamily::PairOrigin => "pair-origin",
            EquilibriumFamily::PairCorrect => "pair-correct",
        }
    }
}

impl fmt::Display for EquilibriumFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Stable,
    Unstable,
    Degenerate,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Degenerate => "degenerate",
        })
    }
}

/// Classify from Hessian eigenvalues. Any eigenvalue below `-tol` makes the
/// point unstable; otherwise any eigenvalue within `tol` of zero makes it
/// degenerate.
pub fn classify_eigenvalues(eigenvalues: &[f64], tol: f64) -> Stability {
    if eigenvalues.iter().any(|&l| l < -tol) {
        Stability::Unstable
    } else if eigenvalues.iter().any(|&l| l.abs() <= tol) {
        Stability::Degenerate
    } else {
        Stability::Stable
    }
}

/// Classification tolerance for a triangle with half base `a`.
pub fn stability_tolerance(a: f64) -> f64 {
    1e-9 * a * a
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub position: Position,
    pub family: EquilibriumFamily,
    /// Hessian eigenvalues, ascending. One entry for the pair (motion along
    /// the axis), two for the triangle.
    pub eigenvalues: Vec<f64>,
    pub stability: Stability,
    /// Number of closed-form branches meeting at this point: 2 where the
    /// below-axis and between branches merge, 3 where the circle pair folds
    /// into the below-axis point.
    pub multiplicity: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `K > 3/2`: the apex is the only equilibrium.
    Global,
    /// `2(sqrt 3 - 1) < K <= 3/2`: other equilibria exist but are unstable.
    AlmostGlobal,
    /// `K = 2(sqrt 3 - 1)`: the below-axis Hessian is singular.
    Critical,
    /// `0 < K < 2(sqrt 3 - 1)`: a flipped stable equilibrium coexists.
    Bistable,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Global => "global",
            Regime::AlmostGlobal => "almost-global",
            Regime::Critical => "critical",
            Regime::Bistable => "bistable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainRegime {
    pub k_gain: f64,
    pub regime: Regime,
}

impl GainRegime {
    /// `(2(sqrt 3 - 1), 3/2)`.
    pub fn boundaries() -> (f64, f64) {
        (critical_gain(), GLOBAL_GAIN)
    }
}

fn check_gain(k: f64) -> Result<(), AnalysisError> {
    if k.is_finite() && k > 0.0 {
        Ok(())
    } else {
        Err(AnalysisError::BadGain(k))
    }
}

fn check_half_base(a: f64) -> Result<(), AnalysisError> {
    if a.is_finite() && a > 0.0 {
        Ok(())
    } else {
        Err(AnalysisError::BadHalfBase(a))
    }
}

pub fn classify_gain(k: f64) -> Result<GainRegime, AnalysisError> {
    check_gain(k)?;
    let kc = critical_gain();
    let regime = if k > GLOBAL_GAIN {
        Regime::Global
    } else if k > kc {
        Regime::AlmostGlobal
    } else if k == kc {
        Regime::Critical
    } else {
        Regime::Bistable
    };
    Ok(GainRegime { k_gain: k, regime })
}

/// `h(K) = 1/2 - K/2 + sqrt(9/4 - 3K/2)`: the below-axis Hessian is
/// `2a^2 diag(h, 3h + K/2)`. Defined for `K <= 3/2`.
pub fn below_axis_curvature(k: f64) -> Option<f64> {
    let disc = 2.25 - 1.5 * k;
    (disc >= 0.0).then(|| 0.5 - 0.5 * k + disc.sqrt())
}

/// `h_c(K) = 1/2 - K/2 - sqrt(9/4 - 3K/2)`, the same for the between point.
pub fn between_curvature(k: f64) -> Option<f64> {
    let disc = 2.25 - 1.5 * k;
    (disc >= 0.0).then(|| 0.5 - 0.5 * k - disc.sqrt())
}

/// Equilibria of the pinned pair along the axis: the origin and `x = +-d*`.
/// The scalar Hessian is `3x^2 - d*^2`.
pub fn enumerate_pair_equilibria(d_star: f64) -> Result<Vec<Equilibrium>, AnalysisError> {
    if !(d_star.is_finite() && d_star > 0.0) {
        return Err(AnalysisError::BadDistance(d_star));
    }
    let tol = 1e-9 * d_star * d_star;
    let make = |x: f64, family| {
        let h = 3.0 * x * x - d_star * d_star;
        Equilibrium {
            position: Position::new(x, 0.0),
            family,
            eigenvalues: vec![h],
            stability: classify_eigenvalues(&[h], tol),
            multiplicity: 1,
        }
    };
    Ok(vec![
        make(0.0, EquilibriumFamily::PairOrigin),
        make(-d_star, EquilibriumFamily::PairCorrect),
        make(d_star, EquilibriumFamily::PairCorrect),
    ])
}

/// Every equilibrium of the pinned triangle for half base `a` and gain `K`.
pub fn enumerate_triangle_equilibria(a: f64, k: f64) -> Result<Vec<Equilibrium>, AnalysisError> {
    check_half_base(a)?;
    check_gain(k)?;
    let spec = TrianglePotentialSpec::new(2.0 * a, SQRT_3 * a * a, k).expect("validated above");
    let tol = stability_tolerance(a);
    let kc = critical_gain();
    let make = |x: f64, y: f64, family, multiplicity| {
        let position = Position::new(x, y);
        let (lo, hi) = pinned_triangle_hessian(&spec, position).eigenvalues();
        let eigenvalues = vec![lo, hi];
        let stability = classify_eigenvalues(&eigenvalues, tol);
        Equilibrium {
            position,
            family,
            eigenvalues,
            stability,
            multiplicity,
        }
    };

    let mut out = vec![make(0.0, SQRT_3 * a, EquilibriumFamily::ApexCorrect, 1)];
    if k <= GLOBAL_GAIN {
        let s = (0.75 - 0.5 * k).sqrt();
        if s == 0.0 {
            out.push(make(
                0.0,
                -0.5 * SQRT_3 * a,
                EquilibriumFamily::BelowAxis,
                2,
            ));
        } else {
            let mult = if k == kc { 3 } else { 1 };
            out.push(make(
                0.0,
                (-s - 0.5 * SQRT_3) * a,
                EquilibriumFamily::BelowAxis,
                mult,
            ));
            out.push(make(
                0.0,
                (s - 0.5 * SQRT_3) * a,
                EquilibriumFamily::Between,
                1,
            ));
        }
    }
    if k < kc {
        let y = SQRT_3 * k * a / (k - 4.0);
        let x = (a * a - y * y).sqrt();
        out.push(make(-x, y, EquilibriumFamily::CircleLeft, 1));
        out.push(make(x, y, EquilibriumFamily::CircleRight, 1));
    }
    Ok(out)
}

/// Nearest closed-form equilibrium to a canonical-frame point, with distance.
pub fn nearest_equilibrium(equilibria: &[Equilibrium], p: Position) -> Option<(&Equilibrium, f64)> {
    equilibria
        .iter()
        .map(|e| (e, distance(e.position, p)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Uniform seed grid over `[-half_width, half_width]^2`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedGrid {
    pub per_axis: usize,
    pub half_width: f64,
}

impl SeedGrid {
    /// 41 x 41 seeds spanning `4a` either side of the origin.
    pub fn for_half_base(a: f64) -> Self {
        SeedGrid {
            per_axis: 41,
            half_width: 4.0 * a,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.per_axis;
        let coord = move |i: usize| {
            if n == 1 {
                0.0
            } else {
                -self.half_width + 2.0 * self.half_width * i as f64 / (n - 1) as f64
            }
        };
        (0..n).flat_map(move |r| (0..n).map(move |c| (coord(c), coord(r))))
    }
}

/// Damped Newton settings for [`find_equilibria_numeric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    pub damping: f64,
    pub max_iterations: usize,
    /// Roots closer than this are merged.
    pub dedup_tol: f64,
    /// Maximum field norm for an accepted root (scaled by `max(1, a^3)`).
    pub residual_tol: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings {
            damping: 0.5,
            max_iterations: 200,
            dedup_tol: 1e-8,
            residual_tol: 1e-10,
        }
    }
}

/// Closed-loop field of the pinned apex, straight from the polynomial form.
pub fn pinned_field(a: f64, k: f64, x: f64, y: f64) -> (f64, f64) {
    let r2 = x * x + y * y;
    (
        -2.0 * x * (r2 - a * a),
        -2.0 * y * (r2 - 3.0 * a * a) + k * a * a * (SQRT_3 * a - y),
    )
}

fn pinned_jacobian(a: f64, k: f64, x: f64, y: f64) -> [[f64; 2]; 2] {
    let a2 = a * a;
    [
        [-(6.0 * x * x + 2.0 * y * y - 2.0 * a2), -4.0 * x * y],
        [
            -4.0 * x * y,
            -(6.0 * y * y + 2.0 * x * x - 6.0 * a2 + k * a2),
        ],
    ]
}

/// Numerical root finding on the pinned field from every seed, as a check on
/// [`enumerate_triangle_equilibria`] that shares no code with it.
pub fn find_equilibria_numeric(
    a: f64,
    k: f64,
    seeds: &SeedGrid,
    settings: &NewtonSettings,
) -> Result<Vec<Position>, AnalysisError> {
    check_half_base(a)?;
    check_gain(k)?;
    if seeds.per_axis == 0 || !(seeds.half_width.is_finite() && seeds.half_width > 0.0) {
        return Err(AnalysisError::BadSeedGrid);
    }
    let residual_tol = settings.residual_tol * a.powi(3).max(1.0);
    let mut roots: Vec<(Position, f64)> = Vec::new();
    for (x0, y0) in seeds.points() {
        let Some((p, res)) = newton(a, k, x0, y0, settings) else {
            continue;
        };
        if res >= residual_tol {
            continue;
        }
        match roots
            .iter_mut()
            .find(|(q, _)| distance(*q, p) < settings.dedup_tol)
        {
            Some(slot) => {
                if res < slot.1 {
                    *slot = (p, res);
                }
            }
            None => roots.push((p, res)),
        }
    }
    roots.sort_by(|l, r| {
        l.0.y()
            .total_cmp(&r.0.y())
            .then(l.0.x().total_cmp(&r.0.x()))
    });
    Ok(roots.into_iter().map(|(p, _)| p).collect())
}

fn newton(a: f64, k: f64, mut x: f64, mut y: f64, s: &NewtonSettings) -> Option<(Position, f64)> {
    for _ in 0..s.max_iterations {
        let (fx, fy) = pinned_field(a, k, x, y);
        if fx == 0.0 && fy == 0.0 {
            break;
        }
        let [[j11, j12], [j21, j22]] = pinned_jacobian(a, k, x, y);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = (j22 * fx - j12 * fy) / det;
        let dy = (j11 * fy - j21 * fx) / det;
        if !(dx.is_finite() && dy.is_finite()) {
            return None;
        }
        x -= s.damping * dx;
        y -= s.damping * dy;
        if dx.abs().max(dy.abs()) <= 1e-300 {
            break;
        }
    }
    let (fx, fy) = pinned_field(a, k, x, y);
    let p = Position::try_new(x, y)?;
    Some((p, fx.hypot(fy)))
}

/// Every point of `a` lies within `tol` of some point of `b` and vice versa.
pub fn same_point_set(a: &[Position], b: &[Position], tol: f64) -> bool {
    let covered = |xs: &[Position], ys: &[Position]| {
        xs.iter().all(|p| {
            ys.iter()
                .any(|q| (p.x() - q.x()).abs() <= tol && (p.y() - q.y()).abs() <= tol)
        })
    };
    covered(a, b) && covered(b, a)
}
