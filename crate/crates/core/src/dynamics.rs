//! Fixed-step integration of `p_i' = u_i`, trajectory recording and basin
//! probing for the pinned triangle.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    enumerate_triangle_equilibria, nearest_equilibrium, AnalysisError, EquilibriumFamily,
};
use crate::geometry::{PlanarVector, Position};
use crate::graph::{formation_errors, AgentId};
use crate::hierarchy::{ControlLaw, PotentialKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorMethod {
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub method: IntegratorMethod,
    pub dt: f64,
    pub t_max: f64,
    /// Converged once every `|u_i|` drops below this.
    pub grad_norm_tol: f64,
    /// Record every n-th step (the final state is always recorded).
    pub record_stride: usize,
    /// Abort when any coordinate exceeds this in magnitude.
    pub divergence_bound: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: IntegratorMethod::Rk4,
            dt: 1e-3,
            t_max: 50.0,
            grad_norm_tol: 1e-9,
            record_stride: 1,
            divergence_bound: 1e6,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad =
            |field: &'static str, value: f64| Err(DynamicsError::InvalidConfig { field, value });
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt", self.dt);
        }
        if !(self.t_max.is_finite() && self.t_max > self.dt) {
            return bad("t_max", self.t_max);
        }
        if !(self.grad_norm_tol.is_finite() && self.grad_norm_tol > 0.0) {
            return bad("grad_norm_tol", self.grad_norm_tol);
        }
        if self.record_stride == 0 {
            return bad("record_stride", 0.0);
        }
        if !(self.divergence_bound.is_finite()
            && self.divergence_bound > 0.0
            && self.divergence_bound <= 1e100)
        {
            return bad("divergence_bound", self.divergence_bound);
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid integrator setting {field} = {value}")]
    InvalidConfig { field: &'static str, value: f64 },
    #[error("expected {expected} initial positions, got {got}")]
    AgentCount { expected: usize, got: usize },
    #[error("diverged at t = {time}: agent {agent} left the bounded region")]
    Diverged {
        time: f64,
        agent: AgentId,
        trajectory: Box<Trajectory>,
    },
    #[error("basin probing needs the pinned three-agent triangle: {0}")]
    NotPinnedTriangle(&'static str),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// Errors and input size at one recorded instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMetrics {
    pub max_distance_error: f64,
    pub max_area_error: f64,
    pub max_control_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<Position>>,
    metrics: Vec<StepMetrics>,
}

impl Trajectory {
    fn push(&mut self, t: f64, state: Vec<Position>, metrics: StepMetrics) {
        self.times.push(t);
        self.states.push(state);
        self.metrics.push(metrics);
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<Position>] {
        &self.states
    }

    pub fn metrics(&self) -> &[StepMetrics] {
        &self.metrics
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[Position] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_metrics(&self) -> Option<StepMetrics> {
        self.metrics.last().copied()
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    Timeout,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Converged => "converged",
            Termination::Timeout => "timeout",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub trajectory: Trajectory,
    pub termination: Termination,
    pub steps: usize,
}

fn metrics_of(law: &ControlLaw, state: &[Position], u: &[PlanarVector]) -> StepMetrics {
    let e = formation_errors(law.formation(), state);
    StepMetrics {
        max_distance_error: e.max_distance_error,
        max_area_error: e.max_area_error,
        max_control_norm: u.iter().map(|v| v.norm()).fold(0.0, f64::max),
    }
}

/// Flat `[x1, y1, x2, y2, ...]` state to positions, or the first agent that
/// is non-finite or outside the bound.
fn unpack(flat: &[f64], bound: f64) -> Result<Vec<Position>, AgentId> {
    flat.chunks_exact(2)
        .enumerate()
        .map(|(i, c)| {
            if c[0].abs() > bound || c[1].abs() > bound {
                return Err(AgentId::from_index(i));
            }
            Position::try_new(c[0], c[1]).ok_or(AgentId::from_index(i))
        })
        .collect()
}

fn pack(state: &[Position]) -> Vec<f64> {
    state.iter().flat_map(|p| [p.x(), p.y()]).collect()
}

fn field_flat(law: &ControlLaw, state: &[Position]) -> Vec<f64> {
    law.control_field(state)
        .iter()
        .flat_map(|u| [u.dx(), u.dy()])
        .collect()
}

fn axpy(x: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// Integrate the closed loop from `init` until the inputs vanish or `t_max`.
pub fn simulate(
    law: &ControlLaw,
    init: &[Position],
    cfg: &IntegratorConfig,
) -> Result<SimulationRun, DynamicsError> {
    cfg.validate()?;
    if init.len() != law.agent_count() {
        return Err(DynamicsError::AgentCount {
            expected: law.agent_count(),
            got: init.len(),
        });
    }
    let bound = cfg.divergence_bound;
    let h = cfg.dt;
    let mut trajectory = Trajectory::default();
    let mut state = init.to_vec();
    let mut flat = pack(&state);
    let mut u = law.control_field(&state);
    trajectory.push(0.0, state.clone(), metrics_of(law, &state, &u));

    let diverged = |time: f64, agent: AgentId, trajectory: &Trajectory| DynamicsError::Diverged {
        time,
        agent,
        trajectory: Box::new(trajectory.clone()),
    };
    if let Err(agent) = unpack(&flat, bound) {
        return Err(diverged(0.0, agent, &trajectory));
    }

    let mut step = 0usize;
    loop {
        let t = step as f64 * h;
        let max_u = u.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let termination = if max_u < cfg.grad_norm_tol {
            Some(Termination::Converged)
        } else if t >= cfg.t_max - 0.5 * h {
            Some(Termination::Timeout)
        } else {
            None
        };
        if let Some(termination) = termination {
            if trajectory.final_time() != t || trajectory.len() == 1 && step > 0 {
                trajectory.push(t, state.clone(), metrics_of(law, &state, &u));
            }
            return Ok(SimulationRun {
                trajectory,
                termination,
                steps: step,
            });
        }

        let k1: Vec<f64> = u.iter().flat_map(|v| [v.dx(), v.dy()]).collect();
        let next = match cfg.method {
            IntegratorMethod::Euler => axpy(&flat, h, &k1),
            IntegratorMethod::Rk4 => {
                let stage = |x: Vec<f64>| unpack(&x, bound).map(|s| field_flat(law, &s));
                let k2 =
                    stage(axpy(&flat, 0.5 * h, &k1)).map_err(|a| diverged(t, a, &trajectory))?;
                let k3 =
                    stage(axpy(&flat, 0.5 * h, &k2)).map_err(|a| diverged(t, a, &trajectory))?;
                let k4 = stage(axpy(&flat, h, &k3)).map_err(|a| diverged(t, a, &trajectory))?;
                flat.iter()
                    .enumerate()
                    .map(|(i, x)| x + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                    .collect()
            }
        };
        step += 1;
        let t_next = step as f64 * h;
        state = unpack(&next, bound).map_err(|a| diverged(t_next, a, &trajectory))?;
        flat = next;
        u = law.control_field(&state);
        if step.is_multiple_of(cfg.record_stride) {
            trajectory.push(t_next, state.clone(), metrics_of(law, &state, &u));
        }
    }
}

/// Rectangular grid of initial points, endpoints included, row-major from the
/// bottom-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasinGrid {
    pub nx: usize,
    pub ny: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl BasinGrid {
    pub fn square(n: usize, half_width: f64) -> Self {
        BasinGrid {
            nx: n,
            ny: n,
            x_range: (-half_width, half_width),
            y_range: (-half_width, half_width),
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, index: usize) -> Position {
        let lerp = |n: usize, i: usize, (lo, hi): (f64, f64)| {
            if n <= 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        let (r, c) = (index / self.nx, index % self.nx);
        Position::new(
            lerp(self.nx, c, self.x_range),
            lerp(self.ny, r, self.y_range),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasinLabel {
    Correct,
    Incorrect,
    Unresolved,
}

impl fmt::Display for BasinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasinLabel::Correct => "correct",
            BasinLabel::Incorrect => "incorrect",
            BasinLabel::Unresolved => "unresolved",
        })
    }
}

/// How a single basin cell's run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellOutcome {
    Finished(Termination),
    Diverged { time: f64 },
    Failed,
}

impl fmt::Display for CellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellOutcome::Finished(t) => write!(f, "{t}"),
            CellOutcome::Diverged { .. } => f.write_str("diverged"),
            CellOutcome::Failed => f.write_str("failed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinCell {
    pub index: usize,
    /// Initial apex position in the canonical frame.
    pub start: Position,
    /// Terminal apex position in the canonical frame.
    pub end: Option<Position>,
    pub label: BasinLabel,
    /// Nearest closed-form equilibrium when within the matching tolerance.
    pub family: Option<EquilibriumFamily>,
    pub outcome: CellOutcome,
}

/// Terminal points farther than this from every equilibrium are unresolved.
pub const BASIN_MATCH_TOL: f64 = 1e-4;

/// Canonical pins `(-a, 0), (a, 0)` and the apex agent of a pinned triangle.
pub fn pinned_layout(law: &ControlLaw) -> Result<(AgentId, AgentId, AgentId), DynamicsError> {
    if law.agent_count() != 3 {
        return Err(DynamicsError::NotPinnedTriangle(
            "needs exactly three agents",
        ));
    }
    let apex = law
        .plan()
        .assignments()
        .iter()
        .find_map(|a| match a.kind {
            PotentialKind::Triangle { base, .. } => Some((base, a.agent)),
            _ => None,
        })
        .ok_or(DynamicsError::NotPinnedTriangle("no triangle-kind agent"))?;
    Ok((apex.0 .0, apex.0 .1, apex.1))
}

/// Positions with the pins in canonical place and the apex at `apex_at`.
pub fn pinned_positions(
    law: &ControlLaw,
    apex_at: Position,
) -> Result<Vec<Position>, DynamicsError> {
    let (b0, b1, apex) = pinned_layout(law)?;
    let a = 0.5 * law.formation().d_star();
    let mut p = vec![Position::ORIGIN; 3];
    p[b0.index()] = Position::new(-a, 0.0);
    p[b1.index()] = Position::new(a, 0.0);
    p[apex.index()] = apex_at;
    Ok(p)
}

/// Match a canonical-frame apex position against the closed-form equilibria.
pub fn classify_terminal(
    a: f64,
    k_gain: f64,
    apex: Position,
) -> Result<(BasinLabel, Option<EquilibriumFamily>), DynamicsError> {
    let eqs = enumerate_triangle_equilibria(a, k_gain)?;
    Ok(match nearest_equilibrium(&eqs, apex) {
        Some((e, d)) if d <= BASIN_MATCH_TOL => {
            let label = if e.family.is_correct() {
                BasinLabel::Correct
            } else {
                BasinLabel::Incorrect
            };
            (label, Some(e.family))
        }
        _ => (BasinLabel::Unresolved, None),
    })
}

/// Run the pinned triangle from every grid point and label where it ends.
/// Cells run in parallel; the output is in cell order.
pub fn basin_probe(
    law: &ControlLaw,
    grid: &BasinGrid,
    cfg: &IntegratorConfig,
) -> Result<Vec<BasinCell>, DynamicsError> {
    cfg.validate()?;
    let (_, _, apex) = pinned_layout(law)?;
    let a = 0.5 * law.formation().d_star();
    let k = law.gains().k_gain;
    // Fail early on bad gains rather than once per cell.
    enumerate_triangle_equilibria(a, k)?;

    let cells = (0..grid.len())
        .into_par_iter()
        .map(|index| {
            let start = grid.point(index);
            let init = pinned_positions(law, start).expect("layout checked");
            let (end, outcome) = match simulate(law, &init, cfg) {
                Ok(run) => (
                    Some(run.trajectory.final_state()[apex.index()]),
                    CellOutcome::Finished(run.termination),
                ),
                Err(DynamicsError::Diverged { time, .. }) => (None, CellOutcome::Diverged { time }),
                Err(_) => (None, CellOutcome::Failed),
            };
            let (label, family) = match end {
                Some(p) => classify_terminal(a, k, p).expect("gain checked"),
                None => (BasinLabel::Unresolved, None),
            };
            BasinCell {
                index,
                start,
                end,
                label,
                family,
                outcome,
            }
        })
        .collect();
    Ok(cells)
}

/// Fraction of cells labelled correct; 1.0 for an empty sweep.
pub fn fraction_correct(cells: &[BasinCell]) -> f64 {
    if cells.is_empty() {
        return 1.0;
    }
    cells
        .iter()
        .filter(|c| c.label == BasinLabel::Correct)
        .count() as f64
        / cells.len() as f64
}
