//! Scenario files: one TOML document per run.
//!
//! ```toml
//! root_edge = [1, 2]
//! d_star = 1.0
//! k_gain = 20.0
//!
//! [graph]
//! kind = "builtin"
//! name = "ten-agent"
//!
//! [initial]
//! layout = "random"
//! seed = 7
//! lower = [0.0, 0.0]
//! upper = [10.0, 10.0]
//!
//! [integrator]
//! dt = 0.001
//! ```

use std::fmt;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{pinned_positions, IntegratorConfig};
use crate::geometry::Position;
use crate::graph::{AgentId, Clique, DesiredFormation, FormationGraph};
use crate::hierarchy::{build_hierarchy, ControlGains, ControlLaw};

/// Finite, strictly positive real; rejected at parse time so errors carry the
/// key and line.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PositiveReal(f64);

impl PositiveReal {
    pub fn new(v: f64) -> Result<Self, String> {
        if v.is_finite() && v > 0.0 {
            Ok(PositiveReal(v))
        } else {
            Err(format!("must be finite and positive, got {v}"))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PositiveReal {
    type Error = String;
    fn try_from(v: f64) -> Result<Self, String> {
        PositiveReal::new(v)
    }
}

impl From<PositiveReal> for f64 {
    fn from(v: PositiveReal) -> f64 {
        v.0
    }
}

impl fmt::Display for PositiveReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinGraph {
    /// Ten agents, nine counterclockwise triangles.
    #[serde(alias = "paper-10")]
    TenAgent,
    Triangle,
    Pair,
}

impl BuiltinGraph {
    pub fn graph(self) -> FormationGraph {
        match self {
            BuiltinGraph::TenAgent => FormationGraph::example_ten_agent(),
            BuiltinGraph::Triangle => FormationGraph::single_triangle(),
            BuiltinGraph::Pair => FormationGraph::single_pair(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSpec {
    Builtin {
        name: BuiltinGraph,
    },
    Custom {
        agents: usize,
        edges: Vec<[usize; 2]>,
        cliques: Vec<[usize; 3]>,
        /// Per-clique sign of the desired area; all `+1` when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        orientation: Option<Vec<i8>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialLayout {
    Explicit {
        positions: Vec<Position>,
    },
    /// First half of the agents top to bottom in a left column, the rest in a
    /// right column `3 d*` away, unit vertical spacing.
    TwoColumns {},
    /// Two- or three-agent graphs only: the fixed agents in the canonical
    /// frame and the moving agent at `free`.
    Pinned {
        free: Position,
    },
    /// Uniform in the box `[lower, upper]`.
    Random {
        seed: u64,
        lower: [f64; 2],
        upper: [f64; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from("out"),
        }
    }
}

fn default_root() -> [usize; 2] {
    [1, 2]
}

fn unit_kappa() -> PositiveReal {
    PositiveReal(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_root")]
    pub root_edge: [usize; 2],
    pub d_star: PositiveReal,
    pub k_gain: PositiveReal,
    #[serde(default = "unit_kappa")]
    pub kappa: PositiveReal,
    pub graph: GraphSpec,
    pub initial: InitialLayout,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: &str, message: impl fmt::Display) -> Self {
        ConfigError::Invalid {
            field: field.to_string(),
            message: message.to_string(),
        }
    }
}

/// A validated scenario ready to integrate.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub law: ControlLaw,
    pub init: Vec<Position>,
}

impl ScenarioConfig {
    /// Parse and validate.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.build()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config always serializes")
    }

    /// A builtin scenario with default integrator settings.
    pub fn builtin(name: BuiltinGraph, d_star: f64, k_gain: f64, initial: InitialLayout) -> Self {
        ScenarioConfig {
            root_edge: default_root(),
            d_star: PositiveReal::new(d_star).expect("positive d*"),
            k_gain: PositiveReal::new(k_gain).expect("positive K"),
            kappa: unit_kappa(),
            graph: GraphSpec::Builtin { name },
            initial,
            integrator: IntegratorConfig::default(),
            output: OutputSpec::default(),
        }
    }

    pub fn formation(&self) -> Result<DesiredFormation, ConfigError> {
        let d = self.d_star.get();
        let df = match &self.graph {
            GraphSpec::Builtin { name } => DesiredFormation::new(name.graph(), d),
            GraphSpec::Custom {
                agents,
                edges,
                cliques,
                orientation,
            } => {
                let g = FormationGraph::new(
                    *agents,
                    edges.iter().map(|[a, b]| (*a, *b)),
                    cliques.iter().map(|[i, j, k]| Clique::new(*i, *j, *k)),
                )
                .map_err(|e| ConfigError::invalid("graph", e))?;
                match orientation {
                    Some(o) => DesiredFormation::with_orientation(g, d, o.clone()),
                    None => DesiredFormation::new(g, d),
                }
            }
        };
        df.map_err(|e| ConfigError::invalid("graph", e))
    }

    pub fn control_law(&self) -> Result<ControlLaw, ConfigError> {
        let df = self.formation()?;
        let [r0, r1] = self.root_edge;
        let plan = build_hierarchy(&df, (AgentId(r0), AgentId(r1)))
            .map_err(|e| ConfigError::invalid("root_edge", e))?;
        let gains = ControlGains {
            k_gain: self.k_gain.get(),
            kappa: self.kappa.get(),
        };
        ControlLaw::new(plan, df, gains).map_err(|e| ConfigError::invalid("k_gain", e))
    }

    /// Validate everything and produce the control law and initial state.
    pub fn build(&self) -> Result<Scenario, ConfigError> {
        self.integrator
            .validate()
            .map_err(|e| ConfigError::invalid("integrator", e))?;
        let law = self.control_law()?;
        let n = law.agent_count();
        let init = match &self.initial {
            InitialLayout::Explicit { positions } => {
                if positions.len() != n {
                    return Err(ConfigError::invalid(
                        "initial.positions",
                        format!("expected {n} positions, got {}", positions.len()),
                    ));
                }
                positions.clone()
            }
            InitialLayout::TwoColumns {} => two_columns(n, self.d_star.get()),
            InitialLayout::Pinned { free } => match n {
                2 => vec![Position::ORIGIN, *free],
                3 => {
                    pinned_positions(&law, *free).map_err(|e| ConfigError::invalid("initial", e))?
                }
                _ => {
                    return Err(ConfigError::invalid(
                        "initial.layout",
                        "pinned layout needs two or three agents",
                    ))
                }
            },
            InitialLayout::Random { seed, lower, upper } => {
                let ok = (0..2)
                    .all(|i| lower[i].is_finite() && upper[i].is_finite() && lower[i] < upper[i]);
                if !ok {
                    return Err(ConfigError::invalid(
                        "initial",
                        "random box needs finite lower < upper",
                    ));
                }
                random_layout(n, *seed, *lower, *upper)
            }
        };
        Ok(Scenario { law, init })
    }

    /// Replace the seed of a random layout.
    pub fn set_seed(&mut self, new_seed: u64) -> Result<(), ConfigError> {
        match &mut self.initial {
            InitialLayout::Random { seed, .. } => {
                *seed = new_seed;
                Ok(())
            }
            _ => Err(ConfigError::invalid(
                "initial.seed",
                "a seed only applies to the random layout",
            )),
        }
    }
}

/// Agents `1..=ceil(n/2)` top to bottom at `x = 0`, the rest at `x = 3 d*`.
pub fn two_columns(n: usize, d_star: f64) -> Vec<Position> {
    let left = n.div_ceil(2);
    (0..n)
        .map(|i| {
            let (col, row) = if i < left {
                (0.0, i)
            } else {
                (3.0 * d_star, i - left)
            };
            Position::new(col, (left - 1 - row) as f64)
        })
        .collect()
}

pub fn random_layout(n: usize, seed: u64, lower: [f64; 2], upper: [f64; 2]) -> Vec<Position> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            Position::new(
                rng.random_range(lower[0]..upper[0]),
                rng.random_range(lower[1]..upper[1]),
            )
        })
        .collect()
}
