//! CSV and manifest writers. Floats use the shortest round-trip form, so the
//! same run always produces the same bytes.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::dynamics::{BasinCell, Trajectory};
use crate::runner::config::ScenarioConfig;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const EQUILIBRIA_FILE: &str = "equilibria.toml";
pub const BASIN_FILE: &str = "basin.csv";
pub const BASIN_SUMMARY_FILE: &str = "basin_summary.toml";
pub const SWEEP_FILE: &str = "gain_sweep.csv";

fn create(path: &Path) -> io::Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(fs::File::create(path)?))
}

/// `t, x_1, y_1, ..., x_n, y_n, max_dist_err, max_area_err, max_u_norm`.
pub fn write_trajectory(path: &Path, trajectory: &Trajectory) -> io::Result<()> {
    let mut w = create(path)?;
    let n = trajectory.states().first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    for i in 1..=n {
        header.push(format!("x_{i}"));
        header.push(format!("y_{i}"));
    }
    header.extend(["max_dist_err", "max_area_err", "max_u_norm"].map(String::from));
    writeln!(w, "{}", header.join(","))?;
    for ((t, s), m) in trajectory
        .times()
        .iter()
        .zip(trajectory.states())
        .zip(trajectory.metrics())
    {
        write!(w, "{t}")?;
        for p in s {
            write!(w, ",{},{}", p.x(), p.y())?;
        }
        writeln!(
            w,
            ",{},{},{}",
            m.max_distance_error, m.max_area_error, m.max_control_norm
        )?;
    }
    w.flush()
}

/// `t, max_dist_err, max_area_err, max_u_norm`.
pub fn write_metrics(path: &Path, trajectory: &Trajectory) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t,max_dist_err,max_area_err,max_u_norm")?;
    for (t, m) in trajectory.times().iter().zip(trajectory.metrics()) {
        writeln!(
            w,
            "{t},{},{},{}",
            m.max_distance_error, m.max_area_error, m.max_control_norm
        )?;
    }
    w.flush()
}

/// One row per cell; nothing at all for an empty sweep.
pub fn write_basin(path: &Path, cells: &[BasinCell]) -> io::Result<()> {
    let mut w = create(path)?;
    if cells.is_empty() {
        return w.flush();
    }
    writeln!(w, "index,x0,y0,x_end,y_end,label,family,outcome")?;
    for c in cells {
        let (xe, ye) = c.end.map_or((String::new(), String::new()), |p| {
            (p.x().to_string(), p.y().to_string())
        });
        let family = c.family.map_or("", |f| f.name());
        writeln!(
            w,
            "{},{},{},{xe},{ye},{},{family},{}",
            c.index,
            c.start.x(),
            c.start.y(),
            c.label,
            c.outcome
        )?;
    }
    w.flush()
}

pub fn write_toml<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let text = toml::to_string(value).map_err(io::Error::other)?;
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()
}

/// Record of one `simulate` invocation, written whatever the outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    /// `converged`, `timeout`, `diverged`, `config-error` or `io-error`.
    pub termination: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_max_distance_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_max_area_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_max_control_norm: Option<f64>,
    /// Nearest closed-form equilibrium for two- and three-agent scenarios.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equilibrium: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equilibrium_label: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub artifacts: Vec<String>,
    /// Raw config text when it could not be parsed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ScenarioConfig>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest {
            command: command.to_string(),
            termination: String::new(),
            exit_code: 0,
            message: None,
            wall_time_s: 0.0,
            final_time: None,
            steps: None,
            final_max_distance_error: None,
            final_max_area_error: None,
            final_max_control_norm: None,
            equilibrium: None,
            equilibrium_label: None,
            artifacts: Vec::new(),
            config_text: None,
            config: None,
        }
    }
}
