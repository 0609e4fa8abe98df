//! The four scenario commands behind the `formation` binary.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    classify_gain, critical_gain, enumerate_pair_equilibria, enumerate_triangle_equilibria, Regime,
    Stability, GLOBAL_GAIN,
};
use crate::dynamics::{
    basin_probe, classify_terminal, fraction_correct, pinned_layout, simulate, BasinCell,
    BasinGrid, BasinLabel, DynamicsError, IntegratorConfig, SimulationRun, Termination,
    BASIN_MATCH_TOL,
};
use crate::geometry::{distance, Position};
use crate::hierarchy::ControlLaw;
use crate::runner::artifacts::{self, Manifest};
use crate::runner::config::{
    BuiltinGraph, ConfigError, InitialLayout, PositiveReal, ScenarioConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok,
    Timeout,
    Diverged,
    ConfigError,
    IoError,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Ok => 0,
            ExitStatus::IoError => 1,
            ExitStatus::Timeout => 2,
            ExitStatus::Diverged => 3,
            ExitStatus::ConfigError => 64,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl RunnerError {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            RunnerError::Io(_) => ExitStatus::IoError,
            _ => ExitStatus::ConfigError,
        }
    }
}

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimulateOptions {
    pub config: PathBuf,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub k_gain: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SimulateReport {
    pub status: ExitStatus,
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    pub run: Option<SimulationRun>,
}

fn apply_overrides(cfg: &mut ScenarioConfig, opts: &SimulateOptions) -> Result<(), ConfigError> {
    if let Some(k) = opts.k_gain {
        cfg.k_gain = PositiveReal::new(k).map_err(|m| ConfigError::Invalid {
            field: "--k".into(),
            message: m,
        })?;
    }
    if let Some(dt) = opts.dt {
        cfg.integrator.dt = dt;
    }
    if let Some(t) = opts.t_max {
        cfg.integrator.t_max = t;
    }
    if let Some(seed) = opts.seed {
        cfg.set_seed(seed)?;
    }
    Ok(())
}

/// Nearest closed-form equilibrium of a finished two- or three-agent run,
/// as `(family, label)`.
pub fn terminal_equilibrium(law: &ControlLaw, state: &[Position]) -> Option<(String, BasinLabel)> {
    let d = law.formation().d_star();
    match law.agent_count() {
        2 => {
            let r = distance(state[0], state[1]);
            let eqs = enumerate_pair_equilibria(d).ok()?;
            let (e, gap) = eqs
                .iter()
                .map(|e| (e, (e.position.x().abs() - r).abs()))
                .min_by(|a, b| a.1.total_cmp(&b.1))?;
            if gap > BASIN_MATCH_TOL {
                return Some(("none".into(), BasinLabel::Unresolved));
            }
            let label = if e.family.is_correct() {
                BasinLabel::Correct
            } else {
                BasinLabel::Incorrect
            };
            Some((e.family.name().into(), label))
        }
        3 => {
            let (b0, b1, apex) = pinned_layout(law).ok()?;
            let (p0, p1) = (state[b0.index()], state[b1.index()]);
            let axis = p1 - p0;
            if axis.norm() == 0.0 {
                return Some(("none".into(), BasinLabel::Unresolved));
            }
            let ex = axis * (1.0 / axis.norm());
            let mid = p0 + axis * 0.5;
            let rel = state[apex.index()] - mid;
            let local = Position::new(rel.dot(ex), rel.dot(ex.perp()));
            let (label, family) = classify_terminal(0.5 * d, law.gains().k_gain, local).ok()?;
            Some((family.map_or("none", |f| f.name()).into(), label))
        }
        _ => None,
    }
}

/// Load a scenario, integrate it and write the trajectory, metrics and
/// manifest. The manifest is written even when the config is rejected.
pub fn cmd_simulate(opts: &SimulateOptions) -> SimulateReport {
    let started = Instant::now();
    let mut manifest = Manifest::new("simulate");
    let mut out_dir = opts.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));

    let finish = |mut manifest: Manifest,
                  status: ExitStatus,
                  out_dir: PathBuf,
                  run: Option<SimulationRun>| {
        manifest.exit_code = status.code();
        manifest.wall_time_s = started.elapsed().as_secs_f64();
        let mut status = status;
        if let Err(e) = artifacts::write_toml(&out_dir.join(artifacts::MANIFEST_FILE), &manifest) {
            eprintln!("cannot write manifest: {e}");
            status = ExitStatus::IoError;
        }
        SimulateReport {
            status,
            out_dir,
            manifest,
            run,
        }
    };
    let reject = |mut manifest: Manifest,
                  status: ExitStatus,
                  kind: &str,
                  message: String,
                  out_dir: PathBuf| {
        manifest.termination = kind.into();
        manifest.message = Some(message);
        finish(manifest, status, out_dir, None)
    };

    let text = match fs::read_to_string(&opts.config) {
        Ok(t) => t,
        Err(e) => {
            let msg = format!("{}: {e}", opts.config.display());
            return reject(manifest, ExitStatus::IoError, "io-error", msg, out_dir);
        }
    };
    let mut cfg: ScenarioConfig = match toml::from_str(&text) {
        Ok(c) => c,
        Err(e) => {
            manifest.config_text = Some(text);
            return reject(
                manifest,
                ExitStatus::ConfigError,
                "config-error",
                e.to_string(),
                out_dir,
            );
        }
    };
    if opts.out_dir.is_none() {
        out_dir = cfg.output.dir.clone();
    }
    let scenario = apply_overrides(&mut cfg, opts).and_then(|_| cfg.build());
    manifest.config = Some(cfg);
    let scenario = match scenario {
        Ok(s) => s,
        Err(e) => {
            return reject(
                manifest,
                ExitStatus::ConfigError,
                "config-error",
                e.to_string(),
                out_dir,
            )
        }
    };
    let integrator = manifest.config.as_ref().expect("set above").integrator;

    let (trajectory, status, run) = match simulate(&scenario.law, &scenario.init, &integrator) {
        Ok(run) => {
            manifest.termination = run.termination.to_string();
            manifest.steps = Some(run.steps);
            let status = match run.termination {
                Termination::Converged => ExitStatus::Ok,
                Termination::Timeout => ExitStatus::Timeout,
            };
            (run.trajectory.clone(), status, Some(run))
        }
        Err(DynamicsError::Diverged {
            time,
            agent,
            trajectory,
        }) => {
            manifest.termination = "diverged".into();
            manifest.message = Some(format!(
                "agent {agent} left the bounded region at t = {time}"
            ));
            (*trajectory, ExitStatus::Diverged, None)
        }
        Err(e) => {
            return reject(
                manifest,
                ExitStatus::ConfigError,
                "config-error",
                e.to_string(),
                out_dir,
            )
        }
    };

    manifest.final_time = Some(trajectory.final_time());
    if let Some(m) = trajectory.final_metrics() {
        manifest.final_max_distance_error = Some(m.max_distance_error);
        manifest.final_max_area_error = Some(m.max_area_error);
        manifest.final_max_control_norm = Some(m.max_control_norm);
    }
    if run.is_some() {
        if let Some((family, label)) = terminal_equilibrium(&scenario.law, trajectory.final_state())
        {
            manifest.equilibrium = Some(family);
            manifest.equilibrium_label = Some(label.to_string());
        }
    }
    let written =
        artifacts::write_trajectory(&out_dir.join(artifacts::TRAJECTORY_FILE), &trajectory)
            .and_then(|_| {
                artifacts::write_metrics(&out_dir.join(artifacts::METRICS_FILE), &trajectory)
            });
    match written {
        Ok(()) => {
            manifest.artifacts = vec![
                artifacts::TRAJECTORY_FILE.into(),
                artifacts::METRICS_FILE.into(),
            ];
            finish(manifest, status, out_dir, run)
        }
        Err(e) => reject(
            manifest,
            ExitStatus::IoError,
            "io-error",
            e.to_string(),
            out_dir,
        ),
    }
}

/// `lo, lo + step, ..., <= hi`, each rounded to 12 decimals so that decimal
/// inputs land on their intended values.
pub fn gain_range(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, RunnerError> {
    let ok =
        lo.is_finite() && hi.is_finite() && step.is_finite() && lo > 0.0 && step > 0.0 && hi >= lo;
    if !ok {
        return Err(RunnerError::Argument(format!(
            "bad gain range {lo}:{hi}:{step}"
        )));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(RunnerError::Argument(format!(
            "gain range has {count} values"
        )));
    }
    Ok((0..count)
        .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// `"lo:hi:step"`.
pub fn parse_gain_range(s: &str) -> Result<Vec<f64>, RunnerError> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| RunnerError::Argument(format!("{s}: {e}")))?;
    match parts.as_slice() {
        [lo, hi, step] => gain_range(*lo, *hi, *step),
        _ => Err(RunnerError::Argument(format!(
            "expected lo:hi:step, got {s}"
        ))),
    }
}

/// `"9"` for a square grid or `"9x5"` for nx by ny.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let parse = |p: &str| p.trim().parse::<usize>().map_err(|e| format!("{s}: {e}"));
    match s.split_once(['x', 'X']) {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => parse(s).map(|n| (n, n)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumRow {
    pub family: String,
    pub x: f64,
    pub y: f64,
    pub eigenvalues: Vec<f64>,
    pub stability: Stability,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainRow {
    pub k_gain: f64,
    pub regime: Regime,
    /// Set when the gain sits on (or within 1e-9 of) a regime boundary.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<String>,
    pub stable_count: usize,
    pub equilibrium: Vec<EquilibriumRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub half_base: f64,
    pub gain: Vec<GainRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub half_base: f64,
    pub gains: Vec<f64>,
    /// Also report the two boundary gains, exactly.
    pub exact_boundary: bool,
    pub out_dir: PathBuf,
}

fn boundary_flag(k: f64) -> Option<String> {
    let near = |b: f64| (k - b).abs() <= 1e-9;
    let kc = critical_gain();
    if k == kc {
        Some("critical".into())
    } else if k == GLOBAL_GAIN {
        Some("global-threshold".into())
    } else if near(kc) {
        Some("near-critical".into())
    } else if near(GLOBAL_GAIN) {
        Some("near-global-threshold".into())
    } else {
        None
    }
}

pub fn analyze_gain(a: f64, k: f64) -> Result<GainRow, RunnerError> {
    let bad = |e: crate::analysis::AnalysisError| RunnerError::Argument(e.to_string());
    let regime = classify_gain(k).map_err(bad)?.regime;
    let eqs = enumerate_triangle_equilibria(a, k).map_err(bad)?;
    Ok(GainRow {
        k_gain: k,
        regime,
        boundary: boundary_flag(k),
        stable_count: eqs
            .iter()
            .filter(|e| e.stability == Stability::Stable)
            .count(),
        equilibrium: eqs
            .iter()
            .map(|e| EquilibriumRow {
                family: e.family.name().into(),
                x: e.position.x(),
                y: e.position.y(),
                eigenvalues: e.eigenvalues.clone(),
                stability: e.stability,
                multiplicity: e.multiplicity,
            })
            .collect(),
    })
}

/// Closed-form equilibrium table per gain, written to `equilibria.toml`.
pub fn cmd_analyze(opts: &AnalyzeOptions) -> Result<AnalyzeReport, RunnerError> {
    let mut gains = opts.gains.clone();
    if opts.exact_boundary {
        gains.extend([critical_gain(), GLOBAL_GAIN]);
        gains.sort_by(f64::total_cmp);
        gains.dedup();
    }
    if gains.is_empty() {
        return Err(RunnerError::Argument("no gains given".into()));
    }
    let rows = gains
        .iter()
        .map(|&k| analyze_gain(opts.half_base, k))
        .collect::<Result<Vec<_>, _>>()?;
    let report = AnalyzeReport {
        half_base: opts.half_base,
        gain: rows,
    };
    artifacts::write_toml(&opts.out_dir.join(artifacts::EQUILIBRIA_FILE), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinOptions {
    pub k_gain: f64,
    pub d_star: f64,
    pub nx: usize,
    pub ny: usize,
    /// The grid spans `[-extent, extent]` on both axes.
    pub extent: f64,
    pub integrator: IntegratorConfig,
    pub out_dir: PathBuf,
}

impl BasinOptions {
    pub fn new(k_gain: f64, n: usize, out_dir: impl Into<PathBuf>) -> Self {
        BasinOptions {
            k_gain,
            d_star: 2.0,
            nx: n,
            ny: n,
            extent: 3.0,
            integrator: IntegratorConfig::default(),
            out_dir: out_dir.into(),
        }
    }

    fn grid(&self) -> BasinGrid {
        BasinGrid {
            nx: self.nx,
            ny: self.ny,
            x_range: (-self.extent, self.extent),
            y_range: (-self.extent, self.extent),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasinSummary {
    pub k_gain: f64,
    pub cells: usize,
    pub correct: usize,
    pub incorrect: usize,
    pub unresolved: usize,
    pub fraction_correct: f64,
}

impl BasinSummary {
    pub fn of(k_gain: f64, cells: &[BasinCell]) -> Self {
        let count = |l| cells.iter().filter(|c| c.label == l).count();
        BasinSummary {
            k_gain,
            cells: cells.len(),
            correct: count(BasinLabel::Correct),
            incorrect: count(BasinLabel::Incorrect),
            unresolved: count(BasinLabel::Unresolved),
            fraction_correct: fraction_correct(cells),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BasinReport {
    pub cells: Vec<BasinCell>,
    pub summary: BasinSummary,
}

fn triangle_law(k_gain: f64, d_star: f64) -> Result<ControlLaw, RunnerError> {
    let check = |name: &str, v: f64| {
        PositiveReal::new(v).map_err(|m| RunnerError::Argument(format!("{name} {m}")))
    };
    check("K", k_gain)?;
    check("d*", d_star)?;
    let cfg = ScenarioConfig::builtin(
        BuiltinGraph::Triangle,
        d_star,
        k_gain,
        InitialLayout::Pinned {
            free: Position::ORIGIN,
        },
    );
    Ok(cfg.control_law()?)
}

fn run_basin(opts: &BasinOptions) -> Result<BasinReport, RunnerError> {
    if !(opts.extent.is_finite() && opts.extent >= 0.0) {
        return Err(RunnerError::Argument(format!(
            "bad grid extent {}",
            opts.extent
        )));
    }
    let law = triangle_law(opts.k_gain, opts.d_star)?;
    let cells = basin_probe(&law, &opts.grid(), &opts.integrator)
        .map_err(|e| RunnerError::Argument(e.to_string()))?;
    let summary = BasinSummary::of(opts.k_gain, &cells);
    Ok(BasinReport { cells, summary })
}

/// Pinned-triangle basin map: `basin.csv` plus `basin_summary.toml`.
pub fn cmd_basin(opts: &BasinOptions) -> Result<BasinReport, RunnerError> {
    let report = run_basin(opts)?;
    artifacts::write_basin(&opts.out_dir.join(artifacts::BASIN_FILE), &report.cells)?;
    artifacts::write_toml(
        &opts.out_dir.join(artifacts::BASIN_SUMMARY_FILE),
        &report.summary,
    )?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k_gain: f64,
    pub regime: Regime,
    pub stable_equilibria: usize,
    pub basin: BasinSummary,
}

/// Basin fraction-correct across gains, next to the closed-form regime.
pub fn cmd_sweep_gain(
    gains: &[f64],
    template: &BasinOptions,
) -> Result<Vec<SweepRow>, RunnerError> {
    if gains.is_empty() {
        return Err(RunnerError::Argument("no gains given".into()));
    }
    let a = 0.5 * template.d_star;
    let mut rows = Vec::with_capacity(gains.len());
    for &k in gains {
        let report = run_basin(&BasinOptions {
            k_gain: k,
            ..template.clone()
        })?;
        let row = analyze_gain(a, k)?;
        rows.push(SweepRow {
            k_gain: k,
            regime: row.regime,
            stable_equilibria: row.stable_count,
            basin: report.summary,
        });
    }
    write_sweep(&template.out_dir.join(artifacts::SWEEP_FILE), &rows)?;
    Ok(rows)
}

fn write_sweep(path: &Path, rows: &[SweepRow]) -> io::Result<()> {
    let mut text = String::from(
        "k_gain,regime,stable_equilibria,cells,correct,incorrect,unresolved,fraction_correct\n",
    );
    for r in rows {
        let b = &r.basin;
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.k_gain,
            r.regime,
            r.stable_equilibria,
            b.cells,
            b.correct,
            b.incorrect,
            b.unresolved,
            b.fraction_correct
        ));
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)
}
