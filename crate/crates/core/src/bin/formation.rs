use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use formation::dynamics::{IntegratorConfig, IntegratorMethod};
use formation::runner::commands::{parse_gain_range, parse_grid};
use formation::runner::{
    cmd_analyze, cmd_basin, cmd_simulate, cmd_sweep_gain, AnalyzeOptions, BasinOptions, ExitStatus,
    RunnerError, SimulateOptions,
};

/// Formation control scenarios: simulate, analyze, basin maps and gain sweeps.
#[derive(Parser)]
#[command(version, args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write trajectory, metrics and manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Replace the seed of a random initial layout.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long = "k", allow_negative_numbers = true)]
        k_gain: Option<f64>,
    },
    /// Closed-form equilibria, eigenvalues and regimes of the pinned triangle.
    Analyze {
        #[command(flatten)]
        gains: Gains,
        /// Half base length a = d*/2.
        #[arg(long, default_value_t = 1.0)]
        half_base: f64,
        /// Add both regime boundaries, exactly.
        #[arg(long)]
        exact_boundary: bool,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Label where the pinned triangle ends from each point of a grid.
    Basin {
        #[arg(long = "k", allow_negative_numbers = true)]
        k_gain: f64,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Basin fraction-correct across a list or range of gains.
    SweepGain {
        #[command(flatten)]
        gains: Gains,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Args)]
struct Gains {
    #[arg(long = "k", num_args = 1.., value_delimiter = ',', allow_negative_numbers = true)]
    k: Vec<f64>,
    /// lo:hi:step
    #[arg(long)]
    k_range: Option<String>,
}

impl Gains {
    fn collect(&self) -> Result<Vec<f64>, RunnerError> {
        let mut out = self.k.clone();
        if let Some(r) = &self.k_range {
            out.extend(parse_gain_range(r)?);
        }
        Ok(out)
    }
}

#[derive(Args)]
struct GridArgs {
    /// Cells per axis, as N or NXxNY.
    #[arg(long, default_value = "9", value_parser = parse_grid)]
    grid: (usize, usize),
    /// Grid spans [-extent, extent] on both axes.
    #[arg(long, default_value_t = 3.0)]
    extent: f64,
    #[arg(long, default_value_t = 2.0)]
    d_star: f64,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    euler: bool,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

impl GridArgs {
    fn options(&self, k_gain: f64) -> BasinOptions {
        let d = IntegratorConfig::default();
        BasinOptions {
            k_gain,
            d_star: self.d_star,
            nx: self.grid.0,
            ny: self.grid.1,
            extent: self.extent,
            integrator: IntegratorConfig {
                method: if self.euler {
                    IntegratorMethod::Euler
                } else {
                    IntegratorMethod::Rk4
                },
                dt: self.dt.unwrap_or(d.dt),
                t_max: self.t_max.unwrap_or(d.t_max),
                ..d
            },
            out_dir: self.out_dir.clone(),
        }
    }
}

fn run(cli: Cli) -> Result<ExitStatus, RunnerError> {
    match cli.command {
        Command::Simulate {
            config,
            out_dir,
            seed,
            dt,
            t_max,
            k_gain,
        } => {
            let rep = cmd_simulate(&SimulateOptions {
                config,
                out_dir,
                seed,
                dt,
                t_max,
                k_gain,
            });
            let m = &rep.manifest;
            println!("{}: {}", m.termination, rep.out_dir.display());
            if let Some(msg) = &m.message {
                eprintln!("{msg}");
            }
            if let (Some(d), Some(a)) = (m.final_max_distance_error, m.final_max_area_error) {
                println!(
                    "t = {}, max distance error {d:.3e}, max area error {a:.3e}",
                    m.final_time.unwrap_or(0.0)
                );
            }
            if let (Some(e), Some(l)) = (&m.equilibrium, &m.equilibrium_label) {
                println!("terminal equilibrium: {e} ({l})");
            }
            Ok(rep.status)
        }
        Command::Analyze {
            gains,
            half_base,
            exact_boundary,
            out_dir,
        } => {
            let rep = cmd_analyze(&AnalyzeOptions {
                half_base,
                gains: gains.collect()?,
                exact_boundary,
                out_dir,
            })?;
            println!("{:>14} {:>14} {:>7}  equilibria", "K", "regime", "stable");
            for row in &rep.gain {
                let eqs: Vec<String> = row
                    .equilibrium
                    .iter()
                    .map(|e| format!("{}:{}", e.family, e.stability))
                    .collect();
                let flag = row
                    .boundary
                    .as_deref()
                    .map(|b| format!(" [{b}]"))
                    .unwrap_or_default();
                println!(
                    "{:>14} {:>14} {:>7}  {}{flag}",
                    row.k_gain,
                    row.regime.to_string(),
                    row.stable_count,
                    eqs.join(" ")
                );
            }
            Ok(ExitStatus::Ok)
        }
        Command::Basin { k_gain, grid } => {
            let rep = cmd_basin(&grid.options(k_gain))?;
            let s = rep.summary;
            println!(
                "K = {}: {} cells, fraction correct {} ({} incorrect, {} unresolved)",
                s.k_gain, s.cells, s.fraction_correct, s.incorrect, s.unresolved
            );
            Ok(ExitStatus::Ok)
        }
        Command::SweepGain { gains, grid } => {
            for row in cmd_sweep_gain(&gains.collect()?, &grid.options(1.0))? {
                println!(
                    "K = {:<10} {:<14} fraction correct {}",
                    row.k_gain,
                    row.regime.to_string(),
                    row.basin.fraction_correct
                );
            }
            Ok(ExitStatus::Ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                ExitStatus::ConfigError.code() as u8
            } else {
                0
            });
        }
    };
    let status = run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_status()
    });
    ExitCode::from(status.code() as u8)
}
