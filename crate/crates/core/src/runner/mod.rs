//! Scenario files, output artifacts and the command implementations used by
//! the `formation` binary.

pub mod artifacts;
pub mod commands;
pub mod config;

pub use commands::{
    cmd_analyze, cmd_basin, cmd_simulate, cmd_sweep_gain, AnalyzeOptions, BasinOptions, ExitStatus,
    RunnerError, SimulateOptions,
};
pub use config::{BuiltinGraph, GraphSpec, InitialLayout, ScenarioConfig};
