//! Experiment drivers behind the command-line tool: configuration, CSV
//! traces, rate fits and the subcommands.

pub mod commands;
pub mod config;
pub mod rate;
pub mod trace;

pub use commands::{cmd_bounds, cmd_catalog, cmd_convergence, cmd_gp_demo, cmd_matrix, Outcome};
pub use config::ExperimentConfig;
pub use rate::{fit_rate, RateFit};
