//! Command-line campaigns over the BCMRT toolkit: tree generation,
//! statistics, estimation, testing, clustering and oracle tables, with
//! output that is a pure function of the experiment parameters and seed.

pub mod args;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{parse_config, Command, ExperimentSpec, Format, Params};
pub use error::CliError;
pub use run::{execute, run, RunReport};
