//! Command-line flags. Every flag maps to the config key of the same name,
//! so a flag and a `key = value` line are interchangeable.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use crate::config::{parse_config, Command, ConfigFile, ExperimentSpec, Params};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "bcmrt", version, about = "Simulation and inference for balanced community modulated random recursive trees")]
pub struct Cli {
    /// `key = value` file; flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Optional when the config file names a `command`.
    #[command(subcommand)]
    pub command: Option<Sub>,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Sample trees and print them in full or as observed in a setting.
    Generate(GenerateArgs),
    /// Degree, collision, split and distance statistics per tree.
    Stats(StatsArgs),
    /// Collision-count estimates of q per replicate.
    Estimate(EstimateArgs),
    /// Monte Carlo risk of the test for a setting.
    Test(TestArgs),
    /// Exhaustive coloring search per replicate.
    Cluster(ClusterArgs),
    /// Exact recursion tables and closed forms.
    Oracle(OracleArgs),
    /// Exact total variation by enumeration of all histories.
    #[command(name = "tv-exact")]
    TvExact(TvArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    /// Worker threads (default: BCMRT_THREADS, then all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output file (default: standard output).
    #[arg(long, value_name = "FILE")]
    pub out: Option<String>,
    /// `json` (lines) or `csv`.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct CampaignArgs {
    /// Master seed; replicate `i` uses a seed derived from it.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Re-run only this replicate of the campaign.
    #[arg(long)]
    pub replicate: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub q: Option<f64>,
    /// `labelled`, `rooted`, `unrooted` or `full`.
    #[arg(long)]
    pub setting: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub campaign: CampaignArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct StatsArgs {
    /// JSON-lines trees (bare, or rows of `generate --setting full`).
    #[arg(long, value_name = "FILE")]
    pub input: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub q: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub campaign: CampaignArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub q: Option<f64>,
    /// `log` (2 ln n, default) or `harmonic` (2 H_{n-1}).
    #[arg(long)]
    pub normalization: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub campaign: CampaignArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct TestArgs {
    #[arg(long)]
    pub setting: Option<String>,
    #[arg(long)]
    pub q0: Option<f64>,
    #[arg(long)]
    pub q1: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ClusterArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Largest n the search accepts.
    #[arg(long)]
    pub cap: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub campaign: CampaignArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    /// leaf, degree, rooted, unrooted, gamma, delta, level or esbound.
    #[arg(long)]
    pub which: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub q1: Option<f64>,
    /// Largest degree tabulated by `degree`.
    #[arg(long)]
    pub k: Option<usize>,
    /// Node time for the subtree bound column of `esbound`.
    #[arg(long)]
    pub i: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct TvArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub q0: Option<f64>,
    #[arg(long)]
    pub q1: Option<f64>,
    #[arg(long)]
    pub setting: Option<String>,
    /// Allow n = 5 (slow).
    #[arg(long)]
    pub extended: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

/// Present flags as config pairs; absent options and unset switches vanish.
fn to_params<T: Serialize>(args: &T) -> Params {
    let Ok(Value::Object(map)) = serde_json::to_value(args) else {
        unreachable!("argument structs serialize to objects");
    };
    map.into_iter()
        .filter_map(|(k, v)| match v {
            Value::Null | Value::Bool(false) => None,
            Value::String(s) => Some((k, s)),
            other => Some((k, other.to_string())),
        })
        .collect()
}

impl Sub {
    fn split(&self) -> (Command, Params) {
        match self {
            Sub::Generate(a) => (Command::Generate, to_params(a)),
            Sub::Stats(a) => (Command::Stats, to_params(a)),
            Sub::Estimate(a) => (Command::Estimate, to_params(a)),
            Sub::Test(a) => (Command::Test, to_params(a)),
            Sub::Cluster(a) => (Command::Cluster, to_params(a)),
            Sub::Oracle(a) => (Command::Oracle, to_params(a)),
            Sub::TvExact(a) => (Command::TvExact, to_params(a)),
        }
    }
}

impl Cli {
    /// Merges the config file (if any) under the flags.
    pub fn into_spec(self) -> Result<ExperimentSpec, CliError> {
        let file = match &self.config {
            Some(path) => parse_config(path)?,
            None => ConfigFile::default(),
        };
        let (command, flags) = match &self.command {
            Some(sub) => {
                let (c, p) = sub.split();
                (Some(c), p)
            }
            None => (None, Params::new()),
        };
        ExperimentSpec::resolve(command, file, flags)
    }
}
