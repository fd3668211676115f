//! Command-line surface: config ingestion, experiment orchestration and output files.

mod commands;
mod config;
mod output;

pub use commands::{
    builtin_example, cmd_reproduce_example, cmd_simulate, cmd_synth, cmd_verify, Outcome,
    EXAMPLE_CONFIG,
};
pub use config::{
    Engine, Experiment, ExperimentConfig, GainsConfig, GammaDesignRule, GraphConfig,
    InitialConfig, JordanMode, Matrix, ModelConfig, NetworkConfig, RunConfig, ScheduleConfig,
};
pub use output::{
    fmt_matrix, fmt_vec, write_error_csv, write_sigma_csv, write_states_csv, write_table,
    write_trajectory_csv, Summary,
};

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::synth::JordanPolicy;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("infeasible synthesis: {0}")]
    Infeasible(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Divergence(_) => 4,
            CliError::Failure(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "linsync", version, about = "Consensus of identical linear agents over switching graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Modal decomposition, designed gains and consensus conditions.
    Synth(RunArgs),
    /// Integrate the closed loop and write trajectory/error/σ CSV files.
    Simulate(RunArgs),
    /// Contraction certificates, doubly-stochastic checks and oracle cross-checks.
    Verify(RunArgs),
    /// Run the built-in four-agent switching example.
    ReproduceExample(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Args, Clone, Default)]
pub struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the schedule seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub engine: Option<Engine>,
    /// Require equal gains inside each Jordan block.
    #[arg(long, value_enum)]
    pub strict_jordan: Option<OnOff>,
}

impl RunArgs {
    fn policy(&self) -> Option<JordanPolicy> {
        self.strict_jordan.map(|s| match s {
            OnOff::On => JordanPolicy::Strict,
            OnOff::Off => JordanPolicy::Permissive,
        })
    }

    fn config(&self) -> Result<ExperimentConfig, CliError> {
        match &self.config {
            Some(p) => ExperimentConfig::load(p),
            None => Err(CliError::Config("--config <path> is required".into())),
        }
    }

    fn out_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.out
            .clone()
            .or_else(|| cfg.run.out.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

/// Runs one parsed command, returning its outcome.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Synth(args) => {
            let cfg = args.config()?;
            let exp = Experiment::build(&cfg, args.seed, args.policy())?;
            let out = args.out.clone().or_else(|| cfg.run.out.as_ref().map(PathBuf::from));
            cmd_synth(&exp, out.as_deref())
        }
        Command::Simulate(args) => {
            let cfg = args.config()?;
            let exp = Experiment::build(&cfg, args.seed, args.policy())?;
            let engine = args.engine.unwrap_or(cfg.run.engine);
            cmd_simulate(&exp, engine, &args.out_dir(&cfg))
        }
        Command::Verify(args) => {
            let cfg = args.config()?;
            let exp = Experiment::build(&cfg, args.seed, args.policy())?;
            cmd_verify(&exp, &args.out_dir(&cfg))
        }
        Command::ReproduceExample(args) => {
            let cfg = match &args.config {
                Some(p) => ExperimentConfig::load(p)?,
                None => builtin_example(),
            };
            let exp = Experiment::build(&cfg, args.seed, args.policy())?;
            let engine = args.engine.unwrap_or(cfg.run.engine);
            cmd_reproduce_example(&exp, engine, &args.out_dir(&cfg))
        }
    }
}

/// Entry point for the binary: prints the summary or the error and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(outcome) => {
            print!("{}", outcome.summary.render());
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
