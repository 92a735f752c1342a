//! `oncosim`: synthesize or ingest a cohort, fit the simulator regressions,
//! train and evaluate agents, and produce report tables.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "oncosim", version, about = "Ovarian cancer treatment simulator and agent trainer")]
pub struct Cli {
    /// Flat `key = value` configuration file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic cohort with a known hazard model.
    Synth(SynthArgs),
    /// Standardize, filter and convert clinical tables into monthly periods.
    Ingest(IngestArgs),
    /// Fit the death and recurrence regressions.
    Fit(FitArgs),
    /// Train an agent in the simulator.
    Train(TrainArgs),
    /// Roll out a trained agent greedily.
    Evaluate(EvaluateArgs),
    /// Statistical comparisons, heatmap and treatment-line tables for a run.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub patients: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub clinical: Option<PathBuf>,
    #[arg(long)]
    pub drug_lines: Option<PathBuf>,
    /// Drug standardization index (TSV); the shipped one by default.
    #[arg(long)]
    pub standardization: Option<PathBuf>,
    /// `drop` removes lines with unknown drug names, `strict` fails.
    #[arg(long)]
    pub unknown_drugs: Option<String>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Ingest output directory.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Fit output directory.
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// dqn, nccn or random.
    #[arg(long)]
    pub agent: Option<String>,
    #[arg(long)]
    pub rounds: Option<u64>,
    #[arg(long)]
    pub checkpoint_period: Option<u64>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub restricted: Option<bool>,
    #[arg(long)]
    pub min_count: Option<usize>,
    /// Regimen lists for the nccn agent; the shipped ones by default.
    #[arg(long)]
    pub regimens: Option<PathBuf>,
    #[arg(long)]
    pub flush_every: Option<u64>,
    #[arg(long)]
    pub horizon_cap: Option<u32>,
    #[arg(long)]
    pub checkpoint_replay: Option<bool>,
    #[arg(long)]
    pub hidden_width: Option<usize>,
    #[arg(long)]
    pub hidden_layers: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub replay_capacity: Option<usize>,
    #[arg(long)]
    pub target_sync: Option<u64>,
    #[arg(long)]
    pub epsilon_start: Option<f64>,
    #[arg(long)]
    pub epsilon_min: Option<f64>,
    /// Round at which epsilon reaches its floor.
    #[arg(long)]
    pub epsilon_floor_round: Option<u64>,
    /// Greedy evaluation episodes after training (0 skips).
    #[arg(long)]
    pub eval_episodes: Option<usize>,
    /// Worker threads for evaluation rollouts.
    #[arg(long)]
    pub parallel_eval: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Train output directory.
    #[arg(long)]
    pub run: Option<PathBuf>,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub parallel_eval: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Train output directory.
    #[arg(long)]
    pub run: Option<PathBuf>,
    /// Ingest output directory, for the observed-cohort baseline.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Extra survival samples (survival_sample.json) to compare.
    #[arg(long = "sample")]
    pub samples: Vec<PathBuf>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub interval_months: Option<u32>,
    #[arg(long)]
    pub max_lines: Option<usize>,
    /// `last` (final window of rounds) or `all`.
    #[arg(long)]
    pub report_rounds: Option<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() {
                2
            } else if e.is_numerical() {
                3
            } else {
                1
            })
        }
    }
}
