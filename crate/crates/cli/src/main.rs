//! Batch entry points for the operator-learning pipeline: dataset
//! generation, training, evaluation, inference, inverse identification, and
//! CSV import/export.
//!
//! Exit codes: 0 ok, 2 usage, 3 data validation, 4 numerical failure.

mod commands;

use clap::{Args, Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sdon", version, about = "Sequential deep operator network pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GenCommon {
    /// Number of load cases to simulate.
    #[arg(long, default_value_t = 8)]
    cases: usize,
    /// RNG seed for load sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for case-level parallelism (1 = sequential).
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Output container directory.
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate lid-driven cavity cases into a dataset container.
    GenCavity {
        #[command(flatten)]
        common: GenCommon,
        /// Grid as NXxNY.
        #[arg(long, default_value = "121x41")]
        grid: String,
        /// Time steps per case.
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        /// Stored output steps (must divide --steps).
        #[arg(long, default_value_t = 25)]
        snapshots: usize,
        #[arg(long, default_value_t = 2e-4)]
        dt: f64,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = 0.1)]
        mu: f64,
        /// Control-point bounds as lo,hi.
        #[arg(long, default_value = "-2,2")]
        bounds: String,
        /// fixed:K or tol:TOL:MAX_ITER.
        #[arg(long, default_value = "fixed:50")]
        poisson_mode: String,
    },
    /// Integrate path-dependent bar cases into a dataset container.
    GenBar {
        #[command(flatten)]
        common: GenCommon,
        #[arg(long, default_value_t = 40)]
        snapshots: usize,
        /// Pseudo-nodes the scalar history is replicated over.
        #[arg(long, default_value_t = 1)]
        nodes: usize,
        #[arg(long, default_value_t = 10)]
        substeps: usize,
        /// Displacement bounds in mm as lo,hi.
        #[arg(long, default_value = "-5.5,5.5")]
        bounds: String,
        #[arg(long, default_value_t = 1.0)]
        t_total: f64,
    },
    /// Train a surrogate on a dataset container.
    Train {
        #[arg(long)]
        data: std::path::PathBuf,
        #[arg(long)]
        out: std::path::PathBuf,
        /// TOML settings file; command-line flags override it.
        #[arg(long)]
        config: Option<std::path::PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        split_fraction: Option<f64>,
        #[arg(long)]
        shuffle: Option<bool>,
        #[arg(long)]
        hd: Option<usize>,
        /// Four GRU widths, comma separated.
        #[arg(long)]
        branch_hidden: Option<String>,
        /// Checkpoint storage dtype (f64 or f32).
        #[arg(long, default_value = "f64")]
        dtype: String,
    },
    /// Evaluate a checkpoint against a dataset.
    Eval {
        #[arg(long)]
        data: std::path::PathBuf,
        #[arg(long)]
        model: std::path::PathBuf,
        /// Report output directory.
        #[arg(long)]
        report: std::path::PathBuf,
        /// Which cases: all, train, or test (train/test reproduce a split).
        #[arg(long, default_value = "all")]
        subset: String,
        #[arg(long, default_value_t = 0)]
        split_seed: u64,
        #[arg(long, default_value_t = 0.8)]
        split_fraction: f64,
    },
    /// Predict fields for a load history CSV.
    Infer {
        #[arg(long)]
        model: std::path::PathBuf,
        /// Load history as t,value rows; resampled onto the model's steps.
        #[arg(long)]
        load_csv: std::path::PathBuf,
        /// Query coordinates as node,x,y rows.
        #[arg(long)]
        coords_csv: std::path::PathBuf,
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Identify the load history behind a target mean-stress curve.
    Invert {
        #[arg(long)]
        model: std::path::PathBuf,
        /// Target stress history as t,sigma rows.
        #[arg(long)]
        target_csv: std::path::PathBuf,
        #[arg(long)]
        out: std::path::PathBuf,
        /// TOML GA settings; flags override.
        #[arg(long)]
        ga_config: Option<std::path::PathBuf>,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        population: Option<usize>,
        #[arg(long)]
        parents: Option<usize>,
        /// Gene bounds as lo,hi.
        #[arg(long)]
        bounds: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Index of the stress component in the model output.
        #[arg(long, default_value_t = 0)]
        component: usize,
        /// Optional known load history (t,value) for the comparison CSV.
        #[arg(long)]
        reference_load_csv: Option<std::path::PathBuf>,
    },
    /// Export a dataset's fields to the flat CSV schema.
    Export {
        #[arg(long)]
        data: std::path::PathBuf,
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Import fields/coords/loads CSVs into a dataset container.
    Import {
        /// Directory holding fields.csv, coords.csv, loads.csv.
        #[arg(long)]
        dir: std::path::PathBuf,
        /// Component names, comma separated.
        #[arg(long)]
        components: String,
        #[arg(long, default_value_t = 1.0)]
        t_total: f64,
        #[arg(long)]
        out: std::path::PathBuf,
    },
}

fn exit_code(err: &sdon::Error) -> u8 {
    use sdon::Error::*;
    match err {
        Diverged { .. }
        | PoissonNoConvergence { .. }
        | NonFiniteLoss { .. }
        | SingularSystem(_)
        | NegativeRadicand(_) => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
