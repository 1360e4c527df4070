//! Benchmark command line: `run`, `datasets list`, and `score list`.
//!
//! Exit codes: 0 success, 1 configuration/spec error, 2 runtime failure.

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::benchmark::{run_experiment, write_results, ExperimentSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SPEC_ERROR: i32 = 1;
pub const EXIT_RUNTIME_ERROR: i32 = 2;

#[derive(Parser)]
#[command(
    name = "poolside",
    version,
    about = "Pool-based active learning benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON spec file.
    Run {
        /// Path to the experiment spec (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// Output directory for summary.csv, runs.jsonl, and spec.json.
        #[arg(long)]
        out: PathBuf,
        /// Override the spec's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Dataset utilities.
    Datasets {
        #[command(subcommand)]
        command: DatasetsCommand,
    },
    /// Informativeness measure utilities.
    Score {
        #[command(subcommand)]
        command: Option<ScoreCommand>,
    },
}

#[derive(Subcommand)]
enum DatasetsCommand {
    /// List the built-in dataset generators and the CSV loader.
    List,
}

#[derive(Subcommand)]
enum ScoreCommand {
    /// List the informativeness measures and what each one needs.
    List,
}

/// Entry point shared by the binary and tests; returns the process exit
/// code instead of exiting.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_SPEC_ERROR,
            };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Run { spec, out, seed } => run_command(&spec, &out, seed),
        Command::Datasets {
            command: DatasetsCommand::List,
        } => {
            print_datasets();
            EXIT_OK
        }
        Command::Score { command: _ } => {
            print_measures();
            EXIT_OK
        }
    }
}

fn run_command(spec_path: &PathBuf, out_dir: &PathBuf, seed: Option<u64>) -> i32 {
    let text = match std::fs::read_to_string(spec_path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read spec {}: {e}", spec_path.display());
            return EXIT_SPEC_ERROR;
        }
    };
    let mut spec: ExperimentSpec = match serde_json::from_str(&text) {
        Ok(spec) => spec,
        Err(e) => {
            // serde_json reports line and column of the offending field.
            eprintln!("error: malformed spec {}: {e}", spec_path.display());
            return EXIT_SPEC_ERROR;
        }
    };
    if let Some(seed) = seed {
        spec.master_seed = seed;
    }
    if let Err(e) = spec.validate() {
        eprintln!("error: {e}");
        return EXIT_SPEC_ERROR;
    }

    let outcome = match run_experiment(&spec) {
        Ok(outcome) => outcome,
        Err(e) => {
            eprintln!("error: experiment failed: {e}");
            return EXIT_RUNTIME_ERROR;
        }
    };
    for record in &outcome.runs {
        if let Some(error) = &record.error {
            eprintln!(
                "warning: strategy {:?} fold {} failed: {error}",
                record.strategy, record.fold
            );
        }
    }
    match write_results(&outcome, out_dir) {
        Ok(files) => {
            println!(
                "wrote {}, {}, {}",
                files.summary_csv.display(),
                files.runs_jsonl.display(),
                files.spec_json.display()
            );
            println!();
            println!(
                "IPAUC ({}) over {} folds:",
                outcome.summary.metric, spec.folds
            );
            for s in &outcome.summary.strategies {
                println!(
                    "  {:<28} {:.6} +/- {:.6}",
                    s.strategy, s.mean_ipauc, s.std_ipauc
                );
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: failed to write results: {e}");
            EXIT_RUNTIME_ERROR
        }
    }
}

fn print_datasets() {
    println!("built-in dataset sources (spec field: dataset.kind):");
    println!();
    println!("  checkerboard       binary classification; uniform points on the unit");
    println!("                     square, label = parity of the (grid x grid) cell;");
    println!("                     params: n_samples, grid (2|4), seed");
    println!("  gaussian_clouds    k-class classification; isotropic Gaussians on a");
    println!("                     regular simplex with edge 4*overlap_sigma;");
    println!("                     params: n_samples, n_clouds, overlap_sigma, seed");
    println!("  synth_regression   1-D regression; variant synth_reg1 is sin(6x),");
    println!("                     synth_reg2 a 4-level step function;");
    println!("                     params: variant, n_samples, noise_sd, seed");
    println!("  csv                headered CSV file; one numeric target column, all");
    println!("                     other columns are features;");
    println!("                     params: path, target_column, target_kind");
}

fn print_measures() {
    println!("informativeness measures (spec field: strategies[].measure.name):");
    println!();
    println!("  entropy               classification   -sum p ln p of the class row");
    println!("  least_confidence      class/regression  1 - max p, or Var[Y|x]");
    println!("  margin_confidence     classification    1 - (p(top) - p(second))");
    println!("  ratio_confidence      classification    p(second) / p(top)");
    println!("  greedy_score          regression        E[Y|x]");
    println!("  ucb                   regression        E[Y|x] + lambda sqrt(Var[Y|x])");
    println!("  expected_improvement  regression        E[max(Y - best, 0)]");
    println!("  bald                  class/regression  mutual information; ensemble");
    println!("                                          members needed for classes");
    println!("  thompson_sampling     regression        one seeded ensemble member's");
    println!("                                          predictions (members needed)");
    println!("  relative_distance     any               min distance to labelled set");
    println!();
    println!("selection rules (strategies[].kind): random, top_m, epsilon_greedy,");
    println!("representative");
}
