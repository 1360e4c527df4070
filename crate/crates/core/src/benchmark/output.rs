//! Result serialization: `summary.csv`, `runs.jsonl`, and `spec.json`.
//!
//! Output is byte-stable given identical inputs: fixed field order, sorted
//! metric maps, and fixed 6-decimal formatting in the CSV.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::pipeline::IterationRecord;

use super::{BenchmarkError, ExperimentOutcome};

/// One line of `runs.jsonl`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunLine {
    pub strategy: String,
    pub fold: usize,
    pub iterations: Vec<IterationRecord>,
    #[serde(default)]
    pub config: serde_json::Value,
}

/// Paths of the files a sweep writes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WrittenFiles {
    pub summary_csv: PathBuf,
    pub runs_jsonl: PathBuf,
    pub spec_json: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchmarkError + '_ {
    move |source| BenchmarkError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes the three result files into `out_dir` (created if missing).
///
/// `summary.csv` has one row per strategy entry; failed cells simply do not
/// contribute to that strategy's mean. `runs.jsonl` holds one successful run
/// per line in strategy-major order.
pub fn write_results(
    outcome: &ExperimentOutcome,
    out_dir: impl AsRef<Path>,
) -> Result<WrittenFiles, BenchmarkError> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let summary_csv = out_dir.join("summary.csv");
    let mut csv = String::from("strategy,mean_ipauc,std_ipauc\n");
    for s in &outcome.summary.strategies {
        csv.push_str(&format!(
            "{},{:.6},{:.6}\n",
            s.strategy, s.mean_ipauc, s.std_ipauc
        ));
    }
    fs::write(&summary_csv, csv).map_err(io_err(&summary_csv))?;

    let runs_jsonl = out_dir.join("runs.jsonl");
    {
        let mut file = fs::File::create(&runs_jsonl).map_err(io_err(&runs_jsonl))?;
        for record in &outcome.runs {
            let Some(log) = &record.log else { continue };
            let line = RunLine {
                strategy: record.strategy.clone(),
                fold: record.fold,
                iterations: log.iterations.clone(),
                config: log.config.clone(),
            };
            serde_json::to_writer(&mut file, &line)?;
            file.write_all(b"\n").map_err(io_err(&runs_jsonl))?;
        }
    }

    let spec_json = out_dir.join("spec.json");
    let spec_text = serde_json::to_string_pretty(&outcome.spec)?;
    fs::write(&spec_json, spec_text + "\n").map_err(io_err(&spec_json))?;

    Ok(WrittenFiles {
        summary_csv,
        runs_jsonl,
        spec_json,
    })
}
