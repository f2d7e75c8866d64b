//! Experiment runner: per-dataset profiles, random search, multi-seed
//! evaluation and report files.

mod config;
mod profile;
mod report;
mod run;

use std::path::{Path, PathBuf};

pub use config::KvConfig;
pub use profile::{canonical_name, default_profile, Hyper, SearchSpace};
pub use report::{
    emit_report, format_cell, parse_results_csv, results_csv, results_table, write_run_log, CsvRow,
};
pub use run::{
    hyperparameter_search, mean_stdev, run_benchmark, train_once, ExperimentPlan, ExperimentResult, Profile,
    RunRecord, TrialRecord, DEFAULT_SEARCH_BUDGET,
};

use crate::data::{load_dataset_dir, Dataset, FeatureEncoding};
use crate::error::{Error, Result};

/// Environment variable consulted when no data directory is given.
pub const DATA_DIR_ENV: &str = "DEGNN_DATA_DIR";

pub const BENCHMARK_DATASETS: [&str; 8] = [
    "cora", "citeseer", "pubmed", "chameleon", "actor", "cornell", "wisconsin", "texas",
];

/// Directory holding `name`: `<data_dir>/<name>`, also trying `film` for
/// `actor` and the capitalised spelling.
pub fn dataset_dir(data_dir: &Path, name: &str) -> Result<PathBuf> {
    let canon = canonical_name(name);
    let mut candidates = vec![canon.clone(), name.to_string()];
    if canon == "actor" {
        candidates.push("film".into());
    }
    let mut cap = canon.clone();
    if let Some(first) = cap.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    candidates.push(cap);
    for c in &candidates {
        let dir = data_dir.join(c);
        if dir.join(crate::data::NODE_FILE).is_file() {
            return Ok(dir);
        }
    }
    Err(Error::Config(format!(
        "dataset {name:?} not found under {} (looked for {}/<name>/{})",
        data_dir.display(),
        data_dir.display(),
        crate::data::NODE_FILE
    )))
}

/// Loads a named benchmark and labels it with its canonical name.
pub fn load_named(data_dir: &Path, name: &str) -> Result<Dataset> {
    let mut ds = load_dataset_dir(&dataset_dir(data_dir, name)?, FeatureEncoding::Auto)?;
    ds.name = canonical_name(name);
    Ok(ds)
}

/// `--data-dir` if given, else `$DEGNN_DATA_DIR`, else `./data`.
pub fn resolve_data_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"))
}

/// One tab-separated stats row for a named benchmark.
pub fn dataset_report_line(data_dir: &Path, name: &str) -> Result<String> {
    Ok(crate::data::dataset_report(&load_named(data_dir, name)?)?.to_row())
}
