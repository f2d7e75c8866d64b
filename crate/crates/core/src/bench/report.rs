use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::ExperimentResult;
use crate::error::{Error, Result};

/// One line of `results.csv`. Means and deviations are written in shortest
/// round-trip form so reading the file back gives the same bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub dataset: String,
    pub model: String,
    pub seeds: usize,
    pub mean: f64,
    pub stdev: f64,
    pub num_layers: usize,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub dropout: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub k: String,
    pub hops: usize,
    pub profile: String,
    pub search_budget: usize,
    /// Per-seed test accuracies separated by `;`.
    pub accuracies: String,
}

impl From<&ExperimentResult> for CsvRow {
    fn from(r: &ExperimentResult) -> Self {
        CsvRow {
            dataset: r.dataset.clone(),
            model: r.model.clone(),
            seeds: r.runs.len(),
            mean: r.mean,
            stdev: r.stdev,
            num_layers: r.hyper.num_layers,
            hidden_dim: r.hyper.hidden_dim,
            learning_rate: r.hyper.learning_rate,
            dropout: r.hyper.dropout,
            weight_decay: r.hyper.weight_decay,
            max_epochs: r.hyper.max_epochs,
            patience: r.hyper.patience,
            k: r.k.map_or_else(String::new, |k| k.to_string()),
            hops: r.hops,
            profile: r.profile.clone(),
            search_budget: r.search_budget,
            accuracies: r
                .runs
                .iter()
                .map(|x| x.test_accuracy.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        }
    }
}

const CSV_HEADER: &str = "dataset,model,seeds,mean,stdev,num_layers,hidden_dim,learning_rate,dropout,weight_decay,max_epochs,patience,k,hops,profile,search_budget,accuracies";

pub fn results_csv(results: &[ExperimentResult]) -> Result<String> {
    if results.is_empty() {
        return Ok(format!("{CSV_HEADER}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in results {
        w.serialize(CsvRow::from(r))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io("writing CSV", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub fn parse_results_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Accuracy in percent with two decimals, `mean±stdev`.
pub fn format_cell(mean: f64, stdev: f64) -> String {
    format!("{:.2}±{:.2}", 100.0 * mean, 100.0 * stdev)
}

/// Aligned table with one row per model and one column per dataset.
pub fn results_table(results: &[ExperimentResult]) -> String {
    let mut datasets: Vec<&str> = Vec::new();
    let mut models: Vec<&str> = Vec::new();
    let mut cells = BTreeMap::new();
    for r in results {
        if !datasets.contains(&r.dataset.as_str()) {
            datasets.push(&r.dataset);
        }
        if !models.contains(&r.model.as_str()) {
            models.push(&r.model);
        }
        cells.insert((r.model.as_str(), r.dataset.as_str()), format_cell(r.mean, r.stdev));
    }
    let mut header = vec!["Model".to_string()];
    header.extend(datasets.iter().map(|d| d.to_string()));
    let mut rows = vec![header];
    for m in &models {
        let mut row = vec![m.to_string()];
        for d in &datasets {
            row.push(cells.get(&(*m, *d)).cloned().unwrap_or_else(|| "-".into()));
        }
        rows.push(row);
    }
    let ncols = rows[0].len();
    let widths: Vec<usize> = (0..ncols)
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                let pad = widths[c] - cell.chars().count();
                if c == 0 {
                    format!("{cell}{}", " ".repeat(pad))
                } else {
                    format!("{}{cell}", " ".repeat(pad))
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
        if i == 0 {
            let total = widths.iter().sum::<usize>() + 2 * (ncols - 1);
            let _ = writeln!(out, "{}", "-".repeat(total));
        }
    }
    out
}

/// Writes `results.csv` and `results.txt` into `out_dir`.
pub fn emit_report(results: &[ExperimentResult], out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    let csv_path = out_dir.join("results.csv");
    fs::write(&csv_path, results_csv(results)?).map_err(|e| Error::io(format!("writing {}", csv_path.display()), e))?;
    let mut txt = results_table(results);
    for r in results.iter().filter(|r| !r.trials.is_empty()) {
        let _ = writeln!(txt, "\n{} {}: random search, budget {}", r.dataset, r.model, r.search_budget);
        for (i, t) in r.trials.iter().enumerate() {
            let outcome = match &t.val_accuracy {
                Ok(a) => format!("val {:.2}", 100.0 * a),
                Err(e) => format!("failed: {e}"),
            };
            let _ = writeln!(txt, "  trial {i:>2} {:?} -> {outcome}", t.hyper);
        }
    }
    let txt_path = out_dir.join("results.txt");
    fs::write(&txt_path, txt).map_err(|e| Error::io(format!("writing {}", txt_path.display()), e))
}

pub fn write_run_log(out_dir: &Path, seed: u64, log: &str) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    let path = out_dir.join(format!("run-{seed}.log"));
    fs::write(&path, log).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::profile::default_profile;
    use crate::bench::run::RunRecord;
    use crate::model::Preset;

    fn result(mean: f64) -> ExperimentResult {
        ExperimentResult {
            dataset: "cornell".into(),
            model: "M2-SPD".into(),
            k: Some(3),
            hops: 3,
            hyper: default_profile("cornell", Preset::M2),
            profile: "default".into(),
            search_budget: 0,
            trials: Vec::new(),
            runs: vec![RunRecord {
                seed: 0,
                test_accuracy: mean,
                val_accuracy: 0.5,
                best_epoch: 3,
                epochs_run: 10,
                wall_clock_secs: 1.0,
                log: String::new(),
            }],
            mean,
            stdev: 0.0,
        }
    }

    #[test]
    fn empty_results_give_header_only() {
        let csv = results_csv(&[]).unwrap();
        assert_eq!(csv.lines().count(), 1);
        assert!(parse_results_csv(&csv).unwrap().is_empty());
    }

    #[test]
    fn one_row_round_trips_bit_exactly() {
        let r = result(0.8135135135135135);
        let csv = results_csv(std::slice::from_ref(&r)).unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        let rows = parse_results_csv(&csv).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mean.to_bits(), r.mean.to_bits());
        assert!(results_table(&[r]).contains("81.35±0.00"));
    }

    #[test]
    fn writes_both_files() {
        let tmp = tempfile::tempdir().unwrap();
        emit_report(&[result(0.5)], tmp.path()).unwrap();
        assert!(tmp.path().join("results.csv").exists());
        let txt = std::fs::read_to_string(tmp.path().join("results.txt")).unwrap();
        assert!(txt.contains("cornell"));
    }
}
