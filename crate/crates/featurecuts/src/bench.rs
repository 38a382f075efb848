//! Benchmark runner: the full pipeline over a list of datasets, with
//! per-dataset reports, trace CSVs, and an aggregate table.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cli::OptionSet;
use crate::dataset::load_csv;
use crate::error::{Error, Result};
use crate::pipeline::run_featurecuts;
use crate::report::{atomic_write, write_json, write_trace_csv};

/// One benchmark entry: a dataset plus any pipeline options (the same
/// keys the CLI `--config` file accepts).
#[derive(Debug, Clone, Deserialize)]
pub struct BenchEntry {
    /// Row label; defaults to the dataset file stem.
    pub name: Option<String>,
    #[serde(flatten)]
    pub options: OptionSet,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub dataset: String,
    pub method: String,
    pub reduction_pct: f64,
    pub test_score: f64,
    pub time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub datasets: usize,
    pub reduction_pct_mean: f64,
    pub reduction_pct_std: f64,
    pub test_score_mean: f64,
    pub test_score_std: f64,
    pub time_s_mean: f64,
    pub time_s_std: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum BenchOutcome {
    Ok {
        #[serde(flatten)]
        row: BenchRow,
        report_file: String,
        trace_file: String,
    },
    Failed { dataset: String, error: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchSummary {
    pub datasets: Vec<BenchOutcome>,
    /// Mean ± population std over the successful rows; `None` when
    /// nothing succeeded.
    pub aggregate: Option<Aggregate>,
}

pub fn load_bench_config(path: &Path) -> Result<Vec<BenchEntry>> {
    let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let entries: Vec<BenchEntry> = serde_json::from_str(&body)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if entries.is_empty() {
        return Err(Error::Config(format!("{}: no benchmark entries", path.display())));
    }
    Ok(entries)
}

fn run_entry(entry: &BenchEntry, out_dir: &Path) -> Result<(BenchRow, String, String)> {
    let input = entry
        .options
        .input
        .clone()
        .ok_or_else(|| Error::Config("benchmark entry needs an 'input' dataset path".into()))?;
    let name = entry.name.clone().unwrap_or_else(|| {
        input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dataset".into())
    });

    let resolved = entry.options.clone().resolve()?;
    let ds = load_csv(&input, &resolved.load)?;

    let start = Instant::now();
    let report = run_featurecuts(&ds, &resolved.pipeline)?;
    let time_s = start.elapsed().as_secs_f64();

    let report_file = format!("{name}.report.json");
    let trace_file = format!("{name}.trace.csv");
    atomic_write(&out_dir.join(&report_file), report.to_json().as_bytes())?;
    write_trace_csv(&out_dir.join(&trace_file), &report.fss_trace)?;

    let row = BenchRow {
        dataset: name,
        method: report.config.cutoff_method.clone(),
        reduction_pct: report.reduction_pct.unwrap_or(0.0),
        test_score: report.holdout_score.map_or(f64::NAN, |s| s.value),
        time_s,
    };
    Ok((row, report_file, trace_file))
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Runs every entry (datasets run concurrently; each pipeline is
/// independent), writes per-dataset artifacts plus `summary.csv`,
/// `aggregate.csv`, and `benchmark.json` under `out_dir`, and returns
/// the summary. Per-dataset failures are recorded without stopping the
/// rest.
pub fn run_benchmark(entries: &[BenchEntry], out_dir: &Path) -> Result<BenchSummary> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let outcomes: Vec<BenchOutcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = entries
            .iter()
            .map(|entry| scope.spawn(move || run_entry(entry, out_dir)))
            .collect();
        handles
            .into_iter()
            .zip(entries)
            .map(|(handle, entry)| match handle.join() {
                Ok(Ok((row, report_file, trace_file))) => {
                    BenchOutcome::Ok { row, report_file, trace_file }
                }
                Ok(Err(e)) => BenchOutcome::Failed {
                    dataset: entry
                        .name
                        .clone()
                        .or_else(|| {
                            entry.options.input.as_ref().map(|p| {
                                p.file_stem().map_or_else(
                                    || p.display().to_string(),
                                    |s| s.to_string_lossy().into_owned(),
                                )
                            })
                        })
                        .unwrap_or_else(|| "dataset".into()),
                    error: e.to_string(),
                },
                Err(_) => BenchOutcome::Failed {
                    dataset: "dataset".into(),
                    error: "benchmark worker panicked".into(),
                },
            })
            .collect()
    });

    let rows: Vec<&BenchRow> = outcomes
        .iter()
        .filter_map(|o| match o {
            BenchOutcome::Ok { row, .. } => Some(row),
            BenchOutcome::Failed { .. } => None,
        })
        .collect();

    // summary.csv: one row per successful dataset
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        writer.serialize(row).map_err(|e| Error::csv(out_dir.join("summary.csv"), e))?;
    }
    let bytes =
        writer.into_inner().map_err(|e| Error::Config(format!("flushing summary: {e}")))?;
    atomic_write(&out_dir.join("summary.csv"), &bytes)?;

    let aggregate = if rows.is_empty() {
        None
    } else {
        let (r_mean, r_std) = mean_std(&rows.iter().map(|r| r.reduction_pct).collect::<Vec<_>>());
        let (s_mean, s_std) = mean_std(&rows.iter().map(|r| r.test_score).collect::<Vec<_>>());
        let (t_mean, t_std) = mean_std(&rows.iter().map(|r| r.time_s).collect::<Vec<_>>());
        Some(Aggregate {
            datasets: rows.len(),
            reduction_pct_mean: r_mean,
            reduction_pct_std: r_std,
            test_score_mean: s_mean,
            test_score_std: s_std,
            time_s_mean: t_mean,
            time_s_std: t_std,
        })
    };

    if let Some(agg) = &aggregate {
        let body = format!(
            "statistic,mean,std\nreduction_pct,{},{}\ntest_score,{},{}\ntime_s,{},{}\n",
            agg.reduction_pct_mean,
            agg.reduction_pct_std,
            agg.test_score_mean,
            agg.test_score_std,
            agg.time_s_mean,
            agg.time_s_std
        );
        atomic_write(&out_dir.join("aggregate.csv"), body.as_bytes())?;
    }

    let summary = BenchSummary { datasets: outcomes, aggregate };
    write_json(&out_dir.join("benchmark.json"), &summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::write_csv;
    use crate::synth;

    fn entry(input: PathBuf, seed: u64) -> BenchEntry {
        let options = OptionSet {
            input: Some(input),
            target: Some("y".into()),
            task: Some("classif".into()),
            seed: Some(seed),
            rounds: Some(10),
            depth: Some(2),
            eta: Some(0.3),
            ..OptionSet::default()
        };
        BenchEntry { name: None, options }
    }

    #[test]
    fn benchmark_aggregates_and_isolates_failures() {
        let dir = tempfile::tempdir().unwrap();
        let good1 = dir.path().join("alpha.csv");
        write_csv(&synth::informative_classification(60, 8, 2, 1), &good1).unwrap();
        let good2 = dir.path().join("beta.csv");
        write_csv(&synth::informative_classification(60, 8, 2, 2), &good2).unwrap();
        let missing = dir.path().join("missing.csv");

        let entries =
            vec![entry(good1, 1), entry(good2, 2), entry(missing, 3)];
        let out_dir = dir.path().join("out");
        let summary = run_benchmark(&entries, &out_dir).unwrap();

        let ok: Vec<&BenchRow> = summary
            .datasets
            .iter()
            .filter_map(|o| match o {
                BenchOutcome::Ok { row, .. } => Some(row),
                _ => None,
            })
            .collect();
        assert_eq!(ok.len(), 2);
        let failed = summary.datasets.iter().any(
            |o| matches!(o, BenchOutcome::Failed { dataset, .. } if dataset == "missing"),
        );
        assert!(failed, "missing dataset marked failed");

        let agg = summary.aggregate.unwrap();
        assert_eq!(agg.datasets, 2);
        let expected_mean = (ok[0].reduction_pct + ok[1].reduction_pct) / 2.0;
        assert!((agg.reduction_pct_mean - expected_mean).abs() < 1e-12);

        assert!(out_dir.join("summary.csv").exists());
        assert!(out_dir.join("aggregate.csv").exists());
        assert!(out_dir.join("benchmark.json").exists());
        assert!(out_dir.join("alpha.report.json").exists());
        assert!(out_dir.join("beta.trace.csv").exists());
    }

    #[test]
    fn single_dataset_has_zero_std() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("solo.csv");
        write_csv(&synth::informative_classification(60, 8, 2, 3), &input).unwrap();
        let out_dir = dir.path().join("out");
        let summary = run_benchmark(&[entry(input, 4)], &out_dir).unwrap();
        let agg = summary.aggregate.unwrap();
        assert_eq!(agg.reduction_pct_std, 0.0);
        assert_eq!(agg.test_score_std, 0.0);
        assert_eq!(agg.time_s_std, 0.0);
    }
}
