//! Machine-readable outputs: report JSON, trace CSV, ranking JSON, and
//! tidy plot data. All writes are atomic (temp file + rename).

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cutoff::TraceRow;
use crate::error::{Error, Result};
use crate::rank::FeatureRanking;

/// Version of the report JSON layout.
pub const REPORT_SCHEMA: u32 = 1;

/// Writes bytes atomically: a unique sibling temp file, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    use std::io::Write;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serializing {}: {e}", path.display())))?;
    body.push('\n');
    atomic_write(path, body.as_bytes())
}

pub fn write_ranking_json(path: &Path, ranking: &FeatureRanking) -> Result<()> {
    #[derive(Serialize)]
    struct RankingOut<'a> {
        metric: &'a str,
        order: &'a [usize],
        scores: &'a [f64],
    }
    write_json(
        path,
        &RankingOut { metric: ranking.metric.name(), order: &ranking.order, scores: &ranking.scores },
    )
}

/// Trace CSV columns: method, k, fss, model_score, reduction_pct,
/// eval_index.
pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(|e| Error::csv(path, e))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Config(format!("flushing trace CSV: {e}")))?;
    atomic_write(path, &bytes)
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        rows.push(record.map_err(|e| Error::csv(path, e))?);
    }
    if rows.is_empty() {
        return Err(Error::Config(format!("trace file {} has no rows", path.display())));
    }
    Ok(rows)
}

/// One line of Fig-2-style plot data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRow {
    pub dataset: String,
    pub method: String,
    pub k: usize,
    pub fss: f64,
}

/// Merges trace files into long-format plot data, one row per
/// evaluation, sorted by (dataset, method, k). The dataset name is the
/// trace file's stem.
pub fn plot_data(traces: &[PathBuf]) -> Result<Vec<PlotRow>> {
    let mut rows = Vec::new();
    for path in traces {
        let dataset = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::Config(format!("cannot name dataset from {}", path.display())))?;
        for row in read_trace_csv(path)? {
            rows.push(PlotRow { dataset: dataset.clone(), method: row.method, k: row.k, fss: row.fss });
        }
    }
    rows.sort_by(|a, b| {
        a.dataset.cmp(&b.dataset).then(a.method.cmp(&b.method)).then(a.k.cmp(&b.k))
    });
    Ok(rows)
}

pub fn write_plot_csv(path: &Path, rows: &[PlotRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(|e| Error::csv(path, e))?;
    }
    let bytes =
        writer.into_inner().map_err(|e| Error::Config(format!("flushing plot CSV: {e}")))?;
    atomic_write(path, &bytes)
}
