//! Tabular datasets: CSV ingestion, hold-out/fold splitting, and
//! column-subset views.
//!
//! A [`Dataset`] is immutable after construction and holds its feature
//! matrix column-major. Classification labels are encoded `0..C-1` in
//! first-appearance order; the original label text is kept so a dataset
//! written back to CSV reloads identically.

use std::path::Path;

use rand::SeedableRng;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The learning task, as discovered at ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskKind {
    BinaryClassification,
    MulticlassClassification,
    Regression,
}

impl TaskKind {
    pub fn is_classification(self) -> bool {
        !matches!(self, TaskKind::Regression)
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::BinaryClassification => "binary_classification",
            TaskKind::MulticlassClassification => "multiclass_classification",
            TaskKind::Regression => "regression",
        }
    }
}

/// What the caller asks for at load time; binary vs multiclass is
/// discovered from the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskRequest {
    Classification,
    Regression,
}

/// Target vector: encoded class labels (with their original text) or a
/// continuous response.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Labels { values: Vec<usize>, classes: Vec<String> },
    Continuous(Vec<f64>),
}

impl Target {
    fn len(&self) -> usize {
        match self {
            Target::Labels { values, .. } => values.len(),
            Target::Continuous(values) => values.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    names: Vec<String>,
    target_name: String,
    target: Target,
}

impl Dataset {
    /// Builds a dataset from parts, enforcing every structural
    /// invariant: at least 2 rows and 1 feature, distinct names, finite
    /// values, and densely encoded labels with at least 2 classes.
    pub fn new(
        columns: Vec<Vec<f64>>,
        names: Vec<String>,
        target_name: String,
        target: Target,
    ) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        let n_rows = target.len();
        if n_rows < 2 {
            return Err(Error::InvalidDataset(format!("need at least 2 rows, got {n_rows}")));
        }
        if names.len() != columns.len() {
            return Err(Error::InvalidDataset(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidDataset(format!("duplicate feature name '{name}'")));
            }
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n_rows {
                return Err(Error::InvalidDataset(format!(
                    "column '{name}' has {} rows, expected {n_rows}",
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "column '{name}' has a non-finite value at row {i}"
                )));
            }
        }
        match &target {
            Target::Labels { values, classes } => {
                if classes.len() < 2 {
                    return Err(Error::InvalidDataset(format!(
                        "classification target has {} class(es); need at least 2",
                        classes.len()
                    )));
                }
                let mut present = vec![false; classes.len()];
                for &v in values {
                    if v >= classes.len() {
                        return Err(Error::InvalidDataset(format!(
                            "label {v} out of range for {} classes",
                            classes.len()
                        )));
                    }
                    present[v] = true;
                }
                if let Some(c) = present.iter().position(|&p| !p) {
                    return Err(Error::InvalidDataset(format!(
                        "class '{}' has no rows",
                        classes[c]
                    )));
                }
            }
            Target::Continuous(values) => {
                if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                    return Err(Error::InvalidDataset(format!(
                        "target has a non-finite value at row {i}"
                    )));
                }
            }
        }
        Ok(Self { columns, names, target_name, target })
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn task(&self) -> TaskKind {
        match &self.target {
            Target::Labels { classes, .. } if classes.len() == 2 => TaskKind::BinaryClassification,
            Target::Labels { .. } => TaskKind::MulticlassClassification,
            Target::Continuous(_) => TaskKind::Regression,
        }
    }

    pub fn labels(&self) -> Option<&[usize]> {
        match &self.target {
            Target::Labels { values, .. } => Some(values),
            Target::Continuous(_) => None,
        }
    }

    pub fn n_classes(&self) -> usize {
        match &self.target {
            Target::Labels { classes, .. } => classes.len(),
            Target::Continuous(_) => 0,
        }
    }

    pub fn class_names(&self) -> Option<&[String]> {
        match &self.target {
            Target::Labels { classes, .. } => Some(classes),
            Target::Continuous(_) => None,
        }
    }

    pub fn continuous_target(&self) -> Option<&[f64]> {
        match &self.target {
            Target::Continuous(values) => Some(values),
            Target::Labels { .. } => None,
        }
    }

    /// View over all columns and rows.
    pub fn view(&self) -> DatasetView<'_> {
        DatasetView { ds: self, columns: (0..self.n_features()).collect(), rows: None }
    }

    /// View exposing only the listed columns, in the listed order.
    /// Indices must be distinct and in range; the target is unchanged.
    pub fn subset(&self, columns: &[usize]) -> Result<DatasetView<'_>> {
        let mut seen = vec![false; self.n_features()];
        for &c in columns {
            if c >= self.n_features() {
                return Err(Error::Subset(format!(
                    "column index {c} out of range for {} features",
                    self.n_features()
                )));
            }
            if seen[c] {
                return Err(Error::Subset(format!("duplicate column index {c}")));
            }
            seen[c] = true;
        }
        Ok(DatasetView { ds: self, columns: columns.to_vec(), rows: None })
    }
}

/// A column (and optionally row) subset of a dataset. No feature data is
/// copied until a matrix is gathered for training.
#[derive(Debug, Clone)]
pub struct DatasetView<'a> {
    ds: &'a Dataset,
    columns: Vec<usize>,
    rows: Option<Vec<usize>>,
}

impl<'a> DatasetView<'a> {
    /// Narrows the view to the given rows (indices into the underlying
    /// dataset).
    pub fn with_rows(&self, rows: &[usize]) -> DatasetView<'a> {
        DatasetView { ds: self.ds, columns: self.columns.clone(), rows: Some(rows.to_vec()) }
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.ds
    }

    pub fn n_rows(&self) -> usize {
        self.rows.as_ref().map_or(self.ds.n_rows(), Vec::len)
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    /// Original column indices behind this view, in view order.
    pub fn column_indices(&self) -> &[usize] {
        &self.columns
    }

    pub fn task(&self) -> TaskKind {
        self.ds.task()
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        let r = self.rows.as_ref().map_or(row, |rows| rows[row]);
        self.ds.columns[self.columns[col]][r]
    }

    /// Materializes the viewed matrix column-major.
    pub fn gather_columns(&self) -> Vec<Vec<f64>> {
        self.columns
            .iter()
            .map(|&c| {
                let col = &self.ds.columns[c];
                match &self.rows {
                    Some(rows) => rows.iter().map(|&r| col[r]).collect(),
                    None => col.clone(),
                }
            })
            .collect()
    }

    pub fn gather_labels(&self) -> Option<Vec<usize>> {
        let labels = self.ds.labels()?;
        Some(match &self.rows {
            Some(rows) => rows.iter().map(|&r| labels[r]).collect(),
            None => labels.to_vec(),
        })
    }

    pub fn gather_target(&self) -> Option<Vec<f64>> {
        let values = self.ds.continuous_target()?;
        Some(match &self.rows {
            Some(rows) => rows.iter().map(|&r| values[r]).collect(),
            None => values.to_vec(),
        })
    }

    /// Labels present in this view's rows.
    pub fn present_classes(&self) -> Option<Vec<usize>> {
        let mut classes = self.gather_labels()?;
        classes.sort_unstable();
        classes.dedup();
        Some(classes)
    }
}

/// How to split a dataset into a hold-out partition and training folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub holdout_fraction: f64,
    pub folds: usize,
    pub seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self { holdout_fraction: 0.2, folds: 5, seed: 0 }
    }
}

/// Row-level outcome of [`make_splits`]: every row is either in the
/// hold-out partition or in exactly one cross-validation fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldAssignment {
    n_folds: usize,
    fold_of_row: Vec<Option<u32>>,
    holdout: Vec<usize>,
}

impl FoldAssignment {
    pub fn n_folds(&self) -> usize {
        self.n_folds
    }

    pub fn holdout_rows(&self) -> &[usize] {
        &self.holdout
    }

    /// Fold index of a row; `None` for hold-out rows.
    pub fn fold_of_row(&self, row: usize) -> Option<usize> {
        self.fold_of_row[row].map(|f| f as usize)
    }

    /// All train-partition rows, ascending.
    pub fn train_rows(&self) -> Vec<usize> {
        (0..self.fold_of_row.len()).filter(|&r| self.fold_of_row[r].is_some()).collect()
    }

    pub fn fold_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of_row.len())
            .filter(|&r| self.fold_of_row[r] == Some(fold as u32))
            .collect()
    }

    /// Train-partition rows outside the given fold: the training set
    /// when that fold validates.
    pub fn train_rows_excluding(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of_row.len())
            .filter(|&r| {
                self.fold_of_row[r].is_some_and(|f| f as usize != fold)
            })
            .collect()
    }
}

fn holdout_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64) + 0.5).floor() as usize
}

/// Splits a dataset into a hold-out partition plus `folds`
/// cross-validation folds over the remaining rows.
///
/// Classification rows are stratified: each class is shuffled, donates
/// its share of hold-out rows, and deals the rest round-robin into
/// folds (the deal continues across classes, keeping overall fold sizes
/// within one of each other). Regression uses a plain shuffled split.
/// Deterministic for a fixed `(dataset, plan)`.
pub fn make_splits(ds: &Dataset, plan: &SplitPlan) -> Result<FoldAssignment> {
    if !(plan.holdout_fraction > 0.0 && plan.holdout_fraction < 1.0) {
        return Err(Error::Split(format!(
            "holdout fraction must be in (0, 1), got {}",
            plan.holdout_fraction
        )));
    }
    if plan.folds < 2 {
        return Err(Error::Split(format!("need at least 2 folds, got {}", plan.folds)));
    }

    let n = ds.n_rows();
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut fold_of_row: Vec<Option<u32>> = vec![None; n];
    let mut holdout = Vec::new();
    let mut slot = 0usize;

    match ds.labels() {
        Some(labels) => {
            for class in 0..ds.n_classes() {
                let mut members: Vec<usize> =
                    (0..n).filter(|&r| labels[r] == class).collect();
                members.shuffle(&mut rng);
                let h = holdout_count(plan.holdout_fraction, members.len());
                if members.len() - h < plan.folds {
                    return Err(Error::Split(format!(
                        "class '{}' has {} train rows after hold-out; need at least {}",
                        ds.class_names().expect("classification")[class],
                        members.len() - h,
                        plan.folds
                    )));
                }
                for (i, &row) in members.iter().enumerate() {
                    if i < h {
                        holdout.push(row);
                    } else {
                        fold_of_row[row] = Some((slot % plan.folds) as u32);
                        slot += 1;
                    }
                }
            }
        }
        None => {
            let mut rows: Vec<usize> = (0..n).collect();
            rows.shuffle(&mut rng);
            let h = holdout_count(plan.holdout_fraction, n);
            if n - h < plan.folds {
                return Err(Error::Split(format!(
                    "{} train rows after hold-out; need at least {}",
                    n - h,
                    plan.folds
                )));
            }
            for (i, &row) in rows.iter().enumerate() {
                if i < h {
                    holdout.push(row);
                } else {
                    fold_of_row[row] = Some((slot % plan.folds) as u32);
                    slot += 1;
                }
            }
        }
    }

    if holdout.is_empty() || holdout.len() == n {
        return Err(Error::Split(format!(
            "degenerate hold-out: {} of {} rows",
            holdout.len(),
            n
        )));
    }
    holdout.sort_unstable();
    Ok(FoldAssignment { n_folds: plan.folds, fold_of_row, holdout })
}

/// Ingestion options for [`load_csv`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadOptions {
    pub target_column: String,
    pub task: TaskRequest,
    /// Identifier column to drop before ingestion.
    pub id_column: Option<String>,
    /// Replace unparseable or non-finite feature cells with the column
    /// mean instead of rejecting the file.
    pub impute_mean: bool,
    /// Uniformly subsample (without replacement) to at most this many
    /// rows, keeping file order.
    pub sample_rows: Option<usize>,
    pub seed: u64,
}

impl LoadOptions {
    pub fn new(target_column: impl Into<String>, task: TaskRequest) -> Self {
        Self {
            target_column: target_column.into(),
            task,
            id_column: None,
            impute_mean: false,
            sample_rows: None,
            seed: 0,
        }
    }
}

/// Loads an RFC-4180-style CSV with a header row. All non-target,
/// non-id columns must parse as finite reals (unless mean imputation is
/// enabled); classification labels are any cell text, encoded in
/// first-appearance order. Row numbers in errors count the header as
/// row 1.
pub fn load_csv(path: &Path, options: &LoadOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();

    let target_idx = headers
        .iter()
        .position(|h| h == options.target_column)
        .ok_or_else(|| Error::MissingTargetColumn(options.target_column.clone()))?;
    let id_idx = match &options.id_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Config(format!("id column '{name}' not found in header")))?,
        ),
        None => None,
    };
    if id_idx == Some(target_idx) {
        return Err(Error::Config("id column and target column are the same".into()));
    }

    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| i != target_idx && Some(i) != id_idx)
        .collect();
    let names: Vec<String> = feature_cols.iter().map(|&i| headers[i].to_string()).collect();
    if names.is_empty() {
        return Err(Error::InvalidDataset("no feature columns".into()));
    }

    // Cells are parsed permissively into Option<f64>; `None` is a
    // missing/bad cell to be imputed or rejected below.
    let mut cells: Vec<Vec<Option<f64>>> = vec![Vec::new(); feature_cols.len()];
    let mut raw_targets: Vec<String> = Vec::new();
    for (rec_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let file_row = rec_idx + 2; // header is row 1
        for (j, &col) in feature_cols.iter().enumerate() {
            let text = record.get(col).unwrap_or("").trim();
            let parsed = text.parse::<f64>().ok().filter(|v| v.is_finite());
            if parsed.is_none() && !options.impute_mean {
                return Err(Error::Ingest {
                    row: file_row,
                    column: names[j].clone(),
                    message: format!("cannot parse '{text}' as a finite number"),
                });
            }
            cells[j].push(parsed);
        }
        raw_targets.push(record.get(target_idx).unwrap_or("").trim().to_string());
    }

    let n_rows = raw_targets.len();
    if n_rows < 2 {
        return Err(Error::InvalidDataset(format!("need at least 2 rows, got {n_rows}")));
    }

    // Optional uniform row subsample, keeping file order.
    let keep: Vec<usize> = match options.sample_rows {
        Some(m) if m < n_rows => {
            if m < 2 {
                return Err(Error::Config(format!("--sample-rows must be >= 2, got {m}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            let mut picked = rand::seq::index::sample(&mut rng, n_rows, m).into_vec();
            picked.sort_unstable();
            picked
        }
        _ => (0..n_rows).collect(),
    };

    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(cells.len());
    for (j, col) in cells.iter().enumerate() {
        let taken: Vec<Option<f64>> = keep.iter().map(|&r| col[r]).collect();
        let present: Vec<f64> = taken.iter().flatten().copied().collect();
        if present.len() < taken.len() {
            if present.is_empty() {
                return Err(Error::Ingest {
                    row: 0,
                    column: names[j].clone(),
                    message: "no parseable values to impute from".into(),
                });
            }
            let mean = present.iter().sum::<f64>() / present.len() as f64;
            columns.push(taken.into_iter().map(|v| v.unwrap_or(mean)).collect());
        } else {
            columns.push(taken.into_iter().flatten().collect());
        }
    }

    let target = match options.task {
        TaskRequest::Classification => {
            let mut classes: Vec<String> = Vec::new();
            let mut values = Vec::with_capacity(keep.len());
            for &r in &keep {
                let text = &raw_targets[r];
                let code = match classes.iter().position(|c| c == text) {
                    Some(c) => c,
                    None => {
                        classes.push(text.clone());
                        classes.len() - 1
                    }
                };
                values.push(code);
            }
            if classes.len() < 2 {
                return Err(Error::InvalidDataset(format!(
                    "classification target '{}' has a single class '{}'",
                    options.target_column, classes[0]
                )));
            }
            Target::Labels { values, classes }
        }
        TaskRequest::Regression => {
            let mut values = Vec::with_capacity(keep.len());
            for &r in &keep {
                let v = raw_targets[r].parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(
                    || Error::Ingest {
                        row: r + 2,
                        column: options.target_column.clone(),
                        message: format!("cannot parse '{}' as a finite number", raw_targets[r]),
                    },
                )?;
                values.push(v);
            }
            Target::Continuous(values)
        }
    };

    Dataset::new(columns, names, options.target_column.clone(), target)
}

/// Writes a dataset back to CSV: feature columns in order, then the
/// target column (original label text for classification).
pub fn write_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    write_rows(&mut writer, &ds.view(), path)?;
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Writes a view (used for the external-evaluator hand-off): the viewed
/// columns in view order, then the target.
pub fn write_view_csv(view: &DatasetView<'_>, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    write_rows(&mut writer, view, path)?;
    writer.flush().map_err(|e| Error::io(path, e))
}

fn write_rows(
    writer: &mut csv::Writer<std::fs::File>,
    view: &DatasetView<'_>,
    path: &Path,
) -> Result<()> {
    let ds = view.dataset();
    let mut header: Vec<&str> =
        view.column_indices().iter().map(|&c| ds.feature_names()[c].as_str()).collect();
    header.push(ds.target_name());
    writer.write_record(&header).map_err(|e| Error::csv(path, e))?;

    let labels = view.gather_labels();
    let continuous = view.gather_target();
    for row in 0..view.n_rows() {
        // `{}` on f64 is shortest-round-trip, so reloads are exact
        let mut record: Vec<String> =
            (0..view.n_cols()).map(|col| view.value(row, col).to_string()).collect();
        match (&labels, &continuous) {
            (Some(labels), _) => {
                record.push(ds.class_names().expect("classification")[labels[row]].clone());
            }
            (None, Some(values)) => record.push(values[row].to_string()),
            (None, None) => unreachable!("target is labels or continuous"),
        }
        writer.write_record(&record).map_err(|e| Error::csv(path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn toy_csv(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    fn classif_options(target: &str) -> LoadOptions {
        LoadOptions::new(target, TaskRequest::Classification)
    }

    #[test]
    fn load_encodes_labels_in_first_appearance_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = toy_csv(&dir, "t.csv", "a,b,label\n1,4,x\n2,5,y\n3,6,x\n");
        let ds = load_csv(&path, &classif_options("label")).unwrap();
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.n_classes(), 2);
        assert_eq!(ds.class_names().unwrap(), ["x", "y"]);
        assert_eq!(ds.labels().unwrap(), &[0, 1, 0]);
        assert_eq!(ds.task(), TaskKind::BinaryClassification);
        assert_eq!(ds.columns()[1], vec![4.0, 5.0, 6.0]);
    }

    #[test]
    fn load_accepts_constant_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = toy_csv(&dir, "t.csv", "a,b,label\n1,5.0,x\n2,5.0,y\n3,5.0,x\n");
        let ds = load_csv(&path, &classif_options("label")).unwrap();
        assert_eq!(ds.columns()[1], vec![5.0, 5.0, 5.0]);
        let score = featurecuts_core::stats::variance_score(&ds.columns()[1]).unwrap();
        assert_eq!(score, 0.0);
    }

    #[test]
    fn load_rejects_non_numeric_cell_naming_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = toy_csv(&dir, "t.csv", "a,b,label\n1,4,x\n2,abc,y\n3,6,x\n");
        let err = load_csv(&path, &classif_options("label")).unwrap_err();
        match err {
            Error::Ingest { row, column, .. } => {
                assert_eq!(row, 3); // header is row 1
                assert_eq!(column, "b");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn load_imputes_column_mean_when_enabled() {
        let dir = tempfile::tempdir().unwrap();
        let path = toy_csv(&dir, "t.csv", "a,b,label\n1,4,x\n2,,y\n3,6,x\n");
        let mut options = classif_options("label");
        options.impute_mean = true;
        let ds = load_csv(&path, &options).unwrap();
        assert_eq!(ds.columns()[1], vec![4.0, 5.0, 6.0]);
    }

    #[test]
    fn load_rejects_single_class_and_missing_target() {
        let dir = tempfile::tempdir().unwrap();
        let path = toy_csv(&dir, "t.csv", "a,label\n1,x\n2,x\n");
        assert!(matches!(
            load_csv(&path, &classif_options("label")),
            Err(Error::InvalidDataset(_))
        ));
        assert!(matches!(
            load_csv(&path, &classif_options("nope")),
            Err(Error::MissingTargetColumn(_))
        ));
    }

    #[test]
    fn load_drops_id_column_and_samples_rows() {
        let dir = tempfile::tempdir().unwrap();
        let mut body = String::from("id,a,label\n");
        for i in 0..50 {
            body.push_str(&format!("{i},{},{}\n", i as f64 * 0.1, if i % 2 == 0 { "p" } else { "q" }));
        }
        let path = toy_csv(&dir, "t.csv", &body);
        let mut options = classif_options("label");
        options.id_column = Some("id".into());
        options.sample_rows = Some(20);
        options.seed = 9;
        let ds = load_csv(&path, &options).unwrap();
        assert_eq!(ds.n_features(), 1);
        assert_eq!(ds.n_rows(), 20);
        let again = load_csv(&path, &options).unwrap();
        assert_eq!(ds, again, "sampling is deterministic");
    }

    #[test]
    fn csv_round_trip_preserves_the_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let cols = vec![
            vec![0.1, -2.5, 3.25, 1e-7, 123456.789],
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
        ];
        let target = Target::Labels {
            values: vec![1, 0, 1, 0, 1],
            classes: vec!["yes".into(), "no".into()],
        };
        let ds = Dataset::new(cols, vec!["f0".into(), "f1".into()], "y".into(), target).unwrap();
        let path = dir.path().join("rt.csv");
        write_csv(&ds, &path).unwrap();
        let reloaded = load_csv(&path, &classif_options("y")).unwrap();
        assert_eq!(reloaded.feature_names(), ds.feature_names());
        assert_eq!(reloaded.labels(), ds.labels());
        assert_eq!(reloaded.class_names(), ds.class_names());
        for (a, b) in ds.columns().iter().zip(reloaded.columns()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    fn two_class_dataset(per_class: usize) -> Dataset {
        let n = per_class * 2;
        let col: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let values: Vec<usize> = (0..n).map(|i| i % 2).collect();
        Dataset::new(
            vec![col],
            vec!["f0".into()],
            "y".into(),
            Target::Labels { values, classes: vec!["a".into(), "b".into()] },
        )
        .unwrap()
    }

    #[test]
    fn stratified_split_matches_exact_counting() {
        // 100 rows, 50/50 classes, holdout 0.2, 5 folds:
        // 10 of each class held out, 8 of each class per fold.
        let ds = two_class_dataset(50);
        let plan = SplitPlan { holdout_fraction: 0.2, folds: 5, seed: 42 };
        let fa = make_splits(&ds, &plan).unwrap();
        let labels = ds.labels().unwrap();

        let holdout_per_class = [0, 1].map(|c| {
            fa.holdout_rows().iter().filter(|&&r| labels[r] == c).count()
        });
        assert_eq!(holdout_per_class, [10, 10]);
        for fold in 0..5 {
            let rows = fa.fold_rows(fold);
            for c in 0..2 {
                assert_eq!(rows.iter().filter(|&&r| labels[r] == c).count(), 8);
            }
        }
    }

    #[test]
    fn splits_are_deterministic_and_partition_rows() {
        let ds = two_class_dataset(30);
        let plan = SplitPlan { holdout_fraction: 0.25, folds: 4, seed: 7 };
        let a = make_splits(&ds, &plan).unwrap();
        let b = make_splits(&ds, &plan).unwrap();
        assert_eq!(a, b);

        let mut all: Vec<usize> = a.holdout_rows().to_vec();
        for fold in 0..4 {
            all.extend(a.fold_rows(fold));
        }
        all.sort_unstable();
        assert_eq!(all, (0..ds.n_rows()).collect::<Vec<_>>());
        // train_rows_excluding ∪ fold_rows = train partition
        let mut train = a.fold_rows(2);
        train.extend(a.train_rows_excluding(2));
        train.sort_unstable();
        assert_eq!(train, a.train_rows());
    }

    #[test]
    fn split_rejects_class_smaller_than_folds() {
        // 6 rows of one class with 7 folds cannot stratify.
        let values = vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1];
        let col: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
        let ds = Dataset::new(
            vec![col],
            vec!["f0".into()],
            "y".into(),
            Target::Labels { values, classes: vec!["a".into(), "b".into()] },
        )
        .unwrap();
        let plan = SplitPlan { holdout_fraction: 0.2, folds: 7, seed: 0 };
        assert!(matches!(make_splits(&ds, &plan), Err(Error::Split(_))));
    }

    #[test]
    fn regression_split_is_plain_shuffle() {
        let n = 40;
        let ds = Dataset::new(
            vec![(0..n).map(|i| i as f64).collect()],
            vec!["f0".into()],
            "y".into(),
            Target::Continuous((0..n).map(|i| i as f64 * 0.5).collect()),
        )
        .unwrap();
        let fa = make_splits(&ds, &SplitPlan { holdout_fraction: 0.2, folds: 4, seed: 3 }).unwrap();
        assert_eq!(fa.holdout_rows().len(), 8);
        let sizes: Vec<usize> = (0..4).map(|f| fa.fold_rows(f).len()).collect();
        assert_eq!(sizes.iter().sum::<usize>(), 32);
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn subset_views_behave_like_slices() {
        let ds = Dataset::new(
            vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            vec!["a".into(), "b".into(), "c".into()],
            "y".into(),
            Target::Labels { values: vec![0, 1], classes: vec!["n".into(), "p".into()] },
        )
        .unwrap();

        let full = ds.subset(&[0, 1, 2]).unwrap();
        assert_eq!(full.gather_columns(), ds.columns());

        let permuted = ds.subset(&[2, 0]).unwrap();
        assert_eq!(permuted.gather_columns()[0], ds.columns()[2]);
        assert_eq!(permuted.gather_columns()[1], ds.columns()[0]);
        assert_eq!(permuted.gather_labels().unwrap(), vec![0, 1]);

        assert!(matches!(ds.subset(&[3]), Err(Error::Subset(_))));
        assert!(matches!(ds.subset(&[1, 1]), Err(Error::Subset(_))));
    }

    #[test]
    fn fold_class_counts_stay_within_one_of_proportional_share() {
        // unbalanced classes: 37 / 23
        let values: Vec<usize> = (0..60).map(|i| usize::from(i % 60 >= 37)).collect();
        let col: Vec<f64> = (0..60).map(|i| (i * 13 % 61) as f64).collect();
        let ds = Dataset::new(
            vec![col],
            vec!["f0".into()],
            "y".into(),
            Target::Labels { values, classes: vec!["a".into(), "b".into()] },
        )
        .unwrap();
        let plan = SplitPlan { holdout_fraction: 0.15, folds: 4, seed: 11 };
        let fa = make_splits(&ds, &plan).unwrap();
        let labels = ds.labels().unwrap();
        for c in 0..2 {
            let total = fa
                .train_rows()
                .iter()
                .filter(|&&r| labels[r] == c)
                .count() as f64;
            for fold in 0..4 {
                let count =
                    fa.fold_rows(fold).iter().filter(|&&r| labels[r] == c).count() as f64;
                assert!(
                    (count - total / 4.0).abs() <= 1.0,
                    "fold {fold} class {c}: {count} vs share {}",
                    total / 4.0
                );
            }
        }
        // overall fold sizes also stay within one
        let sizes: Vec<usize> = (0..4).map(|f| fa.fold_rows(f).len()).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }
}
