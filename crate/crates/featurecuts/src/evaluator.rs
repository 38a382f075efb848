//! Model evaluation: train on a feature subset, score on held-out rows.
//!
//! The built-in evaluator is the boosted-tree learner from
//! `featurecuts-core` with task-appropriate metrics (ROC AUC / macro F1 /
//! R²). An external command can stand in for it through a one-line JSON
//! stdio protocol, so any model (e.g. a real XGBoost) can drive the
//! pipeline.

use std::io::{Read, Write};
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use featurecuts_core::gbdt::{
    GbdtBinaryClassifier, GbdtMulticlassClassifier, GbdtParams, GbdtRegressor,
};
use featurecuts_core::metrics::{macro_f1, r_squared, roc_auc};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetView, FoldAssignment, TaskKind};
use crate::error::{Error, Result};

pub const DEFAULT_EXTERNAL_TIMEOUT: Duration = Duration::from_secs(600);

/// Which model evaluates feature subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EvaluatorKind {
    BuiltInBoosted,
    ExternalCommand { program: String, args: Vec<String> },
}

/// Evaluator configuration. The hyperparameters apply to the built-in
/// boosted learner; the timeout applies to external commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatorSpec {
    pub kind: EvaluatorKind,
    pub rounds: usize,
    pub depth: usize,
    pub learning_rate: f64,
    pub seed: u64,
    #[serde(with = "duration_secs")]
    pub timeout: Duration,
}

mod duration_secs {
    use super::Duration;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        d.as_secs_f64().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        f64::deserialize(d).map(Duration::from_secs_f64)
    }
}

impl Default for EvaluatorSpec {
    fn default() -> Self {
        Self {
            kind: EvaluatorKind::BuiltInBoosted,
            rounds: 100,
            depth: 3,
            learning_rate: 0.1,
            seed: 0,
            timeout: DEFAULT_EXTERNAL_TIMEOUT,
        }
    }
}

impl EvaluatorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rounds < 1 {
            return Err(Error::Config("evaluator rounds must be >= 1".into()));
        }
        if self.depth < 1 {
            return Err(Error::Config("evaluator depth must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config("learning rate must be in (0, 1]".into()));
        }
        Ok(())
    }

    fn gbdt_params(&self) -> GbdtParams {
        GbdtParams {
            rounds: self.rounds,
            depth: self.depth,
            learning_rate: self.learning_rate,
            min_leaf: 1,
        }
    }
}

/// Score type; uniquely determined by the task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    RocAuc,
    MacroF1,
    RSquared,
}

impl MetricKind {
    pub fn for_task(task: TaskKind) -> Self {
        match task {
            TaskKind::BinaryClassification => MetricKind::RocAuc,
            TaskKind::MulticlassClassification => MetricKind::MacroF1,
            TaskKind::Regression => MetricKind::RSquared,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::RocAuc => "roc_auc",
            MetricKind::MacroF1 => "macro_f1",
            MetricKind::RSquared => "r_squared",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub value: f64,
    pub metric: MetricKind,
    pub n_eval_rows: usize,
}

fn check_views(train: &DatasetView<'_>, test: &DatasetView<'_>, metric: MetricKind) -> Result<()> {
    if train.column_indices() != test.column_indices() {
        return Err(Error::Evaluator("train and test views expose different columns".into()));
    }
    if train.n_cols() == 0 {
        return Err(Error::Evaluator("empty feature subset".into()));
    }
    if train.n_rows() < 2 {
        return Err(Error::Evaluator(format!(
            "need at least 2 training rows, got {}",
            train.n_rows()
        )));
    }
    let task = train.task();
    if MetricKind::for_task(task) != metric {
        return Err(Error::MetricTaskMismatch {
            metric: metric.name().into(),
            task: task.name().into(),
        });
    }
    if task.is_classification() {
        let train_classes = train.present_classes().expect("classification");
        let test_classes = test.present_classes().expect("classification");
        if let Some(missing) = test_classes.iter().find(|c| !train_classes.contains(c)) {
            return Err(Error::Evaluator(format!(
                "class {missing} present in test but absent in train"
            )));
        }
    }
    Ok(())
}

/// Trains on `train` and scores predictions on `test` with the
/// task-appropriate metric. Deterministic for a fixed spec.
pub fn train_evaluate(
    train: &DatasetView<'_>,
    test: &DatasetView<'_>,
    spec: &EvaluatorSpec,
    metric: MetricKind,
) -> Result<ModelScore> {
    spec.validate()?;
    check_views(train, test, metric)?;
    match &spec.kind {
        EvaluatorKind::BuiltInBoosted => builtin_evaluate(train, test, spec, metric),
        EvaluatorKind::ExternalCommand { program, args } => {
            let dir = tempfile::tempdir().map_err(|e| Error::io("<tempdir>", e))?;
            let train_csv = dir.path().join("train.csv");
            let test_csv = dir.path().join("test.csv");
            crate::dataset::write_view_csv(train, &train_csv)?;
            crate::dataset::write_view_csv(test, &test_csv)?;
            let command = ExternalCommand {
                program: program.clone(),
                args: args.clone(),
                timeout: spec.timeout,
            };
            let mut score = external_evaluate(
                &train_csv,
                &test_csv,
                &command,
                train.dataset().target_name(),
                train.task(),
                metric,
            )?;
            score.n_eval_rows = test.n_rows();
            Ok(score)
        }
    }
}

fn builtin_evaluate(
    train: &DatasetView<'_>,
    test: &DatasetView<'_>,
    spec: &EvaluatorSpec,
    metric: MetricKind,
) -> Result<ModelScore> {
    let params = spec.gbdt_params();
    let train_cols = train.gather_columns();
    let test_cols = test.gather_columns();
    let value = match train.task() {
        TaskKind::BinaryClassification => {
            let labels = train.gather_labels().expect("classification");
            let model = GbdtBinaryClassifier::fit(&train_cols, &labels, &params);
            let scores = model.predict_proba(&test_cols);
            roc_auc(&scores, &test.gather_labels().expect("classification"))?
        }
        TaskKind::MulticlassClassification => {
            let labels = train.gather_labels().expect("classification");
            let n_classes = train.dataset().n_classes();
            let model = GbdtMulticlassClassifier::fit(&train_cols, &labels, n_classes, &params);
            let predicted = model.predict_classes(&test_cols);
            macro_f1(&predicted, &test.gather_labels().expect("classification"))?
        }
        TaskKind::Regression => {
            let targets = train.gather_target().expect("regression");
            let model = GbdtRegressor::fit(&train_cols, &targets, &params);
            let predicted = model.predict(&test_cols);
            r_squared(&predicted, &test.gather_target().expect("regression"))?
        }
    };
    Ok(ModelScore { value, metric, n_eval_rows: test.n_rows() })
}

/// Mean `train_evaluate` over the cross-validation folds of the train
/// partition: fold `f` validates, the other folds train. This mean is
/// the model score the FS-score consumes during cutoff search.
pub fn cv_score(
    ds: &Dataset,
    columns: &[usize],
    folds: &FoldAssignment,
    spec: &EvaluatorSpec,
) -> Result<ModelScore> {
    if columns.is_empty() {
        return Err(Error::Evaluator("empty feature subset".into()));
    }
    let metric = MetricKind::for_task(ds.task());
    let view = ds.subset(columns)?;
    let mut total = 0.0;
    let mut rows = 0usize;
    for fold in 0..folds.n_folds() {
        let train = view.with_rows(&folds.train_rows_excluding(fold));
        let test = view.with_rows(&folds.fold_rows(fold));
        let score = train_evaluate(&train, &test, spec, metric)?;
        total += score.value;
        rows += score.n_eval_rows;
    }
    Ok(ModelScore { value: total / folds.n_folds() as f64, metric, n_eval_rows: rows })
}

/// External evaluator invocation details.
#[derive(Debug, Clone)]
pub struct ExternalCommand {
    pub program: String,
    pub args: Vec<String>,
    pub timeout: Duration,
}

#[derive(Serialize)]
struct ExternalRequest<'a> {
    train_csv: &'a str,
    test_csv: &'a str,
    target: &'a str,
    task: &'a str,
    metric: &'a str,
}

#[derive(Deserialize)]
struct ExternalResponse {
    score: f64,
}

/// Runs the external-evaluator protocol: a JSON request on the child's
/// stdin, exactly one JSON line `{"score": <real>}` on its stdout.
/// Nonzero exits carry an excerpt of the child's stderr; responses with
/// zero or multiple lines are malformed.
pub fn external_evaluate(
    train_csv: &Path,
    test_csv: &Path,
    command: &ExternalCommand,
    target: &str,
    task: TaskKind,
    metric: MetricKind,
) -> Result<ModelScore> {
    let request = serde_json::to_string(&ExternalRequest {
        train_csv: &train_csv.to_string_lossy(),
        test_csv: &test_csv.to_string_lossy(),
        target,
        task: task.name(),
        metric: metric.name(),
    })
    .expect("request serializes");

    let mut child = Command::new(&command.program)
        .args(&command.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::Evaluator(format!("cannot spawn '{}': {e}", command.program)))?;

    {
        let mut stdin = child.stdin.take().expect("piped stdin");
        stdin
            .write_all(request.as_bytes())
            .and_then(|()| stdin.write_all(b"\n"))
            .map_err(|e| Error::Protocol(format!("writing request: {e}")))?;
        // dropping stdin closes the pipe so line-oriented children see EOF
    }

    let stdout_reader = spawn_pipe_reader(child.stdout.take().expect("piped stdout"));
    let stderr_reader = spawn_pipe_reader(child.stderr.take().expect("piped stderr"));

    let deadline = Instant::now() + command.timeout;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {
                if Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(Error::Timeout(command.timeout));
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(e) => return Err(Error::Evaluator(format!("waiting for evaluator: {e}"))),
        }
    };

    let stdout = stdout_reader.join().unwrap_or_default();
    let stderr = stderr_reader.join().unwrap_or_default();

    if !status.success() {
        let excerpt: String = stderr.chars().take(500).collect();
        return Err(Error::Protocol(format!(
            "evaluator exited with {status}; stderr: {}",
            excerpt.trim()
        )));
    }

    let lines: Vec<&str> = stdout.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.len() != 1 {
        return Err(Error::Protocol(format!(
            "expected exactly one JSON line on stdout, got {}",
            lines.len()
        )));
    }
    let response: ExternalResponse = serde_json::from_str(lines[0])
        .map_err(|e| Error::Protocol(format!("bad response '{}': {e}", lines[0])))?;
    if !response.score.is_finite() {
        return Err(Error::Protocol(format!("non-finite score {}", response.score)));
    }
    Ok(ModelScore { value: response.score, metric, n_eval_rows: 0 })
}

fn spawn_pipe_reader(mut pipe: impl Read + Send + 'static) -> std::thread::JoinHandle<String> {
    std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = pipe.read_to_string(&mut buf);
        buf
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Dataset, SplitPlan, Target, make_splits};
    use std::io::Write as _;
    use std::os::unix::fs::PermissionsExt;

    fn quick_spec() -> EvaluatorSpec {
        EvaluatorSpec { rounds: 40, depth: 2, learning_rate: 0.3, ..EvaluatorSpec::default() }
    }

    fn separable_dataset(n: usize, extra_noise_cols: usize) -> Dataset {
        let informative: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let values: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
        let mut columns = vec![informative];
        for c in 0..extra_noise_cols {
            columns.push((0..n).map(|i| ((i * (c + 3) * 2654435761) % 997) as f64).collect());
        }
        let names = (0..columns.len()).map(|i| format!("f{i}")).collect();
        Dataset::new(
            columns,
            names,
            "y".into(),
            Target::Labels { values, classes: vec!["neg".into(), "pos".into()] },
        )
        .unwrap()
    }

    fn regression_dataset(n: usize) -> Dataset {
        let x0: Vec<f64> = (0..n).map(|i| (i as f64) / n as f64).collect();
        let noise: Vec<f64> = (0..n).map(|i| ((i * 2654435761) % 1000) as f64 / 500.0).collect();
        let y: Vec<f64> = x0.iter().map(|&v| 4.0 * v - 1.0).collect();
        Dataset::new(
            vec![x0, noise],
            vec!["x0".into(), "noise".into()],
            "y".into(),
            Target::Continuous(y),
        )
        .unwrap()
    }

    fn split_rows(n: usize) -> (Vec<usize>, Vec<usize>) {
        let train: Vec<usize> = (0..n).filter(|i| i % 4 != 3).collect();
        let test: Vec<usize> = (0..n).filter(|i| i % 4 == 3).collect();
        (train, test)
    }

    #[test]
    fn separable_data_scores_perfect_auc() {
        let ds = separable_dataset(80, 1);
        let (train, test) = split_rows(80);
        let view = ds.view();
        let score = train_evaluate(
            &view.with_rows(&train),
            &view.with_rows(&test),
            &quick_spec(),
            MetricKind::RocAuc,
        )
        .unwrap();
        assert_eq!(score.value, 1.0);
        assert_eq!(score.n_eval_rows, test.len());
    }

    #[test]
    fn regression_on_exact_relation_reaches_high_r2() {
        let ds = regression_dataset(200);
        let (train, test) = split_rows(200);
        let view = ds.subset(&[0]).unwrap();
        let score = train_evaluate(
            &view.with_rows(&train),
            &view.with_rows(&test),
            &EvaluatorSpec::default(),
            MetricKind::RSquared,
        )
        .unwrap();
        assert!(score.value >= 0.99, "r2 = {}", score.value);
    }

    #[test]
    fn zero_features_is_an_error() {
        let ds = separable_dataset(20, 0);
        let empty = ds.subset(&[]).unwrap();
        let err = train_evaluate(&empty, &empty, &quick_spec(), MetricKind::RocAuc).unwrap_err();
        assert!(matches!(err, Error::Evaluator(_)));
    }

    #[test]
    fn class_missing_in_train_is_an_error() {
        let ds = separable_dataset(20, 0);
        let view = ds.view();
        // train rows all class 0, test rows include class 1
        let train: Vec<usize> = (0..10).collect();
        let test: Vec<usize> = (10..20).collect();
        let err = train_evaluate(
            &view.with_rows(&train),
            &view.with_rows(&test),
            &quick_spec(),
            MetricKind::RocAuc,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Evaluator(_)), "{err}");
    }

    #[test]
    fn cv_score_is_the_mean_of_per_fold_scores() {
        let ds = separable_dataset(60, 2);
        let folds =
            make_splits(&ds, &SplitPlan { holdout_fraction: 0.2, folds: 4, seed: 5 }).unwrap();
        let spec = quick_spec();
        let combined = cv_score(&ds, &[0, 1, 2], &folds, &spec).unwrap();

        let view = ds.subset(&[0, 1, 2]).unwrap();
        let mut total = 0.0;
        for fold in 0..4 {
            let fold_score = train_evaluate(
                &view.with_rows(&folds.train_rows_excluding(fold)),
                &view.with_rows(&folds.fold_rows(fold)),
                &spec,
                MetricKind::RocAuc,
            )
            .unwrap();
            total += fold_score.value;
        }
        assert!((combined.value - total / 4.0).abs() < 1e-15);
    }

    #[test]
    fn cv_score_invariant_under_column_permutation() {
        let ds = separable_dataset(60, 3);
        let folds = make_splits(&ds, &SplitPlan::default()).unwrap();
        let spec = quick_spec();
        let a = cv_score(&ds, &[0, 1, 2, 3], &folds, &spec).unwrap();
        let b = cv_score(&ds, &[3, 1, 0, 2], &folds, &spec).unwrap();
        assert!((a.value - b.value).abs() <= 1e-9);
    }

    #[test]
    fn duplicated_feature_barely_moves_the_score() {
        let n = 80;
        let ds = separable_dataset(n, 2);
        let mut columns = ds.columns().to_vec();
        columns.push(columns[0].clone());
        let names = (0..columns.len()).map(|i| format!("g{i}")).collect();
        let dup = Dataset::new(
            columns,
            names,
            "y".into(),
            Target::Labels {
                values: ds.labels().unwrap().to_vec(),
                classes: vec!["neg".into(), "pos".into()],
            },
        )
        .unwrap();
        let folds = make_splits(&ds, &SplitPlan::default()).unwrap();
        let spec = quick_spec();
        let base = cv_score(&ds, &[0, 1, 2], &folds, &spec).unwrap();
        let with_dup = cv_score(&dup, &[0, 1, 2, 3], &folds, &spec).unwrap();
        assert!((base.value - with_dup.value).abs() <= 0.02);
    }

    #[test]
    fn smallest_legal_cv_configuration_runs() {
        let ds = separable_dataset(8, 0);
        // 2 folds over 4 train rows, 2 per class
        let plan = SplitPlan { holdout_fraction: 0.5, folds: 2, seed: 0 };
        let folds = make_splits(&ds, &plan).unwrap();
        let score = cv_score(&ds, &[0], &folds, &quick_spec()).unwrap();
        assert!((0.0..=1.0).contains(&score.value));
    }

    #[test]
    fn builtin_is_deterministic() {
        let ds = separable_dataset(60, 3);
        let folds = make_splits(&ds, &SplitPlan::default()).unwrap();
        let a = cv_score(&ds, &[0, 1, 2, 3], &folds, &quick_spec()).unwrap();
        let b = cv_score(&ds, &[0, 1, 2, 3], &folds, &quick_spec()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    // -- external evaluator protocol ------------------------------------

    fn stub_script(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "#!/bin/sh").unwrap();
        f.write_all(body.as_bytes()).unwrap();
        drop(f);
        std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
        path.to_string_lossy().into_owned()
    }

    fn external_spec(program: String) -> EvaluatorSpec {
        EvaluatorSpec {
            kind: EvaluatorKind::ExternalCommand { program, args: vec![] },
            timeout: Duration::from_secs(10),
            ..EvaluatorSpec::default()
        }
    }

    #[test]
    fn external_stub_echoes_score() {
        let dir = tempfile::tempdir().unwrap();
        let program = stub_script(&dir, "ok.sh", "cat > /dev/null\nprintf '{\"score\": 0.5}\\n'\n");
        let ds = separable_dataset(20, 0);
        let (train, test) = split_rows(20);
        let view = ds.view();
        let score = train_evaluate(
            &view.with_rows(&train),
            &view.with_rows(&test),
            &external_spec(program),
            MetricKind::RocAuc,
        )
        .unwrap();
        assert_eq!(score.value, 0.5);
    }

    #[test]
    fn external_nonzero_exit_carries_stderr() {
        let dir = tempfile::tempdir().unwrap();
        let program =
            stub_script(&dir, "fail.sh", "cat > /dev/null\necho 'model exploded' >&2\nexit 1\n");
        let ds = separable_dataset(20, 0);
        let (train, test) = split_rows(20);
        let view = ds.view();
        let err = train_evaluate(
            &view.with_rows(&train),
            &view.with_rows(&test),
            &external_spec(program),
            MetricKind::RocAuc,
        )
        .unwrap_err();
        match err {
            Error::Protocol(msg) => assert!(msg.contains("model exploded"), "{msg}"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn external_two_lines_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let program = stub_script(
            &dir,
            "two.sh",
            "cat > /dev/null\nprintf '{\"score\": 0.5}\\n{\"score\": 0.6}\\n'\n",
        );
        let ds = separable_dataset(20, 0);
        let (train, test) = split_rows(20);
        let view = ds.view();
        let err = train_evaluate(
            &view.with_rows(&train),
            &view.with_rows(&test),
            &external_spec(program),
            MetricKind::RocAuc,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Protocol(_)), "{err}");
    }

    #[test]
    fn external_request_reaches_the_child() {
        // stub validates the request shape before answering
        let dir = tempfile::tempdir().unwrap();
        let program = stub_script(
            &dir,
            "check.sh",
            r#"req=$(cat)
case "$req" in
  *'"train_csv"'*'"test_csv"'*'"target":"y"'*'"task":"binary_classification"'*'"metric":"roc_auc"'*)
    printf '{"score": 0.75}\n' ;;
  *) echo "bad request: $req" >&2; exit 1 ;;
esac
"#,
        );
        let ds = separable_dataset(20, 0);
        let (train, test) = split_rows(20);
        let view = ds.view();
        let score = train_evaluate(
            &view.with_rows(&train),
            &view.with_rows(&test),
            &external_spec(program),
            MetricKind::RocAuc,
        )
        .unwrap();
        assert_eq!(score.value, 0.75);
    }

    #[test]
    fn external_timeout_kills_the_child() {
        let dir = tempfile::tempdir().unwrap();
        let program = stub_script(&dir, "hang.sh", "cat > /dev/null\nsleep 30\n");
        let mut spec = external_spec(program);
        spec.timeout = Duration::from_millis(200);
        let ds = separable_dataset(20, 0);
        let (train, test) = split_rows(20);
        let view = ds.view();
        let err = train_evaluate(
            &view.with_rows(&train),
            &view.with_rows(&test),
            &spec,
            MetricKind::RocAuc,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Timeout(_)), "{err}");
    }
}
