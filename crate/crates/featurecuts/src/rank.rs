//! Stage one: score every feature independently against the target and
//! sort by descending score.

use featurecuts_core::stats::{
    MiTarget, abs_correlation, f_value_classif, f_value_regress, mutual_information,
    variance_score,
};
use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetView, TaskKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMetric {
    FValueClassif,
    FValueRegress,
    MutualInformation,
    Variance,
    AbsPearsonCorrelation,
}

impl FilterMetric {
    /// The paper-preferred default: the task-appropriate F-value.
    pub fn default_for(task: TaskKind) -> Self {
        if task.is_classification() {
            FilterMetric::FValueClassif
        } else {
            FilterMetric::FValueRegress
        }
    }

    /// Resolves a CLI metric name; `f_value` picks the task-appropriate
    /// variant.
    pub fn from_cli_name(name: &str, task: TaskKind) -> Result<Self> {
        match name {
            "f_value" => Ok(Self::default_for(task)),
            "mi" => Ok(FilterMetric::MutualInformation),
            "variance" => Ok(FilterMetric::Variance),
            "correlation" => Ok(FilterMetric::AbsPearsonCorrelation),
            other => Err(Error::Config(format!(
                "unknown metric '{other}' (expected f_value|mi|variance|correlation)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FilterMetric::FValueClassif => "f_value_classif",
            FilterMetric::FValueRegress => "f_value_regress",
            FilterMetric::MutualInformation => "mutual_information",
            FilterMetric::Variance => "variance",
            FilterMetric::AbsPearsonCorrelation => "abs_correlation",
        }
    }

    pub fn check_task(self, task: TaskKind) -> Result<()> {
        let ok = match self {
            FilterMetric::FValueClassif => task.is_classification(),
            FilterMetric::FValueRegress => task == TaskKind::Regression,
            // MI bins regression targets; variance and correlation are
            // target-agnostic
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::MetricTaskMismatch {
                metric: self.name().into(),
                task: task.name().into(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOptions {
    /// Equal-frequency bin count for the mutual-information estimator.
    pub mi_bins: usize,
}

impl Default for RankOptions {
    fn default() -> Self {
        Self { mi_bins: 10 }
    }
}

/// Features sorted by descending filter score. `scores[i]` is the score
/// of column `i` (view order); `order` is the ranked permutation, ties
/// broken by ascending column index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub metric: FilterMetric,
    pub order: Vec<usize>,
    pub scores: Vec<f64>,
}

impl FeatureRanking {
    pub fn n_features(&self) -> usize {
        self.order.len()
    }

    /// The ranked column indices of the top `k` features.
    pub fn top(&self, k: usize) -> &[usize] {
        &self.order[..k]
    }
}

/// Scores every column of the view independently and ranks them. Uses
/// exactly one metric evaluation per column; deterministic.
pub fn rank_features(
    view: &DatasetView<'_>,
    metric: FilterMetric,
    options: &RankOptions,
) -> Result<FeatureRanking> {
    let task = view.task();
    metric.check_task(task)?;

    let labels = view.gather_labels();
    let continuous = view.gather_target();
    let n_classes = view.dataset().n_classes();
    let labels_as_f64: Option<Vec<f64>> =
        labels.as_ref().map(|l| l.iter().map(|&v| v as f64).collect());
    let target_reals: &[f64] = match (&continuous, &labels_as_f64) {
        (Some(t), _) => t,
        (None, Some(l)) => l,
        (None, None) => unreachable!(),
    };

    let mut scores = Vec::with_capacity(view.n_cols());
    for col in 0..view.n_cols() {
        let feature: Vec<f64> = (0..view.n_rows()).map(|r| view.value(r, col)).collect();
        let score = match metric {
            FilterMetric::FValueClassif => {
                f_value_classif(&feature, labels.as_ref().expect("classification"), n_classes)?
            }
            FilterMetric::FValueRegress => {
                f_value_regress(&feature, continuous.as_ref().expect("regression"))?
            }
            FilterMetric::MutualInformation => {
                let target = match (&labels, &continuous) {
                    (Some(l), _) => MiTarget::Classes(l),
                    (None, Some(t)) => MiTarget::Continuous(t),
                    (None, None) => unreachable!(),
                };
                mutual_information(&feature, target, options.mi_bins)?
            }
            FilterMetric::Variance => variance_score(&feature)?,
            FilterMetric::AbsPearsonCorrelation => abs_correlation(&feature, target_reals)?,
        };
        scores.push(score);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b].partial_cmp(&scores[a]).expect("scores are finite").then(a.cmp(&b))
    });
    Ok(FeatureRanking { metric, order, scores })
}
