//! Model quality metrics: ROC AUC (binary), macro-averaged F1
//! (multiclass), and R² (regression).

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("labels contain a single class; need both")]
    SingleClass,
    #[error("predicted has {predicted} entries but actual has {actual}")]
    LengthMismatch { predicted: usize, actual: usize },
    #[error("empty input")]
    Empty,
    #[error("actual values are constant; R^2 is undefined")]
    ConstantActual,
}

/// ROC AUC as the Mann–Whitney pair statistic: the fraction of
/// (positive, negative) pairs where the positive scores higher, ties
/// counted 0.5. Computed via average ranks in `O(n log n)`.
pub fn roc_auc(scores: &[f64], labels: &[usize]) -> Result<f64, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            predicted: scores.len(),
            actual: labels.len(),
        });
    }
    let n = scores.len();
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricsError::SingleClass);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        scores[a]
            .partial_cmp(&scores[b])
            .expect("non-finite score")
    });

    // Average ranks across tied scores, then sum positive ranks.
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }

    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Unweighted mean of per-class F1 over the classes present in `actual`.
/// A class with zero precision+recall contributes F1 = 0.
pub fn macro_f1(predicted: &[usize], actual: &[usize]) -> Result<f64, MetricsError> {
    if predicted.len() != actual.len() {
        return Err(MetricsError::LengthMismatch {
            predicted: predicted.len(),
            actual: actual.len(),
        });
    }
    if actual.is_empty() {
        return Err(MetricsError::Empty);
    }

    let mut classes: Vec<usize> = actual.to_vec();
    classes.sort_unstable();
    classes.dedup();

    let mut total = 0.0;
    for &c in &classes {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fn_ = 0usize;
        for (&p, &a) in predicted.iter().zip(actual) {
            match (p == c, a == c) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        let precision = if tp + fp == 0 {
            0.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let recall = if tp + fn_ == 0 {
            0.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        if precision + recall > 0.0 {
            total += 2.0 * precision * recall / (precision + recall);
        }
    }
    Ok(total / classes.len() as f64)
}

/// Coefficient of determination `1 - SS_res/SS_tot`.
pub fn r_squared(predicted: &[f64], actual: &[f64]) -> Result<f64, MetricsError> {
    if predicted.len() != actual.len() {
        return Err(MetricsError::LengthMismatch {
            predicted: predicted.len(),
            actual: actual.len(),
        });
    }
    if actual.len() < 2 {
        return Err(MetricsError::Empty);
    }
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let ss_tot: f64 = actual.iter().map(|&a| (a - mean) * (a - mean)).sum();
    if ss_tot == 0.0 {
        return Err(MetricsError::ConstantActual);
    }
    let ss_res: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(&p, &a)| (a - p) * (a - p))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}
