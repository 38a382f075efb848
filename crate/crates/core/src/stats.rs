//! Univariate filter statistics: ANOVA F-value, regression F-statistic,
//! plug-in mutual information over equal-frequency bins, population
//! variance, and absolute Pearson correlation.
//!
//! Each function scores one feature column against the target and returns
//! a finite score `>= 0`. Degenerate "infinite" statistics (zero
//! within-class variance, |r| = 1) map to [`LARGE_SCORE_SENTINEL`].

use alloc::vec;
use alloc::vec::Vec;

use crate::LARGE_SCORE_SENTINEL;
use crate::math;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least {min} rows, got {n}")]
    TooFewRows { n: usize, min: usize },
    #[error("need at least 2 classes, got {n_classes}")]
    TooFewClasses { n_classes: usize },
    #[error("class {class} has no members")]
    EmptyClass { class: usize },
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("feature has {feature} rows but target has {target}")]
    LengthMismatch { feature: usize, target: usize },
    #[error("bin count must satisfy 2 <= bins <= n, got {bins}")]
    BadBins { bins: usize },
}

fn check_lengths(feature: usize, target: usize) -> Result<(), StatsError> {
    if feature != target {
        return Err(StatsError::LengthMismatch { feature, target });
    }
    Ok(())
}

fn is_constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population (co)variance pieces for two aligned vectors.
fn comoments(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    (cov / n, var_x / n, var_y / n)
}

/// ANOVA F-value of a feature against class labels:
/// `F = (SS_between/(C-1)) / (SS_within/(n-C))`.
///
/// A constant feature scores 0; perfect class separation (zero
/// within-class variance) scores the large sentinel.
pub fn f_value_classif(
    feature: &[f64],
    labels: &[usize],
    n_classes: usize,
) -> Result<f64, StatsError> {
    check_lengths(feature.len(), labels.len())?;
    if n_classes < 2 {
        return Err(StatsError::TooFewClasses { n_classes });
    }
    let n = feature.len();
    if n < n_classes + 1 {
        return Err(StatsError::TooFewRows { n, min: n_classes + 1 });
    }

    let mut counts = vec![0usize; n_classes];
    let mut sums = vec![0.0f64; n_classes];
    for (&x, &c) in feature.iter().zip(labels) {
        if c >= n_classes {
            return Err(StatsError::LabelOutOfRange { label: c, n_classes });
        }
        counts[c] += 1;
        sums[c] += x;
    }
    if let Some(class) = counts.iter().position(|&c| c == 0) {
        return Err(StatsError::EmptyClass { class });
    }

    if is_constant(feature) {
        return Ok(0.0);
    }

    let grand_mean = mean(feature);
    let class_means: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| s / c as f64)
        .collect();

    let ss_between: f64 = class_means
        .iter()
        .zip(&counts)
        .map(|(&m, &c)| c as f64 * (m - grand_mean) * (m - grand_mean))
        .sum();
    let ss_within: f64 = feature
        .iter()
        .zip(labels)
        .map(|(&x, &c)| {
            let d = x - class_means[c];
            d * d
        })
        .sum();

    if ss_between <= 0.0 {
        return Ok(0.0);
    }
    if ss_within == 0.0 {
        return Ok(LARGE_SCORE_SENTINEL);
    }
    let f = (ss_between / (n_classes - 1) as f64) / (ss_within / (n - n_classes) as f64);
    Ok(f.min(LARGE_SCORE_SENTINEL))
}

/// Regression F-statistic of the univariate linear fit:
/// `F = r^2 (n-2) / (1 - r^2)` with `r` the Pearson correlation.
///
/// Zero-variance feature or target scores 0; `|r| = 1` scores the
/// large sentinel.
pub fn f_value_regress(feature: &[f64], target: &[f64]) -> Result<f64, StatsError> {
    check_lengths(feature.len(), target.len())?;
    let n = feature.len();
    if n < 3 {
        return Err(StatsError::TooFewRows { n, min: 3 });
    }
    let (cov, var_x, var_y) = comoments(feature, target);
    if var_x <= 0.0 || var_y <= 0.0 {
        return Ok(0.0);
    }
    let r2 = (cov * cov) / (var_x * var_y);
    if r2 >= 1.0 {
        return Ok(LARGE_SCORE_SENTINEL);
    }
    let f = r2 * (n - 2) as f64 / (1.0 - r2);
    Ok(f.max(0.0).min(LARGE_SCORE_SENTINEL))
}

/// Target side of a mutual-information estimate: categorical labels are
/// used as-is, continuous targets are equal-frequency binned like the
/// feature.
#[derive(Debug, Clone, Copy)]
pub enum MiTarget<'a> {
    Classes(&'a [usize]),
    Continuous(&'a [f64]),
}

impl MiTarget<'_> {
    fn len(&self) -> usize {
        match self {
            MiTarget::Classes(v) => v.len(),
            MiTarget::Continuous(v) => v.len(),
        }
    }
}

/// Assigns each value the index of its equal-frequency bin.
///
/// Interior bin edges sit at the empirical quantiles `j/bins`; a value's
/// bin is the number of edges strictly below it, so equal values always
/// share a bin and ties may collapse bins.
pub fn equal_frequency_bins(values: &[f64], bins: usize) -> Vec<usize> {
    let n = values.len();
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite value in binning"));
    let edges: Vec<f64> = (1..bins)
        .map(|j| sorted[(j * n).div_ceil(bins) - 1])
        .collect();
    values
        .iter()
        .map(|&v| edges.iter().take_while(|&&e| e < v).count())
        .collect()
}

/// Plug-in mutual information (nats) between an equal-frequency-binned
/// feature and a categorical (or same-rule-binned) target.
pub fn mutual_information(
    feature: &[f64],
    target: MiTarget<'_>,
    bins: usize,
) -> Result<f64, StatsError> {
    check_lengths(feature.len(), target.len())?;
    let n = feature.len();
    if bins < 2 || bins > n {
        return Err(StatsError::BadBins { bins });
    }

    let row_bins = equal_frequency_bins(feature, bins);
    let col_bins: Vec<usize> = match target {
        MiTarget::Classes(labels) => labels.to_vec(),
        MiTarget::Continuous(values) => equal_frequency_bins(values, bins),
    };
    let n_rows = row_bins.iter().max().copied().unwrap_or(0) + 1;
    let n_cols = col_bins.iter().max().copied().unwrap_or(0) + 1;

    let mut joint = vec![0usize; n_rows * n_cols];
    let mut row_marg = vec![0usize; n_rows];
    let mut col_marg = vec![0usize; n_cols];
    for (&r, &c) in row_bins.iter().zip(&col_bins) {
        joint[r * n_cols + c] += 1;
        row_marg[r] += 1;
        col_marg[c] += 1;
    }

    let total = n as f64;
    let mut mi = 0.0;
    for r in 0..n_rows {
        for c in 0..n_cols {
            let nij = joint[r * n_cols + c];
            if nij == 0 {
                continue;
            }
            let pij = nij as f64 / total;
            let ratio = nij as f64 * total / (row_marg[r] as f64 * col_marg[c] as f64);
            mi += pij * math::ln(ratio);
        }
    }
    Ok(mi.max(0.0))
}

/// Population variance of a feature. Used only for ordering, so the
/// `n/(n-1)` correction is irrelevant.
pub fn variance_score(feature: &[f64]) -> Result<f64, StatsError> {
    let n = feature.len();
    if n < 2 {
        return Err(StatsError::TooFewRows { n, min: 2 });
    }
    let m = mean(feature);
    Ok(feature.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / n as f64)
}

/// Absolute Pearson correlation in `[0, 1]`; zero-variance inputs give 0.
pub fn abs_correlation(feature: &[f64], target: &[f64]) -> Result<f64, StatsError> {
    check_lengths(feature.len(), target.len())?;
    let n = feature.len();
    if n < 2 {
        return Err(StatsError::TooFewRows { n, min: 2 });
    }
    let (cov, var_x, var_y) = comoments(feature, target);
    if var_x <= 0.0 || var_y <= 0.0 {
        return Ok(0.0);
    }
    let r2 = (cov * cov) / (var_x * var_y);
    Ok(math::sqrt(r2.min(1.0)))
}
