//! The FS-score: a weighted harmonic mean of model score and feature
//! reduction, the objective every cutoff search maximizes.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FsError {
    #[error("model score must be > 0, got {score}")]
    NonPositiveScore { score: f64 },
    #[error("cannot remove {removed} of {total} features; at least one must remain")]
    RemovedAll { removed: usize, total: usize },
    #[error("weights must be strictly positive and finite")]
    BadWeights,
}

/// Relative weights of the two harmonic-mean terms. The defaults weight
/// model performance 50:1 over feature reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsWeights {
    /// Weight on the model score term.
    pub performance: f64,
    /// Weight on the feature-reduction term.
    pub reduction: f64,
}

impl Default for FsWeights {
    fn default() -> Self {
        Self { performance: 50.0, reduction: 1.0 }
    }
}

impl FsWeights {
    pub fn new(performance: f64, reduction: f64) -> Result<Self, FsError> {
        let w = Self { performance, reduction };
        if !(performance > 0.0 && performance.is_finite() && reduction > 0.0 && reduction.is_finite())
        {
            return Err(FsError::BadWeights);
        }
        Ok(w)
    }
}

/// Which fraction enters the reduction term.
///
/// `RemovedFraction` uses the share of features removed, so more removal
/// raises the score; this is the default objective. `RetainedFraction`
/// uses the share kept instead, for literal reproduction of the
/// alternative formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FsVariant {
    #[default]
    RemovedFraction,
    RetainedFraction,
}

/// Computes the FS-score for a model score and a `removed`-of-`total`
/// feature reduction.
///
/// Under `RemovedFraction`, removing nothing scores 0 (continuous limit
/// of the harmonic mean as the reduction term vanishes).
pub fn fs_score(
    model_score: f64,
    removed: usize,
    total: usize,
    weights: &FsWeights,
    variant: FsVariant,
) -> Result<f64, FsError> {
    FsWeights::new(weights.performance, weights.reduction)?;
    if !(model_score > 0.0) || !model_score.is_finite() {
        return Err(FsError::NonPositiveScore { score: model_score });
    }
    if removed >= total {
        return Err(FsError::RemovedAll { removed, total });
    }
    let fraction_removed = removed as f64 / total as f64;
    let reduction_term = match variant {
        FsVariant::RemovedFraction => {
            if removed == 0 {
                return Ok(0.0);
            }
            fraction_removed
        }
        FsVariant::RetainedFraction => 1.0 - fraction_removed,
    };
    let w_sum = weights.performance + weights.reduction;
    Ok(w_sum / (weights.performance / model_score + weights.reduction / reduction_term))
}
