//! `FSS(k)`: the FS-score of selecting the top `k` ranked features,
//! with a single-flight memoizing cache so search re-probes are free.

use std::collections::{HashMap, HashSet};
use std::sync::{Condvar, Mutex};
use std::time::Instant;

use featurecuts_core::{FsVariant, FsWeights, fs_score};

use crate::dataset::{Dataset, FoldAssignment};
use crate::error::{Error, Result};
use crate::evaluator::{EvaluatorSpec, ModelScore, cv_score};
use crate::rank::FeatureRanking;

/// One memoized cutoff evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CachedEval {
    pub k: usize,
    pub fss: f64,
    pub model: ModelScore,
    /// Zero-based order in which this cutoff was first evaluated.
    pub eval_index: usize,
    /// Milliseconds since the cache was created.
    pub computed_at_ms: u64,
}

#[derive(Default)]
struct CacheState {
    entries: HashMap<usize, CachedEval>,
    in_flight: HashSet<usize>,
    next_index: usize,
}

/// Single-flight cache keyed by cutoff. A cache instance is bound to one
/// (ranking, fold plan, evaluator spec) triple, so the cutoff alone
/// identifies an evaluation. Concurrent probes of the same cutoff run
/// the evaluator exactly once; failures are never cached, so a failed
/// cutoff is re-queried rather than replayed.
pub struct FssCache {
    state: Mutex<CacheState>,
    ready: Condvar,
    started: Instant,
}

impl FssCache {
    pub fn new() -> Self {
        Self { state: Mutex::new(CacheState::default()), ready: Condvar::new(), started: Instant::now() }
    }

    pub fn len(&self) -> usize {
        self.state.lock().expect("cache lock").entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, k: usize) -> Option<CachedEval> {
        self.state.lock().expect("cache lock").entries.get(&k).copied()
    }

    /// All evaluations in first-evaluation order.
    pub fn snapshot(&self) -> Vec<CachedEval> {
        let state = self.state.lock().expect("cache lock");
        let mut all: Vec<CachedEval> = state.entries.values().copied().collect();
        all.sort_by_key(|e| e.eval_index);
        all
    }

    /// Returns the cached value for `k` or computes it, with
    /// single-flight semantics under concurrency.
    pub fn get_or_compute(
        &self,
        k: usize,
        compute: impl FnOnce() -> Result<(f64, ModelScore)>,
    ) -> Result<CachedEval> {
        {
            let mut state = self.state.lock().expect("cache lock");
            loop {
                if let Some(entry) = state.entries.get(&k) {
                    return Ok(*entry);
                }
                if state.in_flight.contains(&k) {
                    state = self.ready.wait(state).expect("cache lock");
                    continue;
                }
                state.in_flight.insert(k);
                break;
            }
        }

        let outcome = compute();

        let mut state = self.state.lock().expect("cache lock");
        state.in_flight.remove(&k);
        let result = match outcome {
            Ok((fss, model)) => {
                let entry = CachedEval {
                    k,
                    fss,
                    model,
                    eval_index: state.next_index,
                    computed_at_ms: self.started.elapsed().as_millis() as u64,
                };
                state.next_index += 1;
                state.entries.insert(k, entry);
                Ok(entry)
            }
            Err(e) => Err(e),
        };
        self.ready.notify_all();
        result
    }
}

impl Default for FssCache {
    fn default() -> Self {
        Self::new()
    }
}

/// Everything needed to evaluate `FSS(k)`: the dataset, its ranking and
/// folds, the evaluator, and the FS-score weighting.
pub struct FssContext<'a> {
    pub ds: &'a Dataset,
    pub ranking: &'a FeatureRanking,
    pub folds: &'a FoldAssignment,
    pub spec: &'a EvaluatorSpec,
    pub weights: FsWeights,
    pub variant: FsVariant,
    cache: FssCache,
}

impl<'a> FssContext<'a> {
    pub fn new(
        ds: &'a Dataset,
        ranking: &'a FeatureRanking,
        folds: &'a FoldAssignment,
        spec: &'a EvaluatorSpec,
        weights: FsWeights,
        variant: FsVariant,
    ) -> Self {
        Self { ds, ranking, folds, spec, weights, variant, cache: FssCache::new() }
    }

    /// Total number of ranked features (the cutoff domain size).
    pub fn n_features(&self) -> usize {
        self.ranking.n_features()
    }

    pub fn cache(&self) -> &FssCache {
        &self.cache
    }

    fn compute(&self, k: usize) -> Result<(f64, ModelScore)> {
        let model = cv_score(self.ds, self.ranking.top(k), self.folds, self.spec)?;
        let total = self.n_features();
        let fss = fs_score(model.value, total - k, total, &self.weights, self.variant)?;
        Ok((fss, model))
    }

    /// `FSS(k)` for the top `k` ranked features, memoized. A failed
    /// evaluation is retried once; a second failure aborts with the
    /// cutoff attached.
    pub fn fss(&self, k: usize) -> Result<f64> {
        let n = self.n_features();
        if k == 0 || k > n {
            return Err(Error::Config(format!("cutoff k={k} outside 1..={n}")));
        }
        match self.cache.get_or_compute(k, || self.compute(k)) {
            Ok(entry) => Ok(entry.fss),
            Err(_first) => match self.cache.get_or_compute(k, || self.compute(k)) {
                Ok(entry) => Ok(entry.fss),
                Err(second) => Err(Error::CutoffEvalFailed {
                    k,
                    source: Box::new(second),
                    partial_trace: self
                        .cache
                        .snapshot()
                        .iter()
                        .map(|e| (e.k, e.fss))
                        .collect(),
                }),
            },
        }
    }
}
