//! Stage three: binary PSO over feature-inclusion masks, used standalone
//! (FS-score fitness) or as the refinement pass after the cutoff
//! (model-performance-only fitness).

use std::collections::HashMap;

use featurecuts_core::bpso::{self, BpsoConfig};
use featurecuts_core::{FsVariant, FsWeights, fs_score};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FoldAssignment};
use crate::error::{Error, Result};
use crate::evaluator::{EvaluatorSpec, cv_score};

/// What a particle's fitness is: the raw cross-validation score, or the
/// FS-score folding in reduction against the *original* feature count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitnessMode {
    FsScoreFitness { weights: FsWeights, variant: FsVariant },
    ModelScoreOnly,
}

impl FitnessMode {
    pub fn name(&self) -> &'static str {
        match self {
            FitnessMode::FsScoreFitness { .. } => "fs",
            FitnessMode::ModelScoreOnly => "model",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoConfig {
    pub swarm: BpsoConfig,
    pub fitness_mode: FitnessMode,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self { swarm: BpsoConfig::default(), fitness_mode: FitnessMode::ModelScoreOnly }
    }
}

/// Outcome of a swarm run over a candidate feature list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmRunResult {
    /// Inclusion mask over the candidate list.
    pub best_mask: Vec<bool>,
    /// Selected original column indices (mask applied to candidates).
    pub selected: Vec<usize>,
    pub best_fitness: f64,
    /// Global-best fitness after initialization and each iteration.
    pub history: Vec<f64>,
    /// Distinct evaluator invocations (masks are memoized).
    pub evaluations: usize,
}

/// Runs binary PSO over `candidates`, evaluating masks by
/// cross-validation on the train partition. Mask fitness is memoized,
/// so repeated masks cost nothing.
pub fn run_pso(
    candidates: &[usize],
    ds: &Dataset,
    folds: &FoldAssignment,
    spec: &EvaluatorSpec,
    cfg: &PsoConfig,
) -> Result<SwarmRunResult> {
    if candidates.is_empty() {
        return Err(Error::Config("PSO needs at least one candidate feature".into()));
    }
    let total_features = ds.n_features();
    let mut memo: HashMap<Vec<bool>, f64> = HashMap::new();
    let mut evaluations = 0usize;

    let outcome = bpso::optimize(candidates.len(), &cfg.swarm, |mask: &[bool]| {
        if let Some(&fit) = memo.get(mask) {
            return Ok(fit);
        }
        let columns: Vec<usize> = mask
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b)
            .map(|(i, _)| candidates[i])
            .collect();
        evaluations += 1;
        let model = cv_score(ds, &columns, folds, spec)?;
        let fit = match cfg.fitness_mode {
            FitnessMode::ModelScoreOnly => model.value,
            FitnessMode::FsScoreFitness { weights, variant } => fs_score(
                model.value,
                total_features - columns.len(),
                total_features,
                &weights,
                variant,
            )?,
        };
        memo.insert(mask.to_vec(), fit);
        Ok(fit)
    });

    match outcome {
        Ok(result) => {
            let selected: Vec<usize> = result
                .best_mask
                .iter()
                .enumerate()
                .filter(|&(_, &b)| b)
                .map(|(i, _)| candidates[i])
                .collect();
            Ok(SwarmRunResult {
                best_mask: result.best_mask,
                selected,
                best_fitness: result.best_fitness,
                history: result.history,
                evaluations,
            })
        }
        Err(aborted) => {
            let best_so_far = aborted.best_so_far.map(|(mask, fit)| {
                let selected: Vec<usize> = mask
                    .iter()
                    .enumerate()
                    .filter(|&(_, &b)| b)
                    .map(|(i, _)| candidates[i])
                    .collect();
                (selected, fit)
            });
            Err(Error::PsoAborted { source: Box::new(aborted.source), best_so_far })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{SplitPlan, Target, make_splits};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    /// Binary dataset with `informative` strong columns followed by pure
    /// noise columns.
    fn informative_plus_noise(n_rows: usize, informative: usize, noise: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<usize> = (0..n_rows).map(|_| rng.random_range(0..2)).collect();
        let mut columns = Vec::with_capacity(informative + noise);
        for j in 0..informative {
            let shift = 2.5 - 0.25 * j as f64;
            columns.push(
                labels
                    .iter()
                    .map(|&c| {
                        let e: f64 = StandardNormal.sample(&mut rng);
                        c as f64 * shift + e
                    })
                    .collect(),
            );
        }
        for _ in 0..noise {
            columns.push((0..n_rows).map(|_| StandardNormal.sample(&mut rng)).collect());
        }
        let names = (0..columns.len()).map(|i| format!("f{i}")).collect();
        let mut values = labels;
        // both classes must appear
        values[0] = 0;
        values[1] = 1;
        Dataset::new(
            columns,
            names,
            "y".into(),
            Target::Labels { values, classes: vec!["a".into(), "b".into()] },
        )
        .unwrap()
    }

    fn quick_spec() -> EvaluatorSpec {
        EvaluatorSpec { rounds: 12, depth: 2, learning_rate: 0.3, ..EvaluatorSpec::default() }
    }

    fn quick_cfg(seed: u64, mode: FitnessMode) -> PsoConfig {
        PsoConfig {
            swarm: BpsoConfig { agents: 10, iterations: 12, seed, ..BpsoConfig::default() },
            fitness_mode: mode,
        }
    }

    #[test]
    fn single_candidate_is_selected() {
        let ds = informative_plus_noise(40, 1, 0, 3);
        let folds = make_splits(&ds, &SplitPlan::default()).unwrap();
        let cfg = PsoConfig {
            swarm: BpsoConfig { agents: 4, iterations: 1, seed: 0, ..BpsoConfig::default() },
            fitness_mode: FitnessMode::ModelScoreOnly,
        };
        let res = run_pso(&[0], &ds, &folds, &quick_spec(), &cfg).unwrap();
        assert_eq!(res.best_mask, vec![true]);
        assert_eq!(res.selected, vec![0]);
    }

    #[test]
    fn fitness_modes_match_recomputation() {
        let ds = informative_plus_noise(60, 2, 4, 7);
        let folds = make_splits(&ds, &SplitPlan::default()).unwrap();
        let spec = quick_spec();
        let candidates: Vec<usize> = (0..6).collect();

        let res =
            run_pso(&candidates, &ds, &folds, &spec, &quick_cfg(5, FitnessMode::ModelScoreOnly))
                .unwrap();
        let cv = cv_score(&ds, &res.selected, &folds, &spec).unwrap();
        assert_eq!(res.best_fitness, cv.value, "ModelScoreOnly fitness is the raw CV score");

        let weights = FsWeights::default();
        let fs_mode =
            FitnessMode::FsScoreFitness { weights, variant: FsVariant::RemovedFraction };
        let res_fs = run_pso(&candidates, &ds, &folds, &spec, &quick_cfg(5, fs_mode)).unwrap();
        let cv_fs = cv_score(&ds, &res_fs.selected, &folds, &spec).unwrap();
        let expected = fs_score(
            cv_fs.value,
            ds.n_features() - res_fs.selected.len(),
            ds.n_features(),
            &weights,
            FsVariant::RemovedFraction,
        )
        .unwrap();
        assert_eq!(res_fs.best_fitness, expected);
    }

    #[test]
    fn budget_history_and_determinism() {
        let ds = informative_plus_noise(60, 2, 6, 11);
        let folds = make_splits(&ds, &SplitPlan::default()).unwrap();
        let spec = quick_spec();
        let candidates: Vec<usize> = (0..8).collect();
        let cfg = quick_cfg(9, FitnessMode::ModelScoreOnly);

        let a = run_pso(&candidates, &ds, &folds, &spec, &cfg).unwrap();
        assert!(a.evaluations <= cfg.swarm.agents * (cfg.swarm.iterations + 1));
        assert_eq!(a.history.len(), cfg.swarm.iterations + 1);
        assert!(a.history.windows(2).all(|w| w[1] >= w[0]));

        let b = run_pso(&candidates, &ds, &folds, &spec, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn finds_informative_features_among_noise() {
        // 5 informative + 45 noise candidates, model-score fitness
        let ds = informative_plus_noise(150, 5, 45, 13);
        let folds =
            make_splits(&ds, &SplitPlan { holdout_fraction: 0.2, folds: 3, seed: 1 }).unwrap();
        let spec = quick_spec();
        let candidates: Vec<usize> = (0..50).collect();
        let cfg = PsoConfig {
            swarm: BpsoConfig { agents: 12, iterations: 15, seed: 2, ..BpsoConfig::default() },
            fitness_mode: FitnessMode::ModelScoreOnly,
        };
        let res = run_pso(&candidates, &ds, &folds, &spec, &cfg).unwrap();
        let informative_kept = res.selected.iter().filter(|&&c| c < 5).count();
        assert!(informative_kept >= 4, "kept {informative_kept} of 5 informative");

        let all_candidates = cv_score(&ds, &candidates, &folds, &spec).unwrap();
        assert!(
            res.best_fitness >= all_candidates.value - 0.03,
            "swarm score {} fell more than 0.03 below all-candidates {}",
            res.best_fitness,
            all_candidates.value
        );
    }

    #[test]
    fn evaluator_failure_aborts_with_best_so_far() {
        let ds = informative_plus_noise(40, 1, 3, 5);
        let folds = make_splits(&ds, &SplitPlan::default()).unwrap();
        // an external evaluator that always fails
        let spec = EvaluatorSpec {
            kind: crate::evaluator::EvaluatorKind::ExternalCommand {
                program: "/nonexistent/evaluator".into(),
                args: vec![],
            },
            ..EvaluatorSpec::default()
        };
        let err = run_pso(
            &[0, 1, 2, 3],
            &ds,
            &folds,
            &spec,
            &quick_cfg(1, FitnessMode::ModelScoreOnly),
        )
        .unwrap_err();
        assert!(matches!(err, Error::PsoAborted { .. }), "{err}");
    }
}
