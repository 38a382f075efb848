//! The three-stage pipeline: rank features on the train partition, find
//! the FS-score-optimal cutoff, optionally refine the survivors with
//! binary PSO, then score the final subset once on the hold-out rows.

use std::time::Instant;

use featurecuts_core::search::{BayesConfig, GssConfig};
use featurecuts_core::{FsVariant, FsWeights, stream_seed};
use serde::Serialize;

use crate::cutoff::{CutoffMethodConfig, find_cutoff, trace_rows};
use crate::dataset::{Dataset, FoldAssignment, SplitPlan, TaskKind, make_splits};
use crate::error::{Error, Result};
use crate::evaluator::{EvaluatorSpec, MetricKind, ModelScore, cv_score, train_evaluate};
use crate::fss::FssContext;
use crate::pso::{FitnessMode, PsoConfig, SwarmRunResult, run_pso};
use crate::rank::{FeatureRanking, FilterMetric, RankOptions, rank_features};
use crate::report::REPORT_SCHEMA;

/// Seed-derivation domains, so each randomized component gets an
/// independent stream from the one master seed.
mod seed_domain {
    pub const SPLIT: u64 = 1;
    pub const BAYES: u64 = 2;
    pub const PSO: u64 = 3;
    pub const EVALUATOR: u64 = 4;
    pub const SAMPLING: u64 = 5;
}

pub fn split_seed(master: u64) -> u64 {
    stream_seed(master, seed_domain::SPLIT, 0)
}

pub fn bayes_seed(master: u64) -> u64 {
    stream_seed(master, seed_domain::BAYES, 0)
}

pub fn pso_seed(master: u64) -> u64 {
    stream_seed(master, seed_domain::PSO, 0)
}

pub fn evaluator_seed(master: u64) -> u64 {
    stream_seed(master, seed_domain::EVALUATOR, 0)
}

pub fn sampling_seed(master: u64) -> u64 {
    stream_seed(master, seed_domain::SAMPLING, 0)
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Filter metric; `None` picks the task-appropriate F-value.
    pub metric: Option<FilterMetric>,
    pub rank_options: RankOptions,
    pub cutoff: CutoffMethodConfig,
    /// Select the literal bracket-endpoint cutoff instead of the best
    /// evaluated one (golden section only).
    pub strict_paper: bool,
    /// Optional PSO refinement of the top-`k*` features.
    pub hybrid: Option<PsoConfig>,
    pub weights: FsWeights,
    pub variant: FsVariant,
    pub split: SplitPlan,
    pub evaluator: EvaluatorSpec,
    /// Master seed; component seeds in `split`, `cutoff`, and `hybrid`
    /// are normally derived from it (see [`PipelineConfig::seeded`]).
    pub seed: u64,
}

impl PipelineConfig {
    /// Default configuration with every component seed derived from one
    /// master seed.
    pub fn seeded(seed: u64) -> Self {
        Self {
            metric: None,
            rank_options: RankOptions::default(),
            cutoff: CutoffMethodConfig::GoldenSection(GssConfig::default()),
            strict_paper: false,
            hybrid: None,
            weights: FsWeights::default(),
            variant: FsVariant::RemovedFraction,
            split: SplitPlan { seed: split_seed(seed), ..SplitPlan::default() },
            evaluator: EvaluatorSpec { seed: evaluator_seed(seed), ..EvaluatorSpec::default() },
            seed,
        }
    }

    /// Bayesian cutoff search wired to this config's master seed.
    pub fn with_bayes_cutoff(mut self) -> Self {
        self.cutoff = CutoffMethodConfig::Bayesian(BayesConfig {
            seed: bayes_seed(self.seed),
            ..BayesConfig::default()
        });
        self
    }

    /// Enables PSO refinement with defaults wired to the master seed.
    pub fn with_hybrid_pso(mut self) -> Self {
        let mut cfg = PsoConfig::default();
        cfg.swarm.seed = pso_seed(self.seed);
        self.hybrid = Some(cfg);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub metric: String,
    pub mi_bins: usize,
    pub cutoff_method: String,
    pub gss_iterations: Option<usize>,
    pub bayes_init_points: Option<usize>,
    pub bayes_iterations: Option<usize>,
    pub strict_paper: bool,
    pub fs_weights: [f64; 2],
    pub fs_variant: String,
    pub holdout_fraction: f64,
    pub folds: usize,
    pub split_seed: u64,
    pub evaluator: EvaluatorSpec,
    pub hybrid: Option<PsoEcho>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PsoEcho {
    pub agents: usize,
    pub iterations: usize,
    pub inertia: [f64; 2],
    pub cognitive: f64,
    pub social: f64,
    pub v_max: f64,
    pub seed: u64,
    pub fitness: String,
}

fn variant_name(variant: FsVariant) -> &'static str {
    match variant {
        FsVariant::RemovedFraction => "removed",
        FsVariant::RetainedFraction => "retained",
    }
}

fn echo(cfg: &PipelineConfig, metric: FilterMetric) -> ConfigEcho {
    let (gss_iterations, bayes_init_points, bayes_iterations) = match &cfg.cutoff {
        CutoffMethodConfig::GoldenSection(g) => (Some(g.iterations), None, None),
        CutoffMethodConfig::Bayesian(b) => (None, Some(b.init_points), Some(b.iterations)),
        CutoffMethodConfig::BruteForce => (None, None, None),
    };
    ConfigEcho {
        seed: cfg.seed,
        metric: metric.name().into(),
        mi_bins: cfg.rank_options.mi_bins,
        cutoff_method: cfg.cutoff.name().into(),
        gss_iterations,
        bayes_init_points,
        bayes_iterations,
        strict_paper: cfg.strict_paper,
        fs_weights: [cfg.weights.performance, cfg.weights.reduction],
        fs_variant: variant_name(cfg.variant).into(),
        holdout_fraction: cfg.split.holdout_fraction,
        folds: cfg.split.folds,
        split_seed: cfg.split.seed,
        evaluator: cfg.evaluator.clone(),
        hybrid: cfg.hybrid.as_ref().map(|h| PsoEcho {
            agents: h.swarm.agents,
            iterations: h.swarm.iterations,
            inertia: [h.swarm.inertia_start, h.swarm.inertia_end],
            cognitive: h.swarm.cognitive,
            social: h.swarm.social,
            v_max: h.swarm.v_max,
            seed: h.swarm.seed,
            fitness: h.fitness_mode.name().into(),
        }),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetSummary {
    pub n_rows: usize,
    pub n_features: usize,
    pub task: String,
    pub target: String,
    pub classes: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectedFeature {
    pub index: usize,
    pub name: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CutoffSummary {
    pub method: String,
    pub k_star: usize,
    pub fss_at_k_star: f64,
    pub strict_paper_k: Option<usize>,
    /// The cutoff actually used for selection (`strict_paper_k` when
    /// `--strict-paper`, `k_star` otherwise).
    pub selection_k: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub rank_ms: u64,
    pub cutoff_ms: u64,
    pub pso_ms: u64,
    pub holdout_ms: u64,
    pub total_ms: u64,
}

/// Full provenance of one pipeline run. Later-stage fields stay `None`
/// in partial reports attached to stage failures.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionReport {
    pub schema: u32,
    pub version: String,
    pub config: ConfigEcho,
    pub dataset: DatasetSummary,
    pub cutoff: Option<CutoffSummary>,
    pub selected_features: Option<Vec<SelectedFeature>>,
    pub reduction_pct: Option<f64>,
    pub cv_score: Option<ModelScore>,
    pub holdout_score: Option<ModelScore>,
    pub fss_trace: Vec<crate::cutoff::TraceRow>,
    pub pso: Option<SwarmRunResult>,
    pub timings_ms: Timings,
    pub notes: Vec<String>,
}

impl SelectionReport {
    pub fn to_json(&self) -> String {
        let mut body = serde_json::to_string_pretty(self).expect("report serializes");
        body.push('\n');
        body
    }
}

/// Splits per the plan, then runs the pipeline.
pub fn run_featurecuts(ds: &Dataset, cfg: &PipelineConfig) -> Result<SelectionReport> {
    let folds = make_splits(ds, &cfg.split)?;
    run_featurecuts_with_splits(ds, &folds, cfg)
}

/// Runs the pipeline over pre-computed splits. Ranking, cutoff search,
/// and PSO see only the train partition; the hold-out rows are touched
/// exactly once, for the final reported score.
pub fn run_featurecuts_with_splits(
    ds: &Dataset,
    folds: &FoldAssignment,
    cfg: &PipelineConfig,
) -> Result<SelectionReport> {
    cfg.evaluator.validate()?;
    let task = ds.task();
    let metric = cfg.metric.unwrap_or_else(|| FilterMetric::default_for(task));
    metric.check_task(task)?;

    let mut notes = Vec::new();
    if task == TaskKind::Regression {
        notes.push("regression target: folds are plain shuffled, not stratified".to_string());
    }
    let mut report = SelectionReport {
        schema: REPORT_SCHEMA,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: echo(cfg, metric),
        dataset: DatasetSummary {
            n_rows: ds.n_rows(),
            n_features: ds.n_features(),
            task: task.name().into(),
            target: ds.target_name().into(),
            classes: ds.class_names().map(<[String]>::to_vec),
        },
        cutoff: None,
        selected_features: None,
        reduction_pct: None,
        cv_score: None,
        holdout_score: None,
        fss_trace: Vec::new(),
        pso: None,
        timings_ms: Timings::default(),
        notes,
    };

    macro_rules! stage {
        ($name:literal, $expr:expr) => {
            match $expr {
                Ok(value) => value,
                Err(source) => {
                    return Err(Error::Pipeline {
                        stage: $name,
                        source: Box::new(source),
                        partial: Box::new(report),
                    });
                }
            }
        };
    }

    let t_total = Instant::now();

    // stage 1: rank on the train partition only
    let t = Instant::now();
    let train_rows = folds.train_rows();
    let train_view = ds.view().with_rows(&train_rows);
    let ranking: FeatureRanking =
        stage!("rank", rank_features(&train_view, metric, &cfg.rank_options));
    report.timings_ms.rank_ms = t.elapsed().as_millis() as u64;

    // stage 2: cutoff search over FSS(k)
    let t = Instant::now();
    let ctx =
        FssContext::new(ds, &ranking, folds, &cfg.evaluator, cfg.weights, cfg.variant);
    let cutoff = stage!("cutoff", find_cutoff(&ctx, &cfg.cutoff));
    report.fss_trace = trace_rows(&ctx, &cutoff);
    let selection_k = if cfg.strict_paper {
        cutoff.strict_paper_k.unwrap_or(cutoff.k_star)
    } else {
        cutoff.k_star
    };
    report.cutoff = Some(CutoffSummary {
        method: cutoff.method.name().into(),
        k_star: cutoff.k_star,
        fss_at_k_star: cutoff.fss_at_k_star,
        strict_paper_k: cutoff.strict_paper_k,
        selection_k,
        evaluations: cutoff.trace.len(),
    });
    report.timings_ms.cutoff_ms = t.elapsed().as_millis() as u64;

    // stage 3 (optional): PSO refinement of the top-k* candidates
    let selected: Vec<usize> = match &cfg.hybrid {
        Some(pso_cfg) => {
            let t = Instant::now();
            let swarm =
                stage!("pso", run_pso(ranking.top(selection_k), ds, folds, &cfg.evaluator, pso_cfg));
            let selected = swarm.selected.clone();
            report.pso = Some(swarm);
            report.timings_ms.pso_ms = t.elapsed().as_millis() as u64;
            selected
        }
        None => ranking.top(selection_k).to_vec(),
    };

    report.selected_features = Some(
        selected
            .iter()
            .map(|&index| SelectedFeature { index, name: ds.feature_names()[index].clone() })
            .collect(),
    );
    report.reduction_pct =
        Some(100.0 * (1.0 - selected.len() as f64 / ds.n_features() as f64));

    let final_cv = stage!("final_cv", cv_score(ds, &selected, folds, &cfg.evaluator));
    report.cv_score = Some(final_cv);

    // hold-out evaluation: the one look at the hold-out rows
    let t = Instant::now();
    let holdout = stage!("holdout", {
        let view = match ds.subset(&selected) {
            Ok(v) => v,
            Err(e) => Err(e)?,
        };
        let eval_metric = MetricKind::for_task(task);
        train_evaluate(
            &view.with_rows(&train_rows),
            &view.with_rows(folds.holdout_rows()),
            &cfg.evaluator,
            eval_metric,
        )
    });
    report.holdout_score = Some(holdout);
    report.timings_ms.holdout_ms = t.elapsed().as_millis() as u64;
    report.timings_ms.total_ms = t_total.elapsed().as_millis() as u64;
    Ok(report)
}
