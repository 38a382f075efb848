//! Stage two: find the cutoff `k*` maximizing `FSS(k)` by golden
//! section search, Bayesian optimization, or brute force.

use featurecuts_core::search::{
    BayesConfig, CutoffResult, GssConfig, SearchError, bayes_optimize, brute_force_cutoff,
    golden_section_search,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fss::FssContext;

/// Which search runs, with its budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffMethodConfig {
    GoldenSection(GssConfig),
    Bayesian(BayesConfig),
    BruteForce,
}

impl CutoffMethodConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CutoffMethodConfig::GoldenSection(_) => "gss",
            CutoffMethodConfig::Bayesian(_) => "bayes",
            CutoffMethodConfig::BruteForce => "brute",
        }
    }
}

fn unwrap_search_error(err: SearchError<Error>) -> Error {
    match err {
        SearchError::EmptyDomain => Error::EmptyCutoffDomain,
        // the FSS layer already wrapped the failure with its partial trace
        SearchError::Eval { source, .. } => source,
    }
}

/// Runs the configured search against the context's memoized `FSS`.
pub fn find_cutoff(ctx: &FssContext<'_>, method: &CutoffMethodConfig) -> Result<CutoffResult> {
    let n = ctx.n_features();
    let objective = |k: usize| ctx.fss(k);
    match method {
        CutoffMethodConfig::GoldenSection(cfg) => {
            golden_section_search(objective, n, cfg).map_err(unwrap_search_error)
        }
        CutoffMethodConfig::Bayesian(cfg) => {
            bayes_optimize(objective, n, cfg).map_err(unwrap_search_error)
        }
        CutoffMethodConfig::BruteForce => {
            brute_force_cutoff(objective, n).map_err(unwrap_search_error)
        }
    }
}

/// One `FSS(k)` evaluation as written to trace CSVs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub method: String,
    pub k: usize,
    pub fss: f64,
    pub model_score: f64,
    pub reduction_pct: f64,
    pub eval_index: usize,
}

/// Joins a search trace with the context cache into full trace rows,
/// in evaluation order.
pub fn trace_rows(ctx: &FssContext<'_>, result: &CutoffResult) -> Vec<TraceRow> {
    let n = ctx.n_features() as f64;
    result
        .trace
        .iter()
        .enumerate()
        .map(|(eval_index, &(k, fss))| TraceRow {
            method: result.method.name().to_string(),
            k,
            fss,
            model_score: ctx.cache().get(k).map_or(f64::NAN, |e| e.model.value),
            reduction_pct: 100.0 * (n - k as f64) / n,
            eval_index,
        })
        .collect()
}
