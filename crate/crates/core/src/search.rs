//! Cutoff searches over the integer domain `{1..N}`: discrete golden
//! section search, Gaussian-process Bayesian optimization with expected
//! improvement, and exhaustive brute force (the ground-truth oracle).
//!
//! All three take the objective as a fallible closure, memoize
//! evaluations so no cutoff is probed twice, and report the argmax over
//! everything they evaluated with ties broken toward the smaller cutoff.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::math;

/// The golden ratio conjugate `(sqrt(5) - 1) / 2`: the interval shrink
/// factor of every golden-section iteration.
pub const GOLDEN_RATIO_CONJUGATE: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    GoldenSection,
    Bayesian,
    BruteForce,
}

impl SearchMethod {
    pub fn name(self) -> &'static str {
        match self {
            SearchMethod::GoldenSection => "gss",
            SearchMethod::Bayesian => "bayes",
            SearchMethod::BruteForce => "brute",
        }
    }
}

/// Outcome of a cutoff search.
#[derive(Debug, Clone)]
pub struct CutoffResult {
    /// Best cutoff over everything evaluated (smaller k on ties).
    pub k_star: usize,
    pub fss_at_k_star: f64,
    /// Every distinct `(k, FSS(k))` evaluation, in evaluation order.
    pub trace: Vec<(usize, f64)>,
    pub method: SearchMethod,
    /// Golden-section only: the argmax over the final bracket endpoints
    /// `{floor(a), ceil(b)}` — the literal textbook selection rule.
    pub strict_paper_k: Option<usize>,
    /// Golden-section only: `[a, b]` after each iteration, for
    /// diagnostics and shrink-factor checks.
    pub brackets: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchError<E> {
    /// `N = 0`: there is no cutoff to choose.
    EmptyDomain,
    /// The objective failed; the evaluations made so far are preserved.
    Eval { source: E, partial_trace: Vec<(usize, f64)> },
}

impl<E: fmt::Display> fmt::Display for SearchError<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchError::EmptyDomain => write!(f, "cutoff domain is empty (no features)"),
            SearchError::Eval { source, partial_trace } => write!(
                f,
                "cutoff evaluation failed after {} probes: {source}",
                partial_trace.len()
            ),
        }
    }
}

impl<E: fmt::Debug + fmt::Display> core::error::Error for SearchError<E> {}

/// Memoizing wrapper around the objective: repeat queries are free and
/// every distinct evaluation lands in the trace.
struct Probe<'a, E> {
    eval: &'a mut dyn FnMut(usize) -> Result<f64, E>,
    seen: BTreeMap<usize, f64>,
    trace: Vec<(usize, f64)>,
}

impl<'a, E> Probe<'a, E> {
    fn new(eval: &'a mut dyn FnMut(usize) -> Result<f64, E>) -> Self {
        Self { eval, seen: BTreeMap::new(), trace: Vec::new() }
    }

    fn eval(&mut self, k: usize) -> Result<f64, SearchError<E>> {
        if let Some(&v) = self.seen.get(&k) {
            return Ok(v);
        }
        match (self.eval)(k) {
            Ok(v) => {
                self.seen.insert(k, v);
                self.trace.push((k, v));
                Ok(v)
            }
            Err(source) => Err(SearchError::Eval { source, partial_trace: self.trace.clone() }),
        }
    }

    /// Smallest-k argmax over all evaluations.
    fn best(&self) -> (usize, f64) {
        let mut best_k = 0;
        let mut best_v = f64::NEG_INFINITY;
        for (&k, &v) in &self.seen {
            if v > best_v {
                best_v = v;
                best_k = k;
            }
        }
        (best_k, best_v)
    }

    fn finish(self, method: SearchMethod) -> CutoffResult {
        let (k_star, fss_at_k_star) = self.best();
        CutoffResult {
            k_star,
            fss_at_k_star,
            trace: self.trace,
            method,
            strict_paper_k: None,
            brackets: Vec::new(),
        }
    }
}

/// Golden-section search configuration. The shrink factor is
/// [`GOLDEN_RATIO_CONJUGATE`] and is not configurable; ties prefer the
/// smaller cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GssConfig {
    pub iterations: usize,
}

impl Default for GssConfig {
    fn default() -> Self {
        Self { iterations: 10 }
    }
}

fn round_to_cutoff(x: f64, n: usize) -> usize {
    (math::round(x) as usize).clamp(1, n)
}

/// Discrete golden-section search for the maximum of `fss` on `{1..N}`.
///
/// The bracket stays real-valued and shrinks by the golden ratio
/// conjugate every iteration; interior probes are rounded to the nearest
/// integer for evaluation and memoized. After the iteration budget the
/// bracket endpoints are probed too, and `k_star` is the argmax over
/// every evaluation (never worse than the endpoint rule, which is still
/// reported as `strict_paper_k`). At most `iterations + 3` distinct
/// evaluations are issued.
pub fn golden_section_search<E>(
    mut fss: impl FnMut(usize) -> Result<f64, E>,
    n: usize,
    cfg: &GssConfig,
) -> Result<CutoffResult, SearchError<E>> {
    if n == 0 {
        return Err(SearchError::EmptyDomain);
    }
    assert!(cfg.iterations >= 1, "need at least one iteration");
    let mut probe = Probe::new(&mut fss);
    let mut a = 1.0f64;
    let mut b = n as f64;
    let mut brackets = Vec::with_capacity(cfg.iterations);

    // Interior probes at the golden sections of [a, b]. Probes are
    // rounded for evaluation; when both would round to the same cutoff
    // the upper one moves to the next integer so the comparison stays
    // informative. Probe state is carried four-point style, so each
    // iteration after the first costs at most one new evaluation.
    let width = b - a;
    let mut x1 = b - GOLDEN_RATIO_CONJUGATE * width;
    let mut x2 = a + GOLDEN_RATIO_CONJUGATE * width;
    let mut k1 = round_to_cutoff(x1, n);
    let mut k2 = round_to_cutoff(x2, n);
    if k2 == k1 && k1 < n {
        k2 = k1 + 1;
    }
    let mut f1 = probe.eval(k1)?;
    let mut f2 = probe.eval(k2)?;

    for iteration in 0..cfg.iterations {
        // Keep the sub-interval holding the larger probe; ties keep the
        // lower one so they resolve toward smaller cutoffs. The bracket
        // shrinks by the real-valued probe positions either way.
        let keep_lower = f1 >= f2;
        if keep_lower {
            b = x2;
        } else {
            a = x1;
        }
        brackets.push((a, b));
        if iteration + 1 == cfg.iterations {
            break;
        }
        let width = b - a;
        if keep_lower {
            x2 = x1;
            k2 = k1;
            f2 = f1;
            x1 = b - GOLDEN_RATIO_CONJUGATE * width;
            k1 = round_to_cutoff(x1, n);
            if k1 == k2 && k2 > 1 {
                k1 = k2 - 1;
            }
            f1 = probe.eval(k1)?;
        } else {
            x1 = x2;
            k1 = k2;
            f1 = f2;
            x2 = a + GOLDEN_RATIO_CONJUGATE * width;
            k2 = round_to_cutoff(x2, n);
            if k2 == k1 && k1 < n {
                k2 = k1 + 1;
            }
            f2 = probe.eval(k2)?;
        }
    }

    let lo = (math::floor(a) as usize).clamp(1, n);
    let hi = (math::ceil(b) as usize).clamp(1, n);
    let f_lo = probe.eval(lo)?;
    let f_hi = probe.eval(hi)?;
    let strict = if f_lo >= f_hi { lo } else { hi };

    let mut result = probe.finish(SearchMethod::GoldenSection);
    result.strict_paper_k = Some(strict);
    result.brackets = brackets;
    Ok(result)
}

/// Bayesian-optimization configuration: uniform seeded init probes plus
/// the interval endpoints, then expected-improvement proposals from a
/// Gaussian-process surrogate on the normalized cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesConfig {
    pub init_points: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Squared-exponential kernel length-scale on the cutoff normalized
    /// to `[0, 1]`.
    pub length_scale: f64,
    /// Observation-noise variance added to the kernel diagonal.
    pub noise: f64,
    /// Expected-improvement exploration jitter.
    pub xi: f64,
}

impl Default for BayesConfig {
    fn default() -> Self {
        Self { init_points: 5, iterations: 5, seed: 0, length_scale: 0.1, noise: 1e-4, xi: 0.01 }
    }
}

/// In-place Cholesky factorization of a row-major symmetric matrix;
/// returns false if the matrix is not positive definite.
fn cholesky(a: &mut [f64], m: usize) -> bool {
    for i in 0..m {
        for j in 0..=i {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= a[i * m + k] * a[j * m + k];
            }
            if i == j {
                if s <= 0.0 {
                    return false;
                }
                a[i * m + i] = math::sqrt(s);
            } else {
                a[i * m + j] = s / a[j * m + j];
            }
        }
    }
    true
}

fn forward_solve(l: &[f64], m: usize, b: &mut [f64]) {
    for i in 0..m {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * m + k] * b[k];
        }
        b[i] = s / l[i * m + i];
    }
}

fn backward_solve(l: &[f64], m: usize, b: &mut [f64]) {
    for i in (0..m).rev() {
        let mut s = b[i];
        for k in i + 1..m {
            s -= l[k * m + i] * b[k];
        }
        b[i] = s / l[i * m + i];
    }
}

struct Surrogate {
    xs: Vec<f64>,
    chol: Vec<f64>,
    alpha: Vec<f64>,
    mean: f64,
    amplitude: f64,
    length_scale: f64,
}

impl Surrogate {
    /// Fits the GP; `None` when the observations are flat or the kernel
    /// matrix loses positive definiteness.
    fn fit(xs: &[f64], ys: &[f64], cfg: &BayesConfig) -> Option<Self> {
        let m = xs.len();
        let mean = ys.iter().sum::<f64>() / m as f64;
        let amplitude = ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / m as f64;
        if amplitude < 1e-16 {
            return None;
        }
        let inv_two_l2 = 1.0 / (2.0 * cfg.length_scale * cfg.length_scale);
        let mut k = vec![0.0f64; m * m];
        for i in 0..m {
            for j in 0..m {
                let d = xs[i] - xs[j];
                k[i * m + j] = amplitude * math::exp(-d * d * inv_two_l2);
            }
            k[i * m + i] += cfg.noise;
        }
        if !cholesky(&mut k, m) {
            return None;
        }
        let mut alpha: Vec<f64> = ys.iter().map(|y| y - mean).collect();
        forward_solve(&k, m, &mut alpha);
        backward_solve(&k, m, &mut alpha);
        Some(Self {
            xs: xs.to_vec(),
            chol: k,
            alpha,
            mean,
            amplitude,
            length_scale: cfg.length_scale,
        })
    }

    /// Posterior mean and standard deviation at a normalized cutoff.
    fn predict(&self, x: f64) -> (f64, f64) {
        let m = self.xs.len();
        let inv_two_l2 = 1.0 / (2.0 * self.length_scale * self.length_scale);
        let mut k_star: Vec<f64> = self
            .xs
            .iter()
            .map(|&xi| {
                let d = x - xi;
                self.amplitude * math::exp(-d * d * inv_two_l2)
            })
            .collect();
        let mu = self.mean + k_star.iter().zip(&self.alpha).map(|(a, b)| a * b).sum::<f64>();
        forward_solve(&self.chol, m, &mut k_star);
        let var = self.amplitude - k_star.iter().map(|v| v * v).sum::<f64>();
        (mu, math::sqrt(var.max(0.0)))
    }
}

fn expected_improvement(mu: f64, sigma: f64, best: f64, xi: f64) -> f64 {
    if sigma <= 1e-12 {
        return 0.0;
    }
    let delta = mu - best - xi;
    let z = delta / sigma;
    (delta * math::normal_cdf(z) + sigma * math::normal_pdf(z)).max(0.0)
}

fn random_unexplored(
    rng: &mut ChaCha8Rng,
    n: usize,
    seen: &BTreeMap<usize, f64>,
) -> Option<usize> {
    if seen.len() >= n {
        return None;
    }
    for _ in 0..128 {
        let k = rng.random_range(1..=n);
        if !seen.contains_key(&k) {
            return Some(k);
        }
    }
    // dense fallback: linear scan from a random start
    let start = rng.random_range(1..=n);
    (0..n)
        .map(|off| (start - 1 + off) % n + 1)
        .find(|k| !seen.contains_key(k))
}

/// Bayesian optimization of `fss` on `{1..N}`.
///
/// Draws `init_points` distinct cutoffs uniformly (seeded) and adds the
/// endpoints 1 and N if unsampled; each iteration refits the surrogate
/// and evaluates the unexplored integer cutoff with the highest expected
/// improvement. Flat observations or a degenerate fit fall back to a
/// uniform random unexplored proposal. At most
/// `init_points + iterations + 2` distinct evaluations are issued.
pub fn bayes_optimize<E>(
    mut fss: impl FnMut(usize) -> Result<f64, E>,
    n: usize,
    cfg: &BayesConfig,
) -> Result<CutoffResult, SearchError<E>> {
    if n == 0 {
        return Err(SearchError::EmptyDomain);
    }
    assert!(cfg.init_points >= 2, "need at least two initial points");
    let mut probe = Probe::new(&mut fss);

    if n <= cfg.init_points + 2 {
        // Domain smaller than the initialization budget: exhaust it.
        for k in 1..=n {
            probe.eval(k)?;
        }
        return Ok(probe.finish(SearchMethod::Bayesian));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in rand::seq::index::sample(&mut rng, n, cfg.init_points) {
        probe.eval(i + 1)?;
    }
    if !probe.seen.contains_key(&1) {
        probe.eval(1)?;
    }
    if !probe.seen.contains_key(&n) {
        probe.eval(n)?;
    }

    let scale = (n - 1) as f64;
    for _ in 0..cfg.iterations {
        if probe.seen.len() >= n {
            break;
        }
        let xs: Vec<f64> = probe.seen.keys().map(|&k| (k - 1) as f64 / scale).collect();
        let ys: Vec<f64> = probe.seen.values().copied().collect();

        let proposal = match Surrogate::fit(&xs, &ys, cfg) {
            Some(gp) => {
                let best_y = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut best_k = None;
                let mut best_ei = 0.0f64;
                for k in 1..=n {
                    if probe.seen.contains_key(&k) {
                        continue;
                    }
                    let (mu, sigma) = gp.predict((k - 1) as f64 / scale);
                    let ei = expected_improvement(mu, sigma, best_y, cfg.xi);
                    if ei > best_ei {
                        best_ei = ei;
                        best_k = Some(k);
                    }
                }
                best_k.or_else(|| random_unexplored(&mut rng, n, &probe.seen))
            }
            None => random_unexplored(&mut rng, n, &probe.seen),
        };
        match proposal {
            Some(k) => {
                probe.eval(k)?;
            }
            None => break,
        }
    }
    Ok(probe.finish(SearchMethod::Bayesian))
}

/// Exhaustive evaluation of every cutoff: the ground-truth oracle. The
/// trace has exactly `N` entries.
pub fn brute_force_cutoff<E>(
    mut fss: impl FnMut(usize) -> Result<f64, E>,
    n: usize,
) -> Result<CutoffResult, SearchError<E>> {
    if n == 0 {
        return Err(SearchError::EmptyDomain);
    }
    let mut probe = Probe::new(&mut fss);
    for k in 1..=n {
        probe.eval(k)?;
    }
    Ok(probe.finish(SearchMethod::BruteForce))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::convert::Infallible;
    use proptest::prelude::*;

    fn ok(f: impl Fn(usize) -> f64) -> impl FnMut(usize) -> Result<f64, Infallible> {
        move |k| Ok(f(k))
    }

    #[test]
    fn brute_force_enumerates_everything() {
        let res = brute_force_cutoff(ok(|k| k as f64), 5).unwrap();
        assert_eq!(res.k_star, 5);
        assert_eq!(res.trace.len(), 5);
        assert_eq!(res.method, SearchMethod::BruteForce);
    }

    #[test]
    fn brute_force_tie_breaks_to_smaller_k() {
        let res = brute_force_cutoff(ok(|k| if k == 3 || k == 7 { 9.0 } else { 0.0 }), 10).unwrap();
        assert_eq!(res.k_star, 3);
    }

    #[test]
    fn brute_force_preserves_partial_trace_on_failure() {
        let err = brute_force_cutoff(|k| if k == 3 { Err("boom") } else { Ok(k as f64) }, 10)
            .unwrap_err();
        match err {
            SearchError::Eval { source, partial_trace } => {
                assert_eq!(source, "boom");
                assert_eq!(partial_trace, vec![(1, 1.0), (2, 2.0)]);
            }
            SearchError::EmptyDomain => panic!("wrong error"),
        }
    }

    #[test]
    fn gss_singleton_domain() {
        let res = golden_section_search(ok(|_| 0.7), 1, &GssConfig::default()).unwrap();
        assert_eq!(res.k_star, 1);
        assert_eq!(res.trace, vec![(1, 0.7)]);
        assert_eq!(res.strict_paper_k, Some(1));
    }

    #[test]
    fn gss_monotone_objectives_reach_the_endpoints() {
        for n in [3usize, 10, 100, 1000] {
            let inc = golden_section_search(ok(|k| k as f64), n, &GssConfig::default()).unwrap();
            assert_eq!(inc.k_star, n, "increasing, n={n}");
            let dec =
                golden_section_search(ok(|k| -(k as f64)), n, &GssConfig::default()).unwrap();
            assert_eq!(dec.k_star, 1, "decreasing, n={n}");
        }
    }

    #[test]
    fn gss_brackets_shrink_by_phi_and_contain_best_probe() {
        let res = golden_section_search(
            ok(|k| -((k as f64 - 300.0) * (k as f64 - 300.0))),
            1000,
            &GssConfig::default(),
        )
        .unwrap();
        let mut prev_width = 999.0;
        for &(a, b) in &res.brackets {
            let width = b - a;
            assert!(
                (width / prev_width - GOLDEN_RATIO_CONJUGATE).abs() < 1e-9,
                "shrink ratio {}",
                width / prev_width
            );
            prev_width = width;
        }
        // unimodal objective: the running best stays inside the (rounded) bracket
        let (a, b) = *res.brackets.last().unwrap();
        let k = res.k_star as f64;
        assert!(k >= a.floor() && k <= b.ceil(), "k*={k} outside [{a}, {b}]");
        // bracket of width 999·phi^10 ~ 8.1 around the true peak
        assert!((res.k_star as i64 - 300).abs() <= 9, "k* = {}", res.k_star);
    }

    #[test]
    fn gss_budget_and_memoization() {
        for n in [1usize, 2, 7, 50, 400] {
            let mut calls = 0usize;
            let res = golden_section_search::<Infallible>(
                |k| {
                    calls += 1;
                    Ok((k as f64 * 0.37).sin())
                },
                n,
                &GssConfig::default(),
            )
            .unwrap();
            assert!(calls <= 13, "n={n}: {calls} distinct evaluations");
            assert_eq!(calls, res.trace.len(), "every call lands in the trace once");
            let mut ks: std::vec::Vec<usize> = res.trace.iter().map(|&(k, _)| k).collect();
            ks.sort_unstable();
            ks.dedup();
            assert_eq!(ks.len(), res.trace.len(), "no cutoff evaluated twice");
        }
    }

    #[test]
    fn gss_default_mode_dominates_strict_paper_rule() {
        for seed in 0..20u64 {
            let res = golden_section_search(
                ok(move |k| {
                    let x = k as f64 + seed as f64;
                    (x * 0.17).sin() + (x * 0.029).cos()
                }),
                500,
                &GssConfig::default(),
            )
            .unwrap();
            let strict = res.strict_paper_k.unwrap();
            let strict_val = res.trace.iter().find(|&&(k, _)| k == strict).unwrap().1;
            assert!(res.fss_at_k_star >= strict_val);
            assert!(res.trace.iter().any(|&(k, _)| k == res.k_star));
        }
    }

    #[test]
    fn bayes_flat_objective_returns_smallest_evaluated() {
        let res = bayes_optimize(ok(|_| 0.42), 100, &BayesConfig::default()).unwrap();
        let smallest = res.trace.iter().map(|&(k, _)| k).min().unwrap();
        assert_eq!(res.k_star, smallest);
        assert_eq!(res.fss_at_k_star, 0.42);
    }

    #[test]
    fn bayes_small_domain_exhausts_once() {
        let mut calls = 0usize;
        let res = bayes_optimize::<Infallible>(
            |k| {
                calls += 1;
                Ok([0.3, 0.9, 0.1][k - 1])
            },
            3,
            &BayesConfig::default(),
        )
        .unwrap();
        assert_eq!(calls, 3);
        assert_eq!(res.k_star, 2);
        assert_eq!(res.trace.len(), 3);
    }

    #[test]
    fn bayes_finds_near_peak_of_smooth_bump() {
        // positive unimodal bump peaking at k = 300
        let bump = |k: usize| {
            let d = (k as f64 - 300.0) / 400.0;
            1.0 / (1.0 + 8.0 * d * d)
        };
        let brute = brute_force_cutoff(ok(bump), 1000).unwrap();
        for seed in [0u64, 1, 7, 42] {
            let cfg = BayesConfig { seed, ..BayesConfig::default() };
            let mut calls = 0usize;
            let res = bayes_optimize::<Infallible>(
                |k| {
                    calls += 1;
                    Ok(bump(k))
                },
                1000,
                &cfg,
            )
            .unwrap();
            assert!(calls <= cfg.init_points + cfg.iterations + 2, "budget blown: {calls}");
            assert!(
                res.fss_at_k_star >= 0.95 * brute.fss_at_k_star,
                "seed {seed}: {} < 0.95 * {}",
                res.fss_at_k_star,
                brute.fss_at_k_star
            );
        }
    }

    #[test]
    fn bayes_is_deterministic_per_seed() {
        let f = |k: usize| ((k as f64) * 0.03).sin().abs();
        let cfg = BayesConfig { seed: 99, ..BayesConfig::default() };
        let a = bayes_optimize(ok(f), 500, &cfg).unwrap();
        let b = bayes_optimize(ok(f), 500, &cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.k_star, b.k_star);
    }

    #[test]
    fn empty_domain_is_an_error() {
        assert!(matches!(
            golden_section_search(ok(|_| 0.0), 0, &GssConfig::default()),
            Err(SearchError::EmptyDomain)
        ));
        assert!(matches!(
            bayes_optimize(ok(|_| 0.0), 0, &BayesConfig::default()),
            Err(SearchError::EmptyDomain)
        ));
        assert!(matches!(
            brute_force_cutoff(ok(|_| 0.0), 0),
            Err(SearchError::EmptyDomain)
        ));
    }

    proptest! {
        /// On strictly unimodal integer objectives with a domain small
        /// enough that ten iterations pin the bracket below unit width,
        /// golden-section search recovers the exact brute-force argmax.
        #[test]
        fn gss_exact_on_small_strictly_unimodal_domains(
            n in 2usize..=60,
            peak_frac in 0.0f64..1.0,
            sharp in 0.5f64..4.0,
        ) {
            let peak = 1.0 + peak_frac * (n as f64 - 1.0);
            let f = move |k: usize| -sharp * (k as f64 - peak) * (k as f64 - peak);
            let gss = golden_section_search(ok(f), n, &GssConfig::default()).unwrap();
            let brute = brute_force_cutoff(ok(f), n).unwrap();
            prop_assert_eq!(gss.k_star, brute.k_star);
        }
    }
}
