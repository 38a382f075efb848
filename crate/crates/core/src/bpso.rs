//! Binary particle swarm optimization over inclusion bitmasks.
//!
//! Canonical formulation: real-valued velocities clamped to
//! `[-v_max, v_max]`, a sigmoid transfer to per-bit set probabilities,
//! Bernoulli position sampling, and elitist personal/global bests.
//! RNG streams are pre-assigned per (particle, iteration), so any
//! evaluation schedule reproduces the same trajectory for a fixed seed.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::math;
use crate::stream_seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpsoConfig {
    pub agents: usize,
    pub iterations: usize,
    /// Inertia decays linearly from `inertia_start` to `inertia_end`
    /// across the iterations.
    pub inertia_start: f64,
    pub inertia_end: f64,
    pub cognitive: f64,
    pub social: f64,
    pub v_max: f64,
    pub seed: u64,
}

impl Default for BpsoConfig {
    fn default() -> Self {
        Self {
            agents: 20,
            iterations: 50,
            inertia_start: 0.9,
            inertia_end: 0.4,
            cognitive: 2.0,
            social: 2.0,
            v_max: 6.0,
            seed: 0,
        }
    }
}

impl BpsoConfig {
    fn validate(&self) {
        assert!(self.agents >= 2, "need at least two agents");
        assert!(self.iterations >= 1, "need at least one iteration");
        assert!(self.v_max > 0.0, "v_max must be positive");
    }

    fn inertia_at(&self, iteration: usize) -> f64 {
        if self.iterations <= 1 {
            return self.inertia_start;
        }
        let progress = (iteration - 1) as f64 / (self.iterations - 1) as f64;
        self.inertia_start + (self.inertia_end - self.inertia_start) * progress
    }
}

/// Outcome of a swarm run.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmResult {
    pub best_mask: Vec<bool>,
    pub best_fitness: f64,
    /// Global-best fitness after initialization and after each
    /// iteration; non-decreasing by elitism.
    pub history: Vec<f64>,
    /// Fitness closure invocations: exactly `agents * (iterations + 1)`.
    pub fitness_calls: usize,
}

/// A fitness evaluation failed; the global best found before the
/// failure rides along so callers can report progress.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmAborted<E> {
    pub source: E,
    pub best_so_far: Option<(Vec<bool>, f64)>,
}

impl<E: fmt::Display> fmt::Display for SwarmAborted<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "swarm fitness evaluation failed: {}", self.source)
    }
}

impl<E: fmt::Debug + fmt::Display> core::error::Error for SwarmAborted<E> {}

/// Sigmoid transfer from velocity to bit-set probability.
pub fn transfer_sigmoid(v: f64) -> f64 {
    math::sigmoid(v)
}

/// Sets one uniformly chosen bit when the mask is empty; non-empty
/// masks pass through untouched.
pub fn repair_mask(mask: &mut [bool], rng: &mut impl Rng) {
    if !mask.is_empty() && mask.iter().all(|&b| !b) {
        let idx = rng.random_range(0..mask.len());
        mask[idx] = true;
    }
}

fn step_velocity(
    v: f64,
    inertia: f64,
    cfg: &BpsoConfig,
    r1: f64,
    r2: f64,
    x: bool,
    pbest: bool,
    gbest: bool,
) -> f64 {
    let x = x as u8 as f64;
    let next = inertia * v
        + cfg.cognitive * r1 * (pbest as u8 as f64 - x)
        + cfg.social * r2 * (gbest as u8 as f64 - x);
    next.clamp(-cfg.v_max, cfg.v_max)
}

/// Runs binary PSO over `n_bits` inclusion bits, maximizing `fitness`.
/// The fitness closure is called exactly `agents * (iterations + 1)`
/// times; memoize inside it if evaluations are expensive.
pub fn optimize<E>(
    n_bits: usize,
    cfg: &BpsoConfig,
    mut fitness: impl FnMut(&[bool]) -> Result<f64, E>,
) -> Result<SwarmResult, SwarmAborted<E>> {
    assert!(n_bits >= 1, "need at least one candidate bit");
    cfg.validate();

    let mut positions: Vec<Vec<bool>> = Vec::with_capacity(cfg.agents);
    let mut velocities: Vec<Vec<f64>> = vec![vec![0.0; n_bits]; cfg.agents];
    for p in 0..cfg.agents {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, p as u64, 0));
        let mut mask: Vec<bool> = (0..n_bits).map(|_| rng.random::<f64>() < 0.5).collect();
        repair_mask(&mut mask, &mut rng);
        positions.push(mask);
    }

    let mut fitness_calls = 0usize;
    let mut global: Option<(Vec<bool>, f64)> = None;
    let mut personal: Vec<(Vec<bool>, f64)> = Vec::with_capacity(cfg.agents);

    for mask in &positions {
        fitness_calls += 1;
        let fit = match fitness(mask) {
            Ok(f) => f,
            Err(source) => {
                return Err(SwarmAborted { source, best_so_far: global });
            }
        };
        personal.push((mask.clone(), fit));
        if global.as_ref().is_none_or(|(_, g)| fit > *g) {
            global = Some((mask.clone(), fit));
        }
    }
    let mut history = Vec::with_capacity(cfg.iterations + 1);
    history.push(global.as_ref().expect("agents >= 2").1);

    for iteration in 1..=cfg.iterations {
        let inertia = cfg.inertia_at(iteration);
        let gbest_mask = global.as_ref().expect("set during init").0.clone();

        for p in 0..cfg.agents {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, p as u64, iteration as u64));
            let pbest_mask = &personal[p].0;
            for j in 0..n_bits {
                let r1 = rng.random::<f64>();
                let r2 = rng.random::<f64>();
                velocities[p][j] = step_velocity(
                    velocities[p][j],
                    inertia,
                    cfg,
                    r1,
                    r2,
                    positions[p][j],
                    pbest_mask[j],
                    gbest_mask[j],
                );
            }
            for j in 0..n_bits {
                let u = rng.random::<f64>();
                positions[p][j] = u < transfer_sigmoid(velocities[p][j]);
            }
            repair_mask(&mut positions[p], &mut rng);
        }

        for p in 0..cfg.agents {
            fitness_calls += 1;
            let fit = match fitness(&positions[p]) {
                Ok(f) => f,
                Err(source) => {
                    return Err(SwarmAborted { source, best_so_far: global });
                }
            };
            if fit > personal[p].1 {
                personal[p] = (positions[p].clone(), fit);
            }
            if fit > global.as_ref().expect("set during init").1 {
                global = Some((positions[p].clone(), fit));
            }
        }
        history.push(global.as_ref().expect("set during init").1);
    }

    let (best_mask, best_fitness) = global.expect("agents >= 2");
    Ok(SwarmResult { best_mask, best_fitness, history, fitness_calls })
}
