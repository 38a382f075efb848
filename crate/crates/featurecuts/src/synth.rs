//! Synthetic dataset generators for testing and benchmarking: planted
//! informative subsets with Gaussian noise, and a madelon-style
//! hypercube-cluster recipe with redundant and noise features.

use rand::Rng;
use rand::SeedableRng;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::{Dataset, Target};

fn feature_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("f{i:04}")).collect()
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Balanced binary classification with `n_informative` planted columns
/// of linearly decaying strength (columns `0..n_informative`), the rest
/// pure noise.
pub fn informative_classification(
    n_rows: usize,
    n_features: usize,
    n_informative: usize,
    seed: u64,
) -> Dataset {
    assert!(n_informative >= 1 && n_informative <= n_features);
    assert!(n_rows >= 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..n_rows).map(|i| i % 2).collect();
    labels.shuffle(&mut rng);

    let mut columns = Vec::with_capacity(n_features);
    for j in 0..n_features {
        if j < n_informative {
            let shift = 2.0 * (1.0 - 0.5 * j as f64 / n_informative as f64);
            columns.push(labels.iter().map(|&c| c as f64 * shift + normal(&mut rng)).collect());
        } else {
            columns.push((0..n_rows).map(|_| normal(&mut rng)).collect());
        }
    }
    Dataset::new(
        columns,
        feature_names(n_features),
        "y".into(),
        Target::Labels { values: labels, classes: vec!["neg".into(), "pos".into()] },
    )
    .expect("generator invariants")
}

/// Regression with `n_informative` planted columns driving the target
/// through decaying coefficients plus mild observation noise.
pub fn informative_regression(
    n_rows: usize,
    n_features: usize,
    n_informative: usize,
    seed: u64,
) -> Dataset {
    assert!(n_informative >= 1 && n_informative <= n_features);
    assert!(n_rows >= 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5eed));
    let columns: Vec<Vec<f64>> =
        (0..n_features).map(|_| (0..n_rows).map(|_| normal(&mut rng)).collect()).collect();
    let mut target = vec![0.0f64; n_rows];
    for j in 0..n_informative {
        let coef = 3.0 * (1.0 - 0.5 * j as f64 / n_informative as f64);
        for (t, v) in target.iter_mut().zip(&columns[j]) {
            *t += coef * v;
        }
    }
    for t in target.iter_mut() {
        *t += 0.3 * normal(&mut rng);
    }
    Dataset::new(columns, feature_names(n_features), "y".into(), Target::Continuous(target))
        .expect("generator invariants")
}

/// Madelon-style binary classification: five latent cluster dimensions
/// with two Gaussian clusters per class on hypercube vertices, linear
/// combinations of them as redundant features (informative + redundant
/// = `n_informative` columns), pure-noise columns for the rest, 1% label
/// flips, and a seeded column shuffle.
///
/// Returns the dataset and the (post-shuffle) indices of the informative
/// columns.
pub fn madelon_like(
    n_rows: usize,
    n_features: usize,
    n_informative: usize,
    seed: u64,
) -> (Dataset, Vec<usize>) {
    const LATENT: usize = 5;
    assert!(n_informative >= LATENT && n_informative <= n_features);
    assert!(n_rows >= 8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Two clusters per class on the first four vertices of the
    // hypercube {0, 2}^5, classes alternating across vertices.
    let vertices: [[f64; LATENT]; 4] = [
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [2.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 2.0, 0.0, 0.0, 0.0],
        [2.0, 2.0, 0.0, 0.0, 0.0],
    ];
    let mut labels = Vec::with_capacity(n_rows);
    let mut latent = vec![vec![0.0f64; n_rows]; LATENT];
    for row in 0..n_rows {
        let cluster = rng.random_range(0..vertices.len());
        labels.push(cluster % 2);
        for (dim, col) in latent.iter_mut().enumerate() {
            col[row] = vertices[cluster][dim] + normal(&mut rng);
        }
    }
    // 1% label noise
    let flips = (n_rows / 100).max(1);
    for _ in 0..flips {
        let row = rng.random_range(0..n_rows);
        labels[row] = 1 - labels[row];
    }
    // both classes must survive the flips
    labels[0] = 0;
    labels[1] = 1;

    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n_features);
    columns.extend(latent.iter().cloned());
    for _ in LATENT..n_informative {
        // redundant feature: random linear combination of the latents
        let coefs: Vec<f64> = (0..LATENT).map(|_| normal(&mut rng)).collect();
        let col: Vec<f64> = (0..n_rows)
            .map(|row| coefs.iter().zip(&latent).map(|(c, l)| c * l[row]).sum())
            .collect();
        columns.push(col);
    }
    for _ in n_informative..n_features {
        columns.push((0..n_rows).map(|_| normal(&mut rng)).collect());
    }

    let mut positions: Vec<usize> = (0..n_features).collect();
    positions.shuffle(&mut rng);
    let mut shuffled: Vec<Vec<f64>> = vec![Vec::new(); n_features];
    for (from, &to) in positions.iter().enumerate() {
        shuffled[to] = std::mem::take(&mut columns[from]);
    }
    let informative_at: Vec<usize> = positions[..n_informative].to_vec();

    let ds = Dataset::new(
        shuffled,
        feature_names(n_features),
        "y".into(),
        Target::Labels { values: labels, classes: vec!["neg".into(), "pos".into()] },
    )
    .expect("generator invariants");
    (ds, informative_at)
}
