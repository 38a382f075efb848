//! Gradient-boosted shallow regression trees: the built-in evaluator's
//! learner. Squared loss for regression, logistic loss for binary
//! classification, one-vs-rest for multiclass.
//!
//! Split finding is exact greedy over sorted unique values with ties
//! resolved to the lower threshold and the lower feature index, so
//! training is fully deterministic. Matrices are column-major
//! (`&[Vec<f64>]`, one `Vec` per feature).

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Hyperparameters of the boosted learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbdtParams {
    pub rounds: usize,
    pub depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self { rounds: 100, depth: 3, learning_rate: 0.1, min_leaf: 1 }
    }
}

impl GbdtParams {
    fn validate(&self) {
        assert!(self.rounds >= 1, "rounds must be >= 1");
        assert!(self.depth >= 1, "depth must be >= 1");
        assert!(
            self.learning_rate > 0.0 && self.learning_rate <= 1.0,
            "learning_rate must be in (0, 1]"
        );
        assert!(self.min_leaf >= 1, "min_leaf must be >= 1");
    }
}

#[derive(Debug, Clone)]
enum Node {
    Split { feature: u32, threshold: f64, left: u32, right: u32 },
    Leaf { value: f64 },
}

/// One regression tree; rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict_row(&self, columns: &[Vec<f64>], row: usize) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    at = if columns[*feature as usize][row] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }
}

const EPS_HESSIAN: f64 = 1e-12;

fn node_value(sum_g: f64, sum_h: f64) -> f64 {
    sum_g / sum_h.max(EPS_HESSIAN)
}

fn node_score(sum_g: f64, sum_h: f64) -> f64 {
    sum_g * sum_g / sum_h.max(EPS_HESSIAN)
}

/// Row indices per feature, sorted ascending by value (stable, so ties
/// keep row order). Computed once per training matrix and shared by all
/// rounds.
fn presort(columns: &[Vec<f64>]) -> Vec<Vec<u32>> {
    columns
        .iter()
        .map(|col| {
            let mut idx: Vec<u32> = (0..col.len() as u32).collect();
            idx.sort_by(|&a, &b| {
                col[a as usize]
                    .partial_cmp(&col[b as usize])
                    .expect("non-finite feature value")
            });
            idx
        })
        .collect()
}

struct BuildNode {
    sum_g: f64,
    sum_h: f64,
    count: usize,
    depth: usize,
    split: Option<(u32, f64, u32, u32)>, // feature, threshold, left id, right id
}

/// Fits one tree to (grad, hess) and returns it together with each row's
/// leaf output, so the caller can update margins without re-walking.
fn fit_tree(
    columns: &[Vec<f64>],
    sorted_idx: &[Vec<u32>],
    grad: &[f64],
    hess: &[f64],
    params: &GbdtParams,
) -> (Tree, Vec<f64>) {
    let n = grad.len();
    let mut nodes: Vec<BuildNode> = Vec::new();
    nodes.push(BuildNode {
        sum_g: grad.iter().sum(),
        sum_h: hess.iter().sum(),
        count: n,
        depth: 0,
        split: None,
    });
    let mut node_of_row: Vec<u32> = vec![0; n];
    let mut level: Vec<u32> = vec![0];

    for _depth in 0..params.depth {
        // Candidate nodes for this level: enough rows to split further.
        let splittable: Vec<u32> = level
            .iter()
            .copied()
            .filter(|&id| nodes[id as usize].count >= 2 * params.min_leaf)
            .collect();
        if splittable.is_empty() {
            break;
        }

        // slot_of_node maps a node id to its scan-state slot, u32::MAX = inactive
        let mut slot_of_node: Vec<u32> = vec![u32::MAX; nodes.len()];
        for (slot, &id) in splittable.iter().enumerate() {
            slot_of_node[id as usize] = slot as u32;
        }
        let n_slots = splittable.len();
        let mut best_gain = vec![0.0f64; n_slots];
        let mut best_split: Vec<Option<(u32, f64)>> = vec![None; n_slots];
        let parent_score: Vec<f64> = splittable
            .iter()
            .map(|&id| node_score(nodes[id as usize].sum_g, nodes[id as usize].sum_h))
            .collect();

        let mut left_g = vec![0.0f64; n_slots];
        let mut left_h = vec![0.0f64; n_slots];
        let mut left_cnt = vec![0usize; n_slots];
        let mut last_val = vec![0.0f64; n_slots];

        for (f, order) in sorted_idx.iter().enumerate() {
            left_g.fill(0.0);
            left_h.fill(0.0);
            left_cnt.fill(0);
            let col = &columns[f];
            for &r in order {
                let r = r as usize;
                let slot = slot_of_node[node_of_row[r] as usize];
                if slot == u32::MAX {
                    continue;
                }
                let slot = slot as usize;
                let v = col[r];
                let node = &nodes[splittable[slot] as usize];
                if left_cnt[slot] > 0 && v > last_val[slot] {
                    let right_cnt = node.count - left_cnt[slot];
                    if left_cnt[slot] >= params.min_leaf && right_cnt >= params.min_leaf {
                        let gain = node_score(left_g[slot], left_h[slot])
                            + node_score(node.sum_g - left_g[slot], node.sum_h - left_h[slot])
                            - parent_score[slot];
                        // strict '>' keeps the lower threshold and lower
                        // feature index on ties
                        if gain > best_gain[slot] && gain > 1e-12 {
                            best_gain[slot] = gain;
                            best_split[slot] = Some((f as u32, last_val[slot]));
                        }
                    }
                }
                left_g[slot] += grad[r];
                left_h[slot] += hess[r];
                left_cnt[slot] += 1;
                last_val[slot] = v;
            }
        }

        // Materialize the chosen splits and reassign rows.
        let mut any_split = false;
        for (slot, &id) in splittable.iter().enumerate() {
            let Some((feature, threshold)) = best_split[slot] else {
                continue;
            };
            any_split = true;
            let depth = nodes[id as usize].depth;
            let left_id = nodes.len() as u32;
            let right_id = left_id + 1;
            nodes.push(BuildNode { sum_g: 0.0, sum_h: 0.0, count: 0, depth: depth + 1, split: None });
            nodes.push(BuildNode { sum_g: 0.0, sum_h: 0.0, count: 0, depth: depth + 1, split: None });
            nodes[id as usize].split = Some((feature, threshold, left_id, right_id));
        }
        if !any_split {
            break;
        }

        let mut next_level: Vec<u32> = Vec::new();
        for r in 0..n {
            let id = node_of_row[r] as usize;
            if let Some((feature, threshold, left, right)) = nodes[id].split {
                let child = if columns[feature as usize][r] <= threshold { left } else { right };
                node_of_row[r] = child;
                let c = &mut nodes[child as usize];
                c.sum_g += grad[r];
                c.sum_h += hess[r];
                c.count += 1;
            }
        }
        for &id in &splittable {
            if let Some((.., left, right)) = nodes[id as usize].split {
                next_level.push(left);
                next_level.push(right);
            }
        }
        level = next_level;
    }

    let tree_nodes: Vec<Node> = nodes
        .iter()
        .map(|b| match b.split {
            Some((feature, threshold, left, right)) => Node::Split { feature, threshold, left, right },
            None => Node::Leaf { value: node_value(b.sum_g, b.sum_h) },
        })
        .collect();
    let outputs: Vec<f64> = node_of_row
        .iter()
        .map(|&id| match &tree_nodes[id as usize] {
            Node::Leaf { value } => *value,
            Node::Split { .. } => unreachable!("rows always end in leaves"),
        })
        .collect();
    (Tree { nodes: tree_nodes }, outputs)
}

fn check_matrix(columns: &[Vec<f64>], n_rows: usize) {
    assert!(!columns.is_empty(), "need at least one feature column");
    assert!(n_rows >= 2, "need at least two rows");
    for col in columns {
        assert_eq!(col.len(), n_rows, "ragged column");
    }
}

/// Boosted trees under squared loss.
#[derive(Debug, Clone)]
pub struct GbdtRegressor {
    base: f64,
    trees: Vec<Tree>,
    learning_rate: f64,
}

impl GbdtRegressor {
    pub fn fit(columns: &[Vec<f64>], targets: &[f64], params: &GbdtParams) -> Self {
        params.validate();
        check_matrix(columns, targets.len());
        let n = targets.len();
        let sorted_idx = presort(columns);
        let base = targets.iter().sum::<f64>() / n as f64;
        let mut margins = vec![base; n];
        let hess = vec![1.0f64; n];
        let mut trees = Vec::with_capacity(params.rounds);
        for _ in 0..params.rounds {
            let grad: Vec<f64> = targets.iter().zip(&margins).map(|(&y, &m)| y - m).collect();
            let (tree, outputs) = fit_tree(columns, &sorted_idx, &grad, &hess, params);
            for (m, o) in margins.iter_mut().zip(&outputs) {
                *m += params.learning_rate * o;
            }
            trees.push(tree);
        }
        Self { base, trees, learning_rate: params.learning_rate }
    }

    pub fn predict(&self, columns: &[Vec<f64>]) -> Vec<f64> {
        let n = columns.first().map_or(0, Vec::len);
        (0..n)
            .map(|r| {
                self.base
                    + self.learning_rate
                        * self.trees.iter().map(|t| t.predict_row(columns, r)).sum::<f64>()
            })
            .collect()
    }
}

/// Boosted trees under logistic loss; labels are 0/1.
#[derive(Debug, Clone)]
pub struct GbdtBinaryClassifier {
    base: f64,
    trees: Vec<Tree>,
    learning_rate: f64,
}

impl GbdtBinaryClassifier {
    pub fn fit(columns: &[Vec<f64>], labels: &[usize], params: &GbdtParams) -> Self {
        params.validate();
        check_matrix(columns, labels.len());
        let n = labels.len();
        let y: Vec<f64> = labels
            .iter()
            .map(|&l| {
                assert!(l <= 1, "binary labels must be 0 or 1");
                l as f64
            })
            .collect();
        let sorted_idx = presort(columns);
        let p0 = (y.iter().sum::<f64>() / n as f64).clamp(1e-6, 1.0 - 1e-6);
        let base = math::ln(p0 / (1.0 - p0));
        let mut margins = vec![base; n];
        let mut trees = Vec::with_capacity(params.rounds);
        for _ in 0..params.rounds {
            let mut grad = Vec::with_capacity(n);
            let mut hess = Vec::with_capacity(n);
            for (&yi, &m) in y.iter().zip(&margins) {
                let p = math::sigmoid(m);
                grad.push(yi - p);
                hess.push((p * (1.0 - p)).max(EPS_HESSIAN));
            }
            let (tree, outputs) = fit_tree(columns, &sorted_idx, &grad, &hess, params);
            for (m, o) in margins.iter_mut().zip(&outputs) {
                *m += params.learning_rate * o;
            }
            trees.push(tree);
        }
        Self { base, trees, learning_rate: params.learning_rate }
    }

    /// Raw additive margin; monotone in the positive-class probability.
    pub fn predict_margin(&self, columns: &[Vec<f64>]) -> Vec<f64> {
        let n = columns.first().map_or(0, Vec::len);
        (0..n)
            .map(|r| {
                self.base
                    + self.learning_rate
                        * self.trees.iter().map(|t| t.predict_row(columns, r)).sum::<f64>()
            })
            .collect()
    }

    /// Positive-class probability via the sigmoid of the margin.
    pub fn predict_proba(&self, columns: &[Vec<f64>]) -> Vec<f64> {
        self.predict_margin(columns).into_iter().map(math::sigmoid).collect()
    }
}

/// One-vs-rest ensemble of binary boosted models.
#[derive(Debug, Clone)]
pub struct GbdtMulticlassClassifier {
    per_class: Vec<GbdtBinaryClassifier>,
}

impl GbdtMulticlassClassifier {
    pub fn fit(
        columns: &[Vec<f64>],
        labels: &[usize],
        n_classes: usize,
        params: &GbdtParams,
    ) -> Self {
        assert!(n_classes >= 3, "use GbdtBinaryClassifier for two classes");
        let per_class = (0..n_classes)
            .map(|c| {
                let indicator: Vec<usize> =
                    labels.iter().map(|&l| usize::from(l == c)).collect();
                GbdtBinaryClassifier::fit(columns, &indicator, params)
            })
            .collect();
        Self { per_class }
    }

    /// Per-class probabilities: softmax over the one-vs-rest margins.
    pub fn predict_proba(&self, columns: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let margins: Vec<Vec<f64>> =
            self.per_class.iter().map(|m| m.predict_margin(columns)).collect();
        let n = margins.first().map_or(0, Vec::len);
        (0..n)
            .map(|r| {
                let row: Vec<f64> = margins.iter().map(|m| m[r]).collect();
                let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = row.iter().map(|&v| math::exp(v - max)).collect();
                let sum: f64 = exps.iter().sum();
                exps.into_iter().map(|e| e / sum).collect()
            })
            .collect()
    }

    /// Arg-max class of the margins; ties go to the smaller class index.
    pub fn predict_classes(&self, columns: &[Vec<f64>]) -> Vec<usize> {
        let margins: Vec<Vec<f64>> =
            self.per_class.iter().map(|m| m.predict_margin(columns)).collect();
        let n = margins.first().map_or(0, Vec::len);
        (0..n)
            .map(|r| {
                let mut best = 0usize;
                for c in 1..margins.len() {
                    if margins[c][r] > margins[best][r] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }
}
