//! CART regression trees with variance-reduction splits.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

/// Array-encoded tree node. Internal nodes carry a split; leaves carry the
/// mean target of their training rows.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Node {
    /// Split feature index, or -1 for a leaf.
    pub feature: i32,
    /// Split threshold for internal nodes; leaf mean otherwise.
    pub value: f64,
    /// Child indices (unused on leaves).
    pub left: u32,
    pub right: u32,
}

/// A regression tree over rows of a fixed-width matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    pub(crate) nodes: Vec<Node>,
}

/// Flat row-major view of the training matrix.
#[derive(Clone, Copy)]
pub(crate) struct Rows<'a> {
    pub data: &'a [f64],
    pub n_cols: usize,
}

impl<'a> Rows<'a> {
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols + col]
    }
}

pub(crate) struct GrowParams {
    pub max_features: usize,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
}

impl RegressionTree {
    /// Predicts by walking the tree; `row` must have the training width.
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut idx = 0usize;
        loop {
            let node = &self.nodes[idx];
            if node.feature < 0 {
                return node.value;
            }
            idx = if row[node.feature as usize] <= node.value {
                node.left as usize
            } else {
                node.right as usize
            };
        }
    }

    /// Variant used for permutation importance: feature `swap_col` reads
    /// from `swap_value` instead of the row.
    pub(crate) fn predict_swapped(&self, row: &[f64], swap_col: usize, swap_value: f64) -> f64 {
        let mut idx = 0usize;
        loop {
            let node = &self.nodes[idx];
            if node.feature < 0 {
                return node.value;
            }
            let f = node.feature as usize;
            let v = if f == swap_col { swap_value } else { row[f] };
            idx = if v <= node.value { node.left as usize } else { node.right as usize };
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Grows a tree on the given sample rows (with multiplicity). The RNG
    /// drives per-node feature subsampling when `max_features` is smaller
    /// than the column count.
    pub(crate) fn grow(
        x: Rows<'_>,
        y: &[f64],
        sample: Vec<u32>,
        params: &GrowParams,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut nodes = Vec::new();
        let mut feature_pool: Vec<usize> = (0..x.n_cols).collect();
        grow_node(x, y, sample, 0, params, rng, &mut nodes, &mut feature_pool);
        RegressionTree { nodes }
    }
}

/// Recursively grows the subtree rooted at the next free node index and
/// returns that index.
#[allow(clippy::too_many_arguments)]
fn grow_node(
    x: Rows<'_>,
    y: &[f64],
    rows: Vec<u32>,
    depth: usize,
    params: &GrowParams,
    rng: &mut ChaCha8Rng,
    nodes: &mut Vec<Node>,
    feature_pool: &mut Vec<usize>,
) -> u32 {
    let idx = nodes.len() as u32;
    let n = rows.len();
    debug_assert!(n > 0);
    let sum: f64 = rows.iter().map(|&r| y[r as usize]).sum();
    let mean = sum / n as f64;

    let depth_capped = params.max_depth.is_some_and(|d| depth >= d);
    let splittable = n >= 2 * params.min_samples_leaf && !depth_capped && !constant(y, &rows);
    if !splittable {
        nodes.push(Node { feature: -1, value: mean, left: 0, right: 0 });
        return idx;
    }

    let candidates: Vec<usize> = if params.max_features >= x.n_cols {
        (0..x.n_cols).collect()
    } else {
        // sampled without replacement, then ordered so ties break toward the
        // smallest feature index
        let (chosen, _) = feature_pool.partial_shuffle(rng, params.max_features);
        let mut chosen = chosen.to_vec();
        chosen.sort_unstable();
        chosen
    };

    let best = best_split(x, y, &rows, &candidates, params.min_samples_leaf);
    let Some((feature, threshold)) = best else {
        nodes.push(Node { feature: -1, value: mean, left: 0, right: 0 });
        return idx;
    };

    let (left_rows, right_rows): (Vec<u32>, Vec<u32>) =
        rows.into_iter().partition(|&r| x.at(r as usize, feature) <= threshold);
    debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());

    nodes.push(Node { feature: feature as i32, value: threshold, left: 0, right: 0 });
    let left = grow_node(x, y, left_rows, depth + 1, params, rng, nodes, feature_pool);
    let right = grow_node(x, y, right_rows, depth + 1, params, rng, nodes, feature_pool);
    nodes[idx as usize].left = left;
    nodes[idx as usize].right = right;
    idx
}

fn constant(y: &[f64], rows: &[u32]) -> bool {
    let first = y[rows[0] as usize];
    rows.iter().all(|&r| y[r as usize] == first)
}

/// Greedy best split over candidate features: maximize the weighted variance
/// reduction, equivalently minimize the summed within-child squared error.
/// Thresholds are midpoints between consecutive distinct values; ties keep
/// the first (smallest feature index, then smallest threshold).
fn best_split(
    x: Rows<'_>,
    y: &[f64],
    rows: &[u32],
    candidates: &[usize],
    min_samples_leaf: usize,
) -> Option<(usize, f64)> {
    let n = rows.len();
    let mut best: Option<(f64, usize, f64)> = None; // (cost, feature, threshold)
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);

    for &feature in candidates {
        pairs.clear();
        pairs.extend(rows.iter().map(|&r| (x.at(r as usize, feature), y[r as usize])));
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pairs[0].0 == pairs[n - 1].0 {
            continue;
        }

        // prefix sums over the sorted order
        let mut left_sum = 0.0f64;
        let mut left_sq = 0.0f64;
        let total_sum: f64 = pairs.iter().map(|p| p.1).sum();
        let total_sq: f64 = pairs.iter().map(|p| p.1 * p.1).sum();

        for split in 1..n {
            left_sum += pairs[split - 1].1;
            left_sq += pairs[split - 1].1 * pairs[split - 1].1;
            if pairs[split - 1].0 == pairs[split].0 {
                continue;
            }
            if split < min_samples_leaf || n - split < min_samples_leaf {
                continue;
            }
            let right_sum = total_sum - left_sum;
            let right_sq = total_sq - left_sq;
            let cost = (left_sq - left_sum * left_sum / split as f64)
                + (right_sq - right_sum * right_sum / (n - split) as f64);
            if best.is_none_or(|(c, _, _)| cost < c) {
                let threshold = 0.5 * (pairs[split - 1].0 + pairs[split].0);
                best = Some((cost, feature, threshold));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn grow_simple(x: &[f64], n_cols: usize, y: &[f64]) -> RegressionTree {
        let rows = Rows { data: x, n_cols };
        let sample: Vec<u32> = (0..y.len() as u32).collect();
        let params = GrowParams { max_features: n_cols, min_samples_leaf: 1, max_depth: None };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        RegressionTree::grow(rows, y, sample, &params, &mut rng)
    }

    #[test]
    fn constant_target_is_single_leaf() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [4.2; 4];
        let tree = grow_simple(&x, 1, &y);
        assert_eq!(tree.n_nodes(), 1);
        assert_eq!(tree.predict(&[10.0]), 4.2);
    }

    #[test]
    fn perfect_binary_split() {
        let x: Vec<f64> = (0..200).map(|i| (i % 2) as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| 10.0 * v).collect();
        let tree = grow_simple(&x, 1, &y);
        assert_eq!(tree.predict(&[0.0]), 0.0);
        assert_eq!(tree.predict(&[1.0]), 10.0);
        assert_eq!(tree.n_nodes(), 3);
    }

    #[test]
    fn interpolates_training_rows_exactly() {
        // duplicate-free x, unlimited depth, leaf size 1: zero training error
        let x: Vec<f64> = (0..64).flat_map(|i| [(i as f64), (i * i) as f64 * 0.01]).collect();
        let y: Vec<f64> = (0..64).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let tree = grow_simple(&x, 2, &y);
        for i in 0..64 {
            let row = [x[2 * i], x[2 * i + 1]];
            assert_eq!(tree.predict(&row), y[i], "row {i}");
        }
    }

    #[test]
    fn min_samples_leaf_respected() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..20).map(|i| if i < 3 { 100.0 } else { 0.0 }).collect();
        let rows = Rows { data: &x, n_cols: 1 };
        let params = GrowParams { max_features: 1, min_samples_leaf: 5, max_depth: None };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = RegressionTree::grow(rows, &y, (0..20).collect(), &params, &mut rng);
        // every leaf must hold >= 5 rows: count rows routed to each leaf
        let mut counts = std::collections::HashMap::new();
        for i in 0..20 {
            let mut idx = 0usize;
            loop {
                let node = &tree.nodes[idx];
                if node.feature < 0 {
                    *counts.entry(idx).or_insert(0usize) += 1;
                    break;
                }
                idx = if x[i] <= node.value { node.left as usize } else { node.right as usize };
            }
        }
        assert!(counts.values().all(|&c| c >= 5), "{counts:?}");
    }
}
