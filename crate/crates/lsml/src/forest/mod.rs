//! Random-forest regression with out-of-bag bookkeeping.
//!
//! Trees are CART regressors grown on bootstrap samples; prediction is the
//! mean of the trees. Every random draw comes from a counter-based stream
//! (ChaCha seeded from the forest seed, stream id = tree index or
//! permutation lane), so training is bitwise reproducible for any thread
//! count and out-of-bag sets can be regenerated from the seed alone after
//! deserialization.

mod serialize;
mod tree;

pub use serialize::{read_forest, write_forest};
pub use tree::RegressionTree;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use tree::{GrowParams, Rows};

/// Stream-id offset separating permutation draws from bootstrap draws.
const PERMUTATION_STREAM_BASE: u64 = 1 << 32;

/// Forest hyperparameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestParams {
    /// Number of trees.
    pub n_trees: usize,
    /// Features tried per split; `None` means all.
    pub max_features: Option<usize>,
    /// Minimum rows in a leaf.
    pub min_samples_leaf: usize,
    /// Depth cap; `None` means unlimited.
    pub max_depth: Option<usize>,
    /// Root seed for all random streams.
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: None,
            min_samples_leaf: 1,
            max_depth: None,
            seed: 0,
        }
    }
}

/// A trained forest plus the bookkeeping needed for OOB diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    params: ForestParams,
    trees: Vec<RegressionTree>,
    /// Sorted row indices that were out of bag, per tree.
    oob: Vec<Vec<u32>>,
    n_cols: usize,
    n_rows: usize,
}

fn tree_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Bootstrap draw of `n` rows with replacement; returns the sample and the
/// sorted out-of-bag complement.
fn bootstrap(rng: &mut ChaCha8Rng, n: usize) -> (Vec<u32>, Vec<u32>) {
    let mut in_bag = vec![false; n];
    let mut sample = Vec::with_capacity(n);
    for _ in 0..n {
        let r = rng.random_range(0..n);
        in_bag[r] = true;
        sample.push(r as u32);
    }
    let oob = (0..n as u32).filter(|&r| !in_bag[r as usize]).collect();
    (sample, oob)
}

impl Forest {
    /// Fits a forest on `x` (flat row-major, `n_cols` wide) against `y`.
    pub fn fit(x: &[f64], n_cols: usize, y: &[f64], params: &ForestParams) -> Result<Self> {
        if n_cols == 0 {
            return Err(Error::Argument("x must have at least one column".into()));
        }
        if x.len() % n_cols != 0 {
            return Err(Error::Argument(format!(
                "x length {} is not a multiple of {n_cols} columns",
                x.len()
            )));
        }
        let n_rows = x.len() / n_cols;
        if n_rows < 2 {
            return Err(Error::Argument("fit requires at least 2 rows".into()));
        }
        if y.len() != n_rows {
            return Err(Error::Argument(format!(
                "y length {} does not match {n_rows} rows",
                y.len()
            )));
        }
        if !x.iter().all(|v| v.is_finite()) || !y.iter().all(|v| v.is_finite()) {
            return Err(Error::Argument("training data contains non-finite values".into()));
        }
        if params.n_trees == 0 || params.min_samples_leaf == 0 {
            return Err(Error::Argument("n_trees and min_samples_leaf must be >= 1".into()));
        }

        let rows = Rows { data: x, n_cols };
        let grow = GrowParams {
            max_features: params.max_features.unwrap_or(n_cols).clamp(1, n_cols),
            min_samples_leaf: params.min_samples_leaf,
            max_depth: params.max_depth,
        };
        let fitted: Vec<(RegressionTree, Vec<u32>)> = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = tree_rng(params.seed, t as u64);
                let (sample, oob) = bootstrap(&mut rng, n_rows);
                let tree = RegressionTree::grow(rows, y, sample, &grow, &mut rng);
                (tree, oob)
            })
            .collect();
        let (trees, oob) = fitted.into_iter().unzip();
        Ok(Self { params: params.clone(), trees, oob, n_cols, n_rows })
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    /// Sorted out-of-bag row indices of one tree.
    pub fn oob_indices(&self, tree: usize) -> &[u32] {
        &self.oob[tree]
    }

    /// Mean of the trees' predictions, accumulated in tree order.
    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.n_cols {
            return Err(Error::Argument(format!(
                "row has {} values, forest expects {}",
                row.len(),
                self.n_cols
            )));
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        Ok(sum / self.trees.len() as f64)
    }

    /// Predicts many rows (flat row-major); rows are independent so the
    /// batch parallelizes without changing any value.
    pub fn predict_batch(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() % self.n_cols != 0 {
            return Err(Error::Argument(format!(
                "x length {} is not a multiple of {} columns",
                x.len(),
                self.n_cols
            )));
        }
        x.par_chunks(self.n_cols)
            .map(|row| self.predict(row))
            .collect()
    }

    /// R-squared of out-of-bag predictions on the training data: each row is
    /// predicted by the trees for which it was out of bag; rows that were
    /// never out of bag are skipped.
    pub fn oob_r2(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_training_shape(x, y)?;
        let mut acc = vec![0.0f64; self.n_rows];
        let mut cnt = vec![0u32; self.n_rows];
        for (tree, oob) in self.trees.iter().zip(&self.oob) {
            for &r in oob {
                let r = r as usize;
                acc[r] += tree.predict(&x[r * self.n_cols..(r + 1) * self.n_cols]);
                cnt[r] += 1;
            }
        }
        let scored: Vec<usize> = (0..self.n_rows).filter(|&r| cnt[r] > 0).collect();
        if scored.is_empty() {
            return Err(Error::Diagnostic("no rows were ever out of bag".into()));
        }
        let mean_y = scored.iter().map(|&r| y[r]).sum::<f64>() / scored.len() as f64;
        let ss_tot: f64 = scored.iter().map(|&r| (y[r] - mean_y).powi(2)).sum();
        if ss_tot == 0.0 {
            return Err(Error::Diagnostic("target variance is zero on OOB rows".into()));
        }
        let ss_res: f64 = scored
            .iter()
            .map(|&r| {
                let pred = acc[r] / cnt[r] as f64;
                (y[r] - pred).powi(2)
            })
            .sum();
        Ok(1.0 - ss_res / ss_tot)
    }

    /// Permutation feature importance on the out-of-bag rows: per tree and
    /// feature, the increase in OOB mean squared error after permuting that
    /// feature's values, averaged over trees, floored at zero and normalized
    /// to sum to one. An all-zero vector stays all-zero.
    pub fn permutation_importance(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_training_shape(x, y)?;
        let n_cols = self.n_cols;
        let used: Vec<usize> = (0..self.trees.len())
            .filter(|&t| !self.oob[t].is_empty())
            .collect();
        if used.is_empty() {
            return Err(Error::Diagnostic("no tree has out-of-bag rows".into()));
        }

        let per_tree: Vec<Vec<f64>> = used
            .par_iter()
            .map(|&t| {
                let tree = &self.trees[t];
                let oob = &self.oob[t];
                let m = oob.len() as f64;
                let row = |r: u32| &x[r as usize * n_cols..(r as usize + 1) * n_cols];
                let base_mse = oob
                    .iter()
                    .map(|&r| (tree.predict(row(r)) - y[r as usize]).powi(2))
                    .sum::<f64>()
                    / m;
                let mut deltas = vec![0.0f64; n_cols];
                let mut values: Vec<f64> = Vec::with_capacity(oob.len());
                for (j, delta) in deltas.iter_mut().enumerate() {
                    values.clear();
                    values.extend(oob.iter().map(|&r| x[r as usize * n_cols + j]));
                    let mut rng = tree_rng(
                        self.params.seed,
                        PERMUTATION_STREAM_BASE + (t * n_cols + j) as u64,
                    );
                    shuffle(&mut values, &mut rng);
                    let mse = oob
                        .iter()
                        .zip(&values)
                        .map(|(&r, &v)| (tree.predict_swapped(row(r), j, v) - y[r as usize]).powi(2))
                        .sum::<f64>()
                        / m;
                    *delta = mse - base_mse;
                }
                deltas
            })
            .collect();

        let mut raw = vec![0.0f64; n_cols];
        for deltas in &per_tree {
            for (a, d) in raw.iter_mut().zip(deltas) {
                *a += d;
            }
        }
        for a in &mut raw {
            *a = (*a / used.len() as f64).max(0.0);
        }
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            for a in &mut raw {
                *a /= total;
            }
        }
        Ok(raw)
    }

    fn check_training_shape(&self, x: &[f64], y: &[f64]) -> Result<()> {
        if x.len() != self.n_rows * self.n_cols || y.len() != self.n_rows {
            return Err(Error::Argument(format!(
                "expected the training matrix ({} rows x {} cols)",
                self.n_rows, self.n_cols
            )));
        }
        Ok(())
    }

    pub(crate) fn from_parts(
        params: ForestParams,
        trees: Vec<RegressionTree>,
        n_cols: usize,
        n_rows: usize,
    ) -> Self {
        // OOB sets are a pure function of (seed, tree index, n_rows).
        let oob = (0..trees.len())
            .map(|t| {
                let mut rng = tree_rng(params.seed, t as u64);
                bootstrap(&mut rng, n_rows).1
            })
            .collect();
        Self { params, trees, oob, n_cols, n_rows }
    }
}

/// Fisher-Yates with draws from the stream RNG.
fn shuffle(values: &mut [f64], rng: &mut ChaCha8Rng) {
    for i in (1..values.len()).rev() {
        let j = rng.random_range(0..=i);
        values.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_data(n: usize, n_cols: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        // y depends on feature 0 only, through a step function
        let mut rng = tree_rng(seed, 999);
        let mut x = Vec::with_capacity(n * n_cols);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let mut row = Vec::with_capacity(n_cols);
            for _ in 0..n_cols {
                row.push(rng.random_range(0.0..1.0));
            }
            y.push(if row[0] > 0.5 { 10.0 } else { -10.0 });
            x.extend(row);
        }
        (x, y)
    }

    #[test]
    fn constant_target_predicts_constant() {
        let x: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let y = vec![4.2; 40];
        let f = Forest::fit(&x, 1, &y, &ForestParams { n_trees: 7, ..Default::default() }).unwrap();
        assert_eq!(f.predict(&[3.0]).unwrap(), 4.2);
        assert!(f.trees().iter().all(|t| t.n_nodes() == 1));
    }

    #[test]
    fn balanced_binary_target_is_exact() {
        let x: Vec<f64> = (0..200).map(|i| (i % 2) as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| 10.0 * v).collect();
        let f = Forest::fit(&x, 1, &y, &ForestParams { n_trees: 20, seed: 3, ..Default::default() })
            .unwrap();
        assert_eq!(f.predict(&[0.0]).unwrap(), 0.0);
        assert_eq!(f.predict(&[1.0]).unwrap(), 10.0);
    }

    #[test]
    fn refitting_is_bitwise_identical() {
        let (x, y) = step_data(300, 4, 7);
        let params = ForestParams { n_trees: 12, seed: 42, ..Default::default() };
        let a = Forest::fit(&x, 4, &y, &params).unwrap();
        let b = Forest::fit(&x, 4, &y, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn determinism_across_thread_counts() {
        let (x, y) = step_data(400, 4, 11);
        let params = ForestParams { n_trees: 16, seed: 5, ..Default::default() };
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let a = single.install(|| Forest::fit(&x, 4, &y, &params)).unwrap();
        let b = many.install(|| Forest::fit(&x, 4, &y, &params)).unwrap();
        assert_eq!(a, b);
        let ia = single.install(|| a.permutation_importance(&x, &y)).unwrap();
        let ib = many.install(|| b.permutation_importance(&x, &y)).unwrap();
        assert_eq!(ia, ib);
    }

    #[test]
    fn prediction_within_target_range() {
        let (x, y) = step_data(500, 3, 13);
        let f = Forest::fit(&x, 3, &y, &ForestParams { n_trees: 10, seed: 1, ..Default::default() })
            .unwrap();
        let (lo, hi) = (-10.0, 10.0);
        let _ = y;
        let mut rng = tree_rng(77, 0);
        for _ in 0..50 {
            let row = [rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0), 0.5];
            let p = f.predict(&row).unwrap();
            assert!((lo..=hi).contains(&p));
        }
    }

    #[test]
    fn in_bag_rows_are_interpolated() {
        // single tree, duplicate-free x: training error on its bootstrap
        // sample is exactly zero
        let n = 64;
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..n).map(|i| ((i * 37) % 11) as f64).collect();
        let f = Forest::fit(&x, 1, &y, &ForestParams { n_trees: 1, seed: 9, ..Default::default() })
            .unwrap();
        let oob: std::collections::HashSet<u32> = f.oob_indices(0).iter().copied().collect();
        for r in 0..n {
            if !oob.contains(&(r as u32)) {
                assert_eq!(f.predict(&[x[r]]).unwrap(), y[r], "in-bag row {r}");
            }
        }
    }

    #[test]
    fn oob_fraction_near_e_inverse() {
        let (x, y) = step_data(1000, 2, 21);
        let f = Forest::fit(&x, 2, &y, &ForestParams { n_trees: 30, seed: 2, ..Default::default() })
            .unwrap();
        for t in 0..30 {
            let frac = f.oob_indices(t).len() as f64 / 1000.0;
            assert!((0.30..=0.44).contains(&frac), "tree {t}: OOB fraction {frac}");
        }
    }

    #[test]
    fn oob_r2_on_learnable_target() {
        let (x, y) = step_data(5000, 5, 17);
        let f = Forest::fit(
            &x,
            5,
            &y,
            &ForestParams { n_trees: 30, seed: 4, ..Default::default() },
        )
        .unwrap();
        let r2 = f.oob_r2(&x, &y).unwrap();
        assert!(r2 >= 0.9, "R^2 = {r2}");
    }

    #[test]
    fn oob_r2_on_noise_is_small() {
        let mut rng = tree_rng(31, 0);
        let n = 600;
        let x: Vec<f64> = (0..n * 3).map(|_| rng.random_range(0.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = Forest::fit(&x, 3, &y, &ForestParams { n_trees: 40, seed: 8, ..Default::default() })
            .unwrap();
        let r2 = f.oob_r2(&x, &y).unwrap();
        assert!(r2 <= 0.1, "R^2 = {r2}");
    }

    #[test]
    fn oob_r2_errors_on_constant_target() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let y = vec![1.0; 50];
        let f = Forest::fit(&x, 1, &y, &ForestParams { n_trees: 5, ..Default::default() }).unwrap();
        assert!(matches!(f.oob_r2(&x, &y), Err(Error::Diagnostic(_))));
    }

    #[test]
    fn importance_concentrates_on_informative_feature() {
        let (x, y) = step_data(2000, 5, 23);
        let f = Forest::fit(
            &x,
            5,
            &y,
            &ForestParams { n_trees: 30, seed: 6, ..Default::default() },
        )
        .unwrap();
        let imp = f.permutation_importance(&x, &y).unwrap();
        let sum: f64 = imp.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(imp[0] >= 0.8, "importance of the informative feature: {}", imp[0]);
        for j in 1..5 {
            assert!(imp[j] <= 0.05, "noise feature {j} scored {}", imp[j]);
        }
    }

    #[test]
    fn constant_column_has_zero_importance() {
        let (mut x, y) = step_data(800, 3, 29);
        // make column 2 constant
        for r in 0..800 {
            x[r * 3 + 2] = 7.0;
        }
        let f = Forest::fit(&x, 3, &y, &ForestParams { n_trees: 20, seed: 10, ..Default::default() })
            .unwrap();
        let imp = f.permutation_importance(&x, &y).unwrap();
        assert_eq!(imp[2], 0.0);
    }

    #[test]
    fn invalid_inputs_rejected() {
        let x = vec![0.0, 1.0];
        assert!(Forest::fit(&x, 1, &[0.0], &ForestParams::default()).is_err());
        assert!(Forest::fit(&x, 1, &[0.0, f64::NAN], &ForestParams::default()).is_err());
        assert!(Forest::fit(&[0.0], 1, &[0.0], &ForestParams::default()).is_err());
        let f = Forest::fit(&x, 1, &[0.0, 1.0], &ForestParams { n_trees: 2, ..Default::default() })
            .unwrap();
        assert!(f.predict(&[0.0, 1.0]).is_err());
    }
}
