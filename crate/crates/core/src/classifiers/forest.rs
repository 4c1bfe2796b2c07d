use ndarray::ArrayView2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{Columns, Criterion, DecisionTree, Grower, TreeParams};
use super::Family;
use crate::error::{Error, Result};
use crate::rng::{indexed_rng, stage_seed, TAG_MODEL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features tried per split; `None` means `floor(sqrt(n_features))`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: 200,
            criterion: Criterion::Entropy,
            max_depth: Some(10),
            min_samples_leaf: 1,
            max_features: None,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub(crate) fn validated(self) -> Result<Self> {
        if self.n_estimators == 0 {
            return Err(Error::hparam(Family::RF, "n_estimators must be >= 1"));
        }
        if self.max_features == Some(0) {
            return Err(Error::hparam(Family::RF, "max_features must be >= 1"));
        }
        self.tree_params().validated(Family::RF)?;
        Ok(self)
    }

    fn tree_params(&self) -> TreeParams {
        TreeParams {
            criterion: self.criterion,
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Mean of the trees' leaf scores.
    pub fn predict_score(&self, x: ArrayView2<f64>) -> Vec<f64> {
        self.accumulate(x, |s| s)
    }

    /// Fraction of trees voting attack (leaf score >= 0.5).
    pub fn vote_fraction(&self, x: ArrayView2<f64>) -> Vec<f64> {
        self.accumulate(x, |s| if s >= 0.5 { 1.0 } else { 0.0 })
    }

    fn accumulate(&self, x: ArrayView2<f64>, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let x = x.as_standard_layout();
        let n_trees = self.trees.len() as f64;
        x.outer_iter()
            .map(|r| {
                let row = r.as_slice().expect("standard layout");
                self.trees.iter().map(|t| f(t.predict_row(row))).sum::<f64>() / n_trees
            })
            .collect()
    }
}

pub(crate) fn fit(x: ArrayView2<f64>, y: &[u8], params: &ForestParams, seed: u64) -> Result<RandomForest> {
    let n = y.len();
    let nf = x.ncols();
    let cols = Columns::new(x);
    let tree_params = params.tree_params();
    let max_features = params
        .max_features
        .unwrap_or_else(|| ((nf as f64).sqrt().floor() as usize).max(1))
        .min(nf);
    let base = stage_seed(seed, TAG_MODEL);

    let trees = (0..params.n_estimators)
        .into_par_iter()
        .map(|t| {
            let mut rng = indexed_rng(base, t as u64);
            let mut weights = vec![0.0; n];
            if params.bootstrap {
                for _ in 0..n {
                    weights[rng.random_range(0..n)] += 1.0;
                }
            } else {
                weights.fill(1.0);
            }
            let rows: Vec<u32> = (0..n as u32).filter(|&r| weights[r as usize] > 0.0).collect();
            Grower::new(&cols, y, &weights, &tree_params)
                .with_feature_sampling(max_features, &mut rng)
                .grow(rows)
        })
        .collect();
    Ok(RandomForest { trees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn one_tree_on_one_row_is_a_leaf() {
        let x = array![[0.3, 0.7]];
        let p = ForestParams {
            n_estimators: 1,
            ..Default::default()
        };
        let f = fit(x.view(), &[1], &p, 3).unwrap();
        assert_eq!(f.trees.len(), 1);
        assert_eq!(f.trees[0].nodes.len(), 1);
        assert_eq!(f.predict_score(x.view()), vec![1.0]);
    }

    #[test]
    fn votes_and_scores_differ() {
        let leaf = |v: f64| DecisionTree {
            nodes: vec![super::super::Node {
                feature: None,
                threshold: 0.0,
                left: 0,
                right: 0,
                leaf_value: v,
            }],
        };
        let forest = RandomForest {
            trees: vec![leaf(0.6), leaf(0.6), leaf(0.0)],
        };
        let x = array![[1.0]];
        assert!((forest.vote_fraction(x.view())[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((forest.predict_score(x.view())[0] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn deterministic_per_seed() {
        let x = ndarray::Array2::from_shape_fn((60, 4), |(i, j)| ((i * 7 + j * 13) % 17) as f64);
        let y: Vec<u8> = (0..60).map(|i| u8::from(i % 3 == 0)).collect();
        let p = ForestParams {
            n_estimators: 5,
            ..Default::default()
        };
        assert_eq!(fit(x.view(), &y, &p, 1).unwrap(), fit(x.view(), &y, &p, 1).unwrap());
        assert_ne!(fit(x.view(), &y, &p, 1).unwrap(), fit(x.view(), &y, &p, 2).unwrap());
    }
}
