use ndarray::{ArrayView2, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{timed_fit_predict, MetricsReport};
use crate::classifiers::ModelSpec;
use crate::error::{Error, Result};
use crate::rng::{stage_rng, TAG_KFOLD};

/// Assignment of every row to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub fold_of: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    /// `(training rows, held-out rows)` for `fold`, both ascending.
    pub fn train_test(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.fold_of.len()).partition(|&r| self.fold_of[r] != fold)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified folds: each class is shuffled and dealt round-robin, the deal
/// continuing where the previous class stopped so fold sizes stay balanced.
pub fn kfold_indices(y: &[u8], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::invalid(format!("k = {k}; need at least 2 folds")));
    }
    if let Some(v) = y.iter().find(|&&v| v > 1) {
        return Err(Error::invalid(format!("non-binary label {v}")));
    }
    let mut rng = stage_rng(seed, TAG_KFOLD);
    let mut fold_of = vec![0; y.len()];
    let mut offset = 0;
    for class in [0u8, 1] {
        let mut rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if rows.len() < k {
            return Err(Error::invalid(format!(
                "class {class} has {} rows, fewer than k = {k}",
                rows.len()
            )));
        }
        rows.shuffle(&mut rng);
        for (j, &r) in rows.iter().enumerate() {
            fold_of[r] = (offset + j) % k;
        }
        offset = (offset + rows.len()) % k;
    }
    Ok(FoldPlan { k, fold_of, seed })
}

#[derive(Debug, Clone)]
pub struct CvResult {
    pub folds: Vec<MetricsReport>,
}

impl CvResult {
    pub fn mean(&self, f: impl Fn(&MetricsReport) -> f64) -> f64 {
        self.folds.iter().map(&f).sum::<f64>() / self.folds.len() as f64
    }

    /// Population standard deviation across folds.
    pub fn std(&self, f: impl Fn(&MetricsReport) -> f64) -> f64 {
        let m = self.mean(&f);
        (self.folds.iter().map(|r| (f(r) - m).powi(2)).sum::<f64>() / self.folds.len() as f64).sqrt()
    }
}

/// Fits on `k - 1` folds and scores the held-out fold, for every fold.
pub fn cross_validate(spec: &ModelSpec, x: ArrayView2<f64>, y: &[u8], plan: &FoldPlan) -> Result<CvResult> {
    if plan.fold_of.len() != y.len() || x.nrows() != y.len() {
        return Err(Error::invalid("fold plan, features and labels differ in length"));
    }
    let folds = (0..plan.k)
        .into_par_iter()
        .map(|fold| {
            let (train, test) = plan.train_test(fold);
            let y_train: Vec<u8> = train.iter().map(|&i| y[i]).collect();
            let pos = y_train.iter().filter(|&&v| v == 1).count();
            if pos == 0 || pos == y_train.len() {
                return Err(Error::SingleClass(format!("training rows of fold {fold}")));
            }
            let y_test: Vec<u8> = test.iter().map(|&i| y[i]).collect();
            let x_train = x.select(Axis(0), &train);
            let x_test = x.select(Axis(0), &test);
            Ok(timed_fit_predict(spec, x_train.view(), &y_train, x_test.view(), &y_test)?.report)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CvResult { folds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::Family;
    use ndarray::Array2;

    #[test]
    fn balanced_ten_rows_five_folds() {
        let y: Vec<u8> = (0..10).map(|i| (i % 2) as u8).collect();
        let plan = kfold_indices(&y, 5, 3).unwrap();
        assert_eq!(plan.fold_sizes(), vec![2; 5]);
        for f in 0..5 {
            let (_, test) = plan.train_test(f);
            assert_eq!(test.iter().filter(|&&i| y[i] == 1).count(), 1);
        }
    }

    #[test]
    fn class_smaller_than_k_rejected() {
        assert!(kfold_indices(&[0, 0, 0, 1], 2, 0).is_err());
        assert!(kfold_indices(&[0, 0, 1, 1], 1, 0).is_err());
    }

    #[test]
    fn perfect_data_scores_one() {
        let x = Array2::from_shape_fn((40, 1), |(i, _)| if i < 20 { i as f64 } else { i as f64 + 100.0 });
        let y: Vec<u8> = (0..40).map(|i| u8::from(i >= 20)).collect();
        let plan = kfold_indices(&y, 4, 1).unwrap();
        let cv = cross_validate(&ModelSpec::new(Family::DT), x.view(), &y, &plan).unwrap();
        assert_eq!(cv.folds.len(), 4);
        assert_eq!(cv.mean(|m| m.accuracy), 1.0);
    }
}
