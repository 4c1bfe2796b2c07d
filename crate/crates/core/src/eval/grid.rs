use std::collections::BTreeMap;
use std::time::Instant;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::cv::{cross_validate, kfold_indices};
use super::metrics::{MetricsReport, Scoring};
use crate::classifiers::{format_hyperparameters, Family, Hyperparameters, ModelSpec};
use crate::error::{Error, Result};
use crate::rng::{indexed_seed, stage_seed, TAG_TRIAL};

/// Candidate values per hyperparameter. Combinations enumerate axes in name
/// order with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HparamGrid {
    pub family: Family,
    pub axes: BTreeMap<String, Vec<Value>>,
}

impl HparamGrid {
    pub fn new(family: Family, axes: BTreeMap<String, Vec<Value>>) -> Result<Self> {
        let g = HparamGrid { family, axes };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((name, _)) = self.axes.iter().find(|(_, v)| v.is_empty()) {
            return Err(Error::invalid(format!("{} grid axis {name:?} is empty", self.family)));
        }
        Ok(())
    }

    /// Default search space for a family, bracketing the tuned defaults.
    pub fn default_for(family: Family) -> Self {
        let axes: Vec<(&str, Vec<Value>)> = match family {
            Family::LR => vec![
                ("C", vec![json!(0.01), json!(0.1), json!(1.0)]),
                ("max_iter", vec![json!(100), json!(200)]),
            ],
            Family::DT => vec![
                ("criterion", vec![json!("entropy"), json!("gini")]),
                ("max_depth", vec![json!(5), json!(10), json!(20)]),
            ],
            Family::RF => vec![
                ("n_estimators", vec![json!(100), json!(200)]),
                ("max_depth", vec![json!(5), json!(10), json!(20)]),
            ],
            Family::GBT => vec![
                ("learning_rate", vec![json!(0.05), json!(0.1), json!(0.3)]),
                ("max_depth", vec![json!(3), json!(7), json!(10)]),
            ],
            Family::MLP => vec![
                ("hidden_layer_sizes", vec![json!([32]), json!([64]), json!([32, 16])]),
                ("alpha", vec![json!(1e-4), json!(1e-3)]),
            ],
        };
        HparamGrid {
            family,
            axes: axes.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.axes.values().map(Vec::len).product()
    }

    pub fn combos(&self) -> Vec<Hyperparameters> {
        let mut out = vec![Hyperparameters::new()];
        for (name, values) in &self.axes {
            out = out
                .into_iter()
                .flat_map(|h| {
                    values.iter().map(move |v| {
                        let mut h = h.clone();
                        h.insert(name.clone(), v.clone());
                        h
                    })
                })
                .collect();
        }
        out
    }
}

/// Seed used to fit every fold of grid combination `combo`.
pub fn trial_seed(master_seed: u64, combo: usize) -> u64 {
    indexed_seed(stage_seed(master_seed, TAG_TRIAL), combo as u64)
}

/// One fold of one combination.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trial {
    pub combo: usize,
    pub fold: usize,
    pub hyperparameters: Hyperparameters,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComboSummary {
    pub combo: usize,
    pub hyperparameters: Hyperparameters,
    pub mean_score: f64,
    pub std_score: f64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridResult {
    pub family: Family,
    pub scoring: Scoring,
    pub best_combo: usize,
    pub best_hyperparameters: Hyperparameters,
    pub best_score: f64,
    pub combos: Vec<ComboSummary>,
    pub trials: Vec<Trial>,
}

/// Exhaustive search scored by stratified `k`-fold CV. All combinations share
/// one fold plan; ties go to the earlier combination.
pub fn grid_search(
    grid: &HparamGrid,
    x: ArrayView2<f64>,
    y: &[u8],
    k: usize,
    seed: u64,
    scoring: Scoring,
) -> Result<GridResult> {
    grid.validate()?;
    let plan = kfold_indices(y, k, seed)?;
    let combos = grid.combos();
    let evaluated = combos
        .par_iter()
        .enumerate()
        .map(|(i, h)| {
            let spec = ModelSpec {
                family: grid.family,
                hyperparameters: h.clone(),
                seed: trial_seed(seed, i),
            };
            let start = Instant::now();
            let cv = cross_validate(&spec, x, y, &plan).map_err(|e| Error::Trial {
                combo: format!("{} #{i} {{{}}}", grid.family, format_hyperparameters(h)),
                source: Box::new(e),
            })?;
            Ok((cv, start.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summaries = Vec::with_capacity(combos.len());
    let mut trials = Vec::with_capacity(combos.len() * k);
    for (i, ((cv, elapsed), h)) in evaluated.into_iter().zip(&combos).enumerate() {
        summaries.push(ComboSummary {
            combo: i,
            hyperparameters: h.clone(),
            mean_score: cv.mean(|m| scoring.of(m)),
            std_score: cv.std(|m| scoring.of(m)),
            elapsed_seconds: elapsed,
        });
        for (fold, report) in cv.folds.into_iter().enumerate() {
            trials.push(Trial {
                combo: i,
                fold,
                hyperparameters: h.clone(),
                report,
            });
        }
    }
    let mut best = 0;
    for s in &summaries {
        if s.mean_score > summaries[best].mean_score {
            best = s.combo;
        }
    }
    Ok(GridResult {
        family: grid.family,
        scoring,
        best_combo: best,
        best_hyperparameters: combos[best].clone(),
        best_score: summaries[best].mean_score,
        combos: summaries,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn combos_vary_last_axis_fastest() {
        let mut axes = BTreeMap::new();
        axes.insert("b".to_string(), vec![json!(1), json!(2)]);
        axes.insert("a".to_string(), vec![json!("x"), json!("y"), json!("z")]);
        let g = HparamGrid::new(Family::DT, axes).unwrap();
        let c = g.combos();
        assert_eq!(c.len(), 6);
        assert_eq!(g.size(), 6);
        assert_eq!((c[0]["a"].clone(), c[0]["b"].clone()), (json!("x"), json!(1)));
        assert_eq!((c[1]["a"].clone(), c[1]["b"].clone()), (json!("x"), json!(2)));
        assert_eq!(c[2]["a"], json!("y"));
    }

    #[test]
    fn empty_axis_rejected() {
        let mut axes = BTreeMap::new();
        axes.insert("max_depth".to_string(), vec![]);
        assert!(HparamGrid::new(Family::DT, axes).is_err());
    }

    #[test]
    fn singleton_grid_and_trial_rows() {
        let x = Array2::from_shape_fn((30, 2), |(i, j)| (i * (j + 1)) as f64);
        let y: Vec<u8> = (0..30).map(|i| u8::from(i % 3 == 0)).collect();
        let mut axes = BTreeMap::new();
        axes.insert("max_depth".to_string(), vec![json!(3)]);
        let g = HparamGrid::new(Family::DT, axes).unwrap();
        let r = grid_search(&g, x.view(), &y, 3, 0, Scoring::Accuracy).unwrap();
        assert_eq!(r.best_combo, 0);
        assert_eq!(r.trials.len(), 3);
    }

    #[test]
    fn failing_trial_names_combo() {
        let x = Array2::from_shape_fn((30, 2), |(i, j)| (i * (j + 1)) as f64);
        let y: Vec<u8> = (0..30).map(|i| u8::from(i % 3 == 0)).collect();
        let mut axes = BTreeMap::new();
        axes.insert("max_depth".to_string(), vec![json!(3), json!(0)]);
        let g = HparamGrid::new(Family::DT, axes).unwrap();
        let err = grid_search(&g, x.view(), &y, 3, 0, Scoring::Accuracy).unwrap_err();
        assert!(err.to_string().contains("max_depth=0"), "{err}");
        assert!(err.is_config_error());
    }
}
