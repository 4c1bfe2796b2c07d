//! Five binary classifiers behind one fit / predict / score interface.
//!
//! Hyperparameters travel as a JSON map so grids and configs can describe any
//! family uniformly; each family parses and validates its own keys. Defaults
//! are the tuned values from the reference grid search (for example
//! `criterion = entropy, max_depth = 10` for trees).

mod forest;
mod gbt;
mod logistic;
mod mlp;
mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ndarray::ArrayView2;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub use forest::{ForestParams, RandomForest};
pub use gbt::{GbtModel, GbtParams};
pub use logistic::{logistic_objective, LogisticModel, LogisticParams};
pub use mlp::{MlpModel, MlpParams};
pub use tree::{entropy_impurity, gini_impurity, Criterion, DecisionTree, Node, TreeParams};

/// Version tag written into serialized models.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    LR,
    DT,
    RF,
    #[serde(alias = "XGB")]
    GBT,
    MLP,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::LR, Family::DT, Family::RF, Family::MLP, Family::GBT];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::LR => "LR",
            Family::DT => "DT",
            Family::RF => "RF",
            Family::GBT => "GBT",
            Family::MLP => "MLP",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LR" | "LOGISTIC" => Ok(Family::LR),
            "DT" | "TREE" => Ok(Family::DT),
            "RF" | "FOREST" => Ok(Family::RF),
            "GBT" | "XGB" | "GBM" => Ok(Family::GBT),
            "MLP" => Ok(Family::MLP),
            _ => Err(Error::invalid(format!("unknown model family {s:?}"))),
        }
    }
}

pub type Hyperparameters = BTreeMap<String, Value>;

/// Renders hyperparameters as `name=value;name=value` for tables.
pub fn format_hyperparameters(h: &Hyperparameters) -> String {
    h.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    #[serde(default)]
    pub hyperparameters: Hyperparameters,
    #[serde(default)]
    pub seed: u64,
}

/// Parsed, validated hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Logistic(LogisticParams),
    Tree(TreeParams),
    Forest(ForestParams),
    Gbt(GbtParams),
    Mlp(MlpParams),
}

fn parse<T: DeserializeOwned>(family: Family, h: &Hyperparameters) -> Result<T> {
    let map: serde_json::Map<String, Value> = h.clone().into_iter().collect();
    serde_json::from_value(Value::Object(map)).map_err(|e| Error::hparam(family, e.to_string()))
}

impl ModelSpec {
    pub fn new(family: Family) -> Self {
        ModelSpec {
            family,
            hyperparameters: Hyperparameters::new(),
            seed: 0,
        }
    }

    pub fn with(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.hyperparameters.insert(name.to_string(), value.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn params(&self) -> Result<Params> {
        let f = self.family;
        let h = &self.hyperparameters;
        let p = match f {
            Family::LR => Params::Logistic(parse::<LogisticParams>(f, h)?.validated()?),
            Family::DT => Params::Tree(parse::<TreeParams>(f, h)?.validated(f)?),
            Family::RF => Params::Forest(parse::<ForestParams>(f, h)?.validated()?),
            Family::GBT => Params::Gbt(parse::<GbtParams>(f, h)?.validated()?),
            Family::MLP => Params::Mlp(parse::<MlpParams>(f, h)?.validated()?),
        };
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Learned {
    Logistic(LogisticModel),
    Tree(DecisionTree),
    Forest(RandomForest),
    Gbt(GbtModel),
    Mlp(MlpModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub format_version: u32,
    pub family: Family,
    pub hyperparameters: Hyperparameters,
    pub fit_time_seconds: f64,
    pub n_features_expected: usize,
    pub model: Learned,
}

pub(crate) fn check_training_data(x: ArrayView2<f64>, y: &[u8]) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::Empty("training data".into()));
    }
    if x.nrows() != y.len() {
        return Err(Error::invalid(format!(
            "{} rows but {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if let Some(v) = y.iter().find(|&&v| v > 1) {
        return Err(Error::invalid(format!("non-binary label {v}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("training data contains non-finite values"));
    }
    Ok(())
}

pub(crate) fn require_both_classes(y: &[u8], what: &str) -> Result<()> {
    let pos = y.iter().filter(|&&v| v == 1).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::SingleClass(what.to_string()));
    }
    Ok(())
}

/// Fits any family from its spec, timing the fit with a monotonic clock.
pub fn fit(spec: &ModelSpec, x: ArrayView2<f64>, y: &[u8]) -> Result<FittedModel> {
    let params = spec.params()?;
    check_training_data(x, y)?;
    let start = Instant::now();
    let model = match params {
        Params::Logistic(p) => Learned::Logistic(logistic::fit(x, y, &p)?),
        Params::Tree(p) => Learned::Tree(tree::fit_classifier(x, y, &p)?),
        Params::Forest(p) => Learned::Forest(forest::fit(x, y, &p, spec.seed)?),
        Params::Gbt(p) => Learned::Gbt(gbt::fit(x, y, &p)?),
        Params::Mlp(p) => Learned::Mlp(mlp::fit(x, y, &p, spec.seed)?),
    };
    Ok(FittedModel {
        format_version: MODEL_FORMAT_VERSION,
        family: spec.family,
        hyperparameters: spec.hyperparameters.clone(),
        fit_time_seconds: start.elapsed().as_secs_f64(),
        n_features_expected: x.ncols(),
        model,
    })
}

fn spec_from<T: Serialize>(family: Family, params: &T, seed: u64) -> Result<ModelSpec> {
    let value = serde_json::to_value(params)?;
    let hyperparameters = match value {
        Value::Object(m) => m.into_iter().collect(),
        _ => Hyperparameters::new(),
    };
    Ok(ModelSpec {
        family,
        hyperparameters,
        seed,
    })
}

pub fn fit_logistic(x: ArrayView2<f64>, y: &[u8], c: f64, max_iter: usize, tol: f64) -> Result<FittedModel> {
    let p = LogisticParams { c, max_iter, tol };
    fit(&spec_from(Family::LR, &p, 0)?, x, y)
}

pub fn fit_tree(
    x: ArrayView2<f64>,
    y: &[u8],
    criterion: Criterion,
    max_depth: Option<usize>,
    min_samples_leaf: usize,
) -> Result<FittedModel> {
    let p = TreeParams {
        criterion,
        max_depth,
        min_samples_leaf,
    };
    fit(&spec_from(Family::DT, &p, 0)?, x, y)
}

pub fn fit_forest(
    x: ArrayView2<f64>,
    y: &[u8],
    n_estimators: usize,
    criterion: Criterion,
    max_depth: Option<usize>,
    seed: u64,
) -> Result<FittedModel> {
    let p = ForestParams {
        n_estimators,
        criterion,
        max_depth,
        ..Default::default()
    };
    fit(&spec_from(Family::RF, &p, seed)?, x, y)
}

pub fn fit_gbt(
    x: ArrayView2<f64>,
    y: &[u8],
    learning_rate: f64,
    max_depth: usize,
    n_rounds: usize,
    lambda_reg: f64,
) -> Result<FittedModel> {
    let p = GbtParams {
        learning_rate,
        max_depth,
        n_rounds,
        lambda_reg,
        ..Default::default()
    };
    fit(&spec_from(Family::GBT, &p, 0)?, x, y)
}

#[allow(clippy::too_many_arguments)]
pub fn fit_mlp(
    x: ArrayView2<f64>,
    y: &[u8],
    hidden_layer_sizes: &[usize],
    alpha: f64,
    learning_rate: f64,
    epochs: usize,
    batch_size: usize,
    seed: u64,
) -> Result<FittedModel> {
    let p = MlpParams {
        hidden_layer_sizes: hidden_layer_sizes.to_vec(),
        alpha,
        learning_rate,
        epochs,
        batch_size,
    };
    fit(&spec_from(Family::MLP, &p, seed)?, x, y)
}

impl FittedModel {
    fn check_input(&self, x: ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.n_features_expected {
            return Err(Error::DimensionMismatch {
                expected: self.n_features_expected,
                found: x.ncols(),
            });
        }
        Ok(())
    }

    /// Probability-like attack score per row, in `[0, 1]`.
    pub fn predict_score(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(match &self.model {
            Learned::Logistic(m) => m.predict_score(x),
            Learned::Tree(m) => m.predict_score(x),
            Learned::Forest(m) => m.predict_score(x),
            Learned::Gbt(m) => m.predict_score(x),
            Learned::Mlp(m) => m.predict_score(x),
        })
    }

    /// Hard labels: score >= 0.5, or majority vote (ties to attack) for forests.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<u8>> {
        self.check_input(x)?;
        if let Learned::Forest(m) = &self.model {
            return Ok(m
                .vote_fraction(x)
                .into_iter()
                .map(|v| u8::from(v >= 0.5))
                .collect());
        }
        Ok(self
            .predict_score(x)?
            .into_iter()
            .map(|s| u8::from(s >= 0.5))
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: FittedModel = serde_json::from_str(text)?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format version {}",
                m.format_version
            )));
        }
        Ok(m)
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z) - y z`, the log-loss of a logit, without overflow.
pub(crate) fn logit_loss(z: f64, y: f64) -> f64 {
    let softplus = if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    };
    softplus - y * z
}
