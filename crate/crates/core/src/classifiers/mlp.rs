//! Feed-forward network: ReLU hidden layers, one sigmoid output unit, mean
//! log-loss plus `alpha * sum ||W||^2`, trained by mini-batch gradient descent.

use log::warn;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{logit_loss, require_both_classes, sigmoid, Family};
use crate::error::{Error, Result};
use crate::rng::{stage_rng, TAG_MODEL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpParams {
    pub hidden_layer_sizes: Vec<usize>,
    pub alpha: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden_layer_sizes: vec![32],
            alpha: 1e-4,
            learning_rate: 0.01,
            epochs: 50,
            batch_size: 256,
        }
    }
}

impl MlpParams {
    pub(crate) fn validated(self) -> Result<Self> {
        let err = |m: &str| Err(Error::hparam(Family::MLP, m));
        if self.hidden_layer_sizes.is_empty() || self.hidden_layer_sizes.contains(&0) {
            return err("hidden_layer_sizes must be non-empty with positive widths");
        }
        if !(self.alpha >= 0.0) {
            return err("alpha must be >= 0");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return err("learning_rate must be positive");
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return err("epochs and batch_size must be >= 1");
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// `fan_in x fan_out`.
    #[serde(with = "crate::linalg::nested")]
    pub weights: Array2<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
    /// Full-data training loss after each epoch.
    pub loss_history: Vec<f64>,
}

impl MlpModel {
    /// Glorot-uniform weights, zero biases.
    pub fn initialize(n_inputs: usize, hidden: &[usize], rng: &mut impl Rng) -> Self {
        let mut sizes = vec![n_inputs];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
                Layer {
                    weights: Array2::from_shape_fn((w[0], w[1]), |_| rng.random_range(-limit..=limit)),
                    bias: vec![0.0; w[1]],
                }
            })
            .collect();
        MlpModel {
            layers,
            loss_history: Vec::new(),
        }
    }

    /// All weights and biases, layer by layer (weights row-major, then bias).
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend(l.weights.iter());
            out.extend(&l.bias);
        }
        out
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) {
        let mut it = flat.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.iter_mut() {
                *w = it.next().expect("flat parameter vector too short");
            }
            for b in &mut l.bias {
                *b = it.next().expect("flat parameter vector too short");
            }
        }
    }

    /// Output logits and the activations entering each layer.
    fn forward(&self, x: ArrayView2<f64>) -> (Array1<f64>, Vec<Array2<f64>>) {
        let mut acts = vec![x.to_owned()];
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = acts[i].dot(&l.weights);
            z += &ArrayView1::from(&l.bias[..]);
            if i == last {
                return (z.column(0).to_owned(), acts);
            }
            z.mapv_inplace(|v| v.max(0.0));
            acts.push(z);
        }
        unreachable!("network has an output layer")
    }

    fn penalty(&self, alpha: f64) -> f64 {
        alpha * self.layers.iter().map(|l| l.weights.iter().map(|w| w * w).sum::<f64>()).sum::<f64>()
    }

    pub fn loss(&self, x: ArrayView2<f64>, y: &[u8], alpha: f64) -> f64 {
        let (z, _) = self.forward(x);
        let data = z.iter().zip(y).map(|(&z, &t)| logit_loss(z, t as f64)).sum::<f64>() / y.len() as f64;
        data + self.penalty(alpha)
    }

    /// Loss and its gradient, flattened in `flat_params` order.
    pub fn objective(&self, x: ArrayView2<f64>, y: &[u8], alpha: f64) -> (f64, Vec<f64>) {
        let (loss, grads) = self.backprop(x, y, alpha);
        let mut flat = Vec::new();
        for (gw, gb) in grads {
            flat.extend(gw.iter());
            flat.extend(gb.iter());
        }
        (loss, flat)
    }

    fn backprop(&self, x: ArrayView2<f64>, y: &[u8], alpha: f64) -> (f64, Vec<(Array2<f64>, Array1<f64>)>) {
        let n = y.len() as f64;
        let (z, acts) = self.forward(x);
        let mut loss = 0.0;
        let mut delta = Array2::<f64>::zeros((y.len(), 1));
        for i in 0..y.len() {
            let t = y[i] as f64;
            loss += logit_loss(z[i], t);
            delta[[i, 0]] = (sigmoid(z[i]) - t) / n;
        }
        loss = loss / n + self.penalty(alpha);

        let mut grads = Vec::with_capacity(self.layers.len());
        for i in (0..self.layers.len()).rev() {
            let l = &self.layers[i];
            let gw = acts[i].t().dot(&delta) + &l.weights * (2.0 * alpha);
            let gb = delta.sum_axis(Axis(0));
            if i > 0 {
                let mut prev = delta.dot(&l.weights.t());
                prev.zip_mut_with(&acts[i], |d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = prev;
            }
            grads.push((gw, gb));
        }
        grads.reverse();
        (loss, grads)
    }

    pub fn predict_score(&self, x: ArrayView2<f64>) -> Vec<f64> {
        self.forward(x).0.iter().map(|&z| sigmoid(z)).collect()
    }
}

fn train(
    x: ArrayView2<f64>,
    y: &[u8],
    params: &MlpParams,
    learning_rate: f64,
    seed: u64,
) -> Option<MlpModel> {
    let mut rng = stage_rng(seed, TAG_MODEL);
    let mut model = MlpModel::initialize(x.ncols(), &params.hidden_layer_sizes, &mut rng);
    let mut order: Vec<usize> = (0..y.len()).collect();
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(params.batch_size) {
            let xb = x.select(Axis(0), batch);
            let yb: Vec<u8> = batch.iter().map(|&i| y[i]).collect();
            let (_, grads) = model.backprop(xb.view(), &yb, params.alpha);
            for (l, (gw, gb)) in model.layers.iter_mut().zip(grads) {
                l.weights.scaled_add(-learning_rate, &gw);
                for (b, g) in l.bias.iter_mut().zip(gb) {
                    *b -= learning_rate * g;
                }
            }
        }
        let loss = model.loss(x, y, params.alpha);
        if !loss.is_finite() {
            return None;
        }
        model.loss_history.push(loss);
    }
    Some(model)
}

pub(crate) fn fit(x: ArrayView2<f64>, y: &[u8], params: &MlpParams, seed: u64) -> Result<MlpModel> {
    require_both_classes(y, "MLP training labels")?;
    if let Some(m) = train(x, y, params, params.learning_rate, seed) {
        return Ok(m);
    }
    let halved = params.learning_rate / 2.0;
    warn!("MLP loss diverged; retrying with learning_rate {halved}");
    train(x, y, params, halved, seed)
        .ok_or_else(|| Error::NonFiniteLoss(format!("MLP diverged at learning_rate {halved}")))
}
