//! Newton boosting on logistic loss. Each round fits a regression tree to the
//! per-row gradient `g = p - y` and hessian `h = p (1 - p)`; leaves output
//! `-G / (H + lambda)` and splits maximize
//! `0.5 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)]`.
//!
//! Split candidates come from per-feature bins: midpoints between consecutive
//! distinct values when a feature has at most `max_bins` of them, quantile
//! cut points otherwise.

use log::warn;
use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, Node};
use super::{logit_loss, require_both_classes, sigmoid, Family};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbtParams {
    pub learning_rate: f64,
    pub max_depth: usize,
    #[serde(alias = "n_estimators")]
    pub n_rounds: usize,
    pub lambda_reg: f64,
    pub min_child_weight: f64,
    pub max_bins: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            learning_rate: 0.1,
            max_depth: 7,
            n_rounds: 100,
            lambda_reg: 1.0,
            min_child_weight: 1.0,
            max_bins: 256,
        }
    }
}

impl GbtParams {
    pub(crate) fn validated(self) -> Result<Self> {
        let err = |m: &str| Err(Error::hparam(Family::GBT, m));
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return err("learning_rate must lie in (0, 1]");
        }
        if self.max_depth == 0 {
            return err("max_depth must be >= 1");
        }
        if !(self.lambda_reg >= 0.0) || !(self.min_child_weight >= 0.0) {
            return err("lambda_reg and min_child_weight must be >= 0");
        }
        if !(2..=u16::MAX as usize).contains(&self.max_bins) {
            return err("max_bins must lie in [2, 65535]");
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    /// Initial log-odds (class prior).
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<DecisionTree>,
    /// Mean training log-loss before boosting and after each round.
    pub training_loss: Vec<f64>,
}

impl GbtModel {
    pub fn raw_score_row(&self, row: &[f64]) -> f64 {
        self.base_score + self.learning_rate * self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
    }

    pub fn predict_score(&self, x: ArrayView2<f64>) -> Vec<f64> {
        let x = x.as_standard_layout();
        x.outer_iter()
            .map(|r| sigmoid(self.raw_score_row(r.as_slice().expect("standard layout"))))
            .collect()
    }
}

/// Feature values quantized to bin ids; `bin(x) <= b` iff `x <= cuts[b]`.
struct Binned {
    bins: Vec<u16>,
    cuts: Vec<Vec<f64>>,
    n_rows: usize,
}

fn feature_cuts(values: &[f64], max_bins: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    let midpoint = |v: f64, next: f64| {
        let m = 0.5 * (v + next);
        if m >= next {
            v
        } else {
            m
        }
    };
    if distinct.len() <= max_bins {
        return distinct.windows(2).map(|w| midpoint(w[0], w[1])).collect();
    }
    let mut cuts = Vec::with_capacity(max_bins - 1);
    for q in 1..max_bins {
        let v = sorted[q * sorted.len() / max_bins];
        let i = distinct.partition_point(|&d| d <= v);
        if i < distinct.len() {
            let c = midpoint(v, distinct[i]);
            if cuts.last().is_none_or(|&last| c > last) {
                cuts.push(c);
            }
        }
    }
    cuts
}

impl Binned {
    fn new(x: ArrayView2<f64>, max_bins: usize) -> Self {
        let (n_rows, nf) = x.dim();
        let mut bins = Vec::with_capacity(n_rows * nf);
        let mut cuts = Vec::with_capacity(nf);
        for col in x.columns() {
            let values: Vec<f64> = col.to_vec();
            let c = feature_cuts(&values, max_bins);
            bins.extend(values.iter().map(|v| c.partition_point(|cut| cut < v) as u16));
            cuts.push(c);
        }
        Binned { bins, cuts, n_rows }
    }

    #[inline]
    fn column(&self, f: usize) -> &[u16] {
        &self.bins[f * self.n_rows..(f + 1) * self.n_rows]
    }
}

struct RoundGrower<'a> {
    binned: &'a Binned,
    grad: &'a [f64],
    hess: &'a [f64],
    params: &'a GbtParams,
    hist: Vec<(f64, f64)>,
}

impl RoundGrower<'_> {
    fn leaf_weight(&self, g: f64, h: f64) -> f64 {
        -g / (h + self.params.lambda_reg)
    }

    fn score(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.params.lambda_reg)
    }

    /// Best `(feature, bin, gain)` with positive gain.
    fn best_split(&mut self, rows: &[u32], g: f64, h: f64) -> Option<(usize, usize, f64)> {
        let parent = self.score(g, h);
        let mcw = self.params.min_child_weight;
        let mut best: Option<(usize, usize, f64)> = None;
        for f in 0..self.binned.cuts.len() {
            let n_cuts = self.binned.cuts[f].len();
            if n_cuts == 0 {
                continue;
            }
            self.hist.clear();
            self.hist.resize(n_cuts + 1, (0.0, 0.0));
            let col = self.binned.column(f);
            for &r in rows {
                let e = &mut self.hist[col[r as usize] as usize];
                e.0 += self.grad[r as usize];
                e.1 += self.hess[r as usize];
            }
            let (mut gl, mut hl) = (0.0, 0.0);
            for b in 0..n_cuts {
                gl += self.hist[b].0;
                hl += self.hist[b].1;
                let (gr, hr) = (g - gl, h - hl);
                if hl < mcw || hr < mcw || hl <= 0.0 || hr <= 0.0 {
                    continue;
                }
                let gain = 0.5 * (self.score(gl, hl) + self.score(gr, hr) - parent);
                if gain > 0.0 && best.is_none_or(|(_, _, bg)| gain > bg) {
                    best = Some((f, b, gain));
                }
            }
        }
        best
    }

    fn grow(mut self, rows: Vec<u32>) -> DecisionTree {
        let mut nodes = vec![Node {
            feature: None,
            threshold: 0.0,
            left: 0,
            right: 0,
            leaf_value: 0.0,
        }];
        let mut stack = vec![(0usize, rows, 0usize)];
        while let Some((id, rows, depth)) = stack.pop() {
            let (mut g, mut h) = (0.0, 0.0);
            for &r in &rows {
                g += self.grad[r as usize];
                h += self.hess[r as usize];
            }
            let value = self.leaf_weight(g, h);
            nodes[id].leaf_value = value;
            if depth >= self.params.max_depth || rows.len() < 2 {
                continue;
            }
            let Some((f, b, _)) = self.best_split(&rows, g, h) else {
                continue;
            };
            let col = self.binned.column(f);
            let (l, r): (Vec<u32>, Vec<u32>) = rows.into_iter().partition(|&r| col[r as usize] as usize <= b);
            let left = nodes.len();
            for _ in 0..2 {
                nodes.push(Node {
                    feature: None,
                    threshold: 0.0,
                    left: 0,
                    right: 0,
                    leaf_value: 0.0,
                });
            }
            nodes[id] = Node {
                feature: Some(f),
                threshold: self.binned.cuts[f][b],
                left,
                right: left + 1,
                leaf_value: value,
            };
            stack.push((left + 1, r, depth + 1));
            stack.push((left, l, depth + 1));
        }
        DecisionTree { nodes }
    }
}

fn mean_log_loss(raw: &[f64], y: &[u8]) -> f64 {
    raw.iter().zip(y).map(|(&z, &t)| logit_loss(z, t as f64)).sum::<f64>() / y.len() as f64
}

pub(crate) fn fit(x: ArrayView2<f64>, y: &[u8], params: &GbtParams) -> Result<GbtModel> {
    require_both_classes(y, "GBT training labels")?;
    let n = y.len();
    let prior = y.iter().filter(|&&v| v == 1).count() as f64 / n as f64;
    let base_score = (prior / (1.0 - prior)).ln();
    let mut raw = vec![base_score; n];
    let mut training_loss = vec![mean_log_loss(&raw, y)];
    let mut trees = Vec::with_capacity(params.n_rounds);
    if params.n_rounds == 0 {
        return Ok(GbtModel {
            base_score,
            learning_rate: params.learning_rate,
            trees,
            training_loss,
        });
    }

    let binned = Binned::new(x, params.max_bins);
    let x = x.as_standard_layout();
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    for round in 0..params.n_rounds {
        for i in 0..n {
            let p = sigmoid(raw[i]);
            grad[i] = p - y[i] as f64;
            hess[i] = p * (1.0 - p);
        }
        if hess.iter().sum::<f64>() < 1e-12 {
            warn!("GBT hessian vanished at round {round}; stopping early");
            break;
        }
        let tree = RoundGrower {
            binned: &binned,
            grad: &grad,
            hess: &hess,
            params,
            hist: Vec::new(),
        }
        .grow((0..n as u32).collect());
        for (i, row) in x.outer_iter().enumerate() {
            raw[i] += params.learning_rate * tree.predict_row(row.as_slice().expect("standard layout"));
        }
        trees.push(tree);
        training_loss.push(mean_log_loss(&raw, y));
    }
    Ok(GbtModel {
        base_score,
        learning_rate: params.learning_rate,
        trees,
        training_loss,
    })
}
