//! Synthetic Minority Over-sampling. Synthetic attack rows are placed on the
//! segment between a minority row and one of its nearest minority neighbors.

use log::warn;
use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stage_rng, TAG_SMOTE};

/// Minority class. Only attack rows are ever synthesized.
pub const MINORITY_LABEL: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoteTarget {
    /// Minority count raised to the majority count.
    Equalize,
    /// Minority count raised to `ratio * majority count`.
    Ratio(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    pub target: SmoteTarget,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            k_neighbors: 5,
            target: SmoteTarget::Equalize,
            seed: 0,
        }
    }
}

/// Counts before and after resampling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResampleSummary {
    pub zeros_before: usize,
    pub ones_before: usize,
    pub zeros_after: usize,
    pub ones_after: usize,
    pub k: usize,
    pub seed: u64,
}

/// A synthetic row's construction: `base + u * (neighbor - base)`, with row
/// indices into the input matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticOrigin {
    pub base: usize,
    pub neighbor: usize,
    pub u: f64,
}

#[derive(Debug, Clone)]
pub struct Resampled {
    /// Original rows first, in input order, then the synthetic rows.
    pub x: Array2<f64>,
    pub y: Vec<u8>,
    pub origins: Vec<SyntheticOrigin>,
    pub summary: ResampleSummary,
}

impl Resampled {
    pub fn n_original(&self) -> usize {
        self.x.nrows() - self.origins.len()
    }
}

/// `base + u * (neighbor - base)`, written into `out`.
pub fn interpolate(base: &[f64], neighbor: &[f64], u: f64, out: &mut [f64]) {
    for ((v, b), n) in out.iter_mut().zip(base).zip(neighbor) {
        *v = b + u * (n - b);
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// For every row, the indices of its `k` nearest other rows (Euclidean), ties
/// to the lower index. `k` is clamped to `n - 1`.
pub fn knn_minority(x_min: ArrayView2<f64>, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = x_min.nrows();
    if n < 2 {
        return Err(Error::invalid("k-NN needs at least two minority rows"));
    }
    if k == 0 {
        return Err(Error::invalid("k_neighbors must be positive"));
    }
    let k = if k >= n {
        warn!("k_neighbors {k} >= minority count {n}; clamped to {}", n - 1);
        n - 1
    } else {
        k
    };
    let x = x_min.as_standard_layout();
    let rows: Vec<&[f64]> = x.outer_iter().map(|r| r.to_slice().expect("standard layout")).collect();
    let table = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
            for (j, row) in rows.iter().enumerate() {
                if j == i {
                    continue;
                }
                let d = sq_dist(rows[i], row);
                if best.len() == k && d >= best[k - 1].0 {
                    continue;
                }
                let pos = best.partition_point(|&(bd, bj)| bd < d || (bd == d && bj < j));
                best.insert(pos, (d, j));
                best.truncate(k);
            }
            best.into_iter().map(|(_, j)| j).collect()
        })
        .collect();
    Ok(table)
}

pub fn smote_resample(x: ArrayView2<f64>, y: &[u8], cfg: &SmoteConfig) -> Result<Resampled> {
    if y.len() != x.nrows() {
        return Err(Error::invalid("label length differs from row count"));
    }
    if let Some(bad) = y.iter().find(|&&v| v > 1) {
        return Err(Error::invalid(format!("non-binary label {bad}")));
    }
    let minority: Vec<usize> = (0..y.len()).filter(|&i| y[i] == MINORITY_LABEL).collect();
    let zeros = y.len() - minority.len();
    if minority.is_empty() {
        return Err(Error::Empty("minority class".into()));
    }
    if zeros == 0 {
        return Err(Error::SingleClass("SMOTE input".into()));
    }

    let target_ones = match cfg.target {
        SmoteTarget::Equalize => zeros,
        SmoteTarget::Ratio(r) if r > 0.0 => (r * zeros as f64).round() as usize,
        SmoteTarget::Ratio(r) => return Err(Error::invalid(format!("SMOTE ratio {r} must be positive"))),
    };
    let n_synthetic = target_ones.saturating_sub(minority.len());

    let mut origins = Vec::with_capacity(n_synthetic);
    let mut k_used = cfg.k_neighbors.min(minority.len().saturating_sub(1));
    if n_synthetic > 0 {
        if minority.len() < 2 {
            return Err(Error::invalid("SMOTE needs at least two minority rows"));
        }
        let x_min = x.select(Axis(0), &minority);
        let neighbors = knn_minority(x_min.view(), cfg.k_neighbors)?;
        k_used = neighbors[0].len();

        let mut rng = stage_rng(cfg.seed, TAG_SMOTE);
        let mut order: Vec<usize> = (0..minority.len()).collect();
        order.shuffle(&mut rng);
        for s in 0..n_synthetic {
            let base = order[s % order.len()];
            let nbrs = &neighbors[base];
            let nbr = nbrs[rng.random_range(0..nbrs.len())];
            let u: f64 = rng.random();
            origins.push(SyntheticOrigin {
                base: minority[base],
                neighbor: minority[nbr],
                u,
            });
        }
    }

    let n_out = x.nrows() + origins.len();
    let mut out = Array2::<f64>::zeros((n_out, x.ncols()));
    out.slice_mut(ndarray::s![..x.nrows(), ..]).assign(&x);
    let xs = x.as_standard_layout();
    for (s, o) in origins.iter().enumerate() {
        let mut row = out.row_mut(x.nrows() + s);
        interpolate(
            xs.row(o.base).as_slice().expect("standard layout"),
            xs.row(o.neighbor).as_slice().expect("standard layout"),
            o.u,
            row.as_slice_mut().expect("standard layout"),
        );
    }
    let mut y_out = y.to_vec();
    y_out.resize(n_out, MINORITY_LABEL);

    let summary = ResampleSummary {
        zeros_before: zeros,
        ones_before: minority.len(),
        zeros_after: zeros,
        ones_after: minority.len() + origins.len(),
        k: k_used,
        seed: cfg.seed,
    };
    Ok(Resampled {
        x: out,
        y: y_out,
        origins,
        summary,
    })
}
