use ndarray::ArrayView2;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::Family;
use crate::error::{Error, Result};
use crate::rng::StageRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Entropy,
    Gini,
}

/// Entropy in bits of a weighted binary node.
fn entropy(pos: f64, total: f64) -> f64 {
    let p = pos / total;
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

fn gini(pos: f64, total: f64) -> f64 {
    let p = pos / total;
    2.0 * p * (1.0 - p)
}

impl Criterion {
    fn impurity(self, pos: f64, total: f64) -> f64 {
        match self {
            Criterion::Entropy => entropy(pos, total),
            Criterion::Gini => gini(pos, total),
        }
    }
}

/// `-sum p log2 p` over the two classes of `(negatives, positives)`.
pub fn entropy_impurity(class_counts: (u64, u64)) -> Result<f64> {
    let (neg, pos) = class_counts;
    if neg + pos == 0 {
        return Err(Error::invalid("entropy of an empty node"));
    }
    Ok(entropy(pos as f64, (neg + pos) as f64))
}

pub fn gini_impurity(class_counts: (u64, u64)) -> Result<f64> {
    let (neg, pos) = class_counts;
    if neg + pos == 0 {
        return Err(Error::invalid("gini of an empty node"));
    }
    Ok(gini(pos as f64, (neg + pos) as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    pub criterion: Criterion,
    /// `None` grows until purity or `min_samples_leaf` stops it.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            criterion: Criterion::Entropy,
            max_depth: Some(10),
            min_samples_leaf: 1,
        }
    }
}

impl TreeParams {
    pub(crate) fn validated(self, family: Family) -> Result<Self> {
        if self.max_depth == Some(0) {
            return Err(Error::hparam(family, "max_depth must be >= 1"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::hparam(family, "min_samples_leaf must be >= 1"));
        }
        Ok(self)
    }
}

/// One tree node. Leaves have `feature = None`; internal nodes send rows with
/// `x[feature] <= threshold` to `left`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub feature: Option<usize>,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
    pub leaf_value: f64,
}

impl Node {
    fn leaf(value: f64) -> Self {
        Node {
            feature: None,
            threshold: 0.0,
            left: 0,
            right: 0,
            leaf_value: value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            let node = &self.nodes[i];
            match node.feature {
                None => return node.leaf_value,
                Some(f) => i = if row[f] <= node.threshold { node.left } else { node.right },
            }
        }
    }

    pub fn predict_score(&self, x: ArrayView2<f64>) -> Vec<f64> {
        let x = x.as_standard_layout();
        x.outer_iter()
            .map(|r| self.predict_row(r.as_slice().expect("standard layout")))
            .collect()
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &DecisionTree, i: usize) -> usize {
            match t.nodes[i].feature {
                None => 0,
                Some(_) => 1 + walk(t, t.nodes[i].left).max(walk(t, t.nodes[i].right)),
            }
        }
        walk(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.feature.is_none()).count()
    }
}

/// Column-major copy of the training matrix, shared by all trees of a forest.
pub(crate) struct Columns {
    data: Vec<f64>,
    n_rows: usize,
    n_features: usize,
}

impl Columns {
    pub(crate) fn new(x: ArrayView2<f64>) -> Self {
        let (n_rows, n_features) = x.dim();
        let mut data = Vec::with_capacity(n_rows * n_features);
        for col in x.columns() {
            data.extend(col.iter());
        }
        Columns {
            data,
            n_rows,
            n_features,
        }
    }

    #[inline]
    fn column(&self, f: usize) -> &[f64] {
        &self.data[f * self.n_rows..(f + 1) * self.n_rows]
    }
}

/// Greedy classification tree grower over weighted rows.
pub(crate) struct Grower<'a> {
    cols: &'a Columns,
    y: &'a [u8],
    weights: &'a [f64],
    params: &'a TreeParams,
    /// Random feature subsets of this size per split (forests).
    max_features: Option<usize>,
    rng: Option<&'a mut StageRng>,
    buf: Vec<(f64, u32)>,
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl<'a> Grower<'a> {
    pub(crate) fn new(cols: &'a Columns, y: &'a [u8], weights: &'a [f64], params: &'a TreeParams) -> Self {
        Grower {
            cols,
            y,
            weights,
            params,
            max_features: None,
            rng: None,
            buf: Vec::new(),
        }
    }

    pub(crate) fn with_feature_sampling(mut self, max_features: usize, rng: &'a mut StageRng) -> Self {
        self.max_features = Some(max_features);
        self.rng = Some(rng);
        self
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let nf = self.cols.n_features;
        match (self.max_features, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < nf => {
                let mut f = index::sample(rng, nf, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..nf).collect(),
        }
    }

    fn best_split(&mut self, rows: &[u32], total_w: f64, total_pos: f64) -> Option<Split> {
        let parent = self.params.criterion.impurity(total_pos, total_w);
        let min_leaf = self.params.min_samples_leaf as f64;
        let mut best: Option<Split> = None;
        let mut buf = std::mem::take(&mut self.buf);
        for f in self.candidate_features() {
            let col = self.cols.column(f);
            buf.clear();
            buf.extend(rows.iter().map(|&r| (col[r as usize], r)));
            buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            if buf[0].0 == buf[buf.len() - 1].0 {
                continue;
            }
            let (mut wl, mut pl) = (0.0, 0.0);
            for i in 0..buf.len() - 1 {
                let r = buf[i].1 as usize;
                let w = self.weights[r];
                wl += w;
                if self.y[r] == 1 {
                    pl += w;
                }
                let (v, next) = (buf[i].0, buf[i + 1].0);
                if v == next {
                    continue;
                }
                let wr = total_w - wl;
                if wl < min_leaf || wr < min_leaf {
                    continue;
                }
                let c = self.params.criterion;
                let gain = parent
                    - (wl / total_w) * c.impurity(pl, wl)
                    - (wr / total_w) * c.impurity(total_pos - pl, wr);
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mut threshold = 0.5 * (v + next);
                    if threshold >= next {
                        threshold = v;
                    }
                    best = Some(Split {
                        feature: f,
                        threshold,
                        gain,
                    });
                }
            }
        }
        self.buf = buf;
        best
    }

    pub(crate) fn grow(mut self, rows: Vec<u32>) -> DecisionTree {
        let max_depth = self.params.max_depth.unwrap_or(usize::MAX);
        let mut nodes: Vec<Node> = vec![Node::leaf(0.0)];
        let mut stack: Vec<(usize, Vec<u32>, usize)> = vec![(0, rows, 0)];
        while let Some((id, rows, depth)) = stack.pop() {
            let (mut total_w, mut total_pos) = (0.0, 0.0);
            for &r in &rows {
                let w = self.weights[r as usize];
                total_w += w;
                if self.y[r as usize] == 1 {
                    total_pos += w;
                }
            }
            let value = if total_w > 0.0 { total_pos / total_w } else { 0.0 };
            nodes[id] = Node::leaf(value);
            let pure = total_pos == 0.0 || total_pos == total_w;
            if pure
                || depth >= max_depth
                || rows.len() < 2
                || total_w < 2.0 * self.params.min_samples_leaf as f64
            {
                continue;
            }
            let Some(split) = self.best_split(&rows, total_w, total_pos) else {
                continue;
            };
            let col = self.cols.column(split.feature);
            let (left_rows, right_rows): (Vec<u32>, Vec<u32>) =
                rows.into_iter().partition(|&r| col[r as usize] <= split.threshold);
            let left = nodes.len();
            nodes.push(Node::leaf(0.0));
            nodes.push(Node::leaf(0.0));
            nodes[id] = Node {
                feature: Some(split.feature),
                threshold: split.threshold,
                left,
                right: left + 1,
                leaf_value: value,
            };
            stack.push((left + 1, right_rows, depth + 1));
            stack.push((left, left_rows, depth + 1));
        }
        DecisionTree { nodes }
    }
}

pub(crate) fn fit_classifier(x: ArrayView2<f64>, y: &[u8], params: &TreeParams) -> Result<DecisionTree> {
    let cols = Columns::new(x);
    let weights = vec![1.0; y.len()];
    let rows: Vec<u32> = (0..y.len() as u32).collect();
    Ok(Grower::new(&cols, y, &weights, params).grow(rows))
}
