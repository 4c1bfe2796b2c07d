//! Independent reference computations used to check the pipeline: naive
//! formulas, exhaustive enumeration, a dense eigensolver, brute-force
//! neighbors and finite differences. Nothing here is used by the pipeline
//! itself.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::classifiers::MlpModel;
use crate::eval::{confusion, metrics, roc_auc, ConfusionMatrix};
use crate::preprocess::fit_pca;
use crate::smote::{smote_resample, SmoteConfig};

/// `(accuracy, recall, precision, f1, fpr)` straight from the definitions,
/// with 0 for empty denominators.
pub fn naive_metrics(cm: &ConfusionMatrix) -> [f64; 5] {
    let (tp, fp, fn_, tn) = (cm.tp as f64, cm.fp as f64, cm.fn_ as f64, cm.tn as f64);
    let div = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let recall = div(tp, tp + fn_);
    let precision = div(tp, tp + fp);
    [
        (tp + tn) / (tp + fp + fn_ + tn),
        recall,
        precision,
        div(2.0 * precision * recall, precision + recall),
        div(fp, fp + tn),
    ]
}

pub fn naive_confusion(y_true: &[u8], y_pred: &[u8]) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::default();
    for i in 0..y_true.len() {
        if y_true[i] == 1 && y_pred[i] == 1 {
            cm.tp += 1;
        }
        if y_true[i] == 0 && y_pred[i] == 1 {
            cm.fp += 1;
        }
        if y_true[i] == 1 && y_pred[i] == 0 {
            cm.fn_ += 1;
        }
        if y_true[i] == 0 && y_pred[i] == 0 {
            cm.tn += 1;
        }
    }
    cm
}

/// AUC by comparing every (positive, negative) pair.
pub fn pairwise_auc(y: &[u8], scores: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for i in 0..y.len() {
        for j in 0..y.len() {
            if y[i] == 1 && y[j] == 0 {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

/// Eigenvalues (descending) and unit eigenvectors (as rows) of the sample
/// covariance of `x`, from a dense symmetric solver.
pub fn covariance_eigen(x: ArrayView2<f64>) -> (Vec<f64>, Array2<f64>) {
    let (n, p) = x.dim();
    let mean = x.mean_axis(ndarray::Axis(0)).expect("non-empty");
    let c = &x - &mean;
    let cov = c.t().dot(&c) / (n as f64 - 1.0);
    let m = DMatrix::from_fn(p, p, |i, j| cov[[i, j]]);
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Array2::from_shape_fn((p, p), |(r, j)| eig.eigenvectors[(j, order[r])]);
    (values, vectors)
}

/// The `k` nearest other rows of row `i` by full sort (ties to lower index).
pub fn brute_force_knn(x: ArrayView2<f64>, i: usize, k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = (0..x.nrows())
        .filter(|&j| j != i)
        .map(|j| {
            let dist: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            (dist, j)
        })
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().take(k).map(|(_, j)| j).collect()
}

/// Position of `p` along the segment `a -> b`: the least-squares `u` and the
/// largest coordinate residual of `p - (a + u (b - a))`.
pub fn segment_fit(a: &[f64], b: &[f64], p: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let dd: f64 = d.iter().map(|v| v * v).sum();
    let u = if dd == 0.0 {
        0.0
    } else {
        p.iter().zip(a).zip(&d).map(|((p, a), d)| (p - a) * d).sum::<f64>() / dd
    };
    let resid = p
        .iter()
        .zip(a)
        .zip(&d)
        .map(|((p, a), d)| (p - (a + u * d)).abs())
        .fold(0.0, f64::max);
    (u, resid)
}

/// Central finite-difference gradient of `f` at `theta`.
pub fn finite_difference(f: impl Fn(&[f64]) -> f64, theta: &[f64], h: f64) -> Vec<f64> {
    let mut t = theta.to_vec();
    (0..theta.len())
        .map(|k| {
            t[k] = theta[k] + h;
            let up = f(&t);
            t[k] = theta[k] - h;
            let down = f(&t);
            t[k] = theta[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `||a - b|| / max(||a||, ||b||)` in the Euclidean norm; 0 when both are 0.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let diff = norm(&mut a.iter().zip(b).map(|(x, y)| x - y));
    let scale = norm(&mut a.iter().copied()).max(norm(&mut b.iter().copied()));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Wald-Wolfowitz runs test z-statistic for a binary sequence; `None` when
/// one symbol is absent.
pub fn runs_test_z(seq: &[bool]) -> Option<f64> {
    let n1 = seq.iter().filter(|&&b| b).count() as f64;
    let n2 = seq.len() as f64 - n1;
    if n1 == 0.0 || n2 == 0.0 {
        return None;
    }
    let runs = 1.0 + seq.windows(2).filter(|w| w[0] != w[1]).count() as f64;
    let n = n1 + n2;
    let mean = 2.0 * n1 * n2 / n + 1.0;
    let var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1.0));
    Some((runs - mean) / var.sqrt())
}

/// Two-sided critical value of the standard normal at alpha = 0.01.
pub const Z_CRIT_001: f64 = 2.5758;

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> OracleCheck {
    OracleCheck { name, passed, detail }
}

/// A quick battery comparing the pipeline against the oracles above on
/// random inputs.
pub fn run_battery(seed: u64) -> Vec<OracleCheck> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for _ in 0..200 {
        let cm = ConfusionMatrix {
            tp: rng.random_range(0..50),
            fp: rng.random_range(0..50),
            fn_: rng.random_range(0..50),
            tn: rng.random_range(1..50),
        };
        let m = metrics(&cm).expect("non-empty");
        let got = [m.accuracy, m.recall, m.precision, m.f1, m.fpr];
        for (g, e) in got.iter().zip(naive_metrics(&cm)) {
            worst = worst.max((g - e).abs());
        }
    }
    out.push(check("metrics", worst <= 1e-12, format!("max abs error {worst:e}")));

    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(2..120);
        let mut y: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        y[0] = 0;
        y[1] = 1;
        let s: Vec<f64> = (0..n).map(|_| (rng.random_range(0..20) as f64) / 20.0).collect();
        let pred: Vec<u8> = s.iter().map(|&v| u8::from(v >= 0.5)).collect();
        if confusion(&y, &pred).expect("binary") != naive_confusion(&y, &pred) {
            worst = f64::INFINITY;
        }
        worst = worst.max((roc_auc(&y, &s).expect("both classes") - pairwise_auc(&y, &s)).abs());
    }
    out.push(check("roc_auc", worst <= 1e-12, format!("max abs error {worst:e}")));

    let mut worst = 0.0f64;
    for _ in 0..5 {
        let x = Array2::from_shape_fn((80, 12), |_| rng.random_range(-2.0..2.0));
        let pca = fit_pca(x.view(), 0.95).expect("valid input");
        let (values, vectors) = covariance_eigen(x.view());
        for (j, v) in values.iter().enumerate() {
            worst = worst.max((pca.explained_variance[j] - v).abs());
            let dot: f64 = pca.components.row(j).dot(&vectors.row(j));
            worst = worst.max(1.0 - dot.abs());
        }
    }
    out.push(check("pca", worst <= 1e-8, format!("max deviation {worst:e}")));

    let x = Array2::from_shape_fn((240, 3), |_| rng.random_range(-1.0..1.0));
    let y: Vec<u8> = (0..240).map(|i| u8::from(i < 40)).collect();
    let r = smote_resample(x.view(), &y, &SmoteConfig { seed, ..Default::default() }).expect("valid input");
    let minority: Vec<usize> = (0..40).collect();
    let x_min = x.select(ndarray::Axis(0), &minority);
    let mut ok = r.summary.ones_after == r.summary.zeros_after;
    for (s, o) in r.origins.iter().enumerate() {
        let p = r.x.row(240 + s).to_vec();
        let (u, resid) = segment_fit(&x.row(o.base).to_vec(), &x.row(o.neighbor).to_vec(), &p);
        let nbrs = brute_force_knn(x_min.view(), o.base, 5);
        ok &= resid < 1e-9 && (-1e-12..1.0).contains(&u) && nbrs.contains(&o.neighbor);
    }
    out.push(check("smote", ok, format!("{} synthetic rows", r.origins.len())));

    let xs = Array2::from_shape_fn((10, 3), |_| rng.random_range(-1.0..1.0));
    let ys: Vec<u8> = (0..10).map(|i| (i % 2) as u8).collect();
    let w0: Vec<f64> = (0..4).map(|_| rng.random_range(-0.5..0.5)).collect();
    let lr_loss = |t: &[f64]| {
        crate::classifiers::logistic_objective(xs.view(), &ys, ndarray::ArrayView1::from(&t[..3]), t[3], 1.0).0
    };
    let (_, gw, gb) =
        crate::classifiers::logistic_objective(xs.view(), &ys, ndarray::ArrayView1::from(&w0[..3]), w0[3], 1.0);
    let mut analytic = gw.to_vec();
    analytic.push(gb);
    let lr_err = relative_error(&analytic, &finite_difference(lr_loss, &w0, 1e-6));
    out.push(check("lr_gradient", lr_err < 1e-6, format!("relative error {lr_err:e}")));

    let net = MlpModel::initialize(3, &[5], &mut rng);
    let theta = net.flat_params();
    let (_, grad) = net.objective(xs.view(), &ys, 1e-3);
    let probe = net.clone();
    let fd = finite_difference(
        |t| {
            let mut m = probe.clone();
            m.set_flat_params(t);
            m.loss(xs.view(), &ys, 1e-3)
        },
        &theta,
        1e-6,
    );
    let mlp_err = relative_error(&grad, &fd);
    out.push(check("mlp_gradient", mlp_err < 1e-4, format!("relative error {mlp_err:e}")));

    out
}
