//! L2-regularized logistic regression fit by full-batch gradient descent with
//! backtracking line search. The objective is the mean log-loss plus
//! `||w||^2 / (2 C n)`; the intercept is not penalized.

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::{logit_loss, require_both_classes, sigmoid, Family};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticParams {
    /// Inverse regularization strength.
    #[serde(rename = "C")]
    pub c: f64,
    pub max_iter: usize,
    /// Stop once the gradient norm falls below this.
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            c: 0.1,
            max_iter: 200,
            tol: 1e-6,
        }
    }
}

impl LogisticParams {
    pub(crate) fn validated(self) -> Result<Self> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::hparam(Family::LR, "C must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::hparam(Family::LR, "max_iter must be >= 1"));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::hparam(Family::LR, "tol must be >= 0"));
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Objective value at the start and after every accepted step.
    pub loss_history: Vec<f64>,
    pub converged: bool,
}

impl LogisticModel {
    pub fn predict_score(&self, x: ArrayView2<f64>) -> Vec<f64> {
        let w = ArrayView1::from(&self.weights[..]);
        x.dot(&w).iter().map(|z| sigmoid(z + self.intercept)).collect()
    }
}

/// Objective and its gradient `(loss, d/dw, d/db)` at `(w, b)`.
pub fn logistic_objective(
    x: ArrayView2<f64>,
    y: &[u8],
    w: ArrayView1<f64>,
    b: f64,
    c: f64,
) -> (f64, Array1<f64>, f64) {
    let n = y.len() as f64;
    let z = x.dot(&w);
    let mut loss = 0.0;
    let mut resid = Array1::<f64>::zeros(y.len());
    for i in 0..y.len() {
        let zi = z[i] + b;
        let t = y[i] as f64;
        loss += logit_loss(zi, t);
        resid[i] = sigmoid(zi) - t;
    }
    let penalty = w.dot(&w) / (2.0 * c * n);
    let grad_w = x.t().dot(&resid) / n + &w / (c * n);
    let grad_b = resid.sum() / n;
    (loss / n + penalty, grad_w, grad_b)
}

pub(crate) fn fit(x: ArrayView2<f64>, y: &[u8], params: &LogisticParams) -> Result<LogisticModel> {
    require_both_classes(y, "LR training labels")?;
    let prior = y.iter().filter(|&&v| v == 1).count() as f64 / y.len() as f64;
    let mut w = Array1::<f64>::zeros(x.ncols());
    let mut b = (prior / (1.0 - prior)).ln();
    let c = params.c;

    let (mut loss, mut gw, mut gb) = logistic_objective(x, y, w.view(), b, c);
    let mut history = vec![loss];
    let mut step = 1.0;
    let mut converged = false;
    for _ in 0..params.max_iter {
        let gnorm2 = gw.dot(&gw) + gb * gb;
        if gnorm2.sqrt() < params.tol {
            converged = true;
            break;
        }
        step *= 2.0;
        let mut accepted = None;
        while step > 1e-12 {
            let w_new = &w - &(&gw * step);
            let b_new = b - step * gb;
            let trial = logistic_objective(x, y, w_new.view(), b_new, c);
            if trial.0 <= loss - 1e-4 * step * gnorm2 {
                accepted = Some((w_new, b_new, trial));
                break;
            }
            step *= 0.5;
        }
        let Some((w_new, b_new, (l, g, g0))) = accepted else {
            converged = true;
            break;
        };
        w = w_new;
        b = b_new;
        loss = l;
        gw = g;
        gb = g0;
        history.push(loss);
    }
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss(format!("LR objective {loss}")));
    }
    Ok(LogisticModel {
        weights: w.to_vec(),
        intercept: b,
        loss_history: history,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn gradient_matches_finite_differences() {
        let x = array![[0.5, -1.0], [1.5, 0.2], [-0.3, 0.8], [2.0, -0.4], [0.1, 0.1]];
        let y = [0, 1, 0, 1, 1];
        let w = array![0.3, -0.7];
        let (b, c) = (0.2, 0.5);
        let (_, gw, gb) = logistic_objective(x.view(), &y, w.view(), b, c);
        let h = 1e-6;
        for j in 0..2 {
            let mut wp = w.clone();
            wp[j] += h;
            let mut wm = w.clone();
            wm[j] -= h;
            let fd = (logistic_objective(x.view(), &y, wp.view(), b, c).0
                - logistic_objective(x.view(), &y, wm.view(), b, c).0)
                / (2.0 * h);
            assert!((fd - gw[j]).abs() < 1e-7, "{fd} vs {}", gw[j]);
        }
        let fd = (logistic_objective(x.view(), &y, w.view(), b + h, c).0
            - logistic_objective(x.view(), &y, w.view(), b - h, c).0)
            / (2.0 * h);
        assert!((fd - gb).abs() < 1e-7);
    }

    #[test]
    fn separable_data_learns_a_positive_slope() {
        let x = Array2::from_shape_fn((40, 1), |(i, _)| i as f64 / 10.0 - 2.0);
        let y: Vec<u8> = (0..40).map(|i| u8::from(i >= 20)).collect();
        let p = LogisticParams {
            c: 10.0,
            max_iter: 500,
            tol: 1e-8,
        };
        let m = fit(x.view(), &y, &p).unwrap();
        assert!(m.weights[0] > 0.0);
        let s = m.predict_score(x.view());
        let correct = s.iter().zip(&y).filter(|(s, &t)| u8::from(**s >= 0.5) == t).count();
        assert!(correct >= 38);
        assert!(m.loss_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn strong_penalty_shrinks_weights() {
        let x = Array2::from_shape_fn((40, 1), |(i, _)| i as f64 / 10.0 - 2.0);
        let y: Vec<u8> = (0..40).map(|i| u8::from(i >= 20)).collect();
        let loose = fit(x.view(), &y, &LogisticParams { c: 10.0, ..Default::default() }).unwrap();
        let tight = fit(x.view(), &y, &LogisticParams { c: 1e-4, ..Default::default() }).unwrap();
        assert!(tight.weights[0].abs() < loose.weights[0].abs());
    }
}
