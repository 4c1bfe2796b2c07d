use std::time::Instant;

use clap::ValueEnum;
use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::classifiers::{fit, FittedModel, ModelSpec};
use crate::error::{Error, Result};

/// Counts with attack (label 1) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn n(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

fn check_binary(v: &[u8], what: &str) -> Result<()> {
    match v.iter().find(|&&b| b > 1) {
        Some(b) => Err(Error::invalid(format!("{what} holds non-binary value {b}"))),
        None => Ok(()),
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::invalid(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    check_binary(y_true, "y_true")?;
    check_binary(y_pred, "y_pred")?;
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            _ => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// Metrics whose denominator was zero; their stored value is 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndefinedMetrics {
    pub recall: bool,
    pub precision: bool,
    pub f1: bool,
    pub fpr: bool,
    pub roc_auc: bool,
}

impl UndefinedMetrics {
    pub fn any(&self) -> bool {
        self.recall || self.precision || self.f1 || self.fpr || self.roc_auc
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub roc_auc: f64,
    pub fpr: f64,
    pub fit_time_seconds: f64,
    pub predict_time_seconds: f64,
    pub undefined: UndefinedMetrics,
}

impl MetricsReport {
    pub fn total_time_seconds(&self) -> f64 {
        self.fit_time_seconds + self.predict_time_seconds
    }
}

fn ratio(num: u64, den: u64, undefined: &mut bool) -> f64 {
    if den == 0 {
        *undefined = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Count-based metrics. `roc_auc` and the timings are left at 0.
pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    if cm.n() == 0 {
        return Err(Error::Empty("confusion matrix".into()));
    }
    let mut u = UndefinedMetrics::default();
    let accuracy = (cm.tp + cm.tn) as f64 / cm.n() as f64;
    let recall = ratio(cm.tp, cm.tp + cm.fn_, &mut u.recall);
    let precision = ratio(cm.tp, cm.tp + cm.fp, &mut u.precision);
    let fpr = ratio(cm.fp, cm.fp + cm.tn, &mut u.fpr);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        u.f1 = true;
        0.0
    };
    Ok(MetricsReport {
        accuracy,
        recall,
        precision,
        f1,
        fpr,
        undefined: u,
        ..Default::default()
    })
}

/// Area under the ROC curve as the Mann-Whitney statistic: the fraction of
/// (attack, normal) pairs where the attack scores higher, ties counting half.
/// Computed from average ranks in `O(n log n)`.
pub fn roc_auc(y_true: &[u8], scores: &[f64]) -> Result<f64> {
    if y_true.len() != scores.len() {
        return Err(Error::invalid("labels and scores differ in length"));
    }
    check_binary(y_true, "y_true")?;
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("scores contain NaN"));
    }
    let n_pos = y_true.iter().filter(|&&v| v == 1).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass("ROC AUC labels".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their average
        let avg = (i + j + 2) as f64 / 2.0;
        pos_rank_sum += avg * order[i..=j].iter().filter(|&&r| y_true[r] == 1).count() as f64;
        i = j + 1;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    Ok((pos_rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

/// Full report for predictions and scores; `roc_auc` is flagged when only one
/// class is present.
pub fn evaluate(y_true: &[u8], y_pred: &[u8], scores: &[f64]) -> Result<MetricsReport> {
    let mut report = metrics(&confusion(y_true, y_pred)?)?;
    match roc_auc(y_true, scores) {
        Ok(a) => report.roc_auc = a,
        Err(Error::SingleClass(_)) => report.undefined.roc_auc = true,
        Err(e) => return Err(e),
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scoring {
    #[default]
    Accuracy,
    Recall,
    Precision,
    F1,
    RocAuc,
}

impl Scoring {
    pub fn of(&self, m: &MetricsReport) -> f64 {
        match self {
            Scoring::Accuracy => m.accuracy,
            Scoring::Recall => m.recall,
            Scoring::Precision => m.precision,
            Scoring::F1 => m.f1,
            Scoring::RocAuc => m.roc_auc,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TimedRun {
    pub model: FittedModel,
    pub predictions: Vec<u8>,
    pub scores: Vec<f64>,
    pub report: MetricsReport,
}

/// Fits on the training rows and evaluates on the test rows, timing fit and
/// prediction separately with a monotonic clock.
pub fn timed_fit_predict(
    spec: &ModelSpec,
    x_train: ArrayView2<f64>,
    y_train: &[u8],
    x_test: ArrayView2<f64>,
    y_test: &[u8],
) -> Result<TimedRun> {
    let start = Instant::now();
    let model = fit(spec, x_train, y_train)?;
    let fit_time = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let predictions = model.predict(x_test)?;
    let scores = model.predict_score(x_test)?;
    let predict_time = start.elapsed().as_secs_f64();

    let mut report = evaluate(y_test, &predictions, &scores)?;
    report.fit_time_seconds = fit_time;
    report.predict_time_seconds = predict_time;
    Ok(TimedRun {
        model,
        predictions,
        scores,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let cm = ConfusionMatrix {
            tp: 3,
            fp: 1,
            fn_: 2,
            tn: 4,
        };
        let m = metrics(&cm).unwrap();
        assert_eq!(m.accuracy, 0.7);
        assert_eq!(m.recall, 0.6);
        assert_eq!(m.precision, 0.75);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.fpr, 0.2);
        assert!(!m.undefined.any());
    }

    #[test]
    fn degenerate_denominators_are_flagged() {
        let m = metrics(&confusion(&[1, 1, 0], &[0, 0, 0]).unwrap()).unwrap();
        assert_eq!((m.recall, m.precision, m.f1), (0.0, 0.0, 0.0));
        assert!(m.undefined.precision && m.undefined.f1 && !m.undefined.recall);
    }

    #[test]
    fn confusion_basics() {
        let cm = confusion(&[1, 0], &[1, 0]).unwrap();
        assert_eq!((cm.tp, cm.tn, cm.fp, cm.fn_), (1, 1, 0, 0));
        let flipped = confusion(&[1, 0, 1], &[0, 1, 0]).unwrap();
        assert_eq!((flipped.fn_, flipped.fp), (2, 1));
        assert!(confusion(&[1], &[1, 0]).is_err());
        assert!(confusion(&[2], &[1]).is_err());
    }

    #[test]
    fn auc_examples() {
        assert_eq!(roc_auc(&[0, 0, 1, 1], &[0.1, 0.4, 0.35, 0.8]).unwrap(), 0.75);
        assert_eq!(roc_auc(&[0, 1, 0, 1], &[0.3; 4]).unwrap(), 0.5);
        assert_eq!(roc_auc(&[0, 0, 1], &[0.1, 0.2, 0.9]).unwrap(), 1.0);
        assert!(matches!(roc_auc(&[1, 1], &[0.1, 0.2]), Err(Error::SingleClass(_))));
    }

    #[test]
    fn json_uses_fn_key() {
        let text = serde_json::to_string(&ConfusionMatrix::default()).unwrap();
        assert_eq!(text, r#"{"tp":0,"fp":0,"fn":0,"tn":0}"#);
    }
}
