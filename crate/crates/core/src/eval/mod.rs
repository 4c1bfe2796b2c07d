//! Stratified k-fold cross-validation, exhaustive grid search, and the metric
//! suite (including wall-clock fit and predict times).

mod cv;
mod grid;
mod metrics;

pub use cv::{cross_validate, kfold_indices, CvResult, FoldPlan};
pub use grid::{grid_search, trial_seed, ComboSummary, GridResult, HparamGrid, Trial};
pub use metrics::{
    confusion, evaluate, metrics, roc_auc, timed_fit_predict, ConfusionMatrix, MetricsReport, Scoring, TimedRun,
    UndefinedMetrics,
};
