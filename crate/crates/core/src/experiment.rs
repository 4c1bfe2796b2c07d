//! End-to-end experiment: clean, subsample, zero-day split, scale, prune,
//! project, optionally oversample, tune, fit and evaluate, then write reports.
//!
//! Paired runs share one split and one set of fitted transforms; only the
//! resampling of the training rows differs.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::classifiers::{format_hyperparameters, Family, Hyperparameters, ModelSpec};
use crate::dataset::{
    category_counts, clean, load_csv, load_feature_names, subsample, synthesize, CategoryCount, CleaningSummary,
    Dataset, Stratify, SynthConfig,
};
use crate::error::{Error, Result};
use crate::eval::{grid_search, timed_fit_predict, GridResult, HparamGrid, MetricsReport, Scoring};
use crate::preprocess::{
    apply_scaler, correlation_rank, fit_pca, fit_scaler, pca_transform, zero_variance_columns, CorrelationRanking,
    PcaModel, Scaler,
};
use crate::smote::{smote_resample, ResampleSummary, SmoteConfig, SmoteTarget};
use crate::split::{make_split, select_zero_day_categories, InjectMode, SplitPlan};

pub const SCHEMA_VERSION: u32 = 1;

/// Header shared by the metrics and trial tables.
pub const METRICS_COLUMNS: [&str; 10] = [
    "model",
    "mode",
    "accuracy",
    "recall",
    "precision",
    "f1",
    "roc_auc",
    "fpr",
    "fit_time_s",
    "predict_time_s",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSource {
    Synth(SynthConfig),
    Csv {
        path: PathBuf,
        #[serde(default = "default_true")]
        has_header: bool,
        /// File listing feature names for headerless CSVs.
        #[serde(default)]
        feature_names: Option<PathBuf>,
    },
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsampleConfig {
    pub fraction: f64,
    #[serde(default)]
    pub stratify: Stratify,
}

/// Either the `auto_n` rarest attack categories or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZeroDayConfig {
    pub auto_n: Option<usize>,
    pub categories: Option<Vec<String>>,
}

impl Default for ZeroDayConfig {
    fn default() -> Self {
        ZeroDayConfig {
            auto_n: Some(4),
            categories: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SmoteMode {
    Off,
    On,
    /// Run with and without oversampling on the same split.
    #[default]
    Paired,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoteSettings {
    pub mode: SmoteMode,
    pub k_neighbors: usize,
    pub target: SmoteTarget,
}

impl Default for SmoteSettings {
    fn default() -> Self {
        SmoteSettings {
            mode: SmoteMode::Paired,
            k_neighbors: 5,
            target: SmoteTarget::Equalize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedGrid {
    Default,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    /// `"default"`: the family's built-in search space.
    Named(NamedGrid),
    Axes(BTreeMap<String, Vec<Value>>),
}

/// A model to evaluate. Fixed hyperparameters apply to every grid
/// combination; grid axes override them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    pub family: Family,
    #[serde(default)]
    pub hyperparameters: Hyperparameters,
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

impl ModelEntry {
    pub fn fixed(family: Family) -> Self {
        ModelEntry {
            family,
            hyperparameters: Hyperparameters::new(),
            grid: None,
        }
    }

    pub fn search_grid(&self) -> Option<HparamGrid> {
        let mut grid = match self.grid.as_ref()? {
            GridSpec::Named(NamedGrid::Default) => HparamGrid::default_for(self.family),
            GridSpec::Axes(axes) => HparamGrid {
                family: self.family,
                axes: axes.clone(),
            },
        };
        for (k, v) in &self.hyperparameters {
            grid.axes.entry(k.clone()).or_insert_with(|| vec![v.clone()]);
        }
        Some(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub data: DataSource,
    pub subsample: Option<SubsampleConfig>,
    pub train_fraction: f64,
    pub zero_day: ZeroDayConfig,
    pub inject_mode: InjectMode,
    pub prune_min_abs_r: f64,
    pub pca_variance_threshold: f64,
    pub smote: SmoteSettings,
    /// Fit scaler, correlation ranking and PCA on every row instead of the
    /// training rows only.
    pub paper_faithful_scaling: bool,
    pub models: Vec<ModelEntry>,
    pub cv_k: usize,
    pub scoring: Scoring,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            data: DataSource::Synth(SynthConfig::default()),
            subsample: None,
            train_fraction: 0.7,
            zero_day: ZeroDayConfig::default(),
            inject_mode: InjectMode::Shuffled,
            prune_min_abs_r: 0.03,
            pca_variance_threshold: 0.95,
            smote: SmoteSettings::default(),
            paper_faithful_scaling: false,
            models: Family::ALL.iter().map(|&f| ModelEntry::fixed(f)).collect(),
            cv_k: 5,
            scoring: Scoring::Accuracy,
            seed: 42,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        match (&self.zero_day.auto_n, &self.zero_day.categories) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(Error::invalid("zero_day needs exactly one of auto_n or categories")),
        }
        if self.models.is_empty() {
            return Err(Error::invalid("no models configured"));
        }
        if self.cv_k < 2 {
            return Err(Error::invalid("cv_k must be >= 2"));
        }
        if !(self.prune_min_abs_r >= 0.0 && self.prune_min_abs_r <= 1.0) {
            return Err(Error::invalid("prune_min_abs_r must lie in [0, 1]"));
        }
        if let DataSource::Synth(s) = &self.data {
            s.validate()?;
        }
        for m in &self.models {
            match m.search_grid() {
                Some(g) => {
                    g.validate()?;
                    for combo in g.combos() {
                        ModelSpec {
                            family: m.family,
                            hyperparameters: combo,
                            seed: 0,
                        }
                        .params()?;
                    }
                }
                None => {
                    ModelSpec {
                        family: m.family,
                        hyperparameters: m.hyperparameters.clone(),
                        seed: 0,
                    }
                    .params()?;
                }
            }
        }
        Ok(())
    }

    fn resampling_modes(&self) -> Vec<ResampleMode> {
        match self.smote.mode {
            SmoteMode::Off => vec![ResampleMode::Original],
            SmoteMode::On => vec![ResampleMode::Smote],
            SmoteMode::Paired => vec![ResampleMode::Original, ResampleMode::Smote],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleMode {
    Original,
    Smote,
}

impl ResampleMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ResampleMode::Original => "original",
            ResampleMode::Smote => "smote",
        }
    }
}

/// Test-set evaluation of one model under one resampling mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelResult {
    pub model: Family,
    pub mode: ResampleMode,
    pub hyperparameters: Hyperparameters,
    pub metrics: MetricsReport,
    /// Recall over test rows from zero-day categories only.
    pub zero_day_recall: f64,
    pub n_zero_day_test: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResamplingRecord {
    pub mode: ResampleMode,
    pub train_rows: usize,
    pub summary: Option<ResampleSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeGrid {
    pub mode: ResampleMode,
    pub result: GridResult,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub cleaning: CleaningSummary,
    pub category_counts: Vec<CategoryCount>,
    pub split: SplitPlan,
    pub dropped_constant_features: Vec<String>,
    pub correlations: CorrelationRanking,
    pub retained_features: Vec<String>,
    pub scaler: Scaler,
    pub pca: PcaModel,
    pub resampling: Vec<ResamplingRecord>,
    pub grids: Vec<ModeGrid>,
    pub results: Vec<ModelResult>,
}

impl ExperimentReport {
    pub fn result(&self, model: Family, mode: ResampleMode) -> Option<&ModelResult> {
        self.results.iter().find(|r| r.model == model && r.mode == mode)
    }
}

/// Fitted transforms and the projected partitions.
pub struct Prepared {
    pub x_train: Array2<f64>,
    pub y_train: Vec<u8>,
    pub x_test: Array2<f64>,
    pub y_test: Vec<u8>,
    /// Test positions holding zero-day rows.
    pub zero_day_mask: Vec<bool>,
    pub dropped_constant_features: Vec<String>,
    pub correlations: CorrelationRanking,
    pub retained_features: Vec<String>,
    pub scaler: Scaler,
    pub pca: PcaModel,
}

/// Fits scaler, correlation pruning and PCA on the training rows (or on all
/// rows when `paper_faithful_scaling`) and applies them to both partitions.
pub fn prepare(
    d: &Dataset,
    plan: &SplitPlan,
    prune_min_abs_r: f64,
    pca_variance_threshold: f64,
    paper_faithful_scaling: bool,
) -> Result<Prepared> {
    let fit_rows: Vec<usize> = if paper_faithful_scaling {
        (0..d.n_rows()).collect()
    } else {
        plan.train_indices.clone()
    };
    let x_fit = d.features.select(Axis(0), &fit_rows);
    let y_fit: Vec<u8> = fit_rows.iter().map(|&i| d.label[i]).collect();

    let constant = zero_variance_columns(x_fit.view());
    let kept: Vec<usize> = (0..d.n_features()).filter(|j| !constant.contains(j)).collect();
    if kept.is_empty() {
        return Err(Error::invalid("every feature is constant on the fitting rows"));
    }
    let names: Vec<String> = kept.iter().map(|&j| d.feature_names[j].clone()).collect();
    let x_fit = x_fit.select(Axis(1), &kept);

    let scaler = fit_scaler(x_fit.view())?;
    let z_fit = apply_scaler(&scaler, x_fit.view())?;
    let correlations = correlation_rank(z_fit.view(), &y_fit, &names)?;
    let retained = correlations.retained_columns(prune_min_abs_r);
    let retained_features: Vec<String> = retained.iter().map(|&j| names[j].clone()).collect();
    let pca = fit_pca(z_fit.select(Axis(1), &retained).view(), pca_variance_threshold)?;

    let project = |rows: &[usize]| -> Result<Array2<f64>> {
        let x = d.features.select(Axis(0), rows).select(Axis(1), &kept);
        let z = apply_scaler(&scaler, x.view())?;
        pca_transform(&pca, z.select(Axis(1), &retained).view())
    };
    let x_train = project(&plan.train_indices)?;
    let x_test = project(&plan.test_indices)?;
    Ok(Prepared {
        x_train,
        y_train: plan.train_indices.iter().map(|&i| d.label[i]).collect(),
        x_test,
        y_test: plan.test_indices.iter().map(|&i| d.label[i]).collect(),
        zero_day_mask: plan.zero_day_mask(d),
        dropped_constant_features: constant.iter().map(|&j| d.feature_names[j].clone()).collect(),
        correlations,
        retained_features,
        scaler,
        pca,
    })
}

/// Loads (or synthesizes), cleans and optionally subsamples the configured data.
pub fn load_data(cfg: &ExperimentConfig) -> Result<(Dataset, CleaningSummary)> {
    let raw = match &cfg.data {
        DataSource::Synth(s) => synthesize(s)?,
        DataSource::Csv {
            path,
            has_header,
            feature_names,
        } => {
            let names = feature_names.as_ref().map(load_feature_names).transpose()?;
            load_csv(path, *has_header, names.as_deref())?
        }
    };
    let (mut d, summary) = clean(&raw)?;
    if let Some(s) = &cfg.subsample {
        d = subsample(&d, s.fraction, cfg.seed, s.stratify)?;
    }
    Ok((d, summary))
}

pub fn zero_day_categories(cfg: &ExperimentConfig, d: &Dataset) -> Result<BTreeSet<String>> {
    match (&cfg.zero_day.auto_n, &cfg.zero_day.categories) {
        (Some(n), None) => select_zero_day_categories(&category_counts(d), *n),
        (None, Some(list)) => Ok(list.iter().cloned().collect()),
        _ => Err(Error::invalid("zero_day needs exactly one of auto_n or categories")),
    }
}

/// Errors if a synthetic row was built from a row outside the training
/// partition or from a test row.
fn check_provenance(origins: &[crate::smote::SyntheticOrigin], plan: &SplitPlan) -> Result<()> {
    let test: BTreeSet<usize> = plan.test_indices.iter().copied().collect();
    for o in origins {
        for local in [o.base, o.neighbor] {
            let global = *plan
                .train_indices
                .get(local)
                .ok_or(Error::IndexOutOfRange {
                    index: local,
                    len: plan.train_indices.len(),
                })?;
            if test.contains(&global) {
                return Err(Error::invalid(format!("synthetic row derived from test row {global}")));
            }
        }
    }
    Ok(())
}

fn zero_day_recall(pred: &[u8], mask: &[bool]) -> (f64, usize) {
    let n = mask.iter().filter(|&&m| m).count();
    if n == 0 {
        return (0.0, 0);
    }
    let hits = pred.iter().zip(mask).filter(|(&p, &m)| m && p == 1).count();
    (hits as f64 / n as f64, n)
}

struct Partial<'a> {
    dir: Option<&'a Path>,
}

impl Partial<'_> {
    fn save(&self, name: &str, contents: &str) -> Result<()> {
        match self.dir {
            Some(dir) => write_atomic(&dir.join(name), contents.as_bytes()),
            None => Ok(()),
        }
    }
}

/// Runs the configured pipeline. With `output_dir` set, the config echo and
/// split plan are written as soon as they exist and `error.txt` records a
/// failing stage; [`emit_reports`] writes the rest.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let partial = Partial {
        dir: cfg.output_dir.as_deref(),
    };
    if let Some(dir) = partial.dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    partial.save("config.json", &cfg.to_json()?)?;
    let out = run_stages(cfg, &partial);
    if let Err(e) = &out {
        partial.save("error.txt", &format!("{e}\n"))?;
    }
    out
}

fn run_stages(cfg: &ExperimentConfig, partial: &Partial) -> Result<ExperimentReport> {
    let (d, cleaning) = load_data(cfg).map_err(|e| e.in_stage("load"))?;
    let counts = category_counts(&d);
    info!("{} rows, {} features, {} attacks", d.n_rows(), d.n_features(), d.n_attacks());

    let zd = zero_day_categories(cfg, &d).map_err(|e| e.in_stage("split"))?;
    let plan = make_split(&d, cfg.train_fraction, &zd, cfg.seed, cfg.inject_mode).map_err(|e| e.in_stage("split"))?;
    partial.save("split_plan.json", &plan.to_json()?)?;
    info!("zero-day categories {:?}; {} train / {} test rows", zd, plan.train_indices.len(), plan.test_indices.len());

    let prep = prepare(
        &d,
        &plan,
        cfg.prune_min_abs_r,
        cfg.pca_variance_threshold,
        cfg.paper_faithful_scaling,
    )
    .map_err(|e| e.in_stage("preprocess"))?;
    info!(
        "{} features retained, {} principal components",
        prep.retained_features.len(),
        prep.pca.n_components
    );

    let mut resampling = Vec::new();
    let mut grids = Vec::new();
    let mut results = Vec::new();
    for mode in cfg.resampling_modes() {
        let (x_train, y_train, summary) = match mode {
            ResampleMode::Original => (prep.x_train.clone(), prep.y_train.clone(), None),
            ResampleMode::Smote => {
                let smote_cfg = SmoteConfig {
                    k_neighbors: cfg.smote.k_neighbors,
                    target: cfg.smote.target,
                    seed: cfg.seed,
                };
                let r = smote_resample(prep.x_train.view(), &prep.y_train, &smote_cfg)
                    .map_err(|e| e.in_stage("smote"))?;
                check_provenance(&r.origins, &plan).map_err(|e| e.in_stage("smote"))?;
                (r.x, r.y, Some(r.summary))
            }
        };
        resampling.push(ResamplingRecord {
            mode,
            train_rows: y_train.len(),
            summary,
        });

        for entry in &cfg.models {
            let hyperparameters = match entry.search_grid() {
                Some(grid) => {
                    info!("{mode:?} {}: grid of {} combinations", entry.family, grid.size());
                    let g = grid_search(&grid, x_train.view(), &y_train, cfg.cv_k, cfg.seed, cfg.scoring)
                        .map_err(|e| e.in_stage("grid_search"))?;
                    let best = g.best_hyperparameters.clone();
                    grids.push(ModeGrid { mode, result: g });
                    best
                }
                None => entry.hyperparameters.clone(),
            };
            let spec = ModelSpec {
                family: entry.family,
                hyperparameters: hyperparameters.clone(),
                seed: cfg.seed,
            };
            let run = timed_fit_predict(&spec, x_train.view(), &y_train, prep.x_test.view(), &prep.y_test)
                .map_err(|e| e.in_stage("evaluate"))?;
            let (zd_recall, n_zd) = zero_day_recall(&run.predictions, &prep.zero_day_mask);
            info!(
                "{mode:?} {}: accuracy {:.4} recall {:.4} zero-day recall {:.4} ({:.2}s)",
                entry.family,
                run.report.accuracy,
                run.report.recall,
                zd_recall,
                run.report.total_time_seconds()
            );
            results.push(ModelResult {
                model: entry.family,
                mode,
                hyperparameters,
                metrics: run.report,
                zero_day_recall: zd_recall,
                n_zero_day_test: n_zd,
            });
        }
    }

    Ok(ExperimentReport {
        config: cfg.clone(),
        cleaning,
        category_counts: counts,
        split: plan,
        dropped_constant_features: prep.dropped_constant_features,
        correlations: prep.correlations,
        retained_features: prep.retained_features,
        scaler: prep.scaler,
        pca: prep.pca,
        resampling,
        grids,
        results,
    })
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn metric_record(model: &str, mode: &str, m: &MetricsReport) -> Vec<String> {
    let mut rec = vec![model.to_string(), mode.to_string()];
    rec.extend([m.accuracy, m.recall, m.precision, m.f1, m.roc_auc, m.fpr].map(|v| v.to_string()));
    rec.push(format!("{:.3}", m.fit_time_seconds));
    rec.push(format!("{:.3}", m.predict_time_seconds));
    rec
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))
}

pub fn metrics_csv(report: &ExperimentReport) -> Result<Vec<u8>> {
    csv_bytes(
        &METRICS_COLUMNS,
        report
            .results
            .iter()
            .map(|r| metric_record(r.model.as_str(), r.mode.as_str(), &r.metrics)),
    )
}

/// One row per (resampling mode, combination, fold); the `mode` column reads
/// `<resampling>|<hyperparameters>|fold=<i>`.
pub fn trials_csv(report: &ExperimentReport) -> Result<Vec<u8>> {
    let rows = report.grids.iter().flat_map(|g| {
        g.result.trials.iter().map(move |t| {
            let mode = format!(
                "{}|{}|fold={}",
                g.mode.as_str(),
                format_hyperparameters(&t.hyperparameters),
                t.fold
            );
            metric_record(g.result.family.as_str(), &mode, &t.report)
        })
    });
    csv_bytes(&METRICS_COLUMNS, rows)
}

/// Long-format bar-chart data: one row per model, mode and metric.
pub fn plot_bars_csv(report: &ExperimentReport) -> Result<Vec<u8>> {
    let rows = report.results.iter().flat_map(|r| {
        let m = &r.metrics;
        [
            ("accuracy", m.accuracy),
            ("recall", m.recall),
            ("precision", m.precision),
            ("f1", m.f1),
            ("roc_auc", m.roc_auc),
            ("fpr", m.fpr),
            ("zero_day_recall", r.zero_day_recall),
        ]
        .map(|(name, v)| {
            vec![
                r.model.to_string(),
                r.mode.as_str().to_string(),
                name.to_string(),
                v.to_string(),
            ]
        })
    });
    csv_bytes(&["model", "mode", "metric", "value"], rows)
}

/// Writes every report file into `out_dir` and returns their paths.
pub fn emit_reports(report: &ExperimentReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut correlations = Vec::new();
    report.correlations.write_csv(&mut correlations)?;
    let files: Vec<(&str, Vec<u8>)> = vec![
        ("metrics.csv", metrics_csv(report)?),
        ("trials.csv", trials_csv(report)?),
        ("plot_bars.csv", plot_bars_csv(report)?),
        ("correlations.csv", correlations),
        ("resampling.json", serde_json::to_vec_pretty(&report.resampling)?),
        ("split_plan.json", report.split.to_json()?.into_bytes()),
        ("config.json", report.config.to_json()?.into_bytes()),
        ("report.json", serde_json::to_vec_pretty(report)?),
    ];
    let mut paths = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let p = out_dir.join(name);
        write_atomic(&p, &bytes)?;
        paths.push(p);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn default_config_round_trips() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_json(r#"{"schema_version": 2}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"zero_day": {"auto_n": 4, "categories": ["Worms"]}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"models": [{"family": "RF", "hyperparameters": {"n_estimators": 0}}]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).unwrap_err().is_config_error());
    }

    #[test]
    fn grids_merge_fixed_hyperparameters() {
        let entry: ModelEntry = serde_json::from_value(json!({
            "family": "RF",
            "hyperparameters": {"n_estimators": 10, "max_depth": 3},
            "grid": {"max_depth": [2, 4]}
        }))
        .unwrap();
        let g = entry.search_grid().unwrap();
        assert_eq!(g.size(), 2);
        assert!(g.combos().iter().all(|c| c["n_estimators"] == json!(10)));
        let named: ModelEntry = serde_json::from_value(json!({"family": "DT", "grid": "default"})).unwrap();
        assert_eq!(named.search_grid().unwrap().size(), 6);
    }

    #[test]
    fn zero_day_recall_counts_masked_rows() {
        assert_eq!(zero_day_recall(&[1, 0, 1, 1], &[true, true, false, false]), (0.5, 2));
        assert_eq!(zero_day_recall(&[1], &[false]), (0.0, 0));
    }
}
