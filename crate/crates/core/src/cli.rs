//! Command-line front end. Exit codes: 0 success, 2 usage or configuration
//! error, 1 runtime error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::classifiers::{Family, Hyperparameters, ModelSpec};
use crate::dataset::{
    category_counts, clean, load_csv, load_feature_names, synthesize, CategoryCount, Dataset, Stratify, SynthConfig,
};
use crate::error::{Error, Result};
use crate::eval::{timed_fit_predict, Scoring};
use crate::experiment::{
    emit_reports, load_data, prepare, run_experiment, zero_day_categories, DataSource, ExperimentConfig,
    ExperimentReport, ModelEntry, SmoteMode, SubsampleConfig, ZeroDayConfig,
};
use crate::oracle::run_battery;
use crate::preprocess::correlation_rank;
use crate::smote::{smote_resample, SmoteConfig};
use crate::split::{make_split, InjectMode};

#[derive(Debug, Parser)]
#[command(name = "zeroday", version, about = "Zero-day NetFlow intrusion detection experiments")]
pub struct Cli {
    /// Log verbosity (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic NetFlow-like dataset as CSV.
    Synth(SynthArgs),
    /// Show cleaning summary, category counts and feature correlations.
    Inspect(InspectArgs),
    /// Build a zero-day train/test split plan.
    Split(SplitArgs),
    /// Fit and evaluate one model through the full preprocessing pipeline.
    Train(TrainArgs),
    /// Run the full (optionally paired) experiment and write reports.
    Experiment(ExperimentArgs),
    /// Check the pipeline against independent reference computations.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 50_000)]
    pub rows: usize,
    #[arg(long, default_value_t = 20)]
    pub features: usize,
    #[arg(long, default_value_t = 0.0536)]
    pub attack_fraction: f64,
    #[arg(long, default_value_t = SynthConfig::default().class_separation)]
    pub class_separation: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_std: f64,
    #[arg(long, default_value_t = 0.5)]
    pub category_spread: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output CSV; stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

impl SynthArgs {
    fn config(&self) -> SynthConfig {
        SynthConfig {
            n_rows: self.rows,
            n_features: self.features,
            attack_fraction: self.attack_fraction,
            class_separation: self.class_separation,
            noise_std: self.noise_std,
            category_spread: self.category_spread,
            seed: self.seed,
            ..Default::default()
        }
    }
}

/// Where rows come from: a CSV file, or synthetic data when `--data` is absent.
#[derive(Debug, Args)]
pub struct DataArgs {
    /// UNSW-NB15-style CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// The CSV has no header row.
    #[arg(long)]
    pub no_header: bool,
    /// File with one feature name per line (or a CSV with a `Name` column) for headerless data.
    #[arg(long)]
    pub feature_names: Option<PathBuf>,
    /// Rows to synthesize when no CSV is given.
    #[arg(long, default_value_t = 50_000)]
    pub synth_rows: usize,
    #[arg(long, default_value_t = SynthConfig::default().class_separation)]
    pub class_separation: f64,
}

impl DataArgs {
    fn source(&self, seed: u64) -> DataSource {
        match &self.data {
            Some(path) => DataSource::Csv {
                path: path.clone(),
                has_header: !self.no_header,
                feature_names: self.feature_names.clone(),
            },
            None => DataSource::Synth(SynthConfig {
                n_rows: self.synth_rows,
                class_separation: self.class_separation,
                seed,
                ..Default::default()
            }),
        }
    }

    fn load_raw(&self, seed: u64) -> Result<Dataset> {
        match self.source(seed) {
            DataSource::Synth(s) => synthesize(&s),
            DataSource::Csv {
                path,
                has_header,
                feature_names,
            } => {
                let names = feature_names.as_ref().map(load_feature_names).transpose()?;
                load_csv(&path, has_header, names.as_deref())
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Emit JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ZeroDayArgs {
    /// Number of rarest attack categories withheld as zero-day.
    #[arg(long, default_value_t = 4, conflicts_with = "zero_day")]
    pub zero_day_n: usize,
    /// Explicit zero-day categories (repeatable).
    #[arg(long)]
    pub zero_day: Vec<String>,
}

impl ZeroDayArgs {
    fn config(&self) -> ZeroDayConfig {
        if self.zero_day.is_empty() {
            ZeroDayConfig {
                auto_n: Some(self.zero_day_n),
                categories: None,
            }
        } else {
            ZeroDayConfig {
                auto_n: None,
                categories: Some(self.zero_day.clone()),
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub zero_day: ZeroDayArgs,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    #[arg(long, value_enum, default_value_t = InjectMode::Shuffled)]
    pub inject_mode: InjectMode,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output JSON; stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub zero_day: ZeroDayArgs,
    /// Model family: LR, DT, RF, GBT (alias XGB) or MLP.
    #[arg(long)]
    pub model: String,
    /// Hyperparameter as name=value, value parsed as JSON when possible (repeatable).
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Oversample the training rows before fitting.
    #[arg(long)]
    pub smote: bool,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Write the fitted model (on projected features) as JSON.
    #[arg(long)]
    pub save_model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON experiment config; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV data (overrides the config's data source).
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub smote: Option<SmoteMode>,
    #[arg(long, value_enum)]
    pub inject_mode: Option<InjectMode>,
    #[arg(long)]
    pub paper_faithful_scaling: bool,
    #[arg(long)]
    pub subsample: Option<f64>,
    /// Models to run (comma separated), with fixed hyperparameters.
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<String>,
    #[arg(long, value_enum)]
    pub scoring: Option<Scoring>,
    /// Write the effective config to this path and exit.
    #[arg(long)]
    pub dump_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| Error::io(p, e)),
        None => io::stdout().write_all(bytes).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn print_counts(counts: &[CategoryCount]) {
    let mut err = io::stderr();
    for c in counts {
        let _ = writeln!(err, "{:<16}{:>10}{:>10.2}%", c.category, c.count, c.percentage);
    }
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let d = synthesize(&a.config())?;
    let mut buf = Vec::new();
    d.write_csv(&mut buf)?;
    write_output(a.out.as_deref(), &buf)?;
    print_counts(&category_counts(&d));
    Ok(())
}

fn cmd_inspect(a: &InspectArgs) -> Result<()> {
    let (d, summary) = clean(&a.data.load_raw(a.seed)?)?;
    let counts = category_counts(&d);
    let ranking = correlation_rank(d.features.view(), &d.label, &d.feature_names)?;
    if a.json {
        let v = json!({
            "rows": d.n_rows(),
            "features": d.n_features(),
            "attacks": d.n_attacks(),
            "cleaning": summary,
            "category_counts": counts,
            "correlations": ranking.entries,
        });
        println!("{}", serde_json::to_string_pretty(&v)?);
        return Ok(());
    }
    println!(
        "{} rows ({} dropped while cleaning), {} features, {} attacks ({:.2}%)",
        d.n_rows(),
        summary.dropped_rows,
        d.n_features(),
        d.n_attacks(),
        100.0 * d.n_attacks() as f64 / d.n_rows() as f64
    );
    println!("{} categories:", counts.len());
    for c in &counts {
        println!("  {:<16}{:>10}{:>10.2}%", c.category, c.count, c.percentage);
    }
    println!("correlation with label:");
    for e in &ranking.entries {
        println!("  {:<24}{:>10.4}", e.feature, e.r);
    }
    Ok(())
}

fn cmd_split(a: &SplitArgs) -> Result<()> {
    let (d, _) = clean(&a.data.load_raw(a.seed)?)?;
    let cfg = ExperimentConfig {
        zero_day: a.zero_day.config(),
        ..Default::default()
    };
    let zd = zero_day_categories(&cfg, &d)?;
    let plan = make_split(&d, a.train_fraction, &zd, a.seed, a.inject_mode)?;
    write_output(a.out.as_deref(), plan.to_json()?.as_bytes())?;
    eprintln!(
        "zero-day {:?}: {} train rows, {} test rows",
        plan.zero_day_categories,
        plan.train_indices.len(),
        plan.test_indices.len()
    );
    Ok(())
}

fn parse_params(params: &[String]) -> Result<Hyperparameters> {
    let mut h = Hyperparameters::new();
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("--param {p:?} is not NAME=VALUE")))?;
        let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        h.insert(k.trim().to_string(), value);
    }
    Ok(h)
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let family: Family = a.model.parse()?;
    let spec = ModelSpec {
        family,
        hyperparameters: parse_params(&a.params)?,
        seed: a.seed,
    };
    spec.params()?;
    let cfg = ExperimentConfig {
        data: a.data.source(a.seed),
        zero_day: a.zero_day.config(),
        train_fraction: a.train_fraction,
        seed: a.seed,
        ..Default::default()
    };
    let (d, _) = load_data(&cfg)?;
    let zd = zero_day_categories(&cfg, &d)?;
    let plan = make_split(&d, cfg.train_fraction, &zd, cfg.seed, cfg.inject_mode)?;
    let prep = prepare(&d, &plan, cfg.prune_min_abs_r, cfg.pca_variance_threshold, false)?;
    let (x, y) = if a.smote {
        let r = smote_resample(
            prep.x_train.view(),
            &prep.y_train,
            &SmoteConfig {
                seed: a.seed,
                ..Default::default()
            },
        )?;
        (r.x, r.y)
    } else {
        (prep.x_train.clone(), prep.y_train.clone())
    };
    let run = timed_fit_predict(&spec, x.view(), &y, prep.x_test.view(), &prep.y_test)?;
    if let Some(p) = &a.save_model {
        fs::write(p, run.model.to_json()?).map_err(|e| Error::io(p, e))?;
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "model": family,
            "hyperparameters": spec.hyperparameters,
            "smote": a.smote,
            "metrics": run.report,
        }))?
    );
    Ok(())
}

fn experiment_config(a: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
        if let DataSource::Synth(s) = &mut cfg.data {
            s.seed = seed;
        }
    }
    if let Some(path) = &a.data {
        cfg.data = DataSource::Csv {
            path: path.clone(),
            has_header: true,
            feature_names: None,
        };
    }
    if let Some(m) = a.smote {
        cfg.smote.mode = m;
    }
    if let Some(m) = a.inject_mode {
        cfg.inject_mode = m;
    }
    if a.paper_faithful_scaling {
        cfg.paper_faithful_scaling = true;
    }
    if let Some(f) = a.subsample {
        cfg.subsample = Some(SubsampleConfig {
            fraction: f,
            stratify: Stratify::Category,
        });
    }
    if !a.models.is_empty() {
        cfg.models = a
            .models
            .iter()
            .map(|m| m.parse().map(ModelEntry::fixed))
            .collect::<Result<_>>()?;
    }
    if let Some(s) = a.scoring {
        cfg.scoring = s;
    }
    if let Some(out) = &a.out {
        cfg.output_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_results(report: &ExperimentReport) {
    println!(
        "{:<5}{:<10}{:>10}{:>10}{:>10}{:>10}{:>10}{:>10}{:>12}{:>10}",
        "model", "mode", "accuracy", "recall", "precision", "f1", "roc_auc", "fpr", "zd_recall", "time_s"
    );
    for r in &report.results {
        let m = &r.metrics;
        println!(
            "{:<5}{:<10}{:>10.4}{:>10.4}{:>10.4}{:>10.4}{:>10.4}{:>10.4}{:>12.4}{:>10.3}",
            r.model.as_str(),
            r.mode.as_str(),
            m.accuracy,
            m.recall,
            m.precision,
            m.f1,
            m.roc_auc,
            m.fpr,
            r.zero_day_recall,
            m.total_time_seconds()
        );
    }
}

fn cmd_experiment(a: &ExperimentArgs) -> Result<()> {
    let cfg = experiment_config(a)?;
    if let Some(p) = &a.dump_config {
        return fs::write(p, cfg.to_json()?).map_err(|e| Error::io(p, e));
    }
    let report = run_experiment(&cfg)?;
    print_results(&report);
    if let Some(dir) = &cfg.output_dir {
        for p in emit_reports(&report, dir)? {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn cmd_oracle(a: &OracleArgs) -> Result<bool> {
    let checks = run_battery(a.seed);
    for c in &checks {
        println!("{:<14}{:<6}{}", c.name, if c.passed { "pass" } else { "FAIL" }, c.detail);
    }
    Ok(checks.iter().all(|c| c.passed))
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let _ = env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .format_timestamp(None)
        .try_init();
    let outcome = match &cli.command {
        Command::Synth(a) => cmd_synth(a).map(|_| true),
        Command::Inspect(a) => cmd_inspect(a).map(|_| true),
        Command::Split(a) => cmd_split(a).map(|_| true),
        Command::Train(a) => cmd_train(a).map(|_| true),
        Command::Experiment(a) => cmd_experiment(a).map(|_| true),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                2
            } else {
                1
            }
        }
    }
}
