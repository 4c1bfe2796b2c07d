use std::collections::BTreeMap;
use std::fs;

use serde_json::json;

use zeroday_core::classifiers::{Family, Hyperparameters};
use zeroday_core::dataset::SynthConfig;
use zeroday_core::experiment::{
    emit_reports, metrics_csv, run_experiment, trials_csv, DataSource, ExperimentConfig, ExperimentReport,
    GridSpec, ModelEntry, ResampleMode, SmoteMode, SmoteSettings, ZeroDayConfig, METRICS_COLUMNS,
};

fn small_data(seed: u64, separation: f64) -> DataSource {
    DataSource::Synth(SynthConfig {
        n_rows: 4000,
        n_features: 10,
        class_separation: separation,
        seed,
        ..Default::default()
    })
}

fn entry(family: Family, params: serde_json::Value) -> ModelEntry {
    let hyperparameters: Hyperparameters = serde_json::from_value(params).unwrap();
    ModelEntry {
        family,
        hyperparameters,
        grid: None,
    }
}

fn light_models() -> Vec<ModelEntry> {
    vec![
        entry(Family::LR, json!({})),
        entry(Family::DT, json!({"max_depth": 6})),
        entry(Family::RF, json!({"n_estimators": 15, "max_depth": 6})),
        entry(Family::GBT, json!({"n_rounds": 15, "max_depth": 3})),
        entry(Family::MLP, json!({"hidden_layer_sizes": [8], "epochs": 5})),
    ]
}

fn small_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        data: small_data(seed, 3.5),
        models: light_models(),
        seed,
        ..Default::default()
    }
}

/// Every metrics.csv column except the two timing columns.
fn stable_columns(csv_bytes: &[u8]) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(csv_bytes);
    r.records()
        .map(|rec| rec.unwrap().iter().take(8).map(str::to_string).collect())
        .collect()
}

fn header(csv_bytes: &[u8]) -> Vec<String> {
    let mut r = csv::Reader::from_reader(csv_bytes);
    r.headers().unwrap().iter().map(str::to_string).collect()
}

#[test]
fn reruns_and_config_echo_reproduce_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(11);
    cfg.output_dir = Some(dir.path().to_path_buf());
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(stable_columns(&metrics_csv(&a).unwrap()), stable_columns(&metrics_csv(&b).unwrap()));

    let echoed = ExperimentConfig::load(dir.path().join("config.json")).unwrap();
    assert_eq!(echoed, cfg);
    let c = run_experiment(&echoed).unwrap();
    assert_eq!(stable_columns(&metrics_csv(&a).unwrap()), stable_columns(&metrics_csv(&c).unwrap()));
    assert_eq!(a.split, c.split);
}

#[test]
fn paired_modes_share_split_and_transforms() {
    let report = run_experiment(&small_config(5)).unwrap();
    assert_eq!(report.resampling.len(), 2);
    let original = &report.resampling[0];
    let smote = &report.resampling[1];
    assert_eq!(original.mode, ResampleMode::Original);
    assert_eq!(original.train_rows, report.split.train_indices.len());
    let s = smote.summary.as_ref().unwrap();
    assert_eq!(s.zeros_before + s.ones_before, original.train_rows);
    assert_eq!(s.ones_after, s.zeros_after);
    assert_eq!(smote.train_rows, s.zeros_after + s.ones_after);
    for f in Family::ALL {
        let o = report.result(f, ResampleMode::Original).unwrap();
        let m = report.result(f, ResampleMode::Smote).unwrap();
        assert_eq!(o.n_zero_day_test, m.n_zero_day_test);
        assert!(o.n_zero_day_test > 0);
    }
}

#[test]
fn report_headers_are_exact() {
    let report = run_experiment(&small_config(3)).unwrap();
    let expected: Vec<String> = METRICS_COLUMNS.iter().map(|s| s.to_string()).collect();
    assert_eq!(
        expected,
        [
            "model", "mode", "accuracy", "recall", "precision", "f1", "roc_auc", "fpr", "fit_time_s",
            "predict_time_s"
        ]
    );
    assert_eq!(header(&metrics_csv(&report).unwrap()), expected);
    assert_eq!(header(&trials_csv(&report).unwrap()), expected);
    assert_eq!(stable_columns(&metrics_csv(&report).unwrap()).len(), 10);
}

#[test]
fn trial_rows_cover_every_combo_and_fold() {
    let mut axes = BTreeMap::new();
    axes.insert("C".to_string(), vec![json!(0.1), json!(1.0)]);
    axes.insert("max_iter".to_string(), vec![json!(50), json!(100), json!(200)]);
    let mut dt = entry(Family::DT, json!({"criterion": "gini"}));
    let mut dt_axes = BTreeMap::new();
    dt_axes.insert("max_depth".to_string(), vec![json!(3), json!(6)]);
    dt.grid = Some(GridSpec::Axes(dt_axes));
    let cfg = ExperimentConfig {
        models: vec![
            ModelEntry {
                family: Family::LR,
                hyperparameters: Hyperparameters::new(),
                grid: Some(GridSpec::Axes(axes)),
            },
            dt,
        ],
        cv_k: 3,
        ..small_config(8)
    };
    let report = run_experiment(&cfg).unwrap();
    let expected_trials = 2 * (6 + 2) * 3;
    let trials = trials_csv(&report).unwrap();
    let rows = stable_columns(&trials);
    assert_eq!(rows.len(), expected_trials);
    assert!(rows.iter().all(|r| r[1].contains("|fold=")));
    for g in &report.grids {
        let best = &g.result.combos[g.result.best_combo];
        assert!(g.result.combos.iter().all(|c| c.mean_score <= best.mean_score));
        let used = report.result(g.result.family, g.mode).unwrap();
        assert_eq!(used.hyperparameters, g.result.best_hyperparameters);
    }
    let dt_grid = report.grids.iter().find(|g| g.result.family == Family::DT).unwrap();
    assert!(dt_grid.result.combos.iter().all(|c| c.hyperparameters["criterion"] == json!("gini")));
}

#[test]
fn uninformative_features_give_chance_auc() {
    let cfg = ExperimentConfig {
        data: small_data(21, 0.0),
        smote: SmoteSettings {
            mode: SmoteMode::Off,
            ..Default::default()
        },
        models: vec![entry(Family::LR, json!({})), entry(Family::RF, json!({"n_estimators": 30}))],
        seed: 21,
        ..Default::default()
    };
    let report = run_experiment(&cfg).unwrap();
    for r in &report.results {
        let auc = r.metrics.roc_auc;
        assert!((0.4..=0.6).contains(&auc), "{} auc {auc}", r.model);
    }
}

#[test]
fn emit_reports_writes_every_file() {
    let dir = tempfile::tempdir().unwrap();
    let report: ExperimentReport = run_experiment(&small_config(2)).unwrap();
    let paths = emit_reports(&report, dir.path()).unwrap();
    let mut names: Vec<String> = paths
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "config.json",
            "correlations.csv",
            "metrics.csv",
            "plot_bars.csv",
            "report.json",
            "resampling.json",
            "split_plan.json",
            "trials.csv"
        ]
    );
    for p in &paths {
        assert!(fs::metadata(p).unwrap().len() > 0, "{}", p.display());
    }
    let leftovers = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().to_string_lossy().ends_with(".tmp"))
        .count();
    assert_eq!(leftovers, 0);
    let bars = fs::read(dir.path().join("plot_bars.csv")).unwrap();
    assert_eq!(header(&bars), ["model", "mode", "metric", "value"]);
    assert_eq!(stable_columns(&bars).len(), 10 * 7);
}

#[test]
fn failing_stage_leaves_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        zero_day: ZeroDayConfig {
            auto_n: None,
            categories: Some(vec!["NoSuchAttack".into()]),
        },
        output_dir: Some(dir.path().to_path_buf()),
        ..small_config(1)
    };
    assert!(run_experiment(&cfg).is_err());
    assert!(dir.path().join("config.json").exists());
    assert!(!dir.path().join("split_plan.json").exists());
    let err = fs::read_to_string(dir.path().join("error.txt")).unwrap();
    assert!(err.contains("split"), "{err}");

    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        smote: SmoteSettings {
            k_neighbors: 0,
            ..Default::default()
        },
        output_dir: Some(dir.path().to_path_buf()),
        ..small_config(1)
    };
    assert!(run_experiment(&cfg).is_err());
    assert!(dir.path().join("split_plan.json").exists());
    let err = fs::read_to_string(dir.path().join("error.txt")).unwrap();
    assert!(err.contains("smote"), "{err}");
}
