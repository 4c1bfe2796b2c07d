use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use zeroday_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe {
        zd_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn synth(rows: usize, features: usize, seed: u64) -> (Vec<f64>, Vec<u8>) {
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(zd_dataset_synthesize(rows, features, 0.2, seed, &mut ds), ZdStatus::Ok);
        assert_eq!(zd_dataset_n_rows(ds), rows);
        assert_eq!(zd_dataset_n_features(ds), features);
        let mut x = vec![0.0; rows * features];
        let mut y = vec![0u8; rows];
        assert_eq!(zd_dataset_copy(ds, x.as_mut_ptr(), y.as_mut_ptr()), ZdStatus::Ok);
        zd_dataset_free(ds);
        (x, y)
    }
}

#[test]
fn fit_predict_and_round_trip() {
    let (rows, cols) = (1500, 5);
    let (x, y) = synth(rows, cols, 4);
    let family = CString::new("GBT").unwrap();
    let params = CString::new(r#"{"n_rounds": 20, "max_depth": 3}"#).unwrap();
    unsafe {
        let mut model = ptr::null_mut();
        let s = zd_model_fit(family.as_ptr(), params.as_ptr(), 1, x.as_ptr(), rows, cols, y.as_ptr(), &mut model);
        assert_eq!(s, ZdStatus::Ok, "{}", last_error());

        let mut pred = vec![0u8; rows];
        let mut score = vec![0.0; rows];
        assert_eq!(zd_model_predict(model, x.as_ptr(), rows, cols, pred.as_mut_ptr()), ZdStatus::Ok);
        assert_eq!(zd_model_predict_score(model, x.as_ptr(), rows, cols, score.as_mut_ptr()), ZdStatus::Ok);
        for (p, s) in pred.iter().zip(&score) {
            assert_eq!(*p, u8::from(*s >= 0.5));
        }

        let mut m = ZdMetrics::default();
        assert_eq!(zd_confusion_metrics(y.as_ptr(), pred.as_ptr(), rows, &mut m), ZdStatus::Ok);
        assert_eq!(m.tp + m.fp + m.fn_ + m.tn, rows as u64);
        assert!(m.accuracy > 0.9, "{m:?}");
        let mut auc = 0.0;
        assert_eq!(zd_roc_auc(y.as_ptr(), score.as_ptr(), rows, &mut auc), ZdStatus::Ok);
        assert!(auc > m.accuracy - 0.1);

        let mut json = ptr::null_mut();
        assert_eq!(zd_model_to_json(model, &mut json), ZdStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(zd_model_from_json(json, &mut back), ZdStatus::Ok);
        zd_string_free(json);
        let mut score2 = vec![0.0; rows];
        assert_eq!(zd_model_predict_score(back, x.as_ptr(), rows, cols, score2.as_mut_ptr()), ZdStatus::Ok);
        assert_eq!(score, score2);
        zd_model_free(back);
        zd_model_free(model);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let (x, y) = synth(300, 4, 2);
    unsafe {
        let mut model = ptr::null_mut();
        let bad = CString::new("SVM").unwrap();
        assert_eq!(
            zd_model_fit(bad.as_ptr(), ptr::null(), 0, x.as_ptr(), 300, 4, y.as_ptr(), &mut model),
            ZdStatus::InvalidArgument
        );
        assert!(last_error().contains("SVM"), "{}", last_error());
        assert!(model.is_null());

        let lr = CString::new("LR").unwrap();
        assert_eq!(
            zd_model_fit(lr.as_ptr(), ptr::null(), 0, ptr::null(), 300, 4, y.as_ptr(), &mut model),
            ZdStatus::NullPointer
        );
        let ones = vec![1u8; 300];
        assert_eq!(
            zd_model_fit(lr.as_ptr(), ptr::null(), 0, x.as_ptr(), 300, 4, ones.as_ptr(), &mut model),
            ZdStatus::Runtime
        );

        let path = CString::new("/nonexistent/flows.csv").unwrap();
        let mut ds = ptr::null_mut();
        assert_eq!(zd_dataset_load_csv(path.as_ptr(), true, &mut ds), ZdStatus::Io);

        let mut auc = 0.0;
        let scores = vec![0.5; 300];
        assert_eq!(zd_roc_auc(y.as_ptr(), scores.as_ptr(), 300, ptr::null_mut()), ZdStatus::NullPointer);
        assert_eq!(zd_roc_auc(y.as_ptr(), scores.as_ptr(), 300, &mut auc), ZdStatus::Ok);
        assert_eq!(auc, 0.5);
        assert_eq!(last_error(), "");
    }
}

#[test]
fn truncated_error_buffer_reports_full_length() {
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(zd_dataset_synthesize(0, 3, 0.1, 0, &mut ds), ZdStatus::InvalidArgument);
        let full = zd_last_error(ptr::null_mut(), 0);
        let mut buf = [0 as c_char; 8];
        assert_eq!(zd_last_error(buf.as_mut_ptr(), buf.len()), full);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_bytes().len(), 7);
    }
}

#[test]
fn experiment_returns_metrics_csv() {
    let cfg = CString::new(
        r#"{"data": {"kind": "synth", "n_rows": 3000, "n_features": 8, "seed": 5},
            "smote": {"mode": "off"},
            "models": [{"family": "LR"}, {"family": "DT", "hyperparameters": {"max_depth": 5}}]}"#,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    unsafe {
        let mut csv = ptr::null_mut();
        let s = zd_run_experiment(cfg.as_ptr(), out.as_ptr(), &mut csv);
        assert_eq!(s, ZdStatus::Ok, "{}", last_error());
        let text = CStr::from_ptr(csv).to_str().unwrap().to_owned();
        zd_string_free(csv);
        assert!(text.starts_with("model,mode,accuracy,"));
        assert_eq!(text.lines().count(), 3);
        assert!(dir.path().join("report.json").exists());

        let bad = CString::new(r#"{"unknown": 1}"#).unwrap();
        assert_eq!(zd_run_experiment(bad.as_ptr(), ptr::null(), &mut csv), ZdStatus::InvalidArgument);
    }
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/zeroday.h")).unwrap();
    let src = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.strip_prefix("pub unsafe extern \"C\" fn "))
        .map(|l| l.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    for ty in ["typedef struct ZdDataset ZdDataset;", "typedef struct ZdModel ZdModel;", "ZD_STATUS_PANIC = 5"] {
        assert!(header.contains(ty), "{ty}");
    }
}

fn shared_library() -> Option<PathBuf> {
    let deps = std::env::current_exe().ok()?.parent()?.to_path_buf();
    let dir = deps.parent()?;
    ["libzeroday_ffi.so", "libzeroday_ffi.dylib"]
        .iter()
        .map(|n| dir.join(n))
        .find(|p| p.exists())
}

#[test]
fn c_program_links_against_header() {
    let Some(lib) = shared_library() else {
        eprintln!("skipping C smoke test: shared library not built");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping C smoke test: no C compiler");
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let libdir = lib.parent().unwrap();
    let status = Command::new("cc")
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg("-L")
        .arg(libdir)
        .args(["-lzeroday_ffi", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe)
        .env("LD_LIBRARY_PATH", libdir)
        .env("DYLD_LIBRARY_PATH", libdir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("rows=2000"));
}
