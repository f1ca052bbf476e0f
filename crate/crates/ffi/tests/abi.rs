use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use rcg_ffi::*;

fn iris() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/iris.csv")
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(rcg_last_error_message()) }.to_string_lossy().into_owned()
}

fn two_blobs() -> (Vec<f64>, Vec<usize>) {
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for i in 0..40 {
        let c = (i % 2) as f64 * 10.0;
        values.extend([c + (i as f64 * 0.37).sin(), c + (i as f64 * 0.91).cos()]);
        labels.push(i % 2);
    }
    (values, labels)
}

#[test]
fn numeric_dataset_reduces() {
    let (values, labels) = two_blobs();
    let mut ds = ptr::null_mut();
    unsafe {
        assert_eq!(rcg_dataset_from_numeric(values.as_ptr(), 40, 2, labels.as_ptr(), &mut ds), RcgStatus::Ok);
        assert_eq!((rcg_dataset_rows(ds), rcg_dataset_features(ds), rcg_dataset_classes(ds)), (40, 2, 2));
        for algo in [RcgAlgorithm::None, RcgAlgorithm::Fsps, RcgAlgorithm::Cnn] {
            let mut red = ptr::null_mut();
            assert_eq!(rcg_reduce(ds, algo, ptr::null(), &mut red), RcgStatus::Ok, "{algo:?}");
            let mut fmask = [9u8; 2];
            assert_eq!(rcg_reduction_feature_mask(red, fmask.as_mut_ptr(), 2), RcgStatus::Ok);
            assert_eq!(fmask.iter().map(|&b| b as usize).sum::<usize>(), rcg_reduction_selected_features(red));
            let mut rcg = f64::NAN;
            assert_eq!(rcg_reduction_final_rcg(red, &mut rcg), RcgStatus::Ok);
            assert!((rcg - 1.0).abs() < 1e-12, "{algo:?} {rcg}");
            rcg_reduction_free(red);
        }
        rcg_dataset_free(ds);
    }
}

#[test]
fn error_codes() {
    let (values, _) = two_blobs();
    let one_class = vec![0usize; 40];
    let mut ds = ptr::null_mut();
    unsafe {
        assert_eq!(rcg_dataset_from_numeric(values.as_ptr(), 40, 2, one_class.as_ptr(), &mut ds), RcgStatus::Degenerate);
        assert!(ds.is_null());
        assert!(last_error().contains("degenerate class distribution"));

        assert_eq!(rcg_dataset_from_numeric(ptr::null(), 40, 2, one_class.as_ptr(), &mut ds), RcgStatus::NullPointer);
        let path = CString::new("/nonexistent.csv").unwrap();
        let class = CString::new("class").unwrap();
        assert_eq!(rcg_dataset_load_csv(path.as_ptr(), class.as_ptr(), &mut ds), RcgStatus::Data);

        let path = CString::new(iris().to_str().unwrap()).unwrap();
        assert_eq!(rcg_dataset_load_csv(path.as_ptr(), class.as_ptr(), &mut ds), RcgStatus::Ok);
        let mut cfg = rcg_config_default();
        cfg.k = 0;
        let mut red = ptr::null_mut();
        assert_eq!(rcg_reduce(ds, RcgAlgorithm::Psrcg, &cfg, &mut red), RcgStatus::Usage);
        assert!(red.is_null());
        assert_eq!(rcg_reduce(ptr::null(), RcgAlgorithm::Psrcg, &cfg, &mut red), RcgStatus::NullPointer);
        rcg_dataset_free(ds);
        rcg_dataset_free(ptr::null_mut());
        rcg_reduction_free(ptr::null_mut());
    }
}

#[test]
fn scalar_helpers() {
    let mut out = 0.0;
    unsafe {
        let p = [0.5, 0.25, 0.25];
        assert_eq!(rcg_quadratic_entropy(p.as_ptr(), 3, &mut out), RcgStatus::Ok);
        assert!((out - 0.625).abs() < 1e-15);
        let bad = [0.5, 0.4];
        assert_eq!(rcg_quadratic_entropy(bad.as_ptr(), 2, &mut out), RcgStatus::Usage);
        assert_eq!(rcg_chi_square_quantile(0.95, 2.0, &mut out), RcgStatus::Ok);
        assert!((out - 5.991464547107979).abs() < 1e-9);
        assert_eq!(rcg_chi_square_quantile(1.5, 2.0, &mut out), RcgStatus::Usage);
        assert_eq!(CStr::from_ptr(rcg_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn config_default_mirrors_core() {
    let c = rcg_config_default();
    assert_eq!((c.k, c.use_epsilon, c.alpha, c.min_alive), (5, false, 0.05, 0));
    assert!(c.rollback_last_deletion && c.normalize && !c.literal_min && !c.pre_purge_baseline);
}

/// Compiles the C smoke program against the generated header and the
/// static library, then runs it on Iris.
#[test]
fn c_program_links_and_runs() {
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let profile_dir = deps.parent().unwrap();
    let lib = profile_dir.join("librcg_ffi.a");
    assert!(lib.is_file(), "{} not built", lib.display());
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = tempfile::tempdir().unwrap();
    let bin = exe.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&bin).arg(iris()).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
