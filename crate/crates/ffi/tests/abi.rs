use std::ffi::{CStr, CString};
use std::ptr;

use isafe_ffi::*;

fn last_error() -> String {
    let p = isafe_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn new_profile(o: &[f64], p: &[f64]) -> *mut IsafeProfile {
    let mut handle = ptr::null_mut();
    let status = unsafe { isafe_profile_new(o.as_ptr(), p.as_ptr(), o.len(), &mut handle) };
    assert_eq!(status, IsafeStatus::Ok);
    handle
}

#[test]
fn metrics_through_the_abi() {
    let p = new_profile(&[0.0, 1.0, 2.0], &[2.1, 1.1, 0.1]);
    assert_eq!(unsafe { isafe_profile_len(p) }, 3);
    let mut v = IsafeMetricValue::default();
    assert_eq!(unsafe { isafe_metric(p, IsafeMetricKind::Wcm, ptr::null(), 0, &mut v) }, IsafeStatus::Ok);
    assert!((v.value - (1.0 - (0.03f64 / 8.03).sqrt())).abs() < 1e-12);
    assert!(!v.degenerate);

    let mut d = IsafeDiagnostics::default();
    assert_eq!(unsafe { isafe_diagnostics(p, &mut d) }, IsafeStatus::Ok);
    assert_eq!(d.n, 3);
    assert!(d.transport_rms <= d.paired_rms);

    let levels = [0.5];
    assert_eq!(unsafe { isafe_metric(p, IsafeMetricKind::Qbm, levels.as_ptr(), 1, &mut v) }, IsafeStatus::Ok);
    assert!((0.0..=1.0).contains(&v.value));

    let mut ci = IsafeInterval::default();
    let s = unsafe { isafe_bootstrap_metric(p, IsafeMetricKind::TiWcm, ptr::null(), 0, 50, 0.9, 7, &mut ci) };
    assert_eq!(s, IsafeStatus::Ok);
    assert!(ci.lower <= ci.upper);
    unsafe { isafe_profile_free(p) };
}

#[test]
fn identity_profile_is_degenerate() {
    let p = new_profile(&[1.0, 2.0], &[1.0, 2.0]);
    let mut v = IsafeMetricValue { value: 9.0, degenerate: false };
    assert_eq!(unsafe { isafe_metric(p, IsafeMetricKind::Qbm, ptr::null(), 0, &mut v) }, IsafeStatus::Ok);
    assert_eq!(v, IsafeMetricValue { value: 0.0, degenerate: true });
    unsafe { isafe_profile_free(p) };
}

#[test]
fn contrast_quantile_and_auroc() {
    let mech = new_profile(&[0.0, 1.0, 2.0, 3.0], &[3.0, 2.0, 1.0, 0.0]);
    let spur = new_profile(&[0.0, 1.0, 2.0, 3.0], &[0.5, 1.5, 2.5, 3.5]);
    let mut delta = f64::NAN;
    assert_eq!(
        unsafe { isafe_contrast(mech, spur, IsafeMetricKind::Qbm, ptr::null(), 0, &mut delta) },
        IsafeStatus::Ok
    );
    assert_eq!(delta, -1.0);
    unsafe {
        isafe_profile_free(mech);
        isafe_profile_free(spur);
    }

    let values = [0.0, 1.0, 2.0, 3.0];
    let mut q = 0.0;
    assert_eq!(unsafe { isafe_empirical_quantile(values.as_ptr(), 4, 0.25, &mut q) }, IsafeStatus::Ok);
    assert_eq!(q, 0.75);

    let scores = [0.8, 0.4, 0.6, 0.2];
    let labels = [1u8, 1, 0, 0];
    let mut a = 0.0;
    assert_eq!(unsafe { isafe_auroc(scores.as_ptr(), labels.as_ptr(), 4, &mut a) }, IsafeStatus::Ok);
    assert_eq!(a, 0.75);
}

#[test]
fn errors_set_status_and_message() {
    let mut handle = ptr::null_mut();
    let o = [1.0, f64::NAN];
    let status = unsafe { isafe_profile_new(o.as_ptr(), o.as_ptr(), 2, &mut handle) };
    assert_eq!(status, IsafeStatus::Validation);
    assert!(handle.is_null());
    assert!(last_error().contains("non-finite"));

    let mut v = IsafeMetricValue::default();
    assert_eq!(unsafe { isafe_metric(ptr::null(), IsafeMetricKind::Wcm, ptr::null(), 0, &mut v) }, IsafeStatus::NullPointer);

    let p = new_profile(&[0.0, 1.0], &[1.0, 0.0]);
    assert!(isafe_last_error().is_null());
    let bad = [0.5, 0.2];
    assert_eq!(unsafe { isafe_metric(p, IsafeMetricKind::Qbm, bad.as_ptr(), 2, &mut v) }, IsafeStatus::Validation);
    unsafe { isafe_profile_free(p) };

    let scores = [0.1, 0.2];
    let labels = [1u8, 1];
    let mut a = 0.0;
    assert_eq!(unsafe { isafe_auroc(scores.as_ptr(), labels.as_ptr(), 2, &mut a) }, IsafeStatus::Validation);

    let missing = CString::new("/nonexistent/config.toml").unwrap();
    let out = CString::new("/tmp/out").unwrap();
    assert_eq!(unsafe { isafe_run_audit(missing.as_ptr(), out.as_ptr()) }, IsafeStatus::Io);
    assert_eq!(unsafe { isafe_run_audit(ptr::null(), out.as_ptr()) }, IsafeStatus::NullPointer);
    unsafe { isafe_profile_free(ptr::null_mut()) };
}

#[test]
fn run_audit_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = isafe::pipeline::SynthSpec::new(20, 20, 4, 1);
    spec.model_seeds = vec![0];
    isafe::pipeline::synth::write_synthetic_bundle(&spec, dir.path()).unwrap();
    let config = CString::new(dir.path().join("config.toml").to_str().unwrap()).unwrap();
    let out = CString::new(dir.path().join("out").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { isafe_run_audit(config.as_ptr(), out.as_ptr()) }, IsafeStatus::Ok);
    assert!(dir.path().join("out/summary.json").exists());
}

#[test]
fn version_is_the_package_version() {
    let v = unsafe { CStr::from_ptr(isafe_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
