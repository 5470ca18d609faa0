//! C ABI over the `isafe` library.
//!
//! Every function returns an [`IsafeStatus`]; on failure the message is
//! available from [`isafe_last_error`] on the same thread. Profiles are
//! opaque handles created by [`isafe_profile_new`] and released by
//! [`isafe_profile_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use isafe::metrics::{self, MetricKind, QuantileGrid, ResponseProfile};
use isafe::pipeline::{emit_report, run_audit, AuditConfig};
use isafe::stats::{self, BootstrapConfig, LabeledScore};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsafeStatus {
    Ok = 0,
    NullPointer = 1,
    /// Invalid input or configuration.
    Validation = 2,
    /// A scoring adapter failed.
    Adapter = 3,
    Io = 4,
    /// A Rust panic was caught at the boundary.
    Internal = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsafeMetricKind {
    Qbm = 0,
    Wcm = 1,
    TiWcm = 2,
}

impl From<IsafeMetricKind> for MetricKind {
    fn from(k: IsafeMetricKind) -> Self {
        match k {
            IsafeMetricKind::Qbm => MetricKind::Qbm,
            IsafeMetricKind::Wcm => MetricKind::Wcm,
            IsafeMetricKind::TiWcm => MetricKind::TiWcm,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IsafeMetricValue {
    pub value: f64,
    /// Zero paired displacement; `value` is 0 by convention.
    pub degenerate: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IsafeDiagnostics {
    pub mean_original: f64,
    pub mean_perturbed: f64,
    pub paired_rms: f64,
    pub transport_rms: f64,
    pub n: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IsafeInterval {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Index-aligned original and perturbed scores.
pub struct IsafeProfile {
    inner: ResponseProfile,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &isafe::Error) -> IsafeStatus {
    match err.exit_code() {
        3 => IsafeStatus::Adapter,
        4 => IsafeStatus::Io,
        _ => IsafeStatus::Validation,
    }
}

type FfiResult<T> = Result<T, (IsafeStatus, String)>;

fn lib<T>(r: isafe::Result<T>) -> FfiResult<T> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (IsafeStatus, String) {
    (IsafeStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any error or panic, and converts the outcome to a status.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> IsafeStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IsafeStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            IsafeStatus::Internal
        }
    }
}

unsafe fn doubles<'a>(data: *const f64, n: usize, what: &str) -> FfiResult<&'a [f64]> {
    if n == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(data, n))
}

unsafe fn profile<'a>(p: *const IsafeProfile, what: &str) -> FfiResult<&'a ResponseProfile> {
    p.as_ref().map(|p| &p.inner).ok_or_else(|| null(what))
}

/// `levels == NULL` with `n_levels == 0` selects the quartile grid.
unsafe fn grid(levels: *const f64, n_levels: usize) -> FfiResult<QuantileGrid> {
    if levels.is_null() && n_levels == 0 {
        return Ok(QuantileGrid::quartiles());
    }
    lib(QuantileGrid::new(doubles(levels, n_levels, "levels")?.to_vec()))
}

unsafe fn path<'a>(s: *const c_char, what: &str) -> FfiResult<&'a Path> {
    if s.is_null() {
        return Err(null(what));
    }
    let s = CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (IsafeStatus::Validation, format!("{what} is not UTF-8")))?;
    Ok(Path::new(s))
}

fn write<T>(out: *mut T, value: T, what: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(null(what));
    }
    unsafe { out.write(value) };
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn isafe_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn isafe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `n` score pairs into a new profile written to `*out`.
///
/// # Safety
/// `original` and `perturbed` must point to `n` readable doubles and `out`
/// to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn isafe_profile_new(
    original: *const f64,
    perturbed: *const f64,
    n: usize,
    out: *mut *mut IsafeProfile,
) -> IsafeStatus {
    guard(|| {
        let o = doubles(original, n, "original")?.to_vec();
        let p = doubles(perturbed, n, "perturbed")?.to_vec();
        let inner = lib(ResponseProfile::from_scores(o, p))?;
        write(out, Box::into_raw(Box::new(IsafeProfile { inner })), "out")
    })
}

/// Releases a profile. NULL is ignored.
///
/// # Safety
/// `profile` must come from `isafe_profile_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn isafe_profile_free(profile: *mut IsafeProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Number of pairs in `profile`, or 0 for NULL.
///
/// # Safety
/// `profile` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn isafe_profile_len(profile: *const IsafeProfile) -> usize {
    profile.as_ref().map_or(0, |p| p.inner.len())
}

/// Evaluates one metric. `levels` is the QBM grid (ignored for WCM and
/// TI-WCM); pass NULL and 0 for the quartiles.
///
/// # Safety
/// `profile` must be a live handle, `levels` must point to `n_levels`
/// doubles when non-NULL, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn isafe_metric(
    profile: *const IsafeProfile,
    kind: IsafeMetricKind,
    levels: *const f64,
    n_levels: usize,
    out: *mut IsafeMetricValue,
) -> IsafeStatus {
    guard(|| {
        let p = self::profile(profile, "profile")?;
        let v = metrics::evaluate(kind.into(), p, &grid(levels, n_levels)?);
        write(
            out,
            IsafeMetricValue {
                value: v.value,
                degenerate: v.degenerate,
            },
            "out",
        )
    })
}

/// # Safety
/// `profile` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn isafe_diagnostics(profile: *const IsafeProfile, out: *mut IsafeDiagnostics) -> IsafeStatus {
    guard(|| {
        let d = metrics::profile_diagnostics(self::profile(profile, "profile")?);
        write(
            out,
            IsafeDiagnostics {
                mean_original: d.mean_original,
                mean_perturbed: d.mean_perturbed,
                paired_rms: d.paired_rms,
                transport_rms: d.transport_rms,
                n: d.n,
            },
            "out",
        )
    })
}

/// Spurious-minus-mechanistic contrast of one metric.
///
/// # Safety
/// Both profiles must be live handles, `levels` as in `isafe_metric`, and
/// `delta` writable.
#[no_mangle]
pub unsafe extern "C" fn isafe_contrast(
    mechanistic: *const IsafeProfile,
    spurious: *const IsafeProfile,
    kind: IsafeMetricKind,
    levels: *const f64,
    n_levels: usize,
    delta: *mut f64,
) -> IsafeStatus {
    guard(|| {
        let g = grid(levels, n_levels)?;
        let m = metrics::evaluate(kind.into(), profile(mechanistic, "mechanistic")?, &g);
        let s = metrics::evaluate(kind.into(), profile(spurious, "spurious")?, &g);
        write(delta, lib(metrics::contrast(&m, &s))?.delta, "delta")
    })
}

/// Percentile bootstrap interval for one metric, resampling pairs.
///
/// # Safety
/// As for `isafe_metric`.
#[no_mangle]
pub unsafe extern "C" fn isafe_bootstrap_metric(
    profile: *const IsafeProfile,
    kind: IsafeMetricKind,
    levels: *const f64,
    n_levels: usize,
    replicates: usize,
    confidence: f64,
    boot_seed: u64,
    out: *mut IsafeInterval,
) -> IsafeStatus {
    guard(|| {
        let p = self::profile(profile, "profile")?;
        let g = grid(levels, n_levels)?;
        let config = BootstrapConfig {
            replicates,
            confidence,
            boot_seed,
        };
        lib(config.validate())?;
        let kind: MetricKind = kind.into();
        let ci = lib(stats::bootstrap_ci(
            std::slice::from_ref(p),
            |ps| Ok(metrics::evaluate(kind, &ps[0], &g).value),
            &config,
        ))?;
        write(
            out,
            IsafeInterval {
                point: ci.point,
                lower: ci.lower,
                upper: ci.upper,
            },
            "out",
        )
    })
}

/// Type-7 empirical quantile of `n` values at `level` in [0, 1].
///
/// # Safety
/// `values` must point to `n` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn isafe_empirical_quantile(
    values: *const f64,
    n: usize,
    level: f64,
    out: *mut f64,
) -> IsafeStatus {
    guard(|| {
        let v = doubles(values, n, "values")?;
        write(out, lib(metrics::empirical_quantile(v, level))?, "out")
    })
}

/// AUROC with half credit for ties. Labels must be 0 or 1.
///
/// # Safety
/// `scores` and `labels` must point to `n` elements and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn isafe_auroc(scores: *const f64, labels: *const u8, n: usize, out: *mut f64) -> IsafeStatus {
    guard(|| {
        let s = doubles(scores, n, "scores")?;
        if n > 0 && labels.is_null() {
            return Err(null("labels"));
        }
        let l: &[u8] = if n == 0 { &[] } else { slice::from_raw_parts(labels, n) };
        let items = s
            .iter()
            .zip(l)
            .map(|(&score, &label)| LabeledScore::new(score, i64::from(label)))
            .collect::<isafe::Result<Vec<_>>>();
        write(out, lib(stats::auroc(&lib(items)?))?, "out")
    })
}

/// Loads a TOML audit config, runs it, and writes the report files to
/// `out_dir`.
///
/// # Safety
/// Both arguments must be NUL-terminated UTF-8 strings.
#[no_mangle]
pub unsafe extern "C" fn isafe_run_audit(config_path: *const c_char, out_dir: *const c_char) -> IsafeStatus {
    guard(|| {
        let config = lib(AuditConfig::load(path(config_path, "config_path")?))?;
        let report = lib(run_audit(&config))?;
        lib(emit_report(&report, path(out_dir, "out_dir")?))?;
        Ok(())
    })
}
