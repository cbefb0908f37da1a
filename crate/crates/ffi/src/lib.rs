//! C ABI over the `nojulia` library.
//!
//! Every function returns an [`NjStatus`]; results go through out-pointers.
//! After a non-OK status, [`nj_last_error_message`] holds a description for
//! the calling thread. Constructions are opaque handles released with
//! [`nj_construction_free`]. Panics are caught and reported as
//! `NJ_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nojulia::characteristic::log_order_fit_points;
use nojulia::geometry::{disjointness_margin, exponent_for, level_schedule, LevelDisk};
use nojulia::scanner::{scan_direction_with, ProductField, Regime, ScanOptions};
use nojulia::{ConstructionSpec, Error, LogComplex};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NjStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    CertificateNotFound = 3,
    RadiusOnSingularity = 4,
    QuadratureCap = 5,
    InsufficientSpan = 6,
    Panic = 99,
}

/// Opaque construction handle.
pub struct NjConstruction {
    spec: ConstructionSpec,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NjConstructionInfo {
    pub lambda: f64,
    pub p: f64,
    pub n0: u64,
    pub start: u64,
}

/// Level disk geometry; ratios are relative to `alpha = exp(log_alpha)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NjLevelDisk {
    pub log_alpha: f64,
    pub level: f64,
    pub center_ratio: f64,
    pub radius_ratio: f64,
    pub near_ratio: f64,
    pub far_ratio: f64,
    pub sector_half_angle: f64,
}

/// `f(z)` as `log|f|` and `arg f`. `log_abs_f` is `-inf` at a zero and `+inf`
/// at a pole. `nearest_index` is 0 when no zero or pole lies within
/// log-polar distance 1; `nearest_kind` is then 0, else 1 (zero) or 2 (pole).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NjEvalResult {
    pub log_abs_f: f64,
    pub arg_f: f64,
    pub truncation_index: u64,
    pub tail_bound: f64,
    pub nearest_kind: u32,
    pub nearest_index: u64,
    pub nearest_log_distance: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NjCharacteristicSample {
    pub log_r: f64,
    pub m_f: f64,
    pub n_poles: f64,
    pub m_inv: f64,
    pub n_zeros: f64,
    pub t: f64,
    pub jensen_residual: f64,
}

/// `tail_ratio` is NaN when undefined.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NjOrderFit {
    pub lambda_hat: f64,
    pub intercept: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub max_residual: f64,
    pub sample_count: u64,
    pub tail_ratio: f64,
}

/// `regime` is 1 for the small-disk sector, 2 for the exterior sector.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NjDirectionSummary {
    pub theta: f64,
    pub epsilon: f64,
    pub regime: u32,
    pub log_bound: f64,
    pub log_min_abs_f: f64,
    pub log_max_abs_f: f64,
    pub samples: u64,
    pub skipped_near_singular: u64,
    pub exceptional_hits: u64,
    pub violations: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> NjStatus {
    match e {
        Error::CertificateNotFound { .. } => NjStatus::CertificateNotFound,
        Error::RadiusOnSingularity { .. } => NjStatus::RadiusOnSingularity,
        Error::QuadratureCapExceeded { .. } => NjStatus::QuadratureCap,
        Error::InsufficientSpan { .. } => NjStatus::InsufficientSpan,
        _ => NjStatus::InvalidArgument,
    }
}

fn guard<F: FnOnce() -> Result<(), NjStatus>>(body: F) -> NjStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            NjStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside nojulia");
            NjStatus::Panic
        }
    }
}

trait IntoStatus<T> {
    fn status(self) -> Result<T, NjStatus>;
}

impl<T> IntoStatus<T> for nojulia::Result<T> {
    fn status(self) -> Result<T, NjStatus> {
        self.map_err(|e| {
            set_error(&e.to_string());
            status_of(&e)
        })
    }
}

unsafe fn out_ref<'a, T>(ptr: *mut T) -> Result<&'a mut T, NjStatus> {
    ptr.as_mut().ok_or_else(|| {
        set_error("null output pointer");
        NjStatus::NullPointer
    })
}

unsafe fn handle<'a>(ptr: *const NjConstruction) -> Result<&'a NjConstruction, NjStatus> {
    ptr.as_ref().ok_or_else(|| {
        set_error("null construction handle");
        NjStatus::NullPointer
    })
}

/// Builds the construction for `lambda` in (1, 2).
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nj_construction_new(
    lambda: f64,
    out: *mut *mut NjConstruction,
) -> NjStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = std::ptr::null_mut();
        let spec = ConstructionSpec::new(lambda).status()?;
        *out = Box::into_raw(Box::new(NjConstruction { spec }));
        Ok(())
    })
}

/// # Safety
/// `handle` must be null or come from [`nj_construction_new`] and not have
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn nj_construction_free(handle: *mut NjConstruction) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `c` must be a live handle or null; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nj_construction_info(
    c: *const NjConstruction,
    out: *mut NjConstructionInfo,
) -> NjStatus {
    guard(|| {
        let s = &handle(c)?.spec;
        *out_ref(out)? = NjConstructionInfo {
            lambda: s.lambda,
            p: s.p,
            n0: s.n0,
            start: s.start,
        };
        Ok(())
    })
}

/// `I_n = n(n+2)/(n+1)^2` for `n >= 1`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nj_level_schedule(n: u64, out: *mut f64) -> NjStatus {
    guard(|| {
        *out_ref(out)? = level_schedule(n).status()?;
        Ok(())
    })
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nj_level_disk(
    log_alpha: f64,
    level: f64,
    out: *mut NjLevelDisk,
) -> NjStatus {
    guard(|| {
        let d = LevelDisk::new(log_alpha, level).status()?;
        *out_ref(out)? = NjLevelDisk {
            log_alpha: d.log_alpha,
            level: d.level,
            center_ratio: d.center_ratio,
            radius_ratio: d.radius_ratio,
            near_ratio: d.near_ratio,
            far_ratio: d.far_ratio,
            sector_half_angle: d.sector_half_angle(),
        };
        Ok(())
    })
}

/// Margin by which the disks of index `n` and `n + 1` are separated.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nj_disjointness_margin(n: u64, lambda: f64, out: *mut f64) -> NjStatus {
    guard(|| {
        let p = exponent_for(lambda).status()?;
        if n < 1 {
            set_error("n must be at least 1");
            return Err(NjStatus::InvalidArgument);
        }
        *out_ref(out)? = disjointness_margin(n, p);
        Ok(())
    })
}

/// Evaluates `f` at `exp(log_abs_z + i arg_z)`.
///
/// # Safety
/// `c` must be a live handle or null; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nj_evaluate(
    c: *const NjConstruction,
    log_abs_z: f64,
    arg_z: f64,
    eps: f64,
    out: *mut NjEvalResult,
) -> NjStatus {
    guard(|| {
        let s = &handle(c)?.spec;
        let out = out_ref(out)?;
        if log_abs_z.is_nan() || !arg_z.is_finite() {
            set_error("point must have a non-NaN log modulus and a finite argument");
            return Err(NjStatus::InvalidArgument);
        }
        let r = nojulia::evaluate(s, LogComplex::new(log_abs_z, arg_z), eps).status()?;
        let (kind, index, dist) = match r.nearest_singularity {
            Some(n) => (
                match n.kind {
                    nojulia::product::SingularityKind::Zero => 1,
                    nojulia::product::SingularityKind::Pole => 2,
                },
                n.index,
                n.log_distance,
            ),
            None => (0, 0, f64::INFINITY),
        };
        *out = NjEvalResult {
            log_abs_f: r.value.log_mag,
            arg_f: r.value.arg,
            truncation_index: r.truncation_index,
            tail_bound: r.tail_bound,
            nearest_kind: kind,
            nearest_index: index,
            nearest_log_distance: dist,
        };
        Ok(())
    })
}

/// # Safety
/// `c` must be a live handle or null; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nj_characteristic(
    c: *const NjConstruction,
    log_r: f64,
    quad_tol: f64,
    out: *mut NjCharacteristicSample,
) -> NjStatus {
    guard(|| {
        let s = &handle(c)?.spec;
        let out = out_ref(out)?;
        let x = nojulia::characteristic(s, log_r, quad_tol).status()?;
        *out = NjCharacteristicSample {
            log_r: x.log_r,
            m_f: x.m_f,
            n_poles: x.n_poles,
            m_inv: x.m_inv,
            n_zeros: x.n_zeros,
            t: x.t,
            jensen_residual: x.jensen_residual,
        };
        Ok(())
    })
}

/// Least-squares fit of `log T` against `log log r` over `len` samples.
///
/// # Safety
/// `log_r` and `t` must be null or point to `len` readable doubles; `out`
/// must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nj_log_order_fit(
    log_r: *const f64,
    t: *const f64,
    len: usize,
    out: *mut NjOrderFit,
) -> NjStatus {
    guard(|| {
        let out = out_ref(out)?;
        if log_r.is_null() || t.is_null() {
            set_error("null sample array");
            return Err(NjStatus::NullPointer);
        }
        let xs = std::slice::from_raw_parts(log_r, len);
        let ys = std::slice::from_raw_parts(t, len);
        let fit = log_order_fit_points(xs, ys).status()?;
        *out = NjOrderFit {
            lambda_hat: fit.lambda_hat,
            intercept: fit.intercept,
            window_lo: fit.window.0,
            window_hi: fit.window.1,
            max_residual: fit.max_residual,
            sample_count: fit.sample_count as u64,
            tail_ratio: fit.tail_ratio.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Samples the sector around `theta` on `n_radii` radii up to `log_r_max`.
///
/// # Safety
/// `c` must be a live handle or null; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nj_scan_direction(
    c: *const NjConstruction,
    theta: f64,
    n_radii: usize,
    log_r_max: f64,
    seed: u64,
    out: *mut NjDirectionSummary,
) -> NjStatus {
    guard(|| {
        let s = &handle(c)?.spec;
        let out = out_ref(out)?;
        let opts = ScanOptions {
            n_radii,
            log_r_max,
            seed,
            ..ScanOptions::default()
        };
        let field = ProductField {
            spec: s,
            eps: opts.eval_eps,
        };
        let r = scan_direction_with(&field, s, theta, &opts).status()?;
        *out = NjDirectionSummary {
            theta: r.theta,
            epsilon: r.epsilon,
            regime: match r.regime {
                Regime::OmitsSmallDisk => 1,
                Regime::OmitsExterior => 2,
            },
            log_bound: r.log_bound,
            log_min_abs_f: r.log_min_abs_f,
            log_max_abs_f: r.log_max_abs_f,
            samples: r.samples as u64,
            skipped_near_singular: r.skipped_near_singular as u64,
            exceptional_hits: r.exceptional_hits.len() as u64,
            violations: r.violations as u64,
        };
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`) and returns the full length including the
/// terminator. Pass a null `buf` to query the length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn nj_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nj_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
