//! C ABI over the horoshrinker solvers.
//!
//! Curves are returned as opaque [`HsCurve`] handles that must be released
//! with [`hs_curve_free`]. Every fallible function returns an [`HsStatus`];
//! the message of the last failure on the calling thread is available from
//! [`hs_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use horoshrinker::geometry::{shrinker_residual, CurveFamily, GeneratingCurve};
use horoshrinker::grim::{first_integral, solve_grim, z0_star_map, PhasePoint};
use horoshrinker::ode::{SolverConfig, Status};
use horoshrinker::rotational::{solve_bowl, solve_wing};
use horoshrinker::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsStatus {
    Ok = 0,
    NullPointer = 1,
    /// An input lies outside the domain of the operation.
    Domain = 2,
    Precondition = 3,
    InvalidConfig = 4,
    /// Solver or root-finding failure.
    Numerical = 5,
    IndexOutOfRange = 6,
    /// The integration finished early; the handle holds a partial curve.
    Incomplete = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsFamily {
    Grim = 0,
    Bowl = 1,
    Wing = 2,
}

/// Column selector for [`hs_curve_copy_column`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsColumn {
    /// Arc length, or the radius for bowls.
    Parameter = 0,
    X = 1,
    Z = 2,
    Theta = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsSolverConfig {
    pub rtol: f64,
    pub atol: f64,
    pub event_tol: f64,
    pub max_steps: u64,
}

/// A sampled generating curve.
pub struct HsCurve {
    curve: GeneratingCurve,
    status: Status,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> HsStatus {
    match err {
        Error::Domain(_) => HsStatus::Domain,
        Error::Precondition(_) | Error::TooFewSamples { .. } | Error::Parse { .. } => HsStatus::Precondition,
        Error::Config(_) => HsStatus::InvalidConfig,
        _ => HsStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<HsStatus, Error>) -> HsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(e)) => {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        }
        Err(_) => {
            set_error("panic inside horoshrinker".into());
            HsStatus::Panic
        }
    }
}

fn config(cfg: *const HsSolverConfig) -> SolverConfig {
    // SAFETY: callers pass either null or a pointer to a valid HsSolverConfig.
    match unsafe { cfg.as_ref() } {
        None => SolverConfig::default(),
        Some(c) => SolverConfig {
            rtol: c.rtol,
            atol: c.atol,
            event_tol: c.event_tol,
            max_steps: usize::try_from(c.max_steps).unwrap_or(usize::MAX),
            ..SolverConfig::default()
        },
    }
}

fn store(out: *mut *mut HsCurve, curve: GeneratingCurve, status: Status) -> HsStatus {
    let handle = Box::into_raw(Box::new(HsCurve { curve, status }));
    // SAFETY: `out` was checked non-null by the caller.
    unsafe { *out = handle };
    if status == Status::Completed {
        HsStatus::Ok
    } else {
        set_error(format!("integration ended with status {status:?}"));
        HsStatus::Incomplete
    }
}

/// Default tolerances: rtol 1e-10, atol 1e-12, event_tol 1e-12.
#[no_mangle]
pub extern "C" fn hs_solver_config_default() -> HsSolverConfig {
    let c = SolverConfig::default();
    HsSolverConfig {
        rtol: c.rtol,
        atol: c.atol,
        event_tol: c.event_tol,
        max_steps: c.max_steps as u64,
    }
}

/// Grim reaper through `(z0, θ = 0)` over `s ∈ [-s_max, s_max]`. `cfg` may be null.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle; `cfg` is null or valid.
#[no_mangle]
pub unsafe extern "C" fn hs_grim_new(
    z0: f64,
    s_max: f64,
    cfg: *const HsSolverConfig,
    out: *mut *mut HsCurve,
) -> HsStatus {
    if out.is_null() {
        return HsStatus::NullPointer;
    }
    guard(|| {
        let o = solve_grim(z0, (-s_max, s_max), &config(cfg))?;
        Ok(store(out, o.curve(), o.status))
    })
}

/// Bowl through `(0, z0)` sampled on `r ∈ [0, r_max]`.
///
/// # Safety
/// As for [`hs_grim_new`].
#[no_mangle]
pub unsafe extern "C" fn hs_bowl_new(
    z0: f64,
    r_max: f64,
    cfg: *const HsSolverConfig,
    out: *mut *mut HsCurve,
) -> HsStatus {
    if out.is_null() {
        return HsStatus::NullPointer;
    }
    guard(|| {
        let b = solve_bowl(z0, r_max, &config(cfg))?;
        Ok(store(out, b.curve(), b.status))
    })
}

/// Wing with waist `(x0, z0)` over `s ∈ [-s_max, s_max]`.
///
/// # Safety
/// As for [`hs_grim_new`].
#[no_mangle]
pub unsafe extern "C" fn hs_wing_new(
    x0: f64,
    z0: f64,
    s_max: f64,
    cfg: *const HsSolverConfig,
    out: *mut *mut HsCurve,
) -> HsStatus {
    if out.is_null() {
        return HsStatus::NullPointer;
    }
    guard(|| {
        let w = solve_wing(x0, z0, s_max, &config(cfg))?;
        let status = if w.status_lower != Status::Completed {
            w.status_lower
        } else {
            w.status_upper
        };
        Ok(store(out, w.curve(), status))
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `curve` must be null or a handle returned by this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn hs_curve_free(curve: *mut HsCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hs_curve_len(curve: *const HsCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.curve.samples.len())
}

/// # Safety
/// `curve` must be a live handle and `family` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_curve_family(curve: *const HsCurve, family: *mut HsFamily) -> HsStatus {
    let (Some(c), false) = (curve.as_ref(), family.is_null()) else {
        return HsStatus::NullPointer;
    };
    *family = match c.curve.family {
        CurveFamily::Grim => HsFamily::Grim,
        CurveFamily::Bowl => HsFamily::Bowl,
        CurveFamily::Wing => HsFamily::Wing,
    };
    HsStatus::Ok
}

/// [`HsStatus::Ok`] when the integration behind the handle completed, else [`HsStatus::Incomplete`].
///
/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hs_curve_status(curve: *const HsCurve) -> HsStatus {
    match curve.as_ref() {
        None => HsStatus::NullPointer,
        Some(c) if c.status == Status::Completed => HsStatus::Ok,
        Some(_) => HsStatus::Incomplete,
    }
}

/// Writes sample `index` into the non-null output pointers; null outputs are skipped.
///
/// # Safety
/// `curve` must be a live handle; each output pointer is null or writable.
#[no_mangle]
pub unsafe extern "C" fn hs_curve_sample(
    curve: *const HsCurve,
    index: usize,
    t: *mut f64,
    x: *mut f64,
    z: *mut f64,
    theta: *mut f64,
) -> HsStatus {
    let Some(c) = curve.as_ref() else {
        return HsStatus::NullPointer;
    };
    let Some(p) = c.curve.samples.get(index) else {
        set_error(format!("sample {index} out of range (len {})", c.curve.samples.len()));
        return HsStatus::IndexOutOfRange;
    };
    for (ptr, v) in [(t, p.t), (x, p.x), (z, p.z), (theta, p.theta)] {
        if let Some(slot) = ptr.as_mut() {
            *slot = v;
        }
    }
    HsStatus::Ok
}

/// Copies one column into `buf`, which must hold at least `hs_curve_len` values.
///
/// # Safety
/// `curve` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn hs_curve_copy_column(
    curve: *const HsCurve,
    column: HsColumn,
    buf: *mut f64,
    len: usize,
) -> HsStatus {
    let Some(c) = curve.as_ref() else {
        return HsStatus::NullPointer;
    };
    if buf.is_null() {
        return HsStatus::NullPointer;
    }
    let n = c.curve.samples.len();
    if len < n {
        set_error(format!("buffer holds {len} values, curve has {n}"));
        return HsStatus::IndexOutOfRange;
    }
    let out = std::slice::from_raw_parts_mut(buf, n);
    for (slot, p) in out.iter_mut().zip(&c.curve.samples) {
        *slot = match column {
            HsColumn::Parameter => p.t,
            HsColumn::X => p.x,
            HsColumn::Z => p.z,
            HsColumn::Theta => p.theta,
        };
    }
    HsStatus::Ok
}

/// Maximum and RMS of the finite-difference horo-shrinker residual.
///
/// # Safety
/// `curve` must be a live handle; `max` and `rms` are null or writable.
#[no_mangle]
pub unsafe extern "C" fn hs_curve_residual(curve: *const HsCurve, max: *mut f64, rms: *mut f64) -> HsStatus {
    let Some(c) = curve.as_ref() else {
        return HsStatus::NullPointer;
    };
    guard(|| {
        let r = shrinker_residual(&c.curve, c.curve.family.symmetry())?;
        if let Some(m) = max.as_mut() {
            *m = r.max_residual;
        }
        if let Some(m) = rms.as_mut() {
            *m = r.rms_residual;
        }
        Ok(HsStatus::Ok)
    })
}

/// `cos θ / (z² e^{2/z})`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hs_first_integral(z: f64, theta: f64, out: *mut f64) -> HsStatus {
    if out.is_null() {
        return HsStatus::NullPointer;
    }
    guard(|| {
        *out = first_integral(PhasePoint::new(z, theta))?;
        Ok(HsStatus::Ok)
    })
}

/// Maximum height `z0*` of the grim reaper with minimum `z0 ∈ (0, 1)`.
///
/// # Safety
/// `out` must be writable; `cfg` is null or valid.
#[no_mangle]
pub unsafe extern "C" fn hs_z0_star(z0: f64, cfg: *const HsSolverConfig, out: *mut f64) -> HsStatus {
    if out.is_null() {
        return HsStatus::NullPointer;
    }
    guard(|| {
        *out = z0_star_map(z0, &config(cfg))?;
        Ok(HsStatus::Ok)
    })
}

/// Message of the last failure on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn hs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hs_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}
