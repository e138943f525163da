//! C ABI for the robust-diff differentiators.
//!
//! # Conventions
//!
//! Every fallible function returns an [`RdStatus`]; `RD_STATUS_OK` (0) is
//! success and failures are negative. Results are written through
//! out-pointers, which are left untouched on failure. After a failure,
//! [`rd_last_error_message`] describes it.
//!
//! Differentiators are opaque handles created by `rd_*_new` and released by
//! the matching `rd_*_free`. A handle must not be used from two threads at
//! once; distinct handles are independent.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use robust_diff::high_gain::{self, HighGainDifferentiator, PeakingOptions, StepInput};
use robust_diff::scenario;
use robust_diff::sliding_mode::{self, StGains, SuperTwistingDifferentiator};
use robust_diff::{Error, Method};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdStatus {
    Ok = 0,
    NullPointer = -1,
    InvalidArgument = -2,
    NotHurwitz = -3,
    Diverged = -4,
    Quadrature = -5,
    UnknownScenario = -6,
    Io = -7,
    /// Steady-state error exceeded the theoretical bound.
    BoundViolated = -8,
}

/// Integration method for the high-gain observer.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdMethod {
    Euler = 0,
    Rk4 = 1,
}

impl From<RdMethod> for Method {
    fn from(m: RdMethod) -> Self {
        match m {
            RdMethod::Euler => Method::Euler,
            RdMethod::Rk4 => Method::Rk4,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RdPeakingConstants {
    pub upsilon: f64,
    pub phi: f64,
    pub p: f64,
    pub q: f64,
    pub quad_tolerance: f64,
    pub horizon: f64,
    pub achieved_error: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RdRunReport {
    pub steady_sup_error: f64,
    pub rmse_steady: f64,
    /// NaN when no bound applies.
    pub theoretical_bound: f64,
    /// 1 satisfied, 0 violated, -1 not applicable.
    pub bound_satisfied: i32,
    pub steady_samples: u64,
}

/// Opaque super-twisting differentiator.
pub struct RdSuperTwisting(SuperTwistingDifferentiator);

/// Opaque high-gain observer differentiator.
pub struct RdHighGain(HighGainDifferentiator);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> RdStatus {
    let status = match &e {
        Error::InvalidParameter { .. }
        | Error::InvalidOrder(_)
        | Error::EmptySettleWindow
        | Error::Config(_) => RdStatus::InvalidArgument,
        Error::NotHurwitz { .. } => RdStatus::NotHurwitz,
        Error::Divergence { .. } => RdStatus::Diverged,
        Error::Quadrature { .. } => RdStatus::Quadrature,
        Error::UnknownScenario(_) => RdStatus::UnknownScenario,
        Error::Io(_) => RdStatus::Io,
        Error::Sweep { .. } => RdStatus::InvalidArgument,
    };
    set_last_error(e.to_string());
    status
}

fn null(name: &str) -> RdStatus {
    set_last_error(format!("`{name}` is null"));
    RdStatus::NullPointer
}

/// # Safety
/// `out` must be null or valid for a write of `T`.
unsafe fn write_out<T>(out: *mut T, value: T) {
    // SAFETY: non-null checked by every caller before computing `value`.
    unsafe { out.write(value) }
}

macro_rules! require_nonnull {
    ($($p:ident),+) => {
        $(if $p.is_null() { return null(stringify!($p)); })+
    };
}

/// Message for the most recent failure on this thread, or null.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ----- super-twisting -------------------------------------------------------

/// `lambda1 = mu1 sqrt(L)`, `lambda2 = mu2 L`.
///
/// # Safety
/// `lambda1` and `lambda2` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rd_tune_super_twisting(
    lipschitz: f64,
    mu1: f64,
    mu2: f64,
    lambda1: *mut f64,
    lambda2: *mut f64,
) -> RdStatus {
    require_nonnull!(lambda1, lambda2);
    match sliding_mode::tune_super_twisting(lipschitz, mu1, mu2) {
        Ok(g) => {
            unsafe {
                write_out(lambda1, g.lambda1);
                write_out(lambda2, g.lambda2);
            }
            RdStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// `b sqrt(L) sqrt(noise_bound)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rd_st_accuracy_bound(
    b: f64,
    lipschitz: f64,
    noise_bound: f64,
    out: *mut f64,
) -> RdStatus {
    require_nonnull!(out);
    match sliding_mode::st_accuracy_bound(b, lipschitz, noise_bound) {
        Ok(v) => {
            unsafe { write_out(out, v) };
            RdStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Creates a differentiator with `z0 = y0`, `z1 = 0`. Returns null on
/// invalid gains.
#[no_mangle]
pub extern "C" fn rd_st_new(lambda1: f64, lambda2: f64, y0: f64) -> *mut RdSuperTwisting {
    let built = StGains::explicit(lambda1, lambda2, 0.0)
        .and_then(|g| SuperTwistingDifferentiator::new(g, y0));
    match built {
        Ok(d) => Box::into_raw(Box::new(RdSuperTwisting(d))),
        Err(e) => {
            fail(e);
            ptr::null_mut()
        }
    }
}

/// Consumes sample `y`, advances by `dt` and writes the derivative estimate.
///
/// # Safety
/// `handle` must come from [`rd_st_new`] and not be freed; `estimate` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rd_st_update(
    handle: *mut RdSuperTwisting,
    y: f64,
    dt: f64,
    estimate: *mut f64,
) -> RdStatus {
    require_nonnull!(handle, estimate);
    let d = unsafe { &mut (*handle).0 };
    match d.update(y, dt) {
        Ok(v) => {
            unsafe { write_out(estimate, v) };
            RdStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Writes `(z0_hat, z1_hat, v_last)`.
///
/// # Safety
/// `handle` must be live; the out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rd_st_state(
    handle: *const RdSuperTwisting,
    z0_hat: *mut f64,
    z1_hat: *mut f64,
    v_last: *mut f64,
) -> RdStatus {
    require_nonnull!(handle, z0_hat, z1_hat, v_last);
    let s = unsafe { (*handle).0.state() };
    unsafe {
        write_out(z0_hat, s.z0_hat);
        write_out(z1_hat, s.z1_hat);
        write_out(v_last, s.v_last);
    }
    RdStatus::Ok
}

/// # Safety
/// `handle` must be live.
#[no_mangle]
pub unsafe extern "C" fn rd_st_reset(handle: *mut RdSuperTwisting, y0: f64) -> RdStatus {
    require_nonnull!(handle);
    unsafe { (*handle).0.reset(y0) };
    RdStatus::Ok
}

/// # Safety
/// `handle` must be null or come from [`rd_st_new`] and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn rd_st_free(handle: *mut RdSuperTwisting) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

// ----- high-gain -------------------------------------------------------------

#[no_mangle]
pub extern "C" fn rd_check_hurwitz(alpha1: f64, alpha2: f64) -> bool {
    high_gain::check_hurwitz(alpha1, alpha2)
}

/// Peaking constants of `A = [[-alpha1, 1], [-alpha2, 0]]`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rd_peaking_constants(
    alpha1: f64,
    alpha2: f64,
    quad_tolerance: f64,
    max_horizon: f64,
    out: *mut RdPeakingConstants,
) -> RdStatus {
    require_nonnull!(out);
    let result = high_gain::build_error_system(alpha1, alpha2).and_then(|sys| {
        high_gain::compute_peaking_constants_with(
            &sys,
            PeakingOptions {
                tolerance: quad_tolerance,
                max_horizon,
            },
        )
    });
    match result {
        Ok(c) => {
            unsafe {
                write_out(
                    out,
                    RdPeakingConstants {
                        upsilon: c.upsilon,
                        phi: c.phi,
                        p: c.p_const,
                        q: c.q_const,
                        quad_tolerance: c.quad_tolerance,
                        horizon: c.horizon,
                        achieved_error: c.achieved_error,
                    },
                )
            };
            RdStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// `sqrt(Q noise / (P M))`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rd_optimal_eps_gain(
    p: f64,
    q: f64,
    m: f64,
    noise_bound: f64,
    out: *mut f64,
) -> RdStatus {
    require_nonnull!(out);
    match high_gain::optimal_eps_gain(p, q, m, noise_bound) {
        Ok(v) => {
            unsafe { write_out(out, v) };
            RdStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// `c1 + eps P M + Q noise / eps`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rd_hg_error_bound_noisy(
    c1: f64,
    eps_gain: f64,
    p: f64,
    q: f64,
    m: f64,
    noise_bound: f64,
    out: *mut f64,
) -> RdStatus {
    require_nonnull!(out);
    match high_gain::ultimate_bound(c1, eps_gain, p, q, m, noise_bound) {
        Ok(v) => {
            unsafe { write_out(out, v) };
            RdStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// `c1 + eps^2 Upsilon M`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rd_hg_error_bound_noisefree(
    c1: f64,
    eps_gain: f64,
    upsilon: f64,
    m: f64,
    out: *mut f64,
) -> RdStatus {
    require_nonnull!(out);
    // alpha values do not enter this bound; any Hurwitz pair validates eps and c1
    let result = high_gain::HgParams::with_slack(1.0, 1.0, eps_gain, c1)
        .and_then(|p| high_gain::hg_error_bound_noisefree(&p, upsilon, m));
    match result {
        Ok(v) => {
            unsafe { write_out(out, v) };
            RdStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Creates an observer with `x1 = y0`, `x2 = 0`. Returns null on invalid
/// parameters.
#[no_mangle]
pub extern "C" fn rd_hg_new(
    alpha1: f64,
    alpha2: f64,
    eps_gain: f64,
    method: RdMethod,
    y0: f64,
) -> *mut RdHighGain {
    match high_gain::HgParams::new(alpha1, alpha2, eps_gain) {
        Ok(p) => Box::into_raw(Box::new(RdHighGain(HighGainDifferentiator::new(
            p,
            method.into(),
            y0,
        )))),
        Err(e) => {
            fail(e);
            ptr::null_mut()
        }
    }
}

/// Advances one step. `y_start`, `y_mid`, `y_end` are the measurement at the
/// start, midpoint and end of the step (Euler reads only `y_start`). Writes
/// the new derivative estimate, and `stiff` = 1 when `dt` exceeds
/// `eps^2 / alpha2`. `stiff` may be null.
///
/// # Safety
/// `handle` must be live; `estimate` must be valid for writes; `stiff` null
/// or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rd_hg_update(
    handle: *mut RdHighGain,
    y_start: f64,
    y_mid: f64,
    y_end: f64,
    dt: f64,
    estimate: *mut f64,
    stiff: *mut i32,
) -> RdStatus {
    require_nonnull!(handle, estimate);
    let d = unsafe { &mut (*handle).0 };
    let input = StepInput {
        start: y_start,
        mid: y_mid,
        end: y_end,
    };
    match d.update(input, dt) {
        Ok(step) => {
            unsafe {
                write_out(estimate, step.state.x2_hat);
                if !stiff.is_null() {
                    write_out(stiff, step.stiff as i32);
                }
            }
            RdStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Writes `(x1_hat, x2_hat)`.
///
/// # Safety
/// `handle` must be live; out-pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rd_hg_state(
    handle: *const RdHighGain,
    x1_hat: *mut f64,
    x2_hat: *mut f64,
) -> RdStatus {
    require_nonnull!(handle, x1_hat, x2_hat);
    let s = unsafe { (*handle).0.state() };
    unsafe {
        write_out(x1_hat, s.x1_hat);
        write_out(x2_hat, s.x2_hat);
    }
    RdStatus::Ok
}

/// # Safety
/// `handle` must be live.
#[no_mangle]
pub unsafe extern "C" fn rd_hg_reset(handle: *mut RdHighGain, y0: f64) -> RdStatus {
    require_nonnull!(handle);
    unsafe { (*handle).0.reset(y0) };
    RdStatus::Ok
}

/// # Safety
/// `handle` must be null or come from [`rd_hg_new`] and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn rd_hg_free(handle: *mut RdHighGain) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

// ----- scenarios -------------------------------------------------------------

/// Runs a bundled scenario (by name) or a scenario file (by path).
///
/// When `csv_path` is non-null the trace is written there. The report is
/// written even when the bound is violated, in which case
/// `RD_STATUS_BOUND_VIOLATED` is returned.
///
/// # Safety
/// `selector` must be a NUL-terminated string; `csv_path` null or
/// NUL-terminated; `report` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rd_run_scenario(
    selector: *const c_char,
    csv_path: *const c_char,
    report: *mut RdRunReport,
) -> RdStatus {
    require_nonnull!(selector, report);
    let selector = match unsafe { CStr::from_ptr(selector) }.to_str() {
        Ok(s) => s,
        Err(_) => return fail(Error::Config("selector is not UTF-8".into())),
    };
    let csv_path = if csv_path.is_null() {
        None
    } else {
        match unsafe { CStr::from_ptr(csv_path) }.to_str() {
            Ok(s) => Some(s.to_owned()),
            Err(_) => return fail(Error::Config("csv_path is not UTF-8".into())),
        }
    };

    let outcome = (|| {
        let s = scenario::resolve_scenario(selector)?;
        let trace = scenario::run(&s)?;
        if let Some(path) = &csv_path {
            let file = std::fs::File::create(path)?;
            trace.write_csv(std::io::BufWriter::new(file))?;
        }
        scenario::evaluate(&trace, &s)
    })();

    match outcome {
        Ok(r) => {
            unsafe {
                write_out(
                    report,
                    RdRunReport {
                        steady_sup_error: r.steady_sup_error,
                        rmse_steady: r.rmse_steady,
                        theoretical_bound: r.theoretical_bound.unwrap_or(f64::NAN),
                        bound_satisfied: r.bound_satisfied.map_or(-1, i32::from),
                        steady_samples: r.steady_samples as u64,
                    },
                )
            };
            if r.passed() {
                RdStatus::Ok
            } else {
                set_last_error(format!(
                    "steady sup error {} exceeds bound {}",
                    r.steady_sup_error,
                    r.theoretical_bound.unwrap_or(f64::NAN)
                ));
                RdStatus::BoundViolated
            }
        }
        Err(e) => fail(e),
    }
}
