//! C ABI over `gexcursion`.
//!
//! Every fallible function returns a [`GxStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be read with [`gx_last_error_message`]. Models and grids are opaque
//! handles owned by the caller and released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gexcursion::asymptotics::{predict, predict_trend, AsymptoticPrediction};
use gexcursion::fieldsim::{build_grid, mc_excursion, GridField};
use gexcursion::pickands::pickands_finite;
use gexcursion::quad::{constants, normal_survival, QuadratureConfig};
use gexcursion::{Error, ModelParams, Point2, Regime};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    PointOutOfDomain = 3,
    NoConvergence = 4,
    NotPositiveDefinite = 5,
    GridTooLarge = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GxRegime {
    SideDominated = 0,
    LogProduct = 1,
    CriticalProduct = 2,
    Classical = 3,
}

/// `prefactor * u^u_power * (log u)^log_power`, times `Ψ(u)` when `uses_psi`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GxPrediction {
    pub prefactor: f64,
    pub u_power: f64,
    pub log_power: u32,
    pub uses_psi: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GxEstimate {
    pub value: f64,
    pub std_err: f64,
    pub n_samples: u64,
}

/// Opaque model handle.
pub struct GxModel {
    params: ModelParams,
}

/// Opaque simulation grid handle.
pub struct GxGrid {
    field: GridField,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GxStatus {
    match e {
        Error::InvalidParameter(_) => GxStatus::InvalidParameter,
        Error::PointOutOfDomain { .. } => GxStatus::PointOutOfDomain,
        Error::NoConvergence { .. } => GxStatus::NoConvergence,
        Error::NotPositiveDefinite { .. } => GxStatus::NotPositiveDefinite,
        Error::GridTooLarge { .. } => GxStatus::GridTooLarge,
    }
}

/// Runs `f`, storing its value in `out` and mapping errors and panics to
/// status codes.
fn guard<T>(out: *mut T, f: impl FnOnce() -> gexcursion::Result<T>) -> GxStatus {
    if out.is_null() {
        set_error("output pointer is null".into());
        return GxStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            // SAFETY: checked non-null; the caller guarantees it is writable
            unsafe { out.write(v) };
            GxStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            GxStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or a handle from the matching constructor.
unsafe fn borrow<'a, T>(p: *const T) -> gexcursion::Result<&'a T> {
    p.as_ref()
        .ok_or_else(|| Error::InvalidParameter("handle is null".into()))
}

fn prediction(p: AsymptoticPrediction) -> GxPrediction {
    GxPrediction {
        prefactor: p.prefactor,
        u_power: p.u_power,
        log_power: p.log_power as u32,
        uses_psi: p.uses_psi,
    }
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gx_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn gx_model_new(
    alpha: f64,
    beta: f64,
    a: f64,
    horizon: f64,
    c1: f64,
    c2: f64,
    out: *mut *mut GxModel,
) -> GxStatus {
    guard(out, || {
        let params = ModelParams::new(alpha, beta, a, horizon, c1, c2)?;
        Ok(Box::into_raw(Box::new(GxModel { params })))
    })
}

/// # Safety
/// `model` must be null or a handle from [`gx_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gx_model_free(model: *mut GxModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_variance_loss(model: *const GxModel, t1: f64, t2: f64, out: *mut f64) -> GxStatus {
    guard(out, || borrow(model)?.params.variance_loss(Point2::new(t1, t2)))
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_sigma(model: *const GxModel, t1: f64, t2: f64, out: *mut f64) -> GxStatus {
    guard(out, || borrow(model)?.params.sigma(Point2::new(t1, t2)))
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_correlation(
    model: *const GxModel,
    t1: f64,
    t2: f64,
    s1: f64,
    s2: f64,
    out: *mut f64,
) -> GxStatus {
    guard(out, || borrow(model)?.params.correlation(Point2::new(t1, t2), Point2::new(s1, s2)))
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_covariance(
    model: *const GxModel,
    t1: f64,
    t2: f64,
    s1: f64,
    s2: f64,
    out: *mut f64,
) -> GxStatus {
    guard(out, || borrow(model)?.params.covariance(Point2::new(t1, t2), Point2::new(s1, s2)))
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_classify_regime(model: *const GxModel, out: *mut GxRegime) -> GxStatus {
    guard(out, || {
        Ok(match borrow(model)?.params.classify_regime() {
            Regime::SideDominated => GxRegime::SideDominated,
            Regime::LogProduct => GxRegime::LogProduct,
            Regime::CriticalProduct => GxRegime::CriticalProduct,
            Regime::Classical => GxRegime::Classical,
        })
    })
}

/// Standard normal survival function `Ψ(u)`.
#[no_mangle]
pub extern "C" fn gx_normal_survival(u: f64) -> f64 {
    normal_survival(u)
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_g_beta(beta: f64, out: *mut f64) -> GxStatus {
    guard(out, || constants::g_beta(beta))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_k_beta(beta: f64, out: *mut f64) -> GxStatus {
    guard(out, || constants::k_beta(beta, &QuadratureConfig::default()))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_trend_l(c: f64, out: *mut f64) -> GxStatus {
    guard(out, || constants::trend_l(c, &QuadratureConfig::default()))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_trend_k(c1: f64, c2: f64, out: *mut f64) -> GxStatus {
    guard(out, || constants::trend_k(c1, c2, &QuadratureConfig::default()))
}

/// Untrended leading-order prediction; the model's slopes are ignored.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_predict(model: *const GxModel, h_alpha: f64, out: *mut GxPrediction) -> GxStatus {
    guard(out, || predict(&borrow(model)?.params, h_alpha).map(prediction))
}

/// Trended prediction; requires `beta = 2`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_predict_trend(model: *const GxModel, h_alpha: f64, out: *mut GxPrediction) -> GxStatus {
    guard(out, || predict_trend(&borrow(model)?.params, h_alpha).map(prediction))
}

/// Evaluates a prediction at level `u`.
#[no_mangle]
pub extern "C" fn gx_prediction_evaluate(p: GxPrediction, u: f64) -> f64 {
    AsymptoticPrediction {
        prefactor: p.prefactor,
        u_power: p.u_power,
        log_power: p.log_power.min(u8::MAX as u32) as u8,
        uses_psi: p.uses_psi,
    }
    .evaluate(u)
}

/// Finite-horizon Pickands functional `E sup exp(√2 B(t) − t^α)` on
/// `n_points` grid points over `[0, s]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_pickands_finite(
    alpha: f64,
    s: f64,
    n_points: usize,
    n_replicates: u64,
    seed: u64,
    out: *mut GxEstimate,
) -> GxStatus {
    guard(out, || {
        let e = pickands_finite(alpha, s, n_points, n_replicates, seed)?;
        Ok(GxEstimate {
            value: e.value,
            std_err: e.std_err,
            n_samples: e.n_replicates,
        })
    })
}

/// Uniform `n_per_axis × n_per_axis` lattice over the model's square, with
/// its covariance factor.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_grid_new(model: *const GxModel, n_per_axis: usize, out: *mut *mut GxGrid) -> GxStatus {
    guard(out, || {
        let field = build_grid(&borrow(model)?.params, n_per_axis)?;
        Ok(Box::into_raw(Box::new(GxGrid { field })))
    })
}

/// # Safety
/// `grid` must be null or a handle from [`gx_grid_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gx_grid_free(grid: *mut GxGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// # Safety
/// `grid` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_grid_n_points(grid: *const GxGrid, out: *mut usize) -> GxStatus {
    guard(out, || Ok(borrow(grid)?.field.n_points()))
}

/// `P{max over the lattice of X(t) − c1 t1 − c2 t2 > u}` by Monte Carlo,
/// with the model's trend slopes.
///
/// # Safety
/// `grid` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_mc_excursion(
    grid: *const GxGrid,
    u: f64,
    n_samples: u64,
    seed: u64,
    out: *mut GxEstimate,
) -> GxStatus {
    guard(out, || {
        let g = &borrow(grid)?.field;
        let trend = (g.params().c1(), g.params().c2());
        let e = mc_excursion(g, u, trend, n_samples, seed)?;
        Ok(GxEstimate {
            value: e.p_hat,
            std_err: e.std_err,
            n_samples: e.n_samples,
        })
    })
}
