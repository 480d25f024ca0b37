use std::ffi::CStr;
use std::ptr;

use gexcursion_ffi::*;

fn model(alpha: f64, beta: f64, a: f64) -> *mut GxModel {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { gx_model_new(alpha, beta, a, 1.0, 0.0, 0.0, &mut m) }, GxStatus::Ok);
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    let p = gx_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn model_round_trip() {
    let m = model(1.0, 2.0, 2.0);
    let mut v = 0.0;
    unsafe {
        assert_eq!(gx_variance_loss(m, 0.5, 0.5, &mut v), GxStatus::Ok);
        assert!((v - (0.25 + 0.25 + 0.0625)).abs() < 1e-15);
        assert_eq!(gx_sigma(m, 0.0, 0.0, &mut v), GxStatus::Ok);
        assert_eq!(v, 1.0);
        assert_eq!(gx_correlation(m, 0.1, 0.2, 0.1, 0.2, &mut v), GxStatus::Ok);
        assert_eq!(v, 1.0);
        assert_eq!(gx_covariance(m, 0.0, 0.0, 0.3, 0.0, &mut v), GxStatus::Ok);
        let want = (-0.3f64).exp() * (-0.09f64).exp();
        assert!((v - want).abs() < 1e-15);
        let mut r = GxRegime::SideDominated;
        assert_eq!(gx_classify_regime(m, &mut r), GxStatus::Ok);
        assert_eq!(r, GxRegime::Classical);
        gx_model_free(m);
        gx_model_free(ptr::null_mut());
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut m = ptr::null_mut();
    let s = unsafe { gx_model_new(1.0, 0.5, 1.0, 1.0, 0.0, 0.0, &mut m) };
    assert_eq!(s, GxStatus::InvalidParameter);
    assert!(m.is_null());
    assert!(last_error().contains("beta"));

    let m = model(1.0, 2.0, 1.0);
    let mut v = 0.0;
    assert_eq!(unsafe { gx_sigma(m, 2.0, 0.0, &mut v) }, GxStatus::PointOutOfDomain);
    assert_eq!(unsafe { gx_sigma(m, 0.0, 0.0, ptr::null_mut()) }, GxStatus::NullPointer);
    assert_eq!(unsafe { gx_sigma(ptr::null(), 0.0, 0.0, &mut v) }, GxStatus::InvalidParameter);
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { gx_grid_new(m, 1000, &mut g) }, GxStatus::GridTooLarge);
    unsafe { gx_model_free(m) };
}

#[test]
fn constants_and_predictions() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(gx_g_beta(2.0, &mut v), GxStatus::Ok);
        assert!((v - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(gx_k_beta(2.0, &mut v), GxStatus::Ok);
        assert!((v - std::f64::consts::PI / (3.0 * 3f64.sqrt())).abs() < 1e-10);
        assert_eq!(gx_trend_l(0.0, &mut v), GxStatus::Ok);
        assert!((v - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-9);
        assert_eq!(gx_trend_k(0.0, 0.0, &mut v), GxStatus::Ok);
        assert!((v - std::f64::consts::PI / (3.0 * 3f64.sqrt())).abs() < 1e-10);
    }
    assert!((gx_normal_survival(0.0) - 0.5).abs() < 1e-15);

    let m = model(1.0, 2.0, 2.0 / 3.0);
    let mut p = GxPrediction {
        prefactor: 0.0,
        u_power: 0.0,
        log_power: 0,
        uses_psi: false,
    };
    assert_eq!(unsafe { gx_predict(m, 1.0, &mut p) }, GxStatus::Ok);
    assert!((p.prefactor - 0.75 * std::f64::consts::PI.sqrt()).abs() < 1e-10);
    assert_eq!((p.u_power, p.log_power, p.uses_psi), (1.0, 1, true));
    let u: f64 = 5.0;
    let want = p.prefactor * u * u.ln() * gx_normal_survival(u);
    assert!((gx_prediction_evaluate(p, u) / want - 1.0).abs() < 1e-14);
    assert_eq!(unsafe { gx_predict(m, -1.0, &mut p) }, GxStatus::InvalidParameter);
    assert_eq!(unsafe { gx_predict_trend(m, 1.0, &mut p) }, GxStatus::Ok);
    unsafe { gx_model_free(m) };
}

#[test]
fn simulation_entry_points() {
    let mut e = GxEstimate {
        value: 0.0,
        std_err: 0.0,
        n_samples: 0,
    };
    assert_eq!(unsafe { gx_pickands_finite(1.0, 1.0, 51, 2000, 3, &mut e) }, GxStatus::Ok);
    assert!(e.value >= 1.0 && e.n_samples == 2000);

    let m = model(1.0, 2.0, 2.0);
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { gx_grid_new(m, 8, &mut g) }, GxStatus::Ok);
    let mut n = 0usize;
    assert_eq!(unsafe { gx_grid_n_points(g, &mut n) }, GxStatus::Ok);
    assert_eq!(n, 64);
    let mut a = e;
    let mut b = e;
    unsafe {
        assert_eq!(gx_mc_excursion(g, 1.0, 5000, 7, &mut a), GxStatus::Ok);
        assert_eq!(gx_mc_excursion(g, 1.0, 5000, 7, &mut b), GxStatus::Ok);
        assert_eq!(gx_mc_excursion(g, 1.0, 0, 7, &mut b), GxStatus::InvalidParameter);
        gx_grid_free(g);
        gx_model_free(m);
    }
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    // at least the origin's marginal tail
    assert!(a.value > gx_normal_survival(1.0) - 4.0 * a.std_err);
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(gx_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
