//! Leading-order excursion probabilities in the four regimes, with and
//! without a linear trend, and the regime sweep used by the CLI.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{regime_of, side_threshold, ModelParams, Regime};
use crate::quad::constants::{g_beta, k_beta, trend_k, trend_l};
use crate::quad::integrator::QuadratureConfig;
use crate::quad::special::{gamma, normal_survival};

/// `prefactor * u^u_power * (log u)^log_power`, times `Ψ(u)` when `uses_psi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPrediction {
    pub prefactor: f64,
    pub u_power: f64,
    pub log_power: u8,
    pub uses_psi: bool,
}

impl AsymptoticPrediction {
    /// A tail-probability prediction carrying the `Ψ(u)` factor.
    pub fn tail(prefactor: f64, u_power: f64, log_power: u8) -> Self {
        AsymptoticPrediction {
            prefactor,
            u_power,
            log_power,
            uses_psi: true,
        }
    }

    /// A pure integral asymptote, without `Ψ(u)`.
    pub fn integral(prefactor: f64, u_power: f64, log_power: u8) -> Self {
        AsymptoticPrediction {
            prefactor,
            u_power,
            log_power,
            uses_psi: false,
        }
    }

    pub fn evaluate(&self, u: f64) -> f64 {
        let mut v = self.prefactor * u.powf(self.u_power);
        if self.log_power > 0 {
            v *= u.ln().powi(self.log_power as i32);
        }
        if self.uses_psi {
            v *= normal_survival(u);
        }
        v
    }
}

/// Pickands constants known in closed form. Only `H_1 = 1` ships.
pub fn known_pickands(alpha: f64) -> Option<f64> {
    (alpha == 1.0).then_some(1.0)
}

fn check_h(h_alpha: f64) -> Result<()> {
    if !(h_alpha > 0.0) || !h_alpha.is_finite() {
        return Err(invalid(format!("Pickands constant must be positive, got {h_alpha}")));
    }
    Ok(())
}

/// `2(beta - 2a) Γ(1/a) / (a^2 beta)`: the logarithmic-regime constant.
pub fn log_regime_constant(beta: f64, a: f64) -> f64 {
    2.0 * (beta - 2.0 * a) * gamma(1.0 / a) / (a * a * beta)
}

fn predict_raw(alpha: f64, beta: f64, a: f64, h: f64, cfg: &QuadratureConfig) -> Result<AsymptoticPrediction> {
    let g = g_beta(beta)?;
    let two_d = 4.0 / alpha - 4.0 / beta;
    Ok(match regime_of(alpha, beta, a) {
        Regime::SideDominated => AsymptoticPrediction::tail(2.0 * h * g, 2.0 / alpha - 2.0 / beta, 0),
        Regime::LogProduct => {
            AsymptoticPrediction::tail(h * h * log_regime_constant(beta, a), 4.0 / alpha - 2.0 / a, 1)
        }
        Regime::CriticalProduct => AsymptoticPrediction::tail(h * h * k_beta(beta, cfg)?, two_d, 0),
        Regime::Classical => AsymptoticPrediction::tail(h * h * g * g, two_d, 0),
    })
}

/// Leading term of `P{sup X > u}` for the untrended field.
pub fn predict(params: &ModelParams, h_alpha: f64) -> Result<AsymptoticPrediction> {
    predict_with(params, h_alpha, &QuadratureConfig::default())
}

pub fn predict_with(
    params: &ModelParams,
    h_alpha: f64,
    cfg: &QuadratureConfig,
) -> Result<AsymptoticPrediction> {
    check_h(h_alpha)?;
    predict_raw(params.alpha(), params.beta(), params.a(), h_alpha, cfg)
}

/// Leading term of `P{sup (X(t) - c1 t1 - c2 t2) > u}`; requires `beta = 2`.
pub fn predict_trend(params: &ModelParams, h_alpha: f64) -> Result<AsymptoticPrediction> {
    predict_trend_with(params, h_alpha, &QuadratureConfig::default())
}

pub fn predict_trend_with(
    params: &ModelParams,
    h_alpha: f64,
    cfg: &QuadratureConfig,
) -> Result<AsymptoticPrediction> {
    check_h(h_alpha)?;
    if params.beta() != 2.0 {
        return Err(invalid(format!(
            "trend predictions are available for beta = 2 only, got {}",
            params.beta()
        )));
    }
    let (alpha, a, c1, c2) = (params.alpha(), params.a(), params.c1(), params.c2());
    let h = h_alpha;
    Ok(match params.classify_regime() {
        Regime::SideDominated => AsymptoticPrediction::tail(
            h * (trend_l(c1, cfg)? + trend_l(c2, cfg)?),
            2.0 / alpha - 1.0,
            0,
        ),
        Regime::LogProduct => {
            AsymptoticPrediction::tail(h * h * log_regime_constant(2.0, a), 4.0 / alpha - 2.0 / a, 1)
        }
        Regime::CriticalProduct => {
            AsymptoticPrediction::tail(h * h * trend_k(c1, c2, cfg)?, 4.0 / alpha - 2.0, 0)
        }
        Regime::Classical => AsymptoticPrediction::tail(
            h * h * trend_l(c1, cfg)? * trend_l(c2, cfg)?,
            4.0 / alpha - 2.0,
            0,
        ),
    })
}

/// One row of [`regime_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub a: f64,
    pub regime: Regime,
    pub u_power: f64,
    pub log_power: u8,
    pub prefactor: f64,
    /// The prediction evaluated at the sweep level `u`.
    pub value: f64,
}

/// Predictions across a list of product exponents `a` at fixed `(alpha, beta)`.
pub fn regime_sweep(
    alpha: f64,
    beta: f64,
    a_values: &[f64],
    u: f64,
    h_alpha: f64,
    cfg: &QuadratureConfig,
) -> Result<Vec<SweepRow>> {
    check_h(h_alpha)?;
    if !(u > 1.0) {
        return Err(invalid(format!("sweep level must exceed 1, got {u}")));
    }
    // shares the constructor checks on (alpha, beta, a)
    a_values
        .iter()
        .map(|&a| {
            let params = ModelParams::untrended(alpha, beta, a, 1.0)?;
            let pred = predict_with(&params, h_alpha, cfg)?;
            Ok(SweepRow {
                a,
                regime: params.classify_regime(),
                u_power: pred.u_power,
                log_power: pred.log_power,
                prefactor: pred.prefactor,
                value: pred.evaluate(u),
            })
        })
        .collect()
}

/// The two boundaries `(a0, beta/2)` of the regime map.
pub fn regime_boundaries(alpha: f64, beta: f64) -> (f64, f64) {
    (side_threshold(alpha, beta), 0.5 * beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn m(a: f64) -> ModelParams {
        ModelParams::untrended(1.0, 2.0, a, 1.0).unwrap()
    }

    #[test]
    fn brownian_quadratic_examples() {
        let cases = [
            (0.5, PI.sqrt(), 1.0, 0),
            (2.0 / 3.0, 3.0 * PI.sqrt() / 4.0, 1.0, 1),
            (1.0, PI / (3.0 * 3f64.sqrt()), 2.0, 0),
            (2.0, PI / 4.0, 2.0, 0),
        ];
        for (a, pref, pow, log) in cases {
            let p = predict(&m(a), 1.0).unwrap();
            assert!((p.prefactor - pref).abs() < 1e-10, "a = {a}");
            assert!((p.u_power - pow).abs() < 1e-10, "a = {a}");
            assert_eq!(p.log_power, log);
            assert!(p.uses_psi);
        }
        // between a0 and 1: 2(1-a)Γ(1/a)/a^2 u^{4-2/a} log u
        let p = predict(&m(0.8), 1.0).unwrap();
        assert!((p.prefactor - 2.0 * 0.2 * gamma(1.25) / 0.64).abs() < 1e-12);
        assert!((p.u_power - (4.0 - 2.5)).abs() < 1e-12);
    }

    #[test]
    fn pickands_scaling() {
        let p1 = predict(&m(0.5), 1.0).unwrap();
        let p2 = predict(&m(0.5), 2.0).unwrap();
        assert!((p2.prefactor - 2.0 * p1.prefactor).abs() < 1e-14);
        let p1 = predict(&m(2.0), 1.0).unwrap();
        let p2 = predict(&m(2.0), 2.0).unwrap();
        assert!((p2.prefactor - 4.0 * p1.prefactor).abs() < 1e-14);
        assert!(predict(&m(2.0), 0.0).is_err());
    }

    #[test]
    fn trend_reduces_to_untrended() {
        let cfg = QuadratureConfig::default();
        for &a in &[0.5, 2.0 / 3.0, 0.8, 1.0, 2.0] {
            for &alpha in &[0.5, 1.0, 1.5] {
                let params = ModelParams::untrended(alpha, 2.0, a, 1.0).unwrap();
                let p = predict_with(&params, 1.3, &cfg).unwrap();
                let q = predict_trend_with(&params, 1.3, &cfg).unwrap();
                assert!((p.prefactor - q.prefactor).abs() < 1e-10 * p.prefactor);
                assert_eq!(p.u_power, q.u_power);
                assert_eq!(p.log_power, q.log_power);
            }
        }
    }

    #[test]
    fn trend_examples() {
        let cfg = QuadratureConfig::default();
        let params = m(0.5).with_trend(1.0, 3.0).unwrap();
        let q = predict_trend(&params, 1.0).unwrap();
        let want = trend_l(1.0, &cfg).unwrap() + trend_l(3.0, &cfg).unwrap();
        assert!((q.prefactor - want).abs() < 1e-14);
        assert!((q.u_power - 1.0).abs() < 1e-15);

        let a = predict_trend(&m(0.8), 1.0).unwrap();
        let b = predict_trend(&m(0.8).with_trend(3.0, 7.0).unwrap(), 1.0).unwrap();
        assert_eq!(a, b);

        let c = predict_trend(&m(1.0).with_trend(1.0, 2.0).unwrap(), 1.0).unwrap();
        assert!((c.prefactor - trend_k(1.0, 2.0, &cfg).unwrap()).abs() < 1e-14);

        let other = ModelParams::untrended(1.0, 3.0, 2.0, 1.0).unwrap();
        assert!(predict_trend(&other, 1.0).is_err());
    }

    #[test]
    fn sweep_orders() {
        let cfg = QuadratureConfig::default();
        let a0 = 2.0 / 3.0;
        let rows = regime_sweep(1.0, 2.0, &[a0 - 1e-6, a0, 0.9, 1.0, 1.5, 3.0], 10.0, 1.0, &cfg)
            .unwrap();
        assert_eq!(rows[0].regime, Regime::SideDominated);
        assert!((rows[0].u_power - 1.0).abs() < 1e-12);
        assert_eq!(rows[0].log_power, 0);
        assert_eq!(rows[1].regime, Regime::LogProduct);
        assert!((rows[1].u_power - 1.0).abs() < 1e-12);
        assert_eq!(rows[1].log_power, 1);
        assert!((rows[2].u_power - (4.0 - 2.0 / 0.9)).abs() < 1e-12);
        for r in &rows[3..] {
            assert!((r.u_power - 2.0).abs() < 1e-12);
            assert_eq!(r.log_power, 0);
        }
        assert!(rows.iter().all(|r| r.value > 0.0 && r.value.is_finite()));
    }

    #[test]
    fn log_constant_vanishes_at_critical_boundary() {
        let beta = 2.0;
        let mut last = f64::INFINITY;
        for k in 1..=8 {
            let a = 1.0 - 10f64.powi(-k);
            let c = log_regime_constant(beta, a);
            assert!(c > 0.0 && c < last);
            last = c;
        }
        assert!(last < 1e-7);
    }

    #[test]
    fn evaluate_positive() {
        for &a in &[0.3, 0.7, 1.0, 4.0] {
            let p = predict(&m(a), 1.0).unwrap();
            for &u in &[1.5, 3.0, 10.0, 30.0] {
                let v = p.evaluate(u);
                assert!(v > 0.0 && v.is_finite());
            }
        }
    }

    proptest! {
        #[test]
        fn orders_match_at_side_threshold(alpha in 0.05..2.0f64, extra in 0.01..4.0f64) {
            let beta = alpha + extra;
            let a0 = side_threshold(alpha, beta);
            let lhs = 4.0 / alpha - 2.0 / a0;
            let rhs = 2.0 / alpha - 2.0 / beta;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0));
        }
    }
}
