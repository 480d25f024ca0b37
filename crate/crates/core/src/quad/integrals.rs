//! Finite-domain variance integrals and their leading-order behavior.
//!
//! `I_gamma(u) = ∫_0^δ ∫_0^δ exp(-gamma u^2 (x^beta + y^beta + x^a y^a))` and
//! its trend variant are evaluated by direct iterated quadrature after the
//! exact rescaling `x = u^{-2/beta} X`, which keeps the integrand O(1).

use serde::{Deserialize, Serialize};

use crate::asymptotics::AsymptoticPrediction;
use crate::error::{invalid, Error, Result};
use crate::model::REGIME_REL_TOL;
use crate::quad::constants::{k_beta, product_integral, trend_k, trend_l, ProductExponent};
use crate::quad::integrator::{
    dyadic_breakpoints, integrate_1d_with, QuadratureConfig, TailEnvelope, Upper,
};
use crate::quad::special::gamma;

/// Parameters of the variance integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralSpec {
    pub gamma: f64,
    pub beta: f64,
    pub a: f64,
    pub delta: f64,
    pub u: f64,
    #[serde(default)]
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
}

/// Which leading-order law governs `I_gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralBranch {
    /// `a < beta/2`
    Logarithmic,
    /// `a = beta/2`
    Critical,
    /// `a > beta/2`
    Classical,
}

impl IntegralSpec {
    pub fn new(gamma: f64, beta: f64, a: f64, delta: f64, u: f64) -> Self {
        IntegralSpec {
            gamma,
            beta,
            a,
            delta,
            u,
            c1: 0.0,
            c2: 0.0,
        }
    }

    pub fn with_trend(self, c1: f64, c2: f64) -> Self {
        IntegralSpec { c1, c2, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("beta", self.beta),
            ("a", self.a),
            ("delta", self.delta),
            ("u", self.u),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.c1 >= 0.0 && self.c2 >= 0.0) || !self.c1.is_finite() || !self.c2.is_finite() {
            return Err(invalid("trend slopes must be non-negative and finite"));
        }
        Ok(())
    }

    pub fn branch(&self) -> IntegralBranch {
        let critical = 0.5 * self.beta;
        if (self.a - critical).abs() <= REGIME_REL_TOL * critical.max(self.a) {
            IntegralBranch::Critical
        } else if self.a < critical {
            IntegralBranch::Logarithmic
        } else {
            IntegralBranch::Classical
        }
    }

    fn require_quadratic(&self) -> Result<()> {
        if self.beta != 2.0 {
            return Err(invalid(format!(
                "trend integrals are defined for beta = 2 only, got {}",
                self.beta
            )));
        }
        if self.gamma != 1.0 {
            return Err(invalid(format!(
                "trend integrals carry no rate multiplier; gamma must be 1, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Direct quadrature of `I_gamma(u)`.
pub fn i_gamma(spec: &IntegralSpec, cfg: &QuadratureConfig) -> Result<f64> {
    spec.validate()?;
    let scale = spec.u.powf(-2.0 / spec.beta);
    let e = ProductExponent {
        gamma: spec.gamma,
        beta: spec.beta,
        a: spec.a,
        lambda: spec.u.powf(2.0 - 4.0 * spec.a / spec.beta),
        c1: 0.0,
        c2: 0.0,
    };
    Ok(scale * scale * product_integral(&e, Some(spec.delta / scale), cfg)?)
}

/// Leading term of `I_gamma(u)` as `prefactor u^power (log u)^log_power`.
pub fn i_gamma_asymptote(spec: &IntegralSpec, cfg: &QuadratureConfig) -> Result<AsymptoticPrediction> {
    spec.validate()?;
    let IntegralSpec { gamma: g, beta, a, .. } = *spec;
    let pred = match spec.branch() {
        IntegralBranch::Logarithmic => AsymptoticPrediction::integral(
            2.0 * (beta - 2.0 * a) * gamma(1.0 / a) / (a * a * beta * g.powf(1.0 / a)),
            -2.0 / a,
            1,
        ),
        // ∫∫ e^{-γ(...)} = γ^{-2/β} K_β after x -> γ^{-1/β} x
        IntegralBranch::Critical => AsymptoticPrediction::integral(
            g.powf(-2.0 / beta) * k_beta(beta, cfg)?,
            -4.0 / beta,
            0,
        ),
        IntegralBranch::Classical => {
            let gb = gamma(1.0 + 1.0 / beta);
            AsymptoticPrediction::integral(g.powf(-2.0 / beta) * gb * gb, -4.0 / beta, 0)
        }
    };
    Ok(pred)
}

/// Direct quadrature of the trend integral
/// `∫_0^δ ∫_0^δ exp(-u^2 (x^2 + y^2 + x^a y^a) - u (c1 x + c2 y))`.
pub fn i_trend(spec: &IntegralSpec, cfg: &QuadratureConfig) -> Result<f64> {
    spec.validate()?;
    spec.require_quadratic()?;
    let u = spec.u;
    let e = ProductExponent {
        gamma: 1.0,
        beta: 2.0,
        a: spec.a,
        lambda: u.powf(2.0 - 2.0 * spec.a),
        c1: spec.c1,
        c2: spec.c2,
    };
    Ok(product_integral(&e, Some(spec.delta * u), cfg)? / (u * u))
}

/// Leading term of the trend integral.
pub fn i_trend_asymptote(spec: &IntegralSpec, cfg: &QuadratureConfig) -> Result<AsymptoticPrediction> {
    spec.validate()?;
    spec.require_quadratic()?;
    let a = spec.a;
    let pred = match spec.branch() {
        IntegralBranch::Logarithmic => {
            AsymptoticPrediction::integral(2.0 * (1.0 - a) * gamma(1.0 / a) / (a * a), -2.0 / a, 1)
        }
        IntegralBranch::Critical => {
            AsymptoticPrediction::integral(trend_k(spec.c1, spec.c2, cfg)?, -2.0, 0)
        }
        IntegralBranch::Classical => AsymptoticPrediction::integral(
            trend_l(spec.c1, cfg)? * trend_l(spec.c2, cfg)?,
            -2.0,
            0,
        ),
    };
    Ok(pred)
}

/// `∫_0^δ exp(-u^2 x^2 - u c x) dx` by quadrature.
pub fn trend_side_integral(c: f64, delta: f64, u: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(c >= 0.0 && delta > 0.0 && u > 0.0) {
        return Err(invalid("side integral needs c >= 0, delta > 0, u > 0"));
    }
    let side = delta * u;
    let bp: Vec<f64> = [0.5, 1.0, 2.0, 4.0].into_iter().filter(|&b| b < side).collect();
    let upper = if side > 40.0 {
        Upper::Infinite(TailEnvelope::new(1.0, 1.0, 2.0))
    } else {
        Upper::Finite(side)
    };
    let r = integrate_1d_with(|x| (-x * (x + c)).exp(), 0.0, upper, &bp, &cfg.relative())?;
    Ok(r.value / u)
}

/// Leading term `L(c) u^{-1}` of the side trend integral.
pub fn trend_side_asymptote(c: f64, cfg: &QuadratureConfig) -> Result<AsymptoticPrediction> {
    Ok(AsymptoticPrediction::integral(trend_l(c, cfg)?, -1.0, 0))
}

/// Tail length `S` with `∫_S^∞ exp(-y0 e^s) ds <= e^{-extra} e^{-y0}`-scale remainder.
fn log_range(y0: f64, extra: f64) -> f64 {
    ((y0 + extra) / y0).ln().max(1.0)
}

/// `A_c(Z) = ∫_0^∞ X^{-1} exp(-X^2 - (Z/X)^2 - c1 X - c2 Z/X) dX`.
///
/// With `X = sqrt(Z) e^s` this is `∫ exp(-2Z cosh 2s - sqrt(Z)(c1 e^s + c2 e^{-s})) ds`
/// over the real line.
pub fn inner_a(z: f64, c1: f64, c2: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(invalid(format!("Z must be positive, got {z}")));
    }
    if !(c1 >= 0.0 && c2 >= 0.0) {
        return Err(invalid("trend slopes must be non-negative"));
    }
    // integrand <= exp(-Z e^{2|s|}); tail beyond S is below e^{-(2Z + 40)}
    let half_width = 0.5 * log_range(z, z + 40.0);
    let rz = z.sqrt();
    let f = |s: f64| (-(2.0 * z * (2.0 * s).cosh()) - rz * (c1 * s.exp() + c2 * (-s).exp())).exp();
    let knee = 0.5 * (1.0 / z).ln().max(0.0);
    let bp = [-knee - 1.0, -knee, 0.0, knee, knee + 1.0];
    let mut bp: Vec<f64> = bp.into_iter().filter(|&b| b.abs() < half_width).collect();
    bp.dedup();
    integrate_1d_with(f, -half_width, Upper::Finite(half_width), &bp, &cfg.relative())
        .map(|r| r.value)
}

/// `A(Z) = ∫_0^∞ X^{-1} exp(-gamma X - gamma Z / X) dX`, via `X = sqrt(Z) e^s`:
/// `2 ∫_0^∞ exp(-2 gamma sqrt(Z) cosh s) ds`.
pub fn inner_a_linear(z: f64, gamma: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() || !(gamma > 0.0) {
        return Err(invalid("inner integral needs Z > 0 and gamma > 0"));
    }
    let b = 2.0 * gamma * z.sqrt();
    // ∫_S^∞ e^{-b cosh s} <= E1(b e^S / 2) <= e^{-y}/y with y = b e^S / 2
    let width = (2.0 * (b + 40.0) / b).ln().max(1.0);
    let knee = (2.0 / b).ln().max(0.0);
    let bp: Vec<f64> = [knee, knee + 1.0, knee + 2.0]
        .into_iter()
        .filter(|&x| x > 0.0 && x < width)
        .collect();
    let f = |s: f64| (-b * s.cosh()).exp();
    integrate_1d_with(f, 0.0, Upper::Finite(width), &bp, &cfg.relative()).map(|r| 2.0 * r.value)
}

/// `J(lambda)` divided by its leading term `Γ(q/p) / (p^2 gamma^{q/p}) lambda^{-q/p} log lambda`.
///
/// `J(lambda) = ∫∫ X^{q-1} Y^{q-1} exp(-gamma X - gamma Y - gamma lambda (XY)^p)` is
/// evaluated as `lambda^{-q/p} ∫ W^{q-1} e^{-gamma W^p} A(lambda^{-1/p} W) dW`
/// with the inner `A` by quadrature; the substitution `v = W^q` removes the
/// endpoint singularity.
pub fn j_lambda_ratio(lambda: f64, p: f64, q: f64, gamma_rate: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(lambda > 1.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda must exceed 1, got {lambda}")));
    }
    if !(p > 0.0 && q > 0.0 && gamma_rate > 0.0) {
        return Err(invalid("p, q and gamma must be positive"));
    }
    let z_scale = lambda.powf(-1.0 / p);
    let inner_cfg = cfg.relative().tightened(0.1, 1.0);
    let failure = std::cell::RefCell::new(None::<Error>);
    let a_at = |z: f64| match inner_a_linear(z, gamma_rate, &inner_cfg) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let power = p / q;
    let f = |v: f64| {
        if v == 0.0 {
            return 0.0;
        }
        (-gamma_rate * v.powf(power)).exp() * a_at(z_scale * v.powf(1.0 / q)) / q
    };
    let env = TailEnvelope::new(a_at(z_scale) / q, gamma_rate, power);
    let (cut, _) = env.cut_point(1.0, cfg.tail_cut_tol);
    let mut bp = dyadic_breakpoints(0.0, 1.0, 60);
    let mut x = 1.0;
    while x < cut {
        bp.push(x);
        x *= 2.0;
    }
    let integral = integrate_1d_with(f, 0.0, Upper::Infinite(env), &bp, &cfg.relative())?.value;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let s = q / p;
    let lead = gamma(s) / (p * p * gamma_rate.powf(s)) * lambda.ln();
    Ok(integral / lead)
}
