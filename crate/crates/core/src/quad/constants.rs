//! `G_beta`, `K_beta`, `L(c)`, `K(c1, c2)` and the iterated 2-D engine behind them.

use std::cell::RefCell;

use crate::error::{invalid, Error, Result};
use crate::quad::integrator::{
    dyadic_breakpoints, integrate_1d_with, QuadratureConfig, TailEnvelope, Upper,
};
use crate::quad::special::gamma;

const DYADIC_LEVELS: usize = 40;

/// Integrand `exp(-(gamma (X^beta + Y^beta + lambda (XY)^a) + c1 X + c2 Y))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ProductExponent {
    pub gamma: f64,
    pub beta: f64,
    pub a: f64,
    pub lambda: f64,
    pub c1: f64,
    pub c2: f64,
}

impl ProductExponent {
    fn eval(&self, x: f64, y: f64) -> f64 {
        let quad = x.powf(self.beta) + y.powf(self.beta) + self.lambda * (x * y).powf(self.a);
        (-(self.gamma * quad + self.c1 * x + self.c2 * y)).exp()
    }
}

/// `∫_0^side ∫_0^side` of the product integrand; `side = None` means the
/// quarter plane. The square is cut where the marginal envelope
/// `exp(-gamma x^beta)` falls below `tail_cut_tol`.
pub(crate) fn product_integral(
    e: &ProductExponent,
    side: Option<f64>,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.validate()?;
    let env = TailEnvelope::new(1.0, e.gamma, e.beta);
    let (cut, _) = env.cut_point(1.0, cfg.tail_cut_tol);
    let side = side.map_or(cut, |s| s.min(cut));
    if side <= 0.0 {
        return Ok(0.0);
    }
    let inner_cfg = cfg.relative().tightened(0.1, 1.0);
    let outer_cfg = cfg.relative();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let outer_bp = dyadic_breakpoints(0.0, side, DYADIC_LEVELS);

    let inner = |lo_hi: (f64, f64), f: &dyn Fn(f64) -> f64| -> f64 {
        let (lo, hi) = lo_hi;
        let bp = dyadic_breakpoints(lo, hi, DYADIC_LEVELS);
        match integrate_1d_with(f, lo, Upper::Finite(hi), &bp, &inner_cfg) {
            Ok(r) => r.value,
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                f64::NAN
            }
        }
    };

    let value = if e.c1 == e.c2 {
        // symmetric: twice the triangle x <= y
        let outer = |y: f64| inner((0.0, y), &|x| e.eval(x, y));
        2.0 * integrate_1d_with(outer, 0.0, Upper::Finite(side), &outer_bp, &outer_cfg)?.value
    } else {
        let outer = |x: f64| inner((0.0, side), &|y| e.eval(x, y));
        integrate_1d_with(outer, 0.0, Upper::Finite(side), &outer_bp, &outer_cfg)?.value
    };
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    Ok(value)
}

/// `G_beta = ∫_0^∞ exp(-x^beta) dx = Γ(1 + 1/beta)`.
pub fn g_beta(beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid(format!("beta must be positive, got {beta}")));
    }
    Ok(gamma(1.0 + 1.0 / beta))
}

/// `K_beta = ∫∫ exp(-x^beta - y^beta - x^{beta/2} y^{beta/2})` over the quarter plane.
pub fn k_beta(beta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid(format!("beta must be positive, got {beta}")));
    }
    let e = ProductExponent {
        gamma: 1.0,
        beta,
        a: 0.5 * beta,
        lambda: 1.0,
        c1: 0.0,
        c2: 0.0,
    };
    product_integral(&e, None, cfg)
}

/// `L(c) = ∫_0^∞ exp(-x^2 - c x) dx`.
pub fn trend_l(c: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(invalid(format!("trend slope must be non-negative, got {c}")));
    }
    let env = TailEnvelope::new(1.0, 1.0, 2.0);
    integrate_1d_with(
        |x| (-x * (x + c)).exp(),
        0.0,
        Upper::Infinite(env),
        &[0.5, 1.0, 2.0],
        &cfg.relative(),
    )
    .map(|r| r.value)
}

/// `K(c1, c2) = ∫∫ exp(-x^2 - y^2 - xy - c1 x - c2 y)` over the quarter plane.
pub fn trend_k(c1: f64, c2: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(c1 >= 0.0 && c2 >= 0.0) || !c1.is_finite() || !c2.is_finite() {
        return Err(invalid(format!(
            "trend slopes must be non-negative, got ({c1}, {c2})"
        )));
    }
    let e = ProductExponent {
        gamma: 1.0,
        beta: 2.0,
        a: 1.0,
        lambda: 1.0,
        c1,
        c2,
    };
    product_integral(&e, None, cfg)
}
