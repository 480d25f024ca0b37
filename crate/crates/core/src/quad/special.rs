//! Normal survival function and gamma-function helpers.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Low-order part of `1/sqrt(2)`: `FRAC_1_SQRT_2 + FRAC_1_SQRT_2_LO` carries ~32 digits.
const FRAC_1_SQRT_2_LO: f64 = -4.833646656726457e-17;

/// Standard normal survival function `P{N(0,1) > u}`.
///
/// Evaluated as `erfc(u / sqrt 2) / 2`. The rounding of `u / sqrt 2` is
/// undone with a first-order correction, which keeps the relative error
/// near the accuracy of `erfc` itself deep in the tail.
pub fn normal_survival(u: f64) -> f64 {
    if u.is_nan() {
        return f64::NAN;
    }
    if u <= 0.0 {
        return 0.5 * libm::erfc(u * FRAC_1_SQRT_2);
    }
    let x = u * FRAC_1_SQRT_2;
    // x_true = x + dx
    let dx = u.mul_add(FRAC_1_SQRT_2, -x) + u * FRAC_1_SQRT_2_LO;
    let tail = libm::erfc(x);
    if tail == 0.0 {
        return 0.0;
    }
    // d/dx log erfc(x) = -2 exp(-x^2) / (sqrt(pi) erfc(x))
    let log_slope = if x < 5.0 {
        -2.0 * (-x * x).exp() / (PI.sqrt() * tail)
    } else {
        let inv = 1.0 / (x * x);
        -2.0 * x / (1.0 - 0.5 * inv + 0.75 * inv * inv)
    };
    0.5 * tail * (1.0 + log_slope * dx)
}

/// Standard normal density.
pub fn normal_density(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}
