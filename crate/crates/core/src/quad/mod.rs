//! Numerical integration and the constants of the asymptotic expansions.
//!
//! [`integrator`] holds the adaptive engine. [`constants`] evaluates
//! `G_beta`, `K_beta`, `L(c)` and `K(c1, c2)`; [`integrals`] evaluates the
//! finite-domain variance integrals, their closed-form leading terms, and
//! the inner kernels used to derive the logarithmic law.

pub mod constants;
pub mod integrals;
pub mod integrator;
pub mod special;

pub use constants::{g_beta, k_beta, trend_k, trend_l};
pub use integrals::{
    i_gamma, i_gamma_asymptote, i_trend, i_trend_asymptote, inner_a, inner_a_linear,
    j_lambda_ratio, trend_side_asymptote, trend_side_integral, IntegralSpec,
};
pub use integrator::{
    dyadic_breakpoints, integrate_1d, integrate_1d_with, QuadResult, QuadratureConfig,
    TailEnvelope, Upper,
};
pub use special::{normal_density, normal_survival};
