//! The parametric field family.
//!
//! A centered Gaussian field on `[0, T]^2` with standard deviation
//! `sigma(t) = exp(-V(t))`, where `V(t) = t1^beta + t2^beta + t1^a t2^a`,
//! and correlation `r(t, s) = exp(-|t1 - s1|^alpha - |t2 - s2|^alpha)`.
//! Both are globally defined, so the field can be simulated exactly, and
//! they reduce to the required local behavior at the origin.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Relative tolerance used when comparing `a` against the regime boundaries.
pub const REGIME_REL_TOL: f64 = 1e-12;

/// The tuple `(alpha, beta, a, T, c1, c2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    alpha: f64,
    beta: f64,
    a: f64,
    horizon: f64,
    c1: f64,
    c2: f64,
}

/// A location `(t1, t2)` in the square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub t1: f64,
    pub t2: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { t1: 0.0, t2: 0.0 };

    pub fn new(t1: f64, t2: f64) -> Self {
        Point2 { t1, t2 }
    }
}

/// Which of the four high-level asymptotic regimes applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `a < a0`: the two sides of the square dominate.
    SideDominated,
    /// `a0 <= a < beta/2`: logarithmic product regime.
    LogProduct,
    /// `a = beta/2`.
    CriticalProduct,
    /// `a > beta/2`: the product term is invisible at the variance scale.
    Classical,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::SideDominated => "SideDominated",
            Regime::LogProduct => "LogProduct",
            Regime::CriticalProduct => "CriticalProduct",
            Regime::Classical => "Classical",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= REGIME_REL_TOL * x.abs().max(y.abs())
}

/// `a0 = alpha beta / (alpha + beta)`.
pub fn side_threshold(alpha: f64, beta: f64) -> f64 {
    alpha * beta / (alpha + beta)
}

/// Regime tag for raw exponents; `alpha < beta` is assumed.
pub fn regime_of(alpha: f64, beta: f64, a: f64) -> Regime {
    let a0 = side_threshold(alpha, beta);
    let critical = 0.5 * beta;
    if close(a, critical) {
        Regime::CriticalProduct
    } else if a > critical {
        Regime::Classical
    } else if close(a, a0) || a > a0 {
        Regime::LogProduct
    } else {
        Regime::SideDominated
    }
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, a: f64, horizon: f64, c1: f64, c2: f64) -> Result<Self> {
        let all = [alpha, beta, a, horizon, c1, c2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("model parameters must be finite"));
        }
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(invalid(format!("alpha must lie in (0, 2], got {alpha}")));
        }
        if !(beta > alpha) {
            return Err(invalid(format!(
                "beta must exceed alpha, got beta = {beta}, alpha = {alpha}"
            )));
        }
        if !(a > 0.0) {
            return Err(invalid(format!("a must be positive, got {a}")));
        }
        if !(horizon > 0.0) {
            return Err(invalid(format!("T must be positive, got {horizon}")));
        }
        if c1 < 0.0 || c2 < 0.0 {
            return Err(invalid(format!(
                "trend slopes must be non-negative, got ({c1}, {c2})"
            )));
        }
        Ok(ModelParams {
            alpha,
            beta,
            a,
            horizon,
            c1,
            c2,
        })
    }

    /// Untrended model.
    pub fn untrended(alpha: f64, beta: f64, a: f64, horizon: f64) -> Result<Self> {
        Self::new(alpha, beta, a, horizon, 0.0, 0.0)
    }

    pub fn with_trend(self, c1: f64, c2: f64) -> Result<Self> {
        Self::new(self.alpha, self.beta, self.a, self.horizon, c1, c2)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn c1(&self) -> f64 {
        self.c1
    }
    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// `a0 = alpha beta / (alpha + beta)`.
    pub fn a0(&self) -> f64 {
        side_threshold(self.alpha, self.beta)
    }

    pub fn check_point(&self, t: Point2) -> Result<()> {
        let inside = |x: f64| x.is_finite() && (0.0..=self.horizon).contains(&x);
        if inside(t.t1) && inside(t.t2) {
            Ok(())
        } else {
            Err(Error::PointOutOfDomain {
                t1: t.t1,
                t2: t.t2,
                horizon: self.horizon,
            })
        }
    }

    /// `V(t) = t1^beta + t2^beta + t1^a t2^a`.
    pub fn variance_loss(&self, t: Point2) -> Result<f64> {
        self.check_point(t)?;
        Ok(self.variance_loss_unchecked(t.t1, t.t2))
    }

    pub fn sigma(&self, t: Point2) -> Result<f64> {
        Ok((-self.variance_loss(t)?).exp())
    }

    pub fn correlation(&self, t: Point2, s: Point2) -> Result<f64> {
        self.check_point(t)?;
        self.check_point(s)?;
        Ok(self.axis_correlation(t.t1 - s.t1) * self.axis_correlation(t.t2 - s.t2))
    }

    pub fn covariance(&self, t: Point2, s: Point2) -> Result<f64> {
        Ok(self.sigma(t)? * self.sigma(s)? * self.correlation(t, s)?)
    }

    pub fn classify_regime(&self) -> Regime {
        regime_of(self.alpha, self.beta, self.a)
    }

    /// Correlation scale `q_u = u^(-2/alpha)`.
    pub fn correlation_scale(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) || !u.is_finite() {
            return Err(invalid(format!("level u must be positive, got {u}")));
        }
        Ok(u.powf(-2.0 / self.alpha))
    }

    pub(crate) fn variance_loss_unchecked(&self, t1: f64, t2: f64) -> f64 {
        t1.powf(self.beta) + t2.powf(self.beta) + (t1 * t2).powf(self.a)
    }

    pub(crate) fn sigma_unchecked(&self, t1: f64, t2: f64) -> f64 {
        (-self.variance_loss_unchecked(t1, t2)).exp()
    }

    /// One-dimensional factor `exp(-|d|^alpha)` of the correlation.
    pub(crate) fn axis_correlation(&self, d: f64) -> f64 {
        (-d.abs().powf(self.alpha)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(beta: f64, a: f64) -> ModelParams {
        ModelParams::untrended(1.0, beta, a, 1.0).unwrap()
    }

    #[test]
    fn variance_loss_examples() {
        let m = p(2.0, 1.0);
        assert_eq!(m.variance_loss(Point2::ORIGIN).unwrap(), 0.0);
        assert!((m.variance_loss(Point2::new(1.0, 1.0)).unwrap() - 3.0).abs() < 1e-15);
        let m = p(2.0, 2.0 / 3.0);
        let expect = 0.25 + 0.0625 + 0.125f64.powf(2.0 / 3.0);
        // 0.125^(2/3) = 0.25 exactly
        assert!((expect - 0.5625).abs() < 1e-15);
        let got = m.variance_loss(Point2::new(0.5, 0.25)).unwrap();
        assert!((got - 0.5625).abs() < 1e-15);
    }

    #[test]
    fn sigma_examples() {
        let m = p(2.0, 1.0);
        assert_eq!(m.sigma(Point2::ORIGIN).unwrap(), 1.0);
        let s = m.sigma(Point2::new(1.0, 1.0)).unwrap();
        assert!((s - (-3.0f64).exp()).abs() < 1e-16);
        for &(t1, t2) in &[(0.05, 0.05), (0.01, 0.1), (0.1, 0.0), (0.07, 0.03)] {
            let t = Point2::new(t1, t2);
            let v = m.variance_loss(t).unwrap();
            assert!(v <= 0.02);
            let ratio = (1.0 - m.sigma(t).unwrap()) / v;
            assert!((0.99..=1.0).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn correlation_examples() {
        let m = p(2.0, 1.0);
        let t = Point2::new(0.3, 0.4);
        assert_eq!(m.correlation(t, t).unwrap(), 1.0);
        let r = m.correlation(Point2::ORIGIN, t).unwrap();
        assert!((r - (-0.7f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn covariance_diagonal() {
        let m = p(2.0, 1.0);
        assert_eq!(m.covariance(Point2::ORIGIN, Point2::ORIGIN).unwrap(), 1.0);
        let t = Point2::new(0.2, 0.9);
        let s = m.sigma(t).unwrap();
        assert!((m.covariance(t, t).unwrap() - s * s).abs() < 1e-16);
    }

    #[test]
    fn points_outside_rejected() {
        let m = p(2.0, 1.0);
        assert!(matches!(
            m.variance_loss(Point2::new(1.5, 0.0)),
            Err(Error::PointOutOfDomain { .. })
        ));
        assert!(m.sigma(Point2::new(0.0, -1e-9)).is_err());
        assert!(m.correlation(Point2::ORIGIN, Point2::new(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn constructor_rejects_bad_params() {
        assert!(ModelParams::untrended(0.0, 2.0, 1.0, 1.0).is_err());
        assert!(ModelParams::untrended(2.5, 3.0, 1.0, 1.0).is_err());
        assert!(ModelParams::untrended(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::untrended(1.0, 2.0, 0.0, 1.0).is_err());
        assert!(ModelParams::untrended(1.0, 2.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 2.0, 1.0, 1.0, -0.1, 0.0).is_err());
        assert!(ModelParams::new(1.0, 2.0, 1.0, 1.0, 0.0, f64::INFINITY).is_err());
        assert!(ModelParams::untrended(2.0, 2.5, 1.0, 1.0).is_ok());
    }

    #[test]
    fn regime_examples() {
        assert_eq!(p(2.0, 0.5).classify_regime(), Regime::SideDominated);
        assert_eq!(p(2.0, 2.0 / 3.0).classify_regime(), Regime::LogProduct);
        assert_eq!(p(2.0, 0.8).classify_regime(), Regime::LogProduct);
        assert_eq!(p(2.0, 1.0).classify_regime(), Regime::CriticalProduct);
        assert_eq!(p(2.0, 2.0).classify_regime(), Regime::Classical);
        assert!((p(2.0, 0.5).a0() - 2.0 / 3.0).abs() < 1e-15);
        // a0 computed through a different rounding path still lands on the log side
        let a0 = 2.0 * 3.0 / 5.0;
        let m = ModelParams::untrended(2.0, 3.0, a0 * (1.0 - 1e-14), 1.0).unwrap();
        assert_eq!(m.classify_regime(), Regime::LogProduct);
        let m = ModelParams::untrended(1.0, 3.0, 1.5 * (1.0 + 1e-14), 1.0).unwrap();
        assert_eq!(m.classify_regime(), Regime::CriticalProduct);
    }

    #[test]
    fn correlation_scale_examples() {
        let q = |alpha: f64, u: f64| {
            ModelParams::untrended(alpha, 3.0, 1.0, 1.0)
                .unwrap()
                .correlation_scale(u)
                .unwrap()
        };
        assert!((q(1.0, 10.0) - 0.01).abs() < 1e-15);
        assert!((q(2.0, 100.0) - 0.01).abs() < 1e-15);
        assert!((q(0.5, 10.0) - 1e-4).abs() < 1e-17);
        assert!(p(2.0, 1.0).correlation_scale(0.0).is_err());
    }

    #[test]
    fn sigma_unique_max_and_off_corner_bound() {
        let m = p(2.0, 0.4);
        let n = 41;
        let h = 1.0 / (n - 1) as f64;
        let delta: f64 = 0.1;
        let db = delta.powf(2.0);
        let bound = 1.0 - 0.5 * db * (1.0 - 0.5 * db);
        for i in 0..n {
            for j in 0..n {
                let t = Point2::new(i as f64 * h, j as f64 * h);
                let s = m.sigma(t).unwrap();
                if i + j > 0 {
                    assert!(s < 1.0);
                }
                if t.t1 > delta || t.t2 > delta {
                    assert!(s < bound);
                }
            }
        }
    }

    #[test]
    fn separation_witness() {
        // |t - s| >= eps forces one axis gap >= eps / sqrt(2); the minimum of
        // |d1|^alpha + |d2|^alpha on the circle of radius eps is eps^alpha.
        for &alpha in &[0.5, 1.0, 1.5, 2.0] {
            let m = ModelParams::untrended(alpha, 2.5, 1.0, 1.0).unwrap();
            let eps: f64 = 0.2;
            let n = 21;
            let h = 1.0 / (n - 1) as f64;
            let mut sup = 0.0f64;
            for i in 0..n * n {
                for j in 0..n * n {
                    let t = Point2::new((i / n) as f64 * h, (i % n) as f64 * h);
                    let s = Point2::new((j / n) as f64 * h, (j % n) as f64 * h);
                    if (t.t1 - s.t1).hypot(t.t2 - s.t2) >= eps - 1e-12 {
                        sup = sup.max(m.correlation(t, s).unwrap());
                    }
                }
            }
            assert!(sup < 1.0);
            assert!(sup <= (-eps.powf(alpha)).exp() + 1e-15, "alpha {alpha}: {sup}");
        }
    }

    #[test]
    fn gram_matrix_is_psd() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for &(alpha, beta, a) in &[(1.0, 2.0, 0.5), (0.5, 1.5, 2.0), (2.0, 3.0, 1.5)] {
            let m = ModelParams::untrended(alpha, beta, a, 1.0).unwrap();
            let pts: Vec<Point2> = (0..25)
                .map(|_| Point2::new(rng.random(), rng.random()))
                .collect();
            let g = faer::Mat::<f64>::from_fn(25, 25, |i, j| m.covariance(pts[i], pts[j]).unwrap());
            let eig = g.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
            let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-10, "({alpha}, {beta}, {a}): {min}");
        }
    }

    proptest! {
        #[test]
        fn variance_loss_monotone(
            t1 in 0.0..1.0f64, t2 in 0.0..1.0f64,
            d1 in 0.0..1.0f64, d2 in 0.0..1.0f64,
            a in 0.1..3.0f64,
        ) {
            let m = ModelParams::untrended(1.0, 2.0, a, 2.0).unwrap();
            let lo = m.variance_loss(Point2::new(t1, t2)).unwrap();
            let hi = m.variance_loss(Point2::new(t1 + d1, t2 + d2)).unwrap();
            prop_assert!(lo <= hi);
            prop_assert!(lo >= 0.0);
        }

        #[test]
        fn correlation_symmetric(
            t1 in 0.0..1.0f64, t2 in 0.0..1.0f64,
            s1 in 0.0..1.0f64, s2 in 0.0..1.0f64,
            alpha in 0.1..2.0f64,
        ) {
            let m = ModelParams::untrended(alpha, 2.5, 1.0, 1.0).unwrap();
            let t = Point2::new(t1, t2);
            let s = Point2::new(s1, s2);
            prop_assert_eq!(m.correlation(t, s).unwrap(), m.correlation(s, t).unwrap());
            if (t1 - s1).abs().max((t2 - s2).abs()) > 1e-6 {
                prop_assert!(m.correlation(t, s).unwrap() < 1.0);
            }
        }

        #[test]
        fn classify_is_pure(alpha in 0.1..2.0f64, extra in 0.01..2.0f64, a in 0.01..3.0f64) {
            let beta = alpha + extra;
            let m = ModelParams::untrended(alpha, beta, a, 1.0).unwrap();
            prop_assert_eq!(m.classify_regime(), m.classify_regime());
            prop_assert_eq!(m.classify_regime(), regime_of(alpha, beta, a));
        }
    }
}
