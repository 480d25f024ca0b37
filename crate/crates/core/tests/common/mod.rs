//! Independent field sampler for cross-checks: dense Gram matrix assembled
//! point by point, symmetric eigendecomposition, `X = U Λ^{1/2} Z`.

#![allow(dead_code)]

use faer::{Mat, Side};
use gexcursion::{ModelParams, Point2};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

pub struct SpectralSampler {
    root: Mat<f64>,
    pub min_eigenvalue: f64,
}

pub fn gram(params: &ModelParams, points: &[Point2]) -> Mat<f64> {
    Mat::from_fn(points.len(), points.len(), |i, j| {
        params.covariance(points[i], points[j]).unwrap()
    })
}

impl SpectralSampler {
    pub fn new(params: &ModelParams, points: &[Point2]) -> Self {
        let g = gram(params, points);
        let evd = g.self_adjoint_eigen(Side::Lower).unwrap();
        let s = evd.S().column_vector();
        let n = points.len();
        let min_eigenvalue = (0..n).map(|i| s[i]).fold(f64::INFINITY, f64::min);
        let u = evd.U();
        let root = Mat::from_fn(n, n, |i, j| u[(i, j)] * s[j].max(0.0).sqrt());
        SpectralSampler { root, min_eigenvalue }
    }

    /// Per-sample maxima of `X(t) − drift(t)`, drawn in batches.
    pub fn maxima(&self, drift: &[f64], n_samples: usize, seed: u64) -> Vec<f64> {
        let n = self.root.nrows();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n_samples);
        let batch = 512;
        while out.len() < n_samples {
            let b = batch.min(n_samples - out.len());
            let z: Mat<f64> = Mat::from_fn(n, b, |_, _| StandardNormal.sample(&mut rng));
            let x = &self.root * &z;
            for c in 0..b {
                let m = (0..n).map(|i| x[(i, c)] - drift[i]).fold(f64::NEG_INFINITY, f64::max);
                out.push(m);
            }
        }
        out
    }
}

/// Fraction above `u` and its binomial standard error.
pub fn exceedance(maxima: &[f64], u: f64) -> (f64, f64) {
    let n = maxima.len() as f64;
    let p = maxima.iter().filter(|&&m| m > u).count() as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}
