//! Exact lattice simulation of the field and Monte Carlo estimates of
//! excursion probabilities, block exceedances and prediction ratios.
//!
//! The correlation factorizes over the axes, so on a tensor lattice the
//! covariance is `D (R1 ⊗ R2) D` with `D = diag(σ)`, and `D (L1 ⊗ L2)` is its
//! exact lower Cholesky factor. Scattered point sets (for example the union
//! of two side strips) fall back to a dense factor of the full Gram matrix.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{predict, predict_trend, AsymptoticPrediction};
use crate::error::{invalid, Error, Result};
use crate::linalg::{cholesky, LowerFactor};
use crate::model::{ModelParams, Point2};
use crate::pickands::{pickands_finite_with, FbmMethod, PickandsEstimate};
use crate::quad::special::normal_survival;
use crate::rng::{derive_seed, map_replicates};

/// Largest uniform square lattice: 64 × 64 points.
pub const SQUARE_POINT_CAP: usize = 4096;
/// Largest rectangular (strip) tensor lattice.
pub const TENSOR_POINT_CAP: usize = 16384;
/// Largest scattered point set, factored densely.
pub const DENSE_POINT_CAP: usize = 4096;

#[derive(Debug, Clone)]
enum Factor {
    Kronecker {
        xs: Vec<f64>,
        ys: Vec<f64>,
        l1: LowerFactor,
        l2: LowerFactor,
    },
    Dense(LowerFactor),
}

/// The field on a finite point set, with a factor of its covariance.
#[derive(Debug, Clone)]
pub struct GridField {
    params: ModelParams,
    points: Vec<Point2>,
    sigma: Vec<f64>,
    factor: Factor,
}

/// Per-worker buffers for [`GridField::sample_into`].
pub struct FieldScratch {
    z: Vec<f64>,
    w: Vec<f64>,
}

/// `n` equally spaced coordinates covering `[lo, hi]`.
pub fn uniform_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let mut v: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    v[n - 1] = hi;
    v
}

/// Union of the strips `along × across` and `across × along`, duplicates removed.
pub fn side_strips(along: &[f64], across: &[f64]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = Vec::with_capacity(2 * along.len() * across.len());
    for &x in along {
        for &y in across {
            pts.push(Point2::new(x, y));
        }
    }
    for &y in across {
        for &x in along {
            let p = Point2::new(y, x);
            if !(along.contains(&y) && across.contains(&x)) {
                pts.push(p);
            }
        }
    }
    pts
}

fn axis_factor(params: &ModelParams, coords: &[f64]) -> Result<LowerFactor> {
    let n = coords.len();
    let mut r = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            r[i * n + j] = params.axis_correlation(coords[i] - coords[j]);
        }
    }
    cholesky(&r, n)
}

fn check_axis(params: &ModelParams, coords: &[f64], name: &str) -> Result<()> {
    if coords.is_empty() {
        return Err(invalid(format!("{name} axis is empty")));
    }
    if coords.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid(format!("{name} axis must be strictly increasing")));
    }
    for &c in coords {
        params.check_point(Point2::new(c, 0.0))?;
    }
    Ok(())
}

/// Uniform `n × n` lattice on `[0, T]^2`.
pub fn build_grid(params: &ModelParams, n_per_axis: usize) -> Result<GridField> {
    if n_per_axis < 2 {
        return Err(invalid(format!("need at least 2 points per axis, got {n_per_axis}")));
    }
    let points = n_per_axis.saturating_mul(n_per_axis);
    if points > SQUARE_POINT_CAP {
        return Err(Error::GridTooLarge {
            points,
            cap: SQUARE_POINT_CAP,
        });
    }
    let axis = uniform_axis(0.0, params.horizon(), n_per_axis);
    build_tensor_grid(params, &axis, &axis)
}

/// Tensor lattice `xs × ys`; point `i * ys.len() + j` is `(xs[i], ys[j])`.
pub fn build_tensor_grid(params: &ModelParams, xs: &[f64], ys: &[f64]) -> Result<GridField> {
    check_axis(params, xs, "first")?;
    check_axis(params, ys, "second")?;
    let count = xs.len().saturating_mul(ys.len());
    if count > TENSOR_POINT_CAP {
        return Err(Error::GridTooLarge {
            points: count,
            cap: TENSOR_POINT_CAP,
        });
    }
    let points: Vec<Point2> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| Point2::new(x, y))).collect();
    let sigma = points.iter().map(|p| params.sigma_unchecked(p.t1, p.t2)).collect();
    let factor = Factor::Kronecker {
        l1: axis_factor(params, xs)?,
        l2: axis_factor(params, ys)?,
        xs: xs.to_vec(),
        ys: ys.to_vec(),
    };
    Ok(GridField {
        params: *params,
        points,
        sigma,
        factor,
    })
}

/// Arbitrary point set with a dense factor of the Gram matrix.
pub fn build_point_grid(params: &ModelParams, points: &[Point2]) -> Result<GridField> {
    if points.is_empty() {
        return Err(invalid("point set is empty"));
    }
    if points.len() > DENSE_POINT_CAP {
        return Err(Error::GridTooLarge {
            points: points.len(),
            cap: DENSE_POINT_CAP,
        });
    }
    for &p in points {
        params.check_point(p)?;
    }
    let n = points.len();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = params.covariance(points[i], points[j])?;
            gram[i * n + j] = v;
            gram[j * n + i] = v;
        }
    }
    let sigma = points.iter().map(|p| params.sigma_unchecked(p.t1, p.t2)).collect();
    Ok(GridField {
        params: *params,
        points: points.to_vec(),
        sigma,
        factor: Factor::Dense(cholesky(&gram, n)?),
    })
}

impl GridField {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }
    pub fn points(&self) -> &[Point2] {
        &self.points
    }
    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    /// Axis coordinates when the grid is a tensor lattice.
    pub fn axes(&self) -> Option<(&[f64], &[f64])> {
        match &self.factor {
            Factor::Kronecker { xs, ys, .. } => Some((xs, ys)),
            Factor::Dense(_) => None,
        }
    }

    /// Largest diagonal jitter used by the factorization.
    pub fn jitter(&self) -> f64 {
        match &self.factor {
            Factor::Kronecker { l1, l2, .. } => l1.jitter().max(l2.jitter()),
            Factor::Dense(l) => l.jitter(),
        }
    }

    /// Target covariance between points `p` and `q`.
    pub fn gram_entry(&self, p: usize, q: usize) -> f64 {
        self.params
            .covariance(self.points[p], self.points[q])
            .expect("grid points lie in the domain")
    }

    /// Entry `(p, q)` of the lower-triangular factor `F` of the Gram matrix.
    pub fn factor_entry(&self, p: usize, q: usize) -> f64 {
        match &self.factor {
            Factor::Kronecker { ys, l1, l2, .. } => {
                let n2 = ys.len();
                let (i, j) = (p / n2, p % n2);
                let (k, l) = (q / n2, q % n2);
                if k > i || l > j {
                    0.0
                } else {
                    self.sigma[p] * l1.get(i, k) * l2.get(j, l)
                }
            }
            Factor::Dense(f) => {
                if q > p {
                    0.0
                } else {
                    f.get(p, q)
                }
            }
        }
    }

    /// `(F Fᵀ)[p][q]`, computed from the factor.
    pub fn reconstructed_covariance(&self, p: usize, q: usize) -> f64 {
        match &self.factor {
            Factor::Kronecker { ys, l1, l2, .. } => {
                let n2 = ys.len();
                self.sigma[p]
                    * self.sigma[q]
                    * l1.product_entry(p / n2, q / n2)
                    * l2.product_entry(p % n2, q % n2)
            }
            Factor::Dense(f) => f.product_entry(p, q),
        }
    }

    pub fn scratch(&self) -> FieldScratch {
        let n = self.n_points();
        FieldScratch {
            z: vec![0.0; n],
            w: vec![0.0; n],
        }
    }

    /// Writes one field realization, in point order, into `out`.
    pub fn sample_into(&self, rng: &mut ChaCha8Rng, scratch: &mut FieldScratch, out: &mut [f64]) {
        for z in scratch.z.iter_mut() {
            *z = rng.sample(StandardNormal);
        }
        match &self.factor {
            Factor::Kronecker { xs, ys, l1, l2 } => {
                let (n1, n2) = (xs.len(), ys.len());
                let (z, w) = (&scratch.z, &mut scratch.w);
                // W = Z L2ᵀ
                for k in 0..n1 {
                    let zr = &z[k * n2..(k + 1) * n2];
                    for j in 0..n2 {
                        let row = l2.row(j);
                        w[k * n2 + j] = row.iter().zip(zr).map(|(a, b)| a * b).sum();
                    }
                }
                // Y = L1 W, then scale by sigma
                for i in 0..n1 {
                    let yr = &mut out[i * n2..(i + 1) * n2];
                    yr.fill(0.0);
                    for (k, &c) in l1.row(i).iter().enumerate() {
                        let wr = &w[k * n2..(k + 1) * n2];
                        for (y, &v) in yr.iter_mut().zip(wr) {
                            *y += c * v;
                        }
                    }
                    for (y, s) in yr.iter_mut().zip(&self.sigma[i * n2..(i + 1) * n2]) {
                        *y *= s;
                    }
                }
            }
            Factor::Dense(f) => f.mul_vec(&scratch.z, out),
        }
    }

    /// Indices of the sub-lattice keeping every `stride`-th coordinate on each
    /// axis; for a scattered grid, every `stride`-th point.
    pub fn sublattice(&self, stride: usize) -> Vec<usize> {
        let stride = stride.max(1);
        match &self.factor {
            Factor::Kronecker { xs, ys, .. } => {
                let n2 = ys.len();
                (0..xs.len())
                    .step_by(stride)
                    .flat_map(|i| (0..n2).step_by(stride).map(move |j| i * n2 + j))
                    .collect()
            }
            Factor::Dense(_) => (0..self.n_points()).step_by(stride).collect(),
        }
    }
}

/// Monte Carlo estimate of an exceedance probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub n_samples: u64,
    pub level_u: f64,
    pub seed: u64,
    pub trend: (f64, f64),
}

impl MCEstimate {
    /// Fraction of `maxima` strictly above `u`.
    pub fn from_maxima(maxima: &[f64], u: f64, seed: u64, trend: (f64, f64)) -> Self {
        let n = maxima.len() as u64;
        let hits = maxima.iter().filter(|&&m| m > u).count() as f64;
        let p = if n == 0 { 0.0 } else { hits / n as f64 };
        MCEstimate {
            p_hat: p,
            std_err: if n == 0 { 0.0 } else { (p * (1.0 - p) / n as f64).sqrt() },
            n_samples: n,
            level_u: u,
            seed,
            trend,
        }
    }
}

fn check_trend(trend: (f64, f64)) -> Result<()> {
    if !(trend.0 >= 0.0 && trend.1 >= 0.0) || !trend.0.is_finite() || !trend.1.is_finite() {
        return Err(invalid(format!("trend slopes must be non-negative, got {trend:?}")));
    }
    Ok(())
}

/// Per-sample maxima of `X(t) − c1 t1 − c2 t2` over each index subset, all
/// subsets read off the same realization. Returned row-major by sample.
pub fn lattice_maxima_subsets(
    grid: &GridField,
    trend: (f64, f64),
    subsets: &[Vec<usize>],
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<f64>> {
    check_trend(trend)?;
    if n_samples == 0 {
        return Err(invalid("n_samples must be at least 1"));
    }
    let n = grid.n_points();
    if subsets.iter().flatten().any(|&i| i >= n) || subsets.iter().any(|s| s.is_empty()) {
        return Err(invalid("subset indices must be non-empty and inside the grid"));
    }
    let drift: Vec<f64> = grid.points().iter().map(|p| trend.0 * p.t1 + trend.1 * p.t2).collect();
    let rows = map_replicates(
        n_samples,
        seed,
        workers,
        || (grid.scratch(), vec![0.0; n]),
        |_, rng, (scratch, x)| {
            grid.sample_into(rng, scratch, x);
            subsets
                .iter()
                .map(|s| s.iter().map(|&i| x[i] - drift[i]).fold(f64::NEG_INFINITY, f64::max))
                .collect::<Vec<f64>>()
        },
    )?;
    Ok(rows.into_iter().flatten().collect())
}

/// Per-sample lattice maxima of `X(t) − c1 t1 − c2 t2`.
pub fn lattice_maxima(grid: &GridField, trend: (f64, f64), n_samples: u64, seed: u64, workers: usize) -> Result<Vec<f64>> {
    let all: Vec<usize> = (0..grid.n_points()).collect();
    lattice_maxima_subsets(grid, trend, &[all], n_samples, seed, workers)
}

/// `P{max_lattice (X(t) − c1 t1 − c2 t2) > u}`.
pub fn mc_excursion(grid: &GridField, u: f64, trend: (f64, f64), n_samples: u64, seed: u64) -> Result<MCEstimate> {
    Ok(mc_excursion_levels(grid, &[u], trend, n_samples, seed, 0)?[0])
}

/// [`mc_excursion`] at several levels, reusing one set of maxima.
pub fn mc_excursion_levels(
    grid: &GridField,
    levels: &[f64],
    trend: (f64, f64),
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<MCEstimate>> {
    if levels.iter().any(|u| !u.is_finite()) {
        return Err(invalid("levels must be finite"));
    }
    let maxima = lattice_maxima(grid, trend, n_samples, seed, workers)?;
    Ok(levels.iter().map(|&u| MCEstimate::from_maxima(&maxima, u, seed, trend)).collect())
}

/// Block `[v1, v1 + s1 q_u] × [v2, v2 + s2 q_u]` at level `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub base: Point2,
    pub s1: f64,
    pub s2: f64,
    pub level_u: f64,
}

impl BlockSpec {
    /// Checks the block lies in the domain; returns `q_u`.
    pub fn validate(&self, params: &ModelParams) -> Result<f64> {
        if !(self.s1 >= 0.0 && self.s2 >= 0.0) || !self.s1.is_finite() || !self.s2.is_finite() {
            return Err(invalid(format!("block multipliers must be non-negative, got ({}, {})", self.s1, self.s2)));
        }
        let q = params.correlation_scale(self.level_u)?;
        params.check_point(self.base)?;
        params.check_point(Point2::new(self.base.t1 + self.s1 * q, self.base.t2 + self.s2 * q))?;
        Ok(q)
    }
}

/// `H(S1) H(S2) Ψ(u) exp(−u² V(v))`.
pub fn block_prediction(params: &ModelParams, block: &BlockSpec, h1: f64, h2: f64) -> Result<f64> {
    block.validate(params)?;
    let u = block.level_u;
    Ok(h1 * h2 * normal_survival(u) * (-u * u * params.variance_loss(block.base)?).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlockOptions {
    /// Lattice points along each block side of positive length; the
    /// Pickands factors are estimated on the matching 1-D grid.
    pub points_per_side: usize,
    pub n_samples: u64,
    pub pickands_replicates: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for BlockOptions {
    fn default() -> Self {
        BlockOptions {
            points_per_side: 41,
            n_samples: 200_000,
            pickands_replicates: 200_000,
            seed: 0xb10c,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockEstimate {
    pub mc: MCEstimate,
    /// `None` for a side of zero length, where the factor is exactly 1.
    pub h1: Option<PickandsEstimate>,
    pub h2: Option<PickandsEstimate>,
    pub prediction: f64,
    pub ratio: f64,
}

/// Monte Carlo block exceedance with its Pickands-based companion prediction.
pub fn mc_block_exceedance(params: &ModelParams, block: &BlockSpec, opts: &BlockOptions) -> Result<BlockEstimate> {
    let q = block.validate(params)?;
    let m = opts.points_per_side;
    if m < 2 {
        return Err(invalid("points_per_side must be at least 2"));
    }
    let axis = |v: f64, s: f64| if s == 0.0 { vec![v] } else { uniform_axis(v, v + s * q, m) };
    let xs = axis(block.base.t1, block.s1);
    let ys = axis(block.base.t2, block.s2);
    let grid = build_tensor_grid(params, &xs, &ys)?;
    let trend = (params.c1(), params.c2());
    let maxima = lattice_maxima(&grid, trend, opts.n_samples, opts.seed, opts.workers)?;
    let mc = MCEstimate::from_maxima(&maxima, block.level_u, opts.seed, trend);

    let h = |s: f64, tag: u64| -> Result<Option<PickandsEstimate>> {
        if s == 0.0 {
            return Ok(None);
        }
        let seed = derive_seed(opts.seed, tag);
        pickands_finite_with(params.alpha(), s, m, opts.pickands_replicates, seed, opts.workers, FbmMethod::Auto).map(Some)
    };
    let h1 = h(block.s1, 1)?;
    let h2 = if block.s2 == block.s1 { h1 } else { h(block.s2, 2)? };
    let value = |e: &Option<PickandsEstimate>| e.map_or(1.0, |e| e.value);
    let prediction = block_prediction(params, block, value(&h1), value(&h2))?;
    Ok(BlockEstimate {
        mc,
        h1,
        h2,
        prediction,
        ratio: mc.p_hat / prediction,
    })
}

/// One row of [`ratio_harness`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub u: f64,
    pub p_hat: f64,
    pub std_err: f64,
    pub prediction: f64,
    pub ratio: f64,
    pub n_samples: u64,
}

/// Leading-order prediction for the excursion of `params`, trended when
/// either slope is non-zero.
pub fn prediction_for(params: &ModelParams, h_alpha: f64) -> Result<AsymptoticPrediction> {
    if params.c1() != 0.0 || params.c2() != 0.0 {
        predict_trend(params, h_alpha)
    } else {
        predict(params, h_alpha)
    }
}

/// Monte Carlo excursion probability against the leading-order prediction
/// along an increasing ladder of levels.
pub fn ratio_harness(
    grid: &GridField,
    u_ladder: &[f64],
    h_alpha: f64,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<RatioRow>> {
    if u_ladder.is_empty() || u_ladder.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("u ladder must be non-empty and increasing"));
    }
    let params = grid.params();
    let pred = prediction_for(params, h_alpha)?;
    let trend = (params.c1(), params.c2());
    let est = mc_excursion_levels(grid, u_ladder, trend, n_samples, seed, workers)?;
    Ok(est
        .iter()
        .map(|e| {
            let prediction = pred.evaluate(e.level_u);
            RatioRow {
                u: e.level_u,
                p_hat: e.p_hat,
                std_err: e.std_err,
                prediction,
                ratio: e.p_hat / prediction,
                n_samples: e.n_samples,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{mean_and_se, replicate_rng};

    fn classical() -> ModelParams {
        ModelParams::untrended(1.0, 2.0, 2.0, 1.0).unwrap()
    }

    #[test]
    fn two_by_two_gram() {
        let g = build_grid(&classical(), 2).unwrap();
        assert_eq!(g.n_points(), 4);
        let m = classical();
        for p in 0..4 {
            let s = m.sigma(g.points()[p]).unwrap();
            assert!((g.gram_entry(p, p) - s * s).abs() < 1e-15);
            for q in 0..4 {
                assert_eq!(g.gram_entry(p, q).to_bits(), g.gram_entry(q, p).to_bits());
            }
        }
    }

    #[test]
    fn kronecker_factor_matches_model() {
        for params in [classical(), ModelParams::untrended(0.7, 1.5, 0.4, 2.0).unwrap()] {
            let g = build_grid(&params, 9).unwrap();
            let n = g.n_points();
            for p in 0..n {
                for q in 0..n {
                    let implied = g.sigma[p] * g.sigma[q] * {
                        let (a, b) = (g.points()[p], g.points()[q]);
                        params.axis_correlation(a.t1 - b.t1) * params.axis_correlation(a.t2 - b.t2)
                    };
                    assert!((implied - g.gram_entry(p, q)).abs() < 1e-14);
                    assert!((g.reconstructed_covariance(p, q) - g.gram_entry(p, q)).abs() < 1e-8);
                    if q > p {
                        assert_eq!(g.factor_entry(p, q), 0.0);
                    }
                }
                let row: f64 = (0..=p).map(|k| g.factor_entry(p, k).powi(2)).sum();
                assert!((row - g.gram_entry(p, p)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn dense_and_kronecker_agree() {
        let params = classical();
        let axis = uniform_axis(0.0, 1.0, 5);
        let t = build_tensor_grid(&params, &axis, &axis).unwrap();
        let d = build_point_grid(&params, t.points()).unwrap();
        for p in 0..25 {
            for q in 0..25 {
                assert!((t.reconstructed_covariance(p, q) - d.reconstructed_covariance(p, q)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn caps_and_validation() {
        let m = classical();
        assert!(matches!(build_grid(&m, 65), Err(Error::GridTooLarge { .. })));
        assert!(build_grid(&m, 1).is_err());
        let long = uniform_axis(0.0, 1.0, 200);
        let short = uniform_axis(0.0, 0.1, 80);
        assert!(build_tensor_grid(&m, &long, &short).is_ok());
        assert!(matches!(build_tensor_grid(&m, &long, &long), Err(Error::GridTooLarge { .. })));
        assert!(build_tensor_grid(&m, &[0.0, 2.0], &[0.0]).is_err());
        assert!(build_tensor_grid(&m, &[0.5, 0.1], &[0.0]).is_err());
    }

    #[test]
    fn side_strips_cover_both_sides_once() {
        let pts = side_strips(&[0.0, 0.5, 1.0], &[0.0, 0.01]);
        assert_eq!(pts.len(), 2 * 6 - 1);
        assert!(pts.contains(&Point2::new(1.0, 0.0)));
        assert!(pts.contains(&Point2::new(0.0, 1.0)));
        assert!(pts.contains(&Point2::new(0.01, 0.5)));
    }

    #[test]
    fn extreme_levels() {
        let g = build_grid(&classical(), 8).unwrap();
        let lo = mc_excursion(&g, -10.0, (0.0, 0.0), 2000, 1).unwrap();
        assert_eq!(lo.p_hat, 1.0);
        let hi = mc_excursion(&g, 10.0, (0.0, 0.0), 10_000, 1).unwrap();
        assert_eq!((hi.p_hat, hi.std_err), (0.0, 0.0));
        assert!(mc_excursion(&g, 1.0, (0.0, 0.0), 0, 1).is_err());
        assert!(mc_excursion(&g, 1.0, (-1.0, 0.0), 10, 1).is_err());
    }

    #[test]
    fn origin_variance_and_distant_correlation() {
        let params = ModelParams::untrended(1.0, 2.0, 1.0, 1.0).unwrap();
        let g = build_grid(&params, 6).unwrap();
        let n = 100_000;
        let far = g.n_points() - 1;
        let mut scratch = g.scratch();
        let mut x = vec![0.0; g.n_points()];
        let (mut sq, mut cross) = (Vec::new(), Vec::new());
        for i in 0..n {
            g.sample_into(&mut replicate_rng(3, i), &mut scratch, &mut x);
            sq.push(x[0] * x[0]);
            cross.push(x[0] * x[far] - params.covariance(g.points()[0], g.points()[far]).unwrap());
            // a mid-lattice pair as well
            cross.push(x[7] * x[20] - g.gram_entry(7, 20));
        }
        let (v, se) = mean_and_se(&sq);
        assert!((v - 1.0).abs() < 4.0 * se, "{v} ± {se}");
        let (d, se) = mean_and_se(&cross);
        assert!(d.abs() < 4.0 * se, "{d} ± {se}");
    }

    #[test]
    fn pathwise_monotonicity() {
        let g = build_grid(&classical(), 9).unwrap();
        let levels = [1.0, 1.5, 2.0, 2.5];
        let est = mc_excursion_levels(&g, &levels, (0.0, 0.0), 20_000, 5, 0).unwrap();
        assert!(est.windows(2).all(|w| w[0].p_hat >= w[1].p_hat));
        let trended = mc_excursion_levels(&g, &levels, (1.0, 1.0), 20_000, 5, 0).unwrap();
        for (a, b) in trended.iter().zip(&est) {
            assert!(a.p_hat <= b.p_hat);
        }
        let subsets = [g.sublattice(2), g.sublattice(1)];
        let m = lattice_maxima_subsets(&g, (0.0, 0.0), &subsets, 5000, 6, 0).unwrap();
        assert!(m.chunks(2).all(|r| r[1] >= r[0]));
        assert_eq!(subsets[0].len(), 25);
    }

    #[test]
    fn deterministic_across_workers() {
        let g = build_grid(&classical(), 10).unwrap();
        let a = mc_excursion_levels(&g, &[2.0], (0.5, 0.0), 3000, 17, 1).unwrap();
        let b = mc_excursion_levels(&g, &[2.0], (0.5, 0.0), 3000, 17, 3).unwrap();
        assert_eq!(a, b);
        let ma = lattice_maxima(&g, (0.0, 0.0), 500, 17, 1).unwrap();
        let mb = lattice_maxima(&g, (0.0, 0.0), 500, 17, 2).unwrap();
        assert!(ma.iter().zip(&mb).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn block_predictions() {
        let params = ModelParams::untrended(1.0, 2.0, 1.0, 1.0).unwrap();
        let u = 3.0;
        let corner = BlockSpec {
            base: Point2::ORIGIN,
            s1: 2.0,
            s2: 2.0,
            level_u: u,
        };
        let h = 3.8;
        let p = block_prediction(&params, &corner, h, h).unwrap();
        assert!((p - h * h * normal_survival(u)).abs() < 1e-18);
        let line = BlockSpec { s1: 0.0, ..corner };
        let p = block_prediction(&params, &line, 1.0, h).unwrap();
        assert!((p - h * normal_survival(u)).abs() < 1e-18);
        let outside = BlockSpec {
            base: Point2::new(0.95, 0.0),
            ..corner
        };
        assert!(outside.validate(&params).is_err());
    }

    #[test]
    fn degenerate_block_uses_unit_factor() {
        let params = ModelParams::untrended(1.0, 2.0, 1.0, 1.0).unwrap();
        let block = BlockSpec {
            base: Point2::ORIGIN,
            s1: 0.0,
            s2: 1.0,
            level_u: 2.0,
        };
        let opts = BlockOptions {
            points_per_side: 11,
            n_samples: 2000,
            pickands_replicates: 2000,
            ..Default::default()
        };
        let b = mc_block_exceedance(&params, &block, &opts).unwrap();
        assert!(b.h1.is_none());
        let h2 = b.h2.unwrap().value;
        assert!((b.prediction - h2 * normal_survival(2.0)).abs() < 1e-15);
    }

    #[test]
    fn harness_columns() {
        let g = build_grid(&classical(), 16).unwrap();
        let rows = ratio_harness(&g, &[2.0, 2.5, 3.0], 1.0, 20_000, 8, 0).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert!(r.ratio.is_finite() && r.ratio > 0.0);
            let want = std::f64::consts::PI / 4.0 * r.u * r.u * normal_survival(r.u);
            assert!((r.prediction - want).abs() < 1e-12 * want);
        }
        let side = ModelParams::untrended(1.0, 2.0, 0.4, 1.0).unwrap();
        let pred = prediction_for(&side, 1.0).unwrap();
        for u in [2.0, 3.0] {
            let want = std::f64::consts::PI.sqrt() * u * normal_survival(u);
            assert!((pred.evaluate(u) - want).abs() < 1e-12 * want);
        }
        assert!(ratio_harness(&g, &[3.0, 2.0], 1.0, 10, 8, 0).is_err());
    }
}
