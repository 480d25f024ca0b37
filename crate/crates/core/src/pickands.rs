//! Finite-horizon Pickands functional `H_α(S) = E exp(sup_{[0,S]} (√2 B(t) − t^α))`
//! and the Pickands constant `H_α = lim H_α(S)/S`, by exact simulation of
//! fractional Brownian motion on a uniform grid.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{cholesky, LowerFactor};
use crate::rng::{map_replicates, mean_and_se};

/// Grids up to this many points use the Cholesky sampler under [`FbmMethod::Auto`].
pub const AUTO_CHOLESKY_MAX_POINTS: usize = 256;

/// Relative size of a negative circulant eigenvalue that is treated as
/// round-off and clamped to zero.
const EIGEN_CLAMP_REL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FbmMethod {
    /// Cholesky for small grids, circulant embedding otherwise.
    Auto,
    /// Dense Cholesky factor of the path covariance.
    Cholesky,
    /// Circulant embedding of the increment sequence (Davies–Harte).
    Circulant,
}

impl fmt::Display for FbmMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FbmMethod::Auto => "auto",
            FbmMethod::Cholesky => "cholesky",
            FbmMethod::Circulant => "circulant",
        })
    }
}

#[derive(Clone)]
enum Sampler {
    /// Factor of the covariance of `B(t_1), ..., B(t_{n-1})`; `B(t_0) = 0`.
    Cholesky(LowerFactor),
    Circulant {
        sqrt_eig: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
}

/// Uniform grid `0 = t_0 < ... < t_{n-1} = S` with a factorization of the
/// fBm covariance `(t_i^α + t_j^α − |t_i − t_j|^α) / 2`.
#[derive(Clone)]
pub struct FbmGrid {
    alpha: f64,
    horizon: f64,
    n_points: usize,
    times: Vec<f64>,
    sampler: Sampler,
}

impl fmt::Debug for FbmGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FbmGrid")
            .field("alpha", &self.alpha)
            .field("horizon", &self.horizon)
            .field("n_points", &self.n_points)
            .field("method", &self.method())
            .finish()
    }
}

/// Serializable summary of an [`FbmGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDescription {
    pub alpha: f64,
    pub horizon: f64,
    pub n_points: usize,
    pub spacing: f64,
    pub method: FbmMethod,
    pub jitter: f64,
}

/// Per-worker buffers for [`FbmGrid::sample_into`].
pub struct FbmScratch {
    buf: Vec<Complex<f64>>,
    fft_scratch: Vec<Complex<f64>>,
    z: Vec<f64>,
}

fn fgn_autocovariance(alpha: f64, h: f64, k: usize) -> f64 {
    let k = k as f64;
    let up = (k + 1.0).powf(alpha);
    let down = if k == 0.0 { 1.0 } else { (k - 1.0).powf(alpha) };
    0.5 * h.powf(alpha) * (up - 2.0 * k.powf(alpha) + down)
}

impl FbmGrid {
    pub fn new(alpha: f64, horizon: f64, n_points: usize) -> Result<Self> {
        Self::with_method(alpha, horizon, n_points, FbmMethod::Auto)
    }

    pub fn with_method(alpha: f64, horizon: f64, n_points: usize, method: FbmMethod) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(invalid(format!("alpha must lie in (0, 2], got {alpha}")));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        if n_points < 2 {
            return Err(invalid(format!("need at least 2 grid points, got {n_points}")));
        }
        let m = n_points - 1;
        let h = horizon / m as f64;
        let mut times: Vec<f64> = (0..n_points).map(|i| i as f64 * h).collect();
        times[m] = horizon;
        let use_cholesky = match method {
            FbmMethod::Cholesky => true,
            FbmMethod::Circulant => false,
            FbmMethod::Auto => n_points <= AUTO_CHOLESKY_MAX_POINTS,
        };
        let sampler = if use_cholesky {
            let mut cov = vec![0.0; m * m];
            for i in 0..m {
                for j in 0..=i {
                    let v = fbm_covariance(alpha, times[i + 1], times[j + 1]);
                    cov[i * m + j] = v;
                    cov[j * m + i] = v;
                }
            }
            Sampler::Cholesky(cholesky(&cov, m)?)
        } else {
            circulant_sampler(alpha, h, m)?
        };
        Ok(FbmGrid {
            alpha,
            horizon,
            n_points,
            times,
            sampler,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn n_points(&self) -> usize {
        self.n_points
    }
    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn spacing(&self) -> f64 {
        self.horizon / (self.n_points - 1) as f64
    }

    /// The sampler actually in use (never `Auto`).
    pub fn method(&self) -> FbmMethod {
        match self.sampler {
            Sampler::Cholesky(_) => FbmMethod::Cholesky,
            Sampler::Circulant { .. } => FbmMethod::Circulant,
        }
    }

    /// Diagonal jitter used by the Cholesky sampler; zero for the circulant one.
    pub fn jitter(&self) -> f64 {
        match &self.sampler {
            Sampler::Cholesky(l) => l.jitter(),
            Sampler::Circulant { .. } => 0.0,
        }
    }

    pub fn describe(&self) -> GridDescription {
        GridDescription {
            alpha: self.alpha,
            horizon: self.horizon,
            n_points: self.n_points,
            spacing: self.spacing(),
            method: self.method(),
            jitter: self.jitter(),
        }
    }

    /// Target covariance `Cov(B(t_i), B(t_j))`.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        fbm_covariance(self.alpha, self.times[i], self.times[j])
    }

    /// Covariance implied by the sampler, as a row-major `n × n` matrix.
    pub fn reconstructed_covariance(&self) -> Vec<f64> {
        let n = self.n_points;
        let mut out = vec![0.0; n * n];
        match &self.sampler {
            Sampler::Cholesky(l) => {
                for i in 1..n {
                    for j in 1..=i {
                        let v = l.product_entry(i - 1, j - 1);
                        out[i * n + j] = v;
                        out[j * n + i] = v;
                    }
                }
            }
            Sampler::Circulant { sqrt_eig, .. } => {
                // autocovariance of the increments from the eigenvalues
                let big_n = sqrt_eig.len();
                let m = n - 1;
                let mut planner = FftPlanner::new();
                let inv = planner.plan_fft_inverse(big_n);
                let mut c: Vec<Complex<f64>> = sqrt_eig.iter().map(|s| Complex::new(s * s, 0.0)).collect();
                inv.process(&mut c);
                let acov = |k: usize| c[k].re;
                // S[i][j] = sum_{a<i, b<j} acov(|a-b|), built by 2-D prefix sums
                for i in 1..n {
                    for j in 1..n {
                        let inc = acov((i - 1).abs_diff(j - 1));
                        out[i * n + j] = inc + out[(i - 1) * n + j] + out[i * n + j - 1] - out[(i - 1) * n + j - 1];
                    }
                }
                debug_assert!(m < big_n);
            }
        }
        out
    }

    pub fn scratch(&self) -> FbmScratch {
        match &self.sampler {
            Sampler::Cholesky(l) => FbmScratch {
                buf: Vec::new(),
                fft_scratch: Vec::new(),
                z: vec![0.0; l.order()],
            },
            Sampler::Circulant { sqrt_eig, fft } => FbmScratch {
                buf: vec![Complex::new(0.0, 0.0); sqrt_eig.len()],
                fft_scratch: vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()],
                z: Vec::new(),
            },
        }
    }

    /// Writes one path `B(t_0), ..., B(t_{n-1})` into `out`.
    pub fn sample_into(&self, rng: &mut ChaCha8Rng, scratch: &mut FbmScratch, out: &mut [f64]) {
        assert_eq!(out.len(), self.n_points);
        out[0] = 0.0;
        match &self.sampler {
            Sampler::Cholesky(l) => {
                for z in scratch.z.iter_mut() {
                    *z = rng.sample(StandardNormal);
                }
                l.mul_vec(&scratch.z, &mut out[1..]);
            }
            Sampler::Circulant { sqrt_eig, fft } => {
                for (b, s) in scratch.buf.iter_mut().zip(sqrt_eig) {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *b = Complex::new(s * re, s * im);
                }
                fft.process_with_scratch(&mut scratch.buf, &mut scratch.fft_scratch);
                let mut acc = 0.0;
                for (o, inc) in out[1..].iter_mut().zip(&scratch.buf) {
                    acc += inc.re;
                    *o = acc;
                }
            }
        }
    }
}

fn fbm_covariance(alpha: f64, s: f64, t: f64) -> f64 {
    0.5 * (s.powf(alpha) + t.powf(alpha) - (s - t).abs().powf(alpha))
}

fn circulant_sampler(alpha: f64, h: f64, m: usize) -> Result<Sampler> {
    let big_n = 2 * m;
    let mut c: Vec<Complex<f64>> = (0..big_n)
        .map(|k| {
            let lag = if k <= m { k } else { big_n - k };
            Complex::new(fgn_autocovariance(alpha, h, lag), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(big_n).process(&mut c);
    let max = c.iter().map(|z| z.re).fold(0.0, f64::max);
    let min = c.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if min < -EIGEN_CLAMP_REL * max {
        return Err(Error::NotPositiveDefinite {
            order: big_n,
            max_jitter: 0.0,
            min_pivot: min,
        });
    }
    let sqrt_eig = c.iter().map(|z| (z.re.max(0.0) / big_n as f64).sqrt()).collect();
    Ok(Sampler::Circulant {
        sqrt_eig,
        fft: planner.plan_fft_forward(big_n),
    })
}

/// One exact fBm path on `grid`.
pub fn fbm_sample(grid: &FbmGrid, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut out = vec![0.0; grid.n_points()];
    grid.sample_into(rng, &mut grid.scratch(), &mut out);
    out
}

/// A sub-grid of an [`FbmGrid`]: indices `0, stride, 2 stride, ... <= last_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rung {
    pub last_index: usize,
    pub stride: usize,
}

/// Per-replicate values of `exp(max (√2 B(t_i) − t_i^α))` over each rung,
/// all rungs evaluated on the same path (common random numbers).
/// Returned row-major: `values[r * rungs.len() + k]`.
pub fn sup_functional_samples(
    grid: &FbmGrid,
    rungs: &[Rung],
    n_replicates: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<f64>> {
    for r in rungs {
        if r.stride == 0 || r.last_index >= grid.n_points() {
            return Err(invalid(format!("rung {r:?} does not fit a grid of {} points", grid.n_points())));
        }
    }
    let drift: Vec<f64> = grid.times().iter().map(|t| t.powf(grid.alpha())).collect();
    let n = grid.n_points();
    let k = rungs.len();
    let rows = map_replicates(
        n_replicates,
        seed,
        workers,
        || (grid.scratch(), vec![0.0; n]),
        |_, rng, (scratch, path)| {
            grid.sample_into(rng, scratch, path);
            let mut row = Vec::with_capacity(k);
            for r in rungs {
                let mut best = 0.0f64; // t = 0 contributes exp(0)
                for i in (0..=r.last_index).step_by(r.stride) {
                    best = best.max(std::f64::consts::SQRT_2 * path[i] - drift[i]);
                }
                row.push(best.exp());
            }
            row
        },
    )?;
    Ok(rows.into_iter().flatten().collect())
}

/// Monte Carlo estimate of a Pickands-type functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PickandsEstimate {
    pub value: f64,
    pub std_err: f64,
    pub n_replicates: u64,
    pub grid: GridDescription,
    pub seed: u64,
}

/// `H_α(S)` on the uniform grid with `n_points` points over `[0, S]`.
pub fn pickands_finite(alpha: f64, s: f64, n_points: usize, n_replicates: u64, seed: u64) -> Result<PickandsEstimate> {
    pickands_finite_with(alpha, s, n_points, n_replicates, seed, 0, FbmMethod::Auto)
}

pub fn pickands_finite_with(
    alpha: f64,
    s: f64,
    n_points: usize,
    n_replicates: u64,
    seed: u64,
    workers: usize,
    method: FbmMethod,
) -> Result<PickandsEstimate> {
    if n_replicates == 0 {
        return Err(invalid("need at least one replicate"));
    }
    let grid = FbmGrid::with_method(alpha, s, n_points, method)?;
    let rung = Rung {
        last_index: n_points - 1,
        stride: 1,
    };
    let v = sup_functional_samples(&grid, &[rung], n_replicates, seed, workers)?;
    let (value, std_err) = mean_and_se(&v);
    Ok(PickandsEstimate {
        value,
        std_err,
        n_replicates,
        grid: grid.describe(),
        seed,
    })
}

/// S-ladder and discretization for [`pickands_constant`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtrapolationProtocol {
    /// Increasing horizons; the slope is taken across the top two.
    pub ladder: Vec<f64>,
    /// Grid spacing `h` is the largest with `h^{α/2} <= spacing_tol`.
    pub spacing_tol: f64,
    pub n_replicates: u64,
    pub seed: u64,
    /// Refuse grids longer than this.
    pub max_points: usize,
    pub workers: usize,
    pub method: FbmMethod,
}

impl Default for ExtrapolationProtocol {
    fn default() -> Self {
        ExtrapolationProtocol {
            ladder: vec![1.0, 2.0, 4.0],
            spacing_tol: 0.05,
            n_replicates: 2_000_000,
            seed: 0x5eed,
            max_points: 1 << 16,
            workers: 0,
            method: FbmMethod::Auto,
        }
    }
}

impl ExtrapolationProtocol {
    /// Default protocol tuned to `alpha`. The second moment of the
    /// functional grows like `e^{cS^α}`, so smooth paths get shorter horizons.
    pub fn for_alpha(alpha: f64) -> Self {
        let mut p = Self::default();
        if alpha > 1.5 {
            p.ladder = vec![0.5, 1.0, 2.0];
        }
        p
    }

    fn validate(&self) -> Result<()> {
        if self.ladder.len() < 2 {
            return Err(invalid("the S-ladder needs at least two rungs"));
        }
        if self.ladder.iter().any(|s| !(*s > 0.0) || !s.is_finite()) || self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(format!("S-ladder must be positive and increasing, got {:?}", self.ladder)));
        }
        if !(self.spacing_tol > 0.0 && self.spacing_tol < 1.0) {
            return Err(invalid(format!("spacing_tol must lie in (0, 1), got {}", self.spacing_tol)));
        }
        if self.n_replicates < 2 {
            return Err(invalid("need at least two replicates"));
        }
        Ok(())
    }
}

/// Result of [`pickands_constant`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PickandsConstant {
    /// Slope `(H(S_b) − H(S_a)) / (S_b − S_a)` across the top two rungs.
    pub estimate: PickandsEstimate,
    /// `H(S_max) / S_max`.
    pub naive: PickandsEstimate,
    /// `H(S)` at every rung, with the grid-rounded horizon in `grid.horizon`.
    pub rungs: Vec<PickandsEstimate>,
    /// Slope and naive estimates differ by more than 3 joint standard errors.
    pub discrepancy_warning: bool,
}

/// Slope-extrapolated Pickands constant from one set of fine paths on
/// `[0, S_max]`, every rung read off the same paths.
pub fn pickands_constant(alpha: f64, protocol: &ExtrapolationProtocol) -> Result<PickandsConstant> {
    protocol.validate()?;
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(invalid(format!("alpha must lie in (0, 2], got {alpha}")));
    }
    let s_max = *protocol.ladder.last().unwrap();
    let h_max = protocol.spacing_tol.powf(2.0 / alpha);
    let intervals = (s_max / h_max).ceil() as usize;
    if intervals + 1 > protocol.max_points {
        return Err(Error::GridTooLarge {
            points: intervals + 1,
            cap: protocol.max_points,
        });
    }
    let grid = FbmGrid::with_method(alpha, s_max, intervals + 1, protocol.method)?;
    let h = grid.spacing();
    let rungs: Vec<Rung> = protocol
        .ladder
        .iter()
        .map(|s| Rung {
            last_index: ((s / h).round() as usize).clamp(1, intervals),
            stride: 1,
        })
        .collect();
    let k = rungs.len();
    let values = sup_functional_samples(&grid, &rungs, protocol.n_replicates, protocol.seed, protocol.workers)?;
    let n = protocol.n_replicates as usize;
    let column = |c: usize| -> Vec<f64> { (0..n).map(|r| values[r * k + c]).collect() };
    let describe = |last: usize| GridDescription {
        horizon: grid.times()[last],
        n_points: last + 1,
        ..grid.describe()
    };
    let estimate_of = |v: &[f64], last: usize| {
        let (value, std_err) = mean_and_se(v);
        PickandsEstimate {
            value,
            std_err,
            n_replicates: protocol.n_replicates,
            grid: describe(last),
            seed: protocol.seed,
        }
    };
    let rung_estimates: Vec<PickandsEstimate> = (0..k).map(|c| estimate_of(&column(c), rungs[c].last_index)).collect();

    let (ra, rb) = (rungs[k - 2], rungs[k - 1]);
    let (sa, sb) = (grid.times()[ra.last_index], grid.times()[rb.last_index]);
    let (top, below) = (column(k - 1), column(k - 2));
    let slope: Vec<f64> = top.iter().zip(&below).map(|(b, a)| (b - a) / (sb - sa)).collect();
    let naive: Vec<f64> = top.iter().map(|b| b / sb).collect();
    let gap: Vec<f64> = slope.iter().zip(&naive).map(|(s, v)| s - v).collect();
    let (gap_mean, gap_se) = mean_and_se(&gap);
    Ok(PickandsConstant {
        estimate: estimate_of(&slope, rb.last_index),
        naive: estimate_of(&naive, rb.last_index),
        rungs: rung_estimates,
        discrepancy_warning: gap_mean.abs() > 3.0 * gap_se,
    })
}
