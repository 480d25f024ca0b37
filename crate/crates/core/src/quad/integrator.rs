//! Globally adaptive Gauss-Kronrod (10/21) quadrature.
//!
//! Intervals are kept in a max-heap keyed on their error estimate; the worst
//! one is bisected until the summed error meets `max(abs_tol, rel_tol |I|)`.
//! Semi-infinite ranges are cut where a caller-supplied envelope drops below
//! `tail_cut_tol`, and the analytic bound on the discarded tail is added to
//! the reported error.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerances and limits for [`integrate_1d`] and the 2-D routines built on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Envelope level at which infinite ranges are truncated.
    pub tail_cut_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            tail_cut_tol: 1e-16,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0) {
            return Err(invalid("quadrature tolerances must be non-negative"));
        }
        if self.abs_tol == 0.0 && self.rel_tol == 0.0 {
            return Err(invalid("at least one of abs_tol, rel_tol must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(invalid("max_subdivisions must be positive"));
        }
        if !(self.tail_cut_tol > 0.0) {
            return Err(invalid("tail_cut_tol must be positive"));
        }
        Ok(())
    }

    /// Purely relative variant, for integrals whose magnitude is not known in advance.
    pub fn relative(&self) -> Self {
        QuadratureConfig {
            abs_tol: 0.0,
            ..*self
        }
    }

    pub(crate) fn tightened(&self, factor: f64, abs_scale: f64) -> Self {
        QuadratureConfig {
            abs_tol: self.abs_tol * factor * abs_scale,
            rel_tol: self.rel_tol * factor,
            ..*self
        }
    }
}

/// Pointwise bound `|f(x)| <= scale * exp(-rate * x^power)` on a tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEnvelope {
    pub scale: f64,
    pub rate: f64,
    pub power: f64,
}

impl TailEnvelope {
    pub fn new(scale: f64, rate: f64, power: f64) -> Self {
        TailEnvelope { scale, rate, power }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.scale * (-self.rate * x.powf(self.power)).exp()
    }

    /// Upper bound on `∫_x^∞ scale exp(-rate t^power) dt`, or `None` when the
    /// bound is not yet valid at `x` (too close to the mode of the tail).
    pub fn tail_mass(&self, x: f64) -> Option<f64> {
        if x <= 0.0 {
            return None;
        }
        // ∫_x^∞ e^{-r t^p} dt = r^{-1/p} Γ(1/p, r x^p) / p
        let s = 1.0 / self.power;
        let y = self.rate * x.powf(self.power);
        let inc = if s <= 1.0 {
            y.powf(s - 1.0) * (-y).exp()
        } else if y > s - 1.0 {
            y.powf(s - 1.0) * (-y).exp() / (1.0 - (s - 1.0) / y)
        } else {
            return None;
        };
        Some(self.scale * self.rate.powf(-s) * inc / self.power)
    }

    /// Smallest doubling point `R >= start` with `value(R) < tol` and a valid tail bound.
    pub fn cut_point(&self, start: f64, tol: f64) -> (f64, f64) {
        let mut r = start.max(1.0);
        for _ in 0..2000 {
            if self.value(r) < tol {
                if let Some(m) = self.tail_mass(r) {
                    return (r, m);
                }
            }
            r *= 1.25;
        }
        (r, self.tail_mass(r).unwrap_or(0.0))
    }
}

/// Upper end of a 1-D integration range.
#[derive(Debug, Clone, Copy)]
pub enum Upper {
    Finite(f64),
    Infinite(TailEnvelope),
}

/// Value and diagnostics of a converged integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
    pub evaluations: usize,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_280_600_420,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod abscissae.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_146,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv = [(0.0, 0.0); 10];
    for (j, slot) in fv.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        *slot = (f1, f2);
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for (j, &(f1, f2)) in fv.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(floor);
    }
    Segment {
        lo,
        hi,
        value,
        error,
    }
}

/// Breakpoints `lo + (hi - lo) 2^{-k}`, `k = 1..=levels`, in increasing order.
pub fn dyadic_breakpoints(lo: f64, hi: f64, levels: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = (1..=levels)
        .map(|k| lo + (hi - lo) * 0.5f64.powi(k as i32))
        .filter(|&x| x > lo && x < hi)
        .collect();
    pts.reverse();
    pts
}

/// Integrate `f` over `[lo, upper)` with an initial partition at `breakpoints`.
pub fn integrate_1d_with<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    upper: Upper,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    cfg.validate()?;
    if !lo.is_finite() {
        return Err(invalid("lower integration limit must be finite"));
    }
    let (hi, tail_error) = match upper {
        Upper::Finite(hi) => {
            if !hi.is_finite() {
                return Err(invalid("use Upper::Infinite for unbounded ranges"));
            }
            (hi, 0.0)
        }
        Upper::Infinite(env) => {
            let (r, mass) = env.cut_point(lo + 1.0, cfg.tail_cut_tol);
            (r.max(lo), mass)
        }
    };
    if hi < lo {
        return Err(invalid(format!("integration range [{lo}, {hi}] is reversed")));
    }
    if hi == lo {
        return Ok(QuadResult {
            value: 0.0,
            error: tail_error,
            subdivisions: 0,
            evaluations: 0,
        });
    }

    let mut cuts = vec![lo];
    cuts.extend(breakpoints.iter().copied().filter(|&b| b > lo && b < hi));
    cuts.push(hi);
    cuts.dedup();

    let mut heap = BinaryHeap::with_capacity(cuts.len() + cfg.max_subdivisions);
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0;
    for w in cuts.windows(2) {
        let seg = gk21(&f, w[0], w[1]);
        evaluations += 21;
        total += seg.value;
        total_err += seg.error;
        heap.push(seg);
    }

    let target = |total: f64| cfg.abs_tol.max(cfg.rel_tol * total.abs());
    let mut subdivisions = 0;
    let mut frozen: Vec<Segment> = Vec::new();
    while total_err + tail_error > target(total) {
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::NoConvergence {
                estimate: total,
                error_bound: total_err + tail_error,
                subdivisions,
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi) {
            // cannot be split further in floating point
            frozen.push(worst);
            continue;
        }
        let left = gk21(&f, worst.lo, mid);
        let right = gk21(&f, mid, worst.hi);
        evaluations += 42;
        subdivisions += 1;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // recompute sums to shed drift in the running totals
    let segments = heap.iter().chain(frozen.iter());
    let (value, error) = segments.fold((0.0, tail_error), |(v, e), s| (v + s.value, e + s.error));
    if !value.is_finite() {
        return Err(Error::NoConvergence {
            estimate: value,
            error_bound: f64::INFINITY,
            subdivisions,
        });
    }
    Ok(QuadResult {
        value,
        error,
        subdivisions,
        evaluations,
    })
}

/// Adaptive integral of `f` over `[lo, upper)`.
pub fn integrate_1d<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    upper: Upper,
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    integrate_1d_with(f, lo, upper, &[], cfg)
}

/// `∫_0^∞ exp(-x^beta) dx` by quadrature, for cross-checking `Γ(1 + 1/beta)`.
pub fn stretched_exp_integral(beta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let env = TailEnvelope::new(1.0, 1.0, beta);
    let bp = dyadic_breakpoints(0.0, 1.0, 30);
    integrate_1d_with(|x| (-x.powf(beta)).exp(), 0.0, Upper::Infinite(env), &bp, cfg)
        .map(|r| r.value)
}
