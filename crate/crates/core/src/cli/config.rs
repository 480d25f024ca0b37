//! Declarative experiment configuration, read from TOML.
//!
//! Every key is optional; missing keys take the defaults documented on each
//! field, and unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::ModelParams;
use crate::pickands::{ExtrapolationProtocol, FbmMethod};
use crate::quad::QuadratureConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub run: RunSection,
    pub quadrature: QuadratureConfig,
    pub integrals: IntegralsSection,
    pub pickands: PickandsSection,
    pub mc: McSection,
    pub blocks: BlocksSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    /// Correlation exponent, in (0, 2]. Default 1.
    pub alpha: f64,
    /// Side exponent of the variance loss, above `alpha`. Default 2.
    pub beta: f64,
    /// Product exponent. Default 2.
    pub a: f64,
    /// Side length `T` of the square. Default 1.
    pub horizon: f64,
    /// Trend slopes, non-negative. Default 0.
    pub c1: f64,
    pub c2: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            alpha: 1.0,
            beta: 2.0,
            a: 2.0,
            horizon: 1.0,
            c1: 0.0,
            c2: 0.0,
        }
    }
}

impl ModelSection {
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.alpha, self.beta, self.a, self.horizon, self.c1, self.c2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Master seed of every Monte Carlo run. Default 1.
    pub seed: u64,
    /// Worker threads; 0 uses every core. Results do not depend on it. Default 0.
    pub workers: usize,
    /// Output directory. Default `gexcursion-out`.
    pub out_dir: PathBuf,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 1,
            workers: 0,
            out_dir: PathBuf::from("gexcursion-out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegralsSection {
    /// Rate in the exponent. Default 1.
    pub gamma: f64,
    /// Side of the integration square. Default 1.
    pub delta: f64,
    /// Product exponents to integrate at the model `beta`, at most one per
    /// branch. Default `[0.8, 1.0, 2.0]`.
    pub a_values: Vec<f64>,
    /// Increasing levels. Default `[1e3, 1e4, 1e5]`.
    pub u_ladder: Vec<f64>,
}

impl Default for IntegralsSection {
    fn default() -> Self {
        IntegralsSection {
            gamma: 1.0,
            delta: 1.0,
            a_values: vec![0.8, 1.0, 2.0],
            u_ladder: vec![1e3, 1e4, 1e5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PickandsSection {
    /// Increasing horizons; default `[1, 2, 4]`, or `[0.5, 1, 2]` when alpha > 1.5.
    pub ladder: Option<Vec<f64>>,
    /// Spacing `h` with `h^(alpha/2) <= spacing_tol`. Default 0.05.
    pub spacing_tol: f64,
    /// Default 2 000 000.
    pub n_replicates: u64,
    /// Default 65536.
    pub max_points: usize,
    /// `auto`, `cholesky` or `circulant`. Default `auto`.
    pub method: FbmMethod,
}

impl Default for PickandsSection {
    fn default() -> Self {
        let p = ExtrapolationProtocol::default();
        PickandsSection {
            ladder: None,
            spacing_tol: p.spacing_tol,
            n_replicates: p.n_replicates,
            max_points: p.max_points,
            method: p.method,
        }
    }
}

impl PickandsSection {
    pub fn protocol(&self, alpha: f64, seed: u64, workers: usize) -> ExtrapolationProtocol {
        let base = ExtrapolationProtocol::for_alpha(alpha);
        ExtrapolationProtocol {
            ladder: self.ladder.clone().unwrap_or(base.ladder),
            spacing_tol: self.spacing_tol,
            n_replicates: self.n_replicates,
            seed,
            max_points: self.max_points,
            workers,
            method: self.method,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// Uniform `n_per_axis × n_per_axis` lattice on the square.
    Square,
    /// Union of the strips `[0,T] × [0,w]` and `[0,w] × [0,T]`.
    Strips,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    /// Increasing levels. Default `[2.0, 2.5, 3.0]`.
    pub u_ladder: Vec<f64>,
    /// Default 100 000.
    pub n_samples: u64,
    /// `square` or `strips`. Default `square`.
    pub grid: GridKind,
    /// Square lattice size, at most 64. Default 64.
    pub n_per_axis: usize,
    /// Strip lattice spacing. Default 0.01.
    pub strip_spacing: f64,
    /// Rows across each strip, so `w = (strip_rows − 1) · strip_spacing`. Default 3.
    pub strip_rows: usize,
    /// Pickands constant for the prediction; default: the known value, or
    /// the estimate of the `pickands` protocol.
    pub h_alpha: Option<f64>,
}

impl Default for McSection {
    fn default() -> Self {
        McSection {
            u_ladder: vec![2.0, 2.5, 3.0],
            n_samples: 100_000,
            grid: GridKind::Square,
            n_per_axis: 64,
            strip_spacing: 0.01,
            strip_rows: 3,
            h_alpha: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlocksSection {
    /// Levels. Default `[3, 4]`.
    pub u_values: Vec<f64>,
    /// Block side multipliers. Default 2.
    pub s1: f64,
    pub s2: f64,
    /// Block corner in units of `q_u`. Default `[0, 0]`.
    pub base: [f64; 2],
    /// Default 41.
    pub points_per_side: usize,
    /// Default 200 000.
    pub n_samples: u64,
    /// Default 200 000.
    pub pickands_replicates: u64,
}

impl Default for BlocksSection {
    fn default() -> Self {
        BlocksSection {
            u_values: vec![3.0, 4.0],
            s1: 2.0,
            s2: 2.0,
            base: [0.0, 0.0],
            points_per_side: 41,
            n_samples: 200_000,
            pickands_replicates: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Product exponents; default: 64 values on `(0, beta]` plus both boundaries.
    pub a_values: Option<Vec<f64>>,
    /// Level at which predictions are evaluated. Default 10.
    pub u: f64,
    /// As in `[mc]`.
    pub h_alpha: Option<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            a_values: None,
            u: 10.0,
            h_alpha: None,
        }
    }
}

fn increasing(v: &[f64], name: &str) -> Result<()> {
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid(format!("{name} must be a non-empty increasing list of finite values")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks everything the runs rely on.
    pub fn validate(&self) -> Result<()> {
        self.model.params()?;
        self.quadrature.validate()?;
        let i = &self.integrals;
        increasing(&i.u_ladder, "integrals.u_ladder")?;
        if i.a_values.is_empty() {
            return Err(invalid("integrals.a_values is empty"));
        }
        let m = &self.mc;
        increasing(&m.u_ladder, "mc.u_ladder")?;
        if m.n_samples == 0 {
            return Err(invalid("mc.n_samples must be at least 1"));
        }
        if !(m.strip_spacing > 0.0) || m.strip_rows == 0 {
            return Err(invalid("mc.strip_spacing must be positive and mc.strip_rows at least 1"));
        }
        if let Some(h) = m.h_alpha.or(self.sweep.h_alpha) {
            if !(h > 0.0) {
                return Err(invalid(format!("h_alpha must be positive, got {h}")));
            }
        }
        let b = &self.blocks;
        if b.u_values.is_empty() || b.n_samples == 0 || b.pickands_replicates == 0 {
            return Err(invalid("blocks needs levels and positive sample counts"));
        }
        if self.pickands.n_replicates < 2 {
            return Err(invalid("pickands.n_replicates must be at least 2"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_all_defaults() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("[model]\ngamma = 1.0\n").is_err());
        assert!(ExperimentConfig::from_toml("[nonsense]\n").is_err());
        assert!(ExperimentConfig::from_toml("[quadrature]\nrtol = 1.0\n").is_err());
    }

    #[test]
    fn round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.model.a = 0.4;
        cfg.mc.grid = GridKind::Strips;
        cfg.pickands.ladder = Some(vec![1.0, 3.0]);
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.mc.n_samples = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.model.beta = 0.5;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.integrals.u_ladder = vec![10.0, 5.0];
        assert!(cfg.validate().is_err());
    }
}
