//! Experiment driver behind the `gexcursion` binary.
//!
//! Each run writes its CSV tables and a JSON report into the output
//! directory, then a `MANIFEST` recording the configuration, library
//! version, seed, wall time and whether the run completed. CSV bodies carry
//! no timing information, so identical configurations reproduce them byte
//! for byte.

pub mod config;
mod svg;

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde_json::{json, Value};

pub use config::{ExperimentConfig, GridKind};
pub use svg::sweep_plot;

use crate::asymptotics::{known_pickands, regime_boundaries, regime_sweep};
use crate::fieldsim::{
    build_grid, build_point_grid, mc_block_exceedance, ratio_harness, side_strips, uniform_axis, BlockOptions,
    BlockSpec, GridField,
};
use crate::model::{ModelParams, Point2};
use crate::pickands::pickands_constant;
use crate::quad::integrals::IntegralBranch;
use crate::quad::{
    g_beta, i_gamma, i_gamma_asymptote, i_trend, i_trend_asymptote, k_beta, trend_k, trend_l, IntegralSpec,
};
use crate::rng::derive_seed;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The six experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Constants,
    Integrals,
    Pickands,
    Mc,
    Blocks,
    Sweep,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Constants => "constants",
            Experiment::Integrals => "integrals",
            Experiment::Pickands => "pickands",
            Experiment::Mc => "mc",
            Experiment::Blocks => "blocks",
            Experiment::Sweep => "sweep",
        }
    }
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub experiment: Experiment,
    pub out_dir: PathBuf,
    /// File names inside `out_dir`, manifest last.
    pub files: Vec<String>,
    pub report: Value,
    /// Human-readable lines for the terminal.
    pub table: Vec<String>,
}

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
    table: Vec<String>,
}

impl Outputs {
    fn path(&mut self, name: &str) -> PathBuf {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        self.dir.join(name)
    }

    fn csv(&mut self, name: &str, header: &[&str]) -> anyhow::Result<csv::Writer<File>> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("cannot create {}", path.display()))?;
        w.write_record(header)?;
        Ok(w)
    }

    fn text(&mut self, name: &str, body: &str) -> anyhow::Result<()> {
        let path = self.path(name);
        fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))
    }

    fn json(&mut self, name: &str, v: &Value) -> anyhow::Result<()> {
        let body = serde_json::to_string_pretty(v)? + "\n";
        self.text(name, &body)
    }
}

/// Runs `experiment` under `cfg`, writing into `cfg.run.out_dir`. On failure
/// the manifest still gets written, marked incomplete, before the error is
/// returned.
pub fn run(experiment: Experiment, cfg: &ExperimentConfig) -> anyhow::Result<RunSummary> {
    let start = Instant::now();
    let dir = cfg.run.out_dir.clone();
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut out = Outputs {
        dir: dir.clone(),
        files: Vec::new(),
        table: Vec::new(),
    };
    let result = cfg.validate().map_err(anyhow::Error::from).and_then(|_| match experiment {
        Experiment::Constants => run_constants(cfg, &mut out),
        Experiment::Integrals => run_integrals(cfg, &mut out),
        Experiment::Pickands => run_pickands(cfg, &mut out),
        Experiment::Mc => run_mc(cfg, &mut out),
        Experiment::Blocks => run_blocks(cfg, &mut out),
        Experiment::Sweep => run_sweep(cfg, &mut out),
    });
    let result = result.and_then(|report| {
        out.json("report.json", &report)?;
        Ok(report)
    });
    let status = match &result {
        Ok(_) => "complete".to_string(),
        Err(e) => format!("INCOMPLETE: {e:#}"),
    };
    write_manifest(&mut out, experiment, cfg, &status, start.elapsed().as_secs_f64())?;
    let report = result?;
    Ok(RunSummary {
        experiment,
        out_dir: dir,
        files: out.files,
        report,
        table: out.table,
    })
}

fn write_manifest(out: &mut Outputs, exp: Experiment, cfg: &ExperimentConfig, status: &str, secs: f64) -> anyhow::Result<()> {
    let others: Vec<String> = out.files.iter().filter(|f| *f != "MANIFEST").cloned().collect();
    let mut body = String::new();
    body.push_str(&format!("gexcursion {VERSION}\n"));
    body.push_str(&format!("experiment: {}\n", exp.name()));
    body.push_str(&format!("status: {status}\n"));
    body.push_str(&format!("seed: {}\n", cfg.run.seed));
    body.push_str(&format!("workers: {}\n", cfg.run.workers));
    body.push_str(&format!("wall_time_seconds: {secs:.3}\n"));
    body.push_str(&format!("outputs: {}\n", others.join(", ")));
    body.push_str("\n# configuration\n");
    body.push_str(&cfg.to_toml());
    let path = out.path("MANIFEST");
    let mut f = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    f.write_all(body.as_bytes())?;
    Ok(())
}

fn run_constants(cfg: &ExperimentConfig, out: &mut Outputs) -> anyhow::Result<Value> {
    let params = cfg.model.params()?;
    let q = &cfg.quadrature;
    let (c1, c2) = (params.c1(), params.c2());
    let entries: Vec<(&str, f64)> = vec![
        ("G_beta", g_beta(params.beta())?),
        ("K_beta", k_beta(params.beta(), q)?),
        ("L_c1", trend_l(c1, q)?),
        ("L_c2", trend_l(c2, q)?),
        ("K_c1_c2", trend_k(c1, c2, q)?),
        ("a0", params.a0()),
    ];
    let mut w = out.csv("constants.csv", &["name", "value"])?;
    for (k, v) in &entries {
        w.write_record([k.to_string(), fmt17(*v)])?;
        out.table.push(format!("{k:<10} {v:.10}"));
    }
    w.flush()?;
    let regime = params.classify_regime();
    out.table.push(format!("{:<10} {regime}", "regime"));
    let mut report = json!({ "experiment": "constants", "beta": params.beta(), "c1": c1, "c2": c2, "regime": regime.as_str() });
    for (k, v) in entries {
        report[k] = json!(v);
    }
    Ok(report)
}

fn branch_name(b: IntegralBranch) -> &'static str {
    match b {
        IntegralBranch::Logarithmic => "logarithmic",
        IntegralBranch::Critical => "critical",
        IntegralBranch::Classical => "classical",
    }
}

fn run_integrals(cfg: &ExperimentConfig, out: &mut Outputs) -> anyhow::Result<Value> {
    let params = cfg.model.params()?;
    let s = &cfg.integrals;
    let trended = params.c1() != 0.0 || params.c2() != 0.0;
    let mut seen = Vec::new();
    let mut branches = Vec::new();
    for &a in &s.a_values {
        let base = IntegralSpec::new(s.gamma, params.beta(), a, s.delta, s.u_ladder[0]).with_trend(params.c1(), params.c2());
        let branch = branch_name(base.branch());
        if seen.contains(&branch) {
            anyhow::bail!("integrals.a_values lists two exponents in the {branch} branch");
        }
        seen.push(branch);
        let name = format!("integrals_{branch}.csv");
        let mut w = out.csv(&name, &["u", "I_quadrature", "I_asymptote", "ratio"])?;
        let mut rows = Vec::new();
        for &u in &s.u_ladder {
            let spec = IntegralSpec { u, ..base };
            let (value, pred) = if trended {
                (i_trend(&spec, &cfg.quadrature)?, i_trend_asymptote(&spec, &cfg.quadrature)?)
            } else {
                (i_gamma(&spec, &cfg.quadrature)?, i_gamma_asymptote(&spec, &cfg.quadrature)?)
            };
            let asym = pred.evaluate(u);
            let ratio = value / asym;
            w.write_record([fmt17(u), fmt17(value), fmt17(asym), fmt17(ratio)])?;
            w.flush()?;
            out.table.push(format!("{branch:<12} a={a:<6} u={u:<10e} ratio={ratio:.8}"));
            rows.push(json!({ "u": u, "quadrature": value, "asymptote": asym, "ratio": ratio }));
        }
        branches.push(json!({ "branch": branch, "a": a, "file": name, "rows": rows }));
    }
    Ok(json!({ "experiment": "integrals", "trended": trended, "branches": branches }))
}

fn run_pickands(cfg: &ExperimentConfig, out: &mut Outputs) -> anyhow::Result<Value> {
    let alpha = cfg.model.alpha;
    let protocol = cfg.pickands.protocol(alpha, cfg.run.seed, cfg.run.workers);
    let h = pickands_constant(alpha, &protocol)?;
    let mut w = out.csv("pickands.csv", &["kind", "S", "n_points", "value", "std_err", "n_replicates"])?;
    let mut row = |kind: &str, e: &crate::pickands::PickandsEstimate| -> anyhow::Result<()> {
        w.write_record([
            kind.to_string(),
            fmt17(e.grid.horizon),
            e.grid.n_points.to_string(),
            fmt17(e.value),
            fmt17(e.std_err),
            e.n_replicates.to_string(),
        ])?;
        Ok(())
    };
    for r in &h.rungs {
        row("H(S)", r)?;
    }
    row("slope", &h.estimate)?;
    row("naive", &h.naive)?;
    w.flush()?;
    for r in &h.rungs {
        out.table.push(format!("H({:.4}) = {:.6} ± {:.6}", r.grid.horizon, r.value, r.std_err));
    }
    out.table.push(format!("H_alpha (slope) = {:.6} ± {:.6}", h.estimate.value, h.estimate.std_err));
    out.table.push(format!("H_alpha (naive) = {:.6} ± {:.6}", h.naive.value, h.naive.std_err));
    if h.discrepancy_warning {
        out.table.push("warning: slope and naive estimates differ by more than 3 joint standard errors".into());
    }
    Ok(json!({
        "experiment": "pickands",
        "alpha": alpha,
        "estimate": h.estimate,
        "naive": h.naive,
        "rungs": h.rungs,
        "discrepancy_warning": h.discrepancy_warning,
        "protocol": protocol,
    }))
}

/// Explicit value, else the known closed form, else a protocol estimate.
fn resolve_h(cfg: &ExperimentConfig, explicit: Option<f64>) -> anyhow::Result<(f64, &'static str)> {
    if let Some(h) = explicit {
        return Ok((h, "configured"));
    }
    let alpha = cfg.model.alpha;
    if let Some(h) = known_pickands(alpha) {
        return Ok((h, "known"));
    }
    let protocol = cfg.pickands.protocol(alpha, derive_seed(cfg.run.seed, 0x9a), cfg.run.workers);
    Ok((pickands_constant(alpha, &protocol)?.estimate.value, "estimated"))
}

/// The lattice selected by `[mc]`.
pub fn mc_grid(cfg: &ExperimentConfig, params: &ModelParams) -> crate::Result<GridField> {
    let m = &cfg.mc;
    match m.grid {
        GridKind::Square => build_grid(params, m.n_per_axis),
        GridKind::Strips => {
            let t = params.horizon();
            let along = uniform_axis(0.0, t, (t / m.strip_spacing).round() as usize + 1);
            let across: Vec<f64> = (0..m.strip_rows).map(|i| i as f64 * m.strip_spacing).collect();
            build_point_grid(params, &side_strips(&along, &across))
        }
    }
}

fn run_mc(cfg: &ExperimentConfig, out: &mut Outputs) -> anyhow::Result<Value> {
    let params = cfg.model.params()?;
    let (h, source) = resolve_h(cfg, cfg.mc.h_alpha)?;
    let grid = mc_grid(cfg, &params)?;
    let rows = ratio_harness(&grid, &cfg.mc.u_ladder, h, cfg.mc.n_samples, cfg.run.seed, cfg.run.workers)?;
    let mut w = out.csv("mc.csv", &["u", "p_hat", "std_err", "prediction", "ratio", "n_samples"])?;
    for r in &rows {
        w.write_record([
            fmt17(r.u),
            fmt17(r.p_hat),
            fmt17(r.std_err),
            fmt17(r.prediction),
            fmt17(r.ratio),
            r.n_samples.to_string(),
        ])?;
        out.table.push(format!(
            "u={:<6} p_hat={:.6e} ± {:.2e}  prediction={:.6e}  ratio={:.4}",
            r.u, r.p_hat, r.std_err, r.prediction, r.ratio
        ));
    }
    w.flush()?;
    Ok(json!({
        "experiment": "mc",
        "regime": params.classify_regime().as_str(),
        "grid": cfg.mc.grid,
        "n_points": grid.n_points(),
        "h_alpha": h,
        "h_alpha_source": source,
        "rows": rows,
    }))
}

fn run_blocks(cfg: &ExperimentConfig, out: &mut Outputs) -> anyhow::Result<Value> {
    let params = cfg.model.params()?;
    let b = &cfg.blocks;
    let opts = BlockOptions {
        points_per_side: b.points_per_side,
        n_samples: b.n_samples,
        pickands_replicates: b.pickands_replicates,
        seed: cfg.run.seed,
        workers: cfg.run.workers,
    };
    let mut w = out.csv(
        "blocks.csv",
        &["u", "v1", "v2", "s1", "s2", "p_hat", "std_err", "h1", "h2", "prediction", "ratio"],
    )?;
    let mut rows = Vec::new();
    for &u in &b.u_values {
        let q = params.correlation_scale(u)?;
        let block = BlockSpec {
            base: Point2::new(b.base[0] * q, b.base[1] * q),
            s1: b.s1,
            s2: b.s2,
            level_u: u,
        };
        let e = mc_block_exceedance(&params, &block, &opts)?;
        let hv = |h: &Option<crate::pickands::PickandsEstimate>| h.map_or(1.0, |h| h.value);
        w.write_record([
            fmt17(u),
            fmt17(block.base.t1),
            fmt17(block.base.t2),
            fmt17(b.s1),
            fmt17(b.s2),
            fmt17(e.mc.p_hat),
            fmt17(e.mc.std_err),
            fmt17(hv(&e.h1)),
            fmt17(hv(&e.h2)),
            fmt17(e.prediction),
            fmt17(e.ratio),
        ])?;
        w.flush()?;
        out.table.push(format!(
            "u={u:<5} p_hat={:.6e} ± {:.2e}  prediction={:.6e}  ratio={:.4}",
            e.mc.p_hat, e.mc.std_err, e.prediction, e.ratio
        ));
        rows.push(e);
    }
    Ok(json!({ "experiment": "blocks", "rows": rows }))
}

/// Default sweep grid: 64 points on `(0, beta]` plus both boundaries.
pub fn default_sweep_values(alpha: f64, beta: f64) -> Vec<f64> {
    let (a0, half) = regime_boundaries(alpha, beta);
    let mut v: Vec<f64> = (1..=64).map(|k| beta * k as f64 / 64.0).collect();
    v.push(a0);
    v.push(half);
    v.sort_by(|x, y| x.total_cmp(y));
    v.dedup_by(|x, y| (*x - *y).abs() < 1e-12 * beta);
    v
}

fn run_sweep(cfg: &ExperimentConfig, out: &mut Outputs) -> anyhow::Result<Value> {
    let (alpha, beta) = (cfg.model.alpha, cfg.model.beta);
    let (h, source) = resolve_h(cfg, cfg.sweep.h_alpha)?;
    let a_values = cfg.sweep.a_values.clone().unwrap_or_else(|| default_sweep_values(alpha, beta));
    let rows = regime_sweep(alpha, beta, &a_values, cfg.sweep.u, h, &cfg.quadrature)?;
    let mut w = out.csv("sweep.csv", &["a", "regime", "u_power", "log_power", "prefactor", "value"])?;
    for r in &rows {
        w.write_record([
            fmt17(r.a),
            r.regime.as_str().to_string(),
            fmt17(r.u_power),
            r.log_power.to_string(),
            fmt17(r.prefactor),
            fmt17(r.value),
        ])?;
    }
    w.flush()?;
    let (a0, half) = regime_boundaries(alpha, beta);
    out.text("sweep.svg", &sweep_plot(&rows, a0, half))?;
    out.table.push(format!("{} rows; a0 = {a0:.6}, beta/2 = {half:.6}", rows.len()));
    Ok(json!({
        "experiment": "sweep",
        "alpha": alpha,
        "beta": beta,
        "a0": a0,
        "half_beta": half,
        "h_alpha": h,
        "h_alpha_source": source,
        "rows": rows,
    }))
}

/// Applies command-line overrides to a loaded configuration.
pub fn apply_overrides(cfg: &mut ExperimentConfig, seed: Option<u64>, workers: Option<usize>, out: Option<&Path>) {
    if let Some(s) = seed {
        cfg.run.seed = s;
    }
    if let Some(w) = workers {
        cfg.run.workers = w;
    }
    if let Some(o) = out {
        cfg.run.out_dir = o.to_path_buf();
    }
}
