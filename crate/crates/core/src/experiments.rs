//! Monte Carlo harness: expected norms, bound ratios over a dimension sweep,
//! censored PCA detection and covering-number probes.
//!
//! Trial `t` of an experiment draws from `stream_rng(derive_seed(master, t), 0)`
//! and seeds its norm solver with `derive_seed(derive_seed(master, t), 1)`.
//! Trials run on the current rayon pool and are collected in index order, so
//! output does not depend on the number of worker threads.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{
    hypergraph_bound_for, indep_entry_bound, lambda_threshold, matching_bound, nck_holder_matching, profile_bounds,
    BoundReport,
};
use crate::error::{ensure, Error, Result};
use crate::lp::{lp_norm, sample_ball, PExponent};
use crate::models::{matching_series, Coefficients, Model, ModelSpec};
use crate::norm::{best_norm, SolverConfig};
use crate::seed::{derive_seed, stream_rng};
use crate::variance::{variance_profile, SparseSeries};

fn default_p() -> PExponent {
    PExponent::TWO
}
fn default_trials() -> usize {
    30
}
fn default_budget() -> usize {
    2000
}
fn default_constant() -> f64 {
    1.0
}
fn default_cap() -> Option<f64> {
    Some(10.0)
}
fn default_repetitions() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default = "default_p")]
    pub p: PExponent,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub coefficients: Coefficients,
    /// Dimensions for `bound_ratio_sweep`.
    #[serde(default)]
    pub sweep: Option<Vec<usize>>,
    /// Scales for `covering_probe`.
    #[serde(default)]
    pub epsilon_grid: Option<Vec<f64>>,
    /// Number of sampled ball points streamed through the packing.
    #[serde(default = "default_budget")]
    pub candidate_budget: usize,
    /// Signal strengths for `pca_detection`; zero is added when missing.
    #[serde(default)]
    pub lambda_grid: Option<Vec<f64>>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Upper limit on measured/bound ratios in a sweep; `null` disables it.
    #[serde(default = "default_cap")]
    pub ratio_cap: Option<f64>,
    /// Constant `C` used for every bound.
    #[serde(default = "default_constant")]
    pub constant: f64,
}

impl ExperimentConfig {
    pub fn new(model: ModelSpec) -> Self {
        ExperimentConfig {
            model,
            p: default_p(),
            trials: default_trials(),
            master_seed: 0,
            solver: SolverConfig::default(),
            coefficients: Coefficients::default(),
            sweep: None,
            epsilon_grid: None,
            candidate_budget: default_budget(),
            lambda_grid: None,
            repetitions: default_repetitions(),
            ratio_cap: default_cap(),
            constant: default_constant(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.trials >= 1, "trials must be at least 1");
        ensure!(self.repetitions >= 1, "repetitions must be at least 1");
        ensure!(self.candidate_budget >= 1, "candidate_budget must be at least 1");
        ensure!(
            self.constant > 0.0 && self.constant.is_finite(),
            "constant must be positive"
        );
        if let Some(cap) = self.ratio_cap {
            ensure!(cap > 0.0, "ratio_cap must be positive");
        }
        if let Some(s) = &self.sweep {
            ensure!(s.iter().all(|&d| d >= 1), "sweep dimensions must be positive");
        }
        if let Some(g) = &self.epsilon_grid {
            ensure!(
                g.iter().all(|&e| e > 0.0 && e.is_finite()),
                "epsilon_grid entries must be positive"
            );
        }
        if let Some(g) = &self.lambda_grid {
            ensure!(
                g.iter().all(|&l| l >= 0.0 && l.is_finite()),
                "lambda_grid entries must be nonnegative"
            );
        }
        self.solver.validate()
    }
}

/// One CSV field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    UInt(u64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::UInt(v as u64)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:?}")
    }
}

/// A named pass/fail property with its measured value and threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed: measured <= threshold,
            measured,
            threshold,
            detail: detail.into(),
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed: measured >= threshold,
            measured,
            threshold,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: String,
    /// The primary per-trial (or per-row) values.
    pub values: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub checks: Vec<Check>,
    pub summary: Value,
}

impl ExperimentResult {
    pub(crate) fn new(experiment: &str, values: Vec<f64>, columns: &[&str]) -> Self {
        let (mean, stderr) = mean_stderr(&values);
        ExperimentResult {
            experiment: experiment.into(),
            values,
            mean,
            stderr,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            checks: Vec::new(),
            summary: Value::Null,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_error)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fixed-width text table of the rows.
    pub fn to_table(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect();
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let line = |fields: &[String]| {
            fields
                .iter()
                .zip(&widths)
                .map(|(f, w)| format!("{f:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = line(&self.columns);
        out.push('\n');
        for row in &cells {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

/// Sample mean and `sd / sqrt(n)` with the `n - 1` variance. A single value
/// has standard error 0.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// usable points.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// `(seed, norm)` for `trials` independent draws of `model`.
pub fn trial_norms(
    model: &Model,
    p: PExponent,
    coeffs: Coefficients,
    solver: &SolverConfig,
    master: u64,
    trials: usize,
) -> Result<Vec<(u64, f64)>> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(master, t as u64);
            let mut rng = stream_rng(seed, 0);
            let x = model.sample(coeffs, &mut rng)?;
            let cfg = SolverConfig {
                seed: derive_seed(seed, 1),
                ..solver.clone()
            };
            Ok((seed, best_norm(&x, p, &cfg)?.value))
        })
        .collect()
}

pub fn mc_expected_norm(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let model = cfg.model.build()?;
    let runs = trial_norms(&model, cfg.p, cfg.coefficients, &cfg.solver, cfg.master_seed, cfg.trials)?;
    let values: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let mut res = ExperimentResult::new("mc_expected_norm", values, &["trial", "seed", "value"]);
    res.rows = runs
        .iter()
        .enumerate()
        .map(|(t, (s, v))| vec![Cell::from(t), Cell::from(*s), Cell::from(*v)])
        .collect();
    res.summary = json!({
        "d": cfg.model.dim(),
        "p": cfg.p,
        "trials": cfg.trials,
        "master_seed": cfg.master_seed,
        "mean": res.mean,
        "stderr": res.stderr,
    });
    Ok(res)
}

/// The bounds that apply to `spec` at exponent `p`, all at constant `c`.
pub fn applicable_bounds(spec: &ModelSpec, model: &Model, p: PExponent, c: f64, solver: &SolverConfig) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    if p.is_finite() {
        let profile = variance_profile(&model.series, p, solver)?;
        out.extend(profile_bounds(&profile, c)?);
    }
    let pv = p.value();
    match spec {
        ModelSpec::Nonhomogeneous { variance } if pv >= 2.0 && p.is_finite() => {
            out.push(indep_entry_bound(variance, p, c, solver)?);
        }
        ModelSpec::CensoredPca { hypergraph, .. } if pv == 2.0 => {
            out.push(hypergraph_bound_for(hypergraph, c)?);
        }
        ModelSpec::Matching { family } if p.is_finite() && pv >= 2.0 => {
            let data = matching_series(family)?;
            if pv >= 4.0 {
                out.push(matching_bound(&data.sizes, &data.degrees, family.d(), p, c)?);
            }
            out.push(nck_holder_matching(&data.degrees, family.d(), p, c)?);
        }
        _ => {}
    }
    Ok(out)
}

pub fn bound_ratio_sweep(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("bound_ratio_sweep needs a sweep list".into()))?;
    ensure!(!sweep.is_empty(), "sweep list is empty");
    struct Point {
        d: usize,
        mean: f64,
        stderr: f64,
        bounds: Vec<BoundReport>,
    }
    let mut points = Vec::with_capacity(sweep.len());
    for &d in sweep {
        let spec = cfg.model.with_dim(d)?;
        let model = spec.build()?;
        let master = derive_seed(cfg.master_seed, d as u64);
        let runs = trial_norms(&model, cfg.p, cfg.coefficients, &cfg.solver, master, cfg.trials)?;
        let values: Vec<f64> = runs.iter().map(|r| r.1).collect();
        let (mean, stderr) = mean_stderr(&values);
        let bounds = applicable_bounds(&spec, &model, cfg.p, cfg.constant, &cfg.solver)?;
        points.push(Point { d, mean, stderr, bounds });
    }
    let means: Vec<f64> = points.iter().map(|p| p.mean).collect();
    let mut res = ExperimentResult::new(
        "bound_ratio_sweep",
        means.clone(),
        &["d", "mean", "stderr", "bound_name", "bound_value", "ratio"],
    );
    let dims: Vec<f64> = points.iter().map(|p| p.d as f64).collect();
    let mut per_bound: BTreeMap<&'static str, (Vec<f64>, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for pt in &points {
        for b in &pt.bounds {
            let ratio = pt.mean / b.value;
            res.rows.push(vec![
                pt.d.into(),
                pt.mean.into(),
                pt.stderr.into(),
                b.name.as_str().into(),
                b.value.into(),
                ratio.into(),
            ]);
            let e = per_bound.entry(b.name.as_str()).or_default();
            e.0.push(pt.d as f64);
            e.1.push(b.value);
            e.2.push(ratio);
            if let Some(cap) = cfg.ratio_cap {
                res.checks.push(Check::at_most(
                    format!("ratio_cap/{}/d={}", b.name.as_str(), pt.d),
                    ratio,
                    cap,
                    "mean norm over bound at the configured constant",
                ));
            }
        }
    }
    let mut slopes = serde_json::Map::new();
    for (name, (ds, vals, ratios)) in &per_bound {
        let ratio_max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ratio_min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        slopes.insert(
            name.to_string(),
            json!({
                "bound_slope": log_log_slope(ds, vals),
                "ratio_slope": log_log_slope(ds, ratios),
                "ratio_min": ratio_min,
                "ratio_max": ratio_max,
            }),
        );
    }
    let sqrt_ratios: Vec<f64> = points.iter().map(|p| p.mean / (p.d as f64).sqrt()).collect();
    res.summary = json!({
        "p": cfg.p,
        "trials": cfg.trials,
        "dims": sweep,
        "mean_slope": log_log_slope(&dims, &means),
        "mean_over_sqrt_d": sqrt_ratios,
        "bounds": slopes,
    });
    Ok(res)
}

pub fn pca_detection(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let ModelSpec::CensoredPca {
        hypergraph, signal, ..
    } = &cfg.model
    else {
        return Err(Error::InvalidInput("pca_detection needs a censored_pca model".into()));
    };
    ensure!(cfg.p == PExponent::TWO, "pca_detection works at p = 2");
    let mut grid = cfg
        .lambda_grid
        .clone()
        .ok_or_else(|| Error::InvalidInput("pca_detection needs a lambda_grid".into()))?;
    if !grid.contains(&0.0) {
        grid.push(0.0);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let threshold = lambda_threshold(hypergraph, 1.0, &cfg.solver)?;
    let hbound = hypergraph_bound_for(hypergraph, 1.0)?;
    let model_at = |lambda: f64| {
        ModelSpec::CensoredPca {
            hypergraph: hypergraph.clone(),
            signal: signal.clone(),
            lambda,
        }
        .build()
    };
    let null_model = model_at(0.0)?;
    let signal_models = grid.iter().map(|&l| model_at(l)).collect::<Result<Vec<_>>>()?;

    let mut res_rows = Vec::new();
    let mut detected = vec![0usize; grid.len()];
    let mut lambda_hats = Vec::new();
    let mut null_means = Vec::new();
    let mut margins_all = Vec::new();
    for rep in 0..cfg.repetitions {
        let rep_seed = derive_seed(cfg.master_seed, rep as u64);
        let null: Vec<f64> = trial_norms(&null_model, cfg.p, Coefficients::Gaussian, &cfg.solver, derive_seed(rep_seed, 0), cfg.trials)?
            .into_iter()
            .map(|r| r.1)
            .collect();
        let null_max = null.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        null_means.push(mean_stderr(&null).0);
        // The signal draws reuse one noise stream across the grid.
        let signal_master = derive_seed(rep_seed, 1);
        let mut hat = None;
        for (j, (&lambda, m)) in grid.iter().zip(&signal_models).enumerate() {
            let vals: Vec<f64> = trial_norms(m, cfg.p, Coefficients::Gaussian, &cfg.solver, signal_master, cfg.trials)?
                .into_iter()
                .map(|r| r.1)
                .collect();
            let (mean, _) = mean_stderr(&vals);
            let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let margin = min - null_max;
            let hit = margin > 0.0;
            if hit {
                detected[j] += 1;
                if hat.is_none() {
                    hat = Some(lambda);
                }
            }
            margins_all.push(margin);
            res_rows.push(vec![
                rep.into(),
                lambda.into(),
                mean.into(),
                min.into(),
                null_max.into(),
                margin.into(),
                hit.into(),
            ]);
        }
        lambda_hats.push(hat);
    }
    let mut res = ExperimentResult::new(
        "pca_detection",
        margins_all,
        &["repetition", "lambda", "signal_mean", "signal_min", "null_max", "margin", "detected"],
    );
    res.rows = res_rows;
    let reps = cfg.repetitions as f64;
    let rates: Vec<Value> = grid
        .iter()
        .zip(&detected)
        .map(|(l, n)| json!({ "lambda": l, "lambda_over_threshold": l / threshold.value, "detection_rate": *n as f64 / reps }))
        .collect();
    let calibrated: Vec<Option<f64>> = lambda_hats.iter().map(|h| h.map(|l| l / threshold.value)).collect();
    let (null_mean, _) = mean_stderr(&null_means);
    res.summary = json!({
        "d": hypergraph.d(),
        "r": hypergraph.r(),
        "edges": hypergraph.edges().len(),
        "trials": cfg.trials,
        "repetitions": cfg.repetitions,
        "lambda_threshold_c1": threshold.value,
        "adjacency_norm": threshold.inputs["adjacency_norm"],
        "rates": rates,
        "lambda_hat": lambda_hats,
        "calibrated_constant": calibrated,
        "null_mean": null_mean,
        "hypergraph_bound_c1": hbound.value,
        "null_fitted_constant": null_mean / hbound.value,
    });
    Ok(res)
}

/// Upper bound on `σ_0` from Frobenius norms:
/// `d^{r max(1/2 - 1/p, 0)} sqrt(sum_k ||T_k||_F^2)`.
pub fn sigma0_surrogate(series: &SparseSeries, p: PExponent) -> f64 {
    let (d, r) = (series.dim() as f64, series.order() as f64);
    d.powf(r * (0.5 - p.recip()).max(0.0)) * series.frobenius_sq().sqrt()
}

/// Natural log of the Slepian-type bound on the covering number of the
/// unit ball at scale `s`: `max(d ln(3 r σ / s), 0)`.
pub fn slepian_log_cover(d: usize, r: usize, sigma0: f64, s: f64) -> f64 {
    (d as f64 * (3.0 * r as f64 * sigma0 / s).ln()).max(0.0)
}

/// Natural log of the volumetric bound `4 exp((p-1) d / (2 t^2))` at the
/// `t` solving `max_q d^{-q/p} t^q σ_q = s` (constant one).
pub fn volumetric_log_cover(d: usize, p: PExponent, sigma: &[f64], s: f64) -> f64 {
    let df = d as f64;
    let t = sigma
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, s)| **s > 0.0)
        .map(|(q, sq)| {
            let qf = q as f64;
            (s * df.powf(qf * p.recip()) / sq).powf(1.0 / qf)
        })
        .fold(f64::INFINITY, f64::min);
    4f64.ln() + (p.value() - 1.0) * df / (2.0 * t * t)
}

pub fn covering_probe(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    ensure!(cfg.p.is_finite(), "covering_probe needs a finite p");
    let model = cfg.model.build()?;
    let series = &model.series;
    ensure!(series.is_symmetric(), "covering_probe needs a symmetric series");
    let mut grid = cfg
        .epsilon_grid
        .clone()
        .ok_or_else(|| Error::InvalidInput("covering_probe needs an epsilon_grid".into()))?;
    ensure!(!grid.is_empty(), "epsilon_grid is empty");
    grid.sort_by(|a, b| b.total_cmp(a));
    grid.dedup();
    let (d, r) = (series.dim(), series.order());

    let mut rng = stream_rng(cfg.master_seed, 0);
    let points: Vec<Vec<f64>> = (0..cfg.candidate_budget)
        .map(|_| series.features(&sample_ball(d, cfg.p, &mut rng)))
        .collect();
    let dist = |a: &[f64], b: &[f64]| lp_norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>(), PExponent::TWO);

    // Descending scales: the set kept at a larger scale is separated at every
    // smaller one, so each pass extends the previous set.
    let mut kept: Vec<usize> = Vec::new();
    let mut is_kept = vec![false; points.len()];
    let mut counts = Vec::with_capacity(grid.len());
    for &eps in &grid {
        for (i, x) in points.iter().enumerate() {
            if !is_kept[i] && kept.iter().all(|&j| dist(x, &points[j]) > eps) {
                kept.push(i);
                is_kept[i] = true;
            }
        }
        counts.push(kept.len());
    }

    let sigma_bar = sigma0_surrogate(series, cfg.p);
    let profile = variance_profile(series, cfg.p, &cfg.solver)?;
    let diameter = 2.0 * r as f64 * sigma_bar;
    let mut res = ExperimentResult::new(
        "covering_probe",
        counts.iter().map(|&c| c as f64).collect(),
        &[
            "epsilon",
            "packing_count",
            "log_packing",
            "slepian_log_bound",
            "volumetric_log_bound",
            "within_slepian",
        ],
    );
    for (&eps, &n) in grid.iter().zip(&counts) {
        let log_n = (n as f64).ln();
        // An eps-separated set is at most a cover at eps/2.
        let slep = slepian_log_cover(d, r, sigma_bar, eps / 2.0);
        let vol = volumetric_log_cover(d, cfg.p, &profile.sigma, eps / 2.0);
        let ok = log_n <= slep + 1e-12;
        res.rows.push(vec![
            eps.into(),
            n.into(),
            log_n.into(),
            slep.into(),
            vol.into(),
            ok.into(),
        ]);
        res.checks.push(Check::at_most(
            format!("within_slepian/eps={}", format_float(eps)),
            log_n,
            slep + 1e-12,
            "log packing count against the Frobenius-surrogate covering bound at eps/2",
        ));
        if eps >= diameter {
            res.checks.push(Check::at_most(
                format!("single_point/eps={}", format_float(eps)),
                n as f64,
                1.0,
                "scale above the diameter bound keeps one point",
            ));
        }
    }
    // `counts` follows descending scales.
    let nonincreasing = counts.windows(2).all(|w| w[0] <= w[1]);
    res.checks.push(Check {
        name: "packing_nonincreasing".into(),
        passed: nonincreasing,
        measured: if nonincreasing { 1.0 } else { 0.0 },
        threshold: 1.0,
        detail: "packing counts are nonincreasing in the scale".into(),
    });
    let eps_asc: Vec<f64> = grid.iter().rev().copied().collect();
    let counts_asc: Vec<f64> = counts.iter().rev().map(|&c| c as f64).collect();
    res.summary = json!({
        "d": d,
        "r": r,
        "p": cfg.p,
        "candidate_budget": cfg.candidate_budget,
        "sigma0_surrogate": sigma_bar,
        "sigma": profile.sigma,
        "diameter_bound": diameter,
        "packing_slope": log_log_slope(&eps_asc, &counts_asc),
        "note": "packing counts are empirical lower bounds on the covering number at half the scale",
    });
    Ok(res)
}
