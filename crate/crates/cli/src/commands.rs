//! One function per subcommand. Each parses its config, runs the library
//! operation and renders the result.

use serde::{Deserialize, Serialize};
use serde_json::json;
use tensorconc::bounds::{
    hypergraph_bound, hypergraph_bound_for, indep_entry_bound, lambda_threshold, master_bound, matching_bound,
    nck_holder_matching, nck_holder_series, sharpest_bound, trivial_bound, type2_bound, BoundName, BoundReport,
};
use tensorconc::checks::{run_checks, ChecksConfig};
use tensorconc::experiments::{
    bound_ratio_sweep, covering_probe, format_float, mc_expected_norm, pca_detection, ExperimentConfig,
    ExperimentResult,
};
use tensorconc::models::{matching_series, Hypergraph, MatchingFamily, ModelSpec};
use tensorconc::norm::{best_norm, grid_oracle, injective_norm, symmetric_injective_norm};
use tensorconc::variance::{variance_profile, SparseSeries, VarianceProfile};
use tensorconc::{Error, NormEstimate, PExponent, SolverConfig, Tensor, TensorSeries};

use crate::config::Loaded;
use crate::{CliError, Format};

/// Rendered output and whether every property check passed.
pub struct Outcome {
    pub text: String,
    pub passed: bool,
}

fn default_p() -> PExponent {
    PExponent::TWO
}

fn default_constant() -> f64 {
    1.0
}

fn default_resolution() -> usize {
    24
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Lib(Error::InvalidInput(msg.into()))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Lib(e.into()))?;
    s.push('\n');
    Ok(s)
}

/// Two aligned columns.
fn key_values(rows: &[(&str, String)]) -> String {
    let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<w$}  {v}\n")).collect()
}

fn csv_lines(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum NormMethod {
    /// Closed form where available, the estimator otherwise.
    #[default]
    Auto,
    Alternating,
    Symmetric,
    Grid,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NormInput {
    tensor: Tensor,
    #[serde(default = "default_p")]
    p: PExponent,
    #[serde(default)]
    solver: SolverConfig,
    #[serde(default)]
    method: NormMethod,
    #[serde(default = "default_resolution")]
    grid_resolution: usize,
}

pub fn norm(cfg: &Loaded, format: Format) -> Result<Outcome, CliError> {
    let input: NormInput = cfg.parse()?;
    let t = &input.tensor;
    let est: NormEstimate = match input.method {
        NormMethod::Auto => best_norm(t, input.p, &input.solver)?,
        NormMethod::Alternating => injective_norm(t, input.p, &input.solver)?,
        NormMethod::Symmetric => symmetric_injective_norm(t, input.p, &input.solver)?,
        NormMethod::Grid => grid_oracle(t, input.p, input.grid_resolution)?,
    };
    let exact = est.is_exact();
    let method = serde_json::to_value(est.method).map_err(|e| CliError::Lib(e.into()))?;
    let method = method.as_str().unwrap_or_default().to_string();
    let text = match format {
        Format::Json => {
            let mut v = serde_json::to_value(&est).map_err(|e| CliError::Lib(e.into()))?;
            v["exact"] = json!(exact);
            v["p"] = json!(input.p);
            to_json(&v)?
        }
        Format::Csv => csv_lines(
            &["value", "method", "exact", "restarts_used", "iterations", "converged"],
            &[vec![
                format_float(est.value),
                method,
                exact.to_string(),
                est.restarts_used.to_string(),
                est.iterations.to_string(),
                est.converged.to_string(),
            ]],
        ),
        Format::Table => key_values(&[
            ("value", format_float(est.value)),
            ("method", method),
            ("exact", exact.to_string()),
            ("restarts_used", est.restarts_used.to_string()),
            ("iterations", est.iterations.to_string()),
            ("converged", est.converged.to_string()),
        ]),
    };
    Ok(Outcome { text, passed: true })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VarianceInput {
    #[serde(default)]
    series: Option<TensorSeries>,
    #[serde(default)]
    model: Option<ModelSpec>,
    #[serde(default = "default_p")]
    p: PExponent,
    #[serde(default)]
    solver: SolverConfig,
}

fn series_of(series: Option<&TensorSeries>, model: Option<&ModelSpec>) -> Result<SparseSeries, CliError> {
    match (series, model) {
        (Some(s), None) => Ok(SparseSeries::from_series(s)),
        (None, Some(m)) => Ok(m.build()?.series),
        (Some(_), Some(_)) => Err(invalid("give either series or model, not both")),
        (None, None) => Err(invalid("need a series or a model")),
    }
}

fn tag(v: &impl Serialize) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

pub fn variance(cfg: &Loaded, format: Format) -> Result<Outcome, CliError> {
    let input: VarianceInput = cfg.parse()?;
    let series = series_of(input.series.as_ref(), input.model.as_ref())?;
    let prof = variance_profile(&series, input.p, &input.solver)?;
    let mut rows: Vec<Vec<String>> = prof
        .sigma
        .iter()
        .zip(&prof.methods)
        .enumerate()
        .map(|(q, (s, m))| vec![format!("sigma_{q}"), format_float(*s), tag(m)])
        .collect();
    rows.push(vec!["sigma_type2".into(), format_float(prof.sigma_type2), tag(&prof.type2_method)]);
    let text = match format {
        Format::Json => to_json(&prof)?,
        Format::Csv => csv_lines(&["parameter", "value", "method"], &rows),
        Format::Table => {
            let w0 = rows.iter().map(|r| r[0].len()).max().unwrap_or(0);
            let w1 = rows.iter().map(|r| r[1].len()).max().unwrap_or(0);
            rows.iter()
                .map(|r| format!("{:<w0$}  {:>w1$}  {}\n", r[0], r[1], r[2]))
                .collect()
        }
    };
    Ok(Outcome { text, passed: true })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundInput {
    #[serde(default)]
    name: Option<BoundName>,
    #[serde(default = "default_p")]
    p: PExponent,
    #[serde(default = "default_constant")]
    constant: f64,
    #[serde(default)]
    solver: SolverConfig,
    #[serde(default)]
    model: Option<ModelSpec>,
    #[serde(default)]
    series: Option<TensorSeries>,
    #[serde(default)]
    profile: Option<VarianceProfile>,
    #[serde(default)]
    variance: Option<Tensor>,
    #[serde(default)]
    hypergraph: Option<Hypergraph>,
    #[serde(default)]
    delta: Option<Vec<f64>>,
    #[serde(default)]
    family: Option<MatchingFamily>,
    #[serde(default)]
    sizes: Option<Vec<f64>>,
    #[serde(default)]
    degrees: Option<Vec<f64>>,
    #[serde(default)]
    d: Option<usize>,
}

impl BoundInput {
    fn hypergraph(&self) -> Option<&Hypergraph> {
        match (&self.hypergraph, &self.model) {
            (Some(h), _) => Some(h),
            (None, Some(ModelSpec::CensoredPca { hypergraph, .. })) => Some(hypergraph),
            _ => None,
        }
    }

    fn family(&self) -> Option<&MatchingFamily> {
        match (&self.family, &self.model) {
            (Some(f), _) => Some(f),
            (None, Some(ModelSpec::Matching { family })) => Some(family),
            _ => None,
        }
    }

    fn need_d(&self, what: &str) -> Result<usize, CliError> {
        self.d.ok_or_else(|| invalid(format!("{what} needs the dimension d")))
    }

    fn profile(&self) -> Result<VarianceProfile, CliError> {
        if let Some(p) = &self.profile {
            return Ok(p.clone());
        }
        let series = series_of(self.series.as_ref(), self.model.as_ref())?;
        Ok(variance_profile(&series, self.p, &self.solver)?)
    }

    fn evaluate(&self, name: BoundName) -> Result<BoundReport, CliError> {
        let (p, c, cfg) = (self.p, self.constant, &self.solver);
        let report = match name {
            BoundName::Master => master_bound(&self.profile()?, c)?,
            BoundName::Sharpest => sharpest_bound(&self.profile()?, c)?,
            BoundName::Type2 => type2_bound(&self.profile()?, c)?,
            BoundName::Trivial => trivial_bound(&self.profile()?, c)?,
            BoundName::IndepEntry => {
                let a = match (&self.variance, &self.model) {
                    (Some(a), _) => a,
                    (None, Some(ModelSpec::Nonhomogeneous { variance })) => variance,
                    _ => return Err(invalid("indep_entry needs a variance tensor or a nonhomogeneous model")),
                };
                indep_entry_bound(a, p, c, cfg)?
            }
            BoundName::Hypergraph => match (self.hypergraph(), &self.delta) {
                (Some(h), _) => hypergraph_bound_for(h, c)?,
                (None, Some(delta)) => hypergraph_bound(delta, self.need_d("hypergraph with delta")?, c)?,
                _ => return Err(invalid("hypergraph needs a hypergraph, a censored_pca model, or delta with d")),
            },
            BoundName::LambdaThreshold => {
                let h = self
                    .hypergraph()
                    .ok_or_else(|| invalid("lambda_threshold needs a hypergraph or a censored_pca model"))?;
                lambda_threshold(h, c, cfg)?
            }
            BoundName::Matching => match (self.family(), &self.sizes, &self.degrees) {
                (Some(f), _, _) => {
                    let m = matching_series(f)?;
                    matching_bound(&m.sizes, &m.degrees, f.d(), p, c)?
                }
                (None, Some(s), Some(deg)) => matching_bound(s, deg, self.need_d("matching with sizes")?, p, c)?,
                _ => return Err(invalid("matching needs a family, a matching model, or sizes and degrees with d")),
            },
            BoundName::NckHolder => match (self.family(), &self.degrees, &self.series) {
                (Some(f), _, _) => {
                    let m = matching_series(f)?;
                    nck_holder_matching(&m.degrees, f.d(), p, c)?
                }
                (None, Some(deg), _) => nck_holder_matching(deg, self.need_d("nck_holder with degrees")?, p, c)?,
                (None, None, Some(s)) => nck_holder_series(s, p, c, cfg)?,
                _ => return Err(invalid("nck_holder needs a family, degrees with d, or a matrix series")),
            },
        };
        Ok(report)
    }
}

pub fn bound(cfg: &Loaded, name: Option<BoundName>, format: Format) -> Result<Outcome, CliError> {
    let input: BoundInput = cfg.parse()?;
    let name = name
        .or(input.name)
        .ok_or_else(|| invalid("no bound selected; pass --name or set name in the config"))?;
    let report = input.evaluate(name)?;
    let inputs = serde_json::to_string(&report.inputs).map_err(|e| CliError::Lib(e.into()))?;
    let text = match format {
        Format::Json => to_json(&report)?,
        Format::Csv => csv_lines(
            &["name", "value", "constant_used"],
            &[vec![
                name.as_str().into(),
                format_float(report.value),
                format_float(report.constant_used),
            ]],
        ),
        Format::Table => key_values(&[
            ("name", name.as_str().into()),
            ("value", format_float(report.value)),
            ("constant_used", format_float(report.constant_used)),
            ("inputs", inputs),
        ]),
    };
    Ok(Outcome { text, passed: true })
}

fn render(res: &ExperimentResult, format: Format) -> Result<Outcome, CliError> {
    let text = match format {
        Format::Csv => res.to_csv()?,
        Format::Json => {
            let mut s = res.to_json()?;
            s.push('\n');
            s
        }
        Format::Table => {
            let mut s = res.to_table();
            for c in res.failures() {
                s.push_str(&format!(
                    "FAILED {}: measured {} threshold {} ({})\n",
                    c.name,
                    format_float(c.measured),
                    format_float(c.threshold),
                    c.detail
                ));
            }
            s
        }
    };
    Ok(Outcome {
        text,
        passed: res.passed(),
    })
}

#[derive(Clone, Copy, Debug)]
pub enum Experiment {
    Mc,
    Sweep,
    PcaDetect,
    CoveringProbe,
}

pub fn experiment(cfg: &Loaded, which: Experiment, format: Format) -> Result<Outcome, CliError> {
    let ec: ExperimentConfig = cfg.parse()?;
    let res = match which {
        Experiment::Mc => mc_expected_norm(&ec)?,
        Experiment::Sweep => bound_ratio_sweep(&ec)?,
        Experiment::PcaDetect => pca_detection(&ec)?,
        Experiment::CoveringProbe => covering_probe(&ec)?,
    };
    render(&res, format)
}

pub fn checks(cfg: &Loaded, format: Format) -> Result<Outcome, CliError> {
    let cc: ChecksConfig = cfg.parse()?;
    render(&run_checks(&cc)?, format)
}

/// Where `--seed` lands in each subcommand's config.
pub fn seed_keys(cmd: &crate::Command) -> &'static [&'static str] {
    use crate::Command::*;
    match cmd {
        Norm | Variance | Bound { .. } => &["solver.seed"],
        Mc | Sweep | PcaDetect | CoveringProbe => &["master_seed"],
        Checks => &["geometry.seed", "identities.seed"],
    }
}
