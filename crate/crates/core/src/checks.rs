//! Named property checks: Monte Carlo geometry of `ℓ_p` balls and the exact
//! identities relating symmetric embeddings, symmetric norms and variance
//! parameters.
//!
//! Every row of a check result is one case; `measured` is compared with
//! `threshold` and the row records whether it passed. Inequalities that hold
//! up to an unspecified constant use the slack `K_r = r! r^r`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use itertools::Itertools;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure, Result};
use crate::experiments::{format_float, mean_stderr, Cell, Check, ExperimentResult};
use crate::lp::{convexity_gap, half_ball_indicator, lp_norm, sample_ball, sample_sphere, PExponent};
use crate::norm::{grid_oracle, injective_norm, spectral_exact, symmetric_injective_norm, SolverConfig};
use crate::seed::{derive_seed, stream_rng};
use crate::tensor::{frobenius, has_repeated_index, star, sym_embed, symmetrize, Tensor, TensorSeries, MAX_ENTRIES};
use crate::variance::{second_moment, sigma_q_direct, sigma_q_sup, variance_profile, SparseSeries};

const COLUMNS: [&str; 6] = ["check", "case", "measured", "threshold", "aux", "passed"];

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `r! r^r`.
pub fn slack_constant(r: usize) -> f64 {
    factorial(r) * (r as f64).powi(r as i32)
}

pub fn gaussian_tensor<R: Rng + ?Sized>(r: usize, d: usize, rng: &mut R) -> Result<Tensor> {
    Tensor::from_fn(r, d, |_| rng.sample(StandardNormal))
}

pub fn random_symmetric<R: Rng + ?Sized>(r: usize, d: usize, rng: &mut R) -> Result<Tensor> {
    Ok(symmetrize(&gaussian_tensor(r, d, rng)?))
}

pub fn random_diagonal_free<R: Rng + ?Sized>(r: usize, d: usize, rng: &mut R) -> Result<Tensor> {
    let s = random_symmetric(r, d, rng)?;
    Tensor::from_fn(r, d, |idx| if has_repeated_index(idx) { 0.0 } else { s.get(idx) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentCase {
    pub d: usize,
    pub r: usize,
    pub p: PExponent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    /// Cases for the moment, contraction and distance checks.
    pub moment_cases: Vec<MomentCase>,
    pub samples: usize,
    pub contraction_samples: usize,
    pub distance_t: Vec<f64>,
    pub distance_terms: usize,
    pub half_ball_dim: usize,
    pub half_ball_p: Vec<PExponent>,
    pub half_ball_t: Vec<f64>,
    pub half_ball_samples: usize,
    pub convexity_p: Vec<PExponent>,
    pub convexity_dim: usize,
    pub pairs: usize,
    pub seed: u64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let p = |v: f64| PExponent::new(v).expect("valid exponent");
        GeometryConfig {
            moment_cases: vec![
                MomentCase { d: 8, r: 2, p: p(2.0) },
                MomentCase { d: 8, r: 2, p: p(4.0) },
                MomentCase { d: 16, r: 3, p: p(2.0) },
            ],
            samples: 100_000,
            contraction_samples: 20_000,
            distance_t: vec![0.5, 1.0, 2.0],
            distance_terms: 3,
            half_ball_dim: 8,
            half_ball_p: vec![p(2.0), p(4.0), p(8.0)],
            half_ball_t: vec![0.5, 1.0, 2.0],
            half_ball_samples: 20_000,
            convexity_p: vec![p(2.0), p(2.5), p(4.0), p(8.0)],
            convexity_dim: 8,
            pairs: 10_000,
            seed: 0,
        }
    }
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.samples >= 2 && self.contraction_samples >= 2 && self.half_ball_samples >= 2 && self.pairs >= 1,
            "sample counts must be at least 2"
        );
        for c in &self.moment_cases {
            ensure!(c.d >= 1 && c.r >= 1 && c.p.is_finite(), "moment cases need d, r >= 1 and finite p");
        }
        ensure!(
            self.half_ball_p.iter().chain(&self.convexity_p).all(|p| p.is_finite()),
            "ball sampling needs finite exponents"
        );
        ensure!(
            self.distance_t.iter().chain(&self.half_ball_t).all(|t| *t > 0.0),
            "radii must be positive"
        );
        ensure!(self.distance_terms >= 1, "distance_terms must be at least 1");
        Ok(())
    }
}

struct Row {
    check: &'static str,
    case: String,
    measured: f64,
    threshold: f64,
    aux: f64,
    passed: bool,
}

impl Row {
    fn at_most(check: &'static str, case: String, measured: f64, threshold: f64, aux: f64) -> Self {
        Row {
            check,
            case,
            measured,
            threshold,
            aux,
            passed: measured <= threshold,
        }
    }
}

fn finish(experiment: &str, rows: Vec<Row>, summary: serde_json::Value) -> ExperimentResult {
    let mut res = ExperimentResult::new(experiment, rows.iter().map(|r| r.measured).collect(), &COLUMNS);
    // One summary check per property, carrying its worst case.
    let names: Vec<&str> = rows.iter().map(|r| r.check).unique().collect();
    for name in names {
        let of: Vec<&Row> = rows.iter().filter(|r| r.check == name).collect();
        let failed = of.iter().filter(|r| !r.passed).count();
        let worst = of
            .iter()
            .max_by(|a, b| (a.measured - a.threshold).total_cmp(&(b.measured - b.threshold)))
            .expect("nonempty group");
        res.checks.push(Check {
            name: name.to_string(),
            passed: failed == 0,
            measured: worst.measured,
            threshold: worst.threshold,
            detail: format!("{} of {} cases passed; worst case {}", of.len() - failed, of.len(), worst.case),
        });
    }
    res.rows = rows
        .into_iter()
        .map(|r| {
            vec![
                Cell::from(r.check),
                Cell::from(r.case),
                r.measured.into(),
                r.threshold.into(),
                r.aux.into(),
                r.passed.into(),
            ]
        })
        .collect();
    res.summary = summary;
    res
}

fn moment_rows(cfg: &GeometryConfig) -> Vec<Row> {
    cfg.moment_cases
        .par_iter()
        .enumerate()
        .map(|(k, c)| {
            let mut rng = stream_rng(cfg.seed, k as u64);
            let vals: Vec<f64> = (0..cfg.samples)
                .map(|_| {
                    let b = sample_ball(c.d, c.p, &mut rng);
                    b[..c.r.min(c.d)].iter().map(|x| x * x).product()
                })
                .collect();
            let (mean, se) = mean_stderr(&vals);
            let bound = crate::lp::ball_moment_bound(c.d, c.r, c.p);
            Row::at_most(
                "ball_moment",
                format!("d={} r={} p={}", c.d, c.r, c.p),
                mean,
                bound + 3.0 * se,
                se,
            )
        })
        .collect()
}

fn contraction_rows(cfg: &GeometryConfig) -> Result<Vec<Row>> {
    cfg.moment_cases
        .par_iter()
        .enumerate()
        .map(|(k, c)| {
            let mut rng = stream_rng(derive_seed(cfg.seed, 1), k as u64);
            let t = random_diagonal_free(c.r, c.d, &mut rng)?;
            let f2 = frobenius(&t).powi(2);
            let vals: Vec<f64> = (0..cfg.contraction_samples)
                .map(|_| t.form(&sample_ball(c.d, c.p, &mut rng)).powi(2))
                .collect();
            let (mean, se) = mean_stderr(&vals);
            let bound = slack_constant(c.r) * crate::lp::ball_moment_bound(c.d, c.r, c.p) * f2;
            Ok(Row::at_most(
                "form_second_moment",
                format!("d={} r={} p={}", c.d, c.r, c.p),
                mean,
                bound + 3.0 * se,
                se,
            ))
        })
        .collect()
}

/// Frobenius upper bounds on every `σ_q` of `series`.
pub fn sigma_surrogates(series: &SparseSeries, p: PExponent) -> Result<Vec<f64>> {
    let (r, d) = (series.order(), series.dim() as f64);
    let lift = (0.5 - p.recip()).max(0.0);
    (0..=r)
        .map(|q| {
            let m = second_moment(series, q, MAX_ENTRIES)?;
            let order = 2 * (r - q);
            Ok((d.powf(order as f64 * lift) * frobenius(&m)).sqrt())
        })
        .collect()
}

fn distance_rows(cfg: &GeometryConfig) -> Result<Vec<Row>> {
    let nested: Vec<Vec<Row>> = cfg
        .moment_cases
        .par_iter()
        .enumerate()
        .map(|(k, c)| {
            let mut rng = stream_rng(derive_seed(cfg.seed, 2), k as u64);
            let terms = (0..cfg.distance_terms)
                .map(|_| random_diagonal_free(c.r, c.d, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let series = SparseSeries::from_series(&TensorSeries::new(terms)?);
            let sigma = sigma_surrogates(&series, c.p)?;
            let x = sample_sphere(c.d, c.p, &mut rng);
            let fx = series.features(&x);
            let df = c.d as f64;
            let mut rows = Vec::new();
            for &t in &cfg.distance_t {
                let vals: Vec<f64> = (0..cfg.contraction_samples)
                    .map(|_| {
                        let b = sample_ball(c.d, c.p, &mut rng);
                        let y: Vec<f64> = x.iter().zip(&b).map(|(xi, bi)| xi + t * bi).collect();
                        let fy = series.features(&y);
                        lp_norm(
                            &fx.iter().zip(&fy).map(|(a, b)| a - b).collect::<Vec<_>>(),
                            PExponent::TWO,
                        )
                    })
                    .collect();
                let (mean, se) = mean_stderr(&vals);
                let scale = (1..=c.r)
                    .map(|q| df.powf(-(q as f64) * c.p.recip()) * t.powi(q as i32) * sigma[q])
                    .fold(0.0, f64::max);
                rows.push(Row::at_most(
                    "expected_distance",
                    format!("d={} r={} p={} t={}", c.d, c.r, c.p, format_float(t)),
                    mean,
                    slack_constant(c.r) * scale + 3.0 * se,
                    se,
                ));
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

fn half_ball_rows(cfg: &GeometryConfig) -> Vec<Row> {
    let d = cfg.half_ball_dim;
    let cases: Vec<(PExponent, f64)> = cfg
        .half_ball_p
        .iter()
        .flat_map(|&p| cfg.half_ball_t.iter().map(move |&t| (p, t)))
        .collect();
    cases
        .par_iter()
        .enumerate()
        .map(|(k, &(p, t))| {
            let mut rng = stream_rng(derive_seed(cfg.seed, 3), k as u64);
            // A point of the unit sphere with all coordinates equal.
            let x = vec![(d as f64).powf(-p.recip()); d];
            let n = cfg.half_ball_samples;
            let hits = (0..n)
                .filter(|_| half_ball_indicator(&x, t, &sample_ball(d, p, &mut rng), p))
                .count();
            let prob = hits as f64 / n as f64;
            let se = (prob * (1.0 - prob) / n as f64).sqrt();
            Row {
                check: "half_ball",
                case: format!("d={d} p={p} t={} x=flat", format_float(t)),
                measured: prob,
                threshold: 0.5 - 3.0 * se,
                aux: se,
                passed: prob >= 0.5 - 3.0 * se,
            }
        })
        .collect()
}

fn convexity_rows(cfg: &GeometryConfig) -> Result<Vec<Row>> {
    let d = cfg.convexity_dim;
    let nested: Vec<Vec<Row>> = cfg
        .convexity_p
        .par_iter()
        .enumerate()
        .map(|(k, &p)| {
            let mut rng = stream_rng(derive_seed(cfg.seed, 4), k as u64);
            let mut min_gap = f64::INFINITY;
            let mut max_abs = 0.0f64;
            for _ in 0..cfg.pairs {
                let x = sample_ball(d, p, &mut rng);
                let y = sample_ball(d, p, &mut rng);
                let g = convexity_gap(&x, &y, p)?;
                min_gap = min_gap.min(g);
                max_abs = max_abs.max(g.abs());
            }
            let case = format!("d={d} p={p} pairs={}", cfg.pairs);
            let mut rows = vec![Row {
                check: "convexity_gap",
                case: case.clone(),
                measured: min_gap,
                threshold: -1e-12,
                aux: max_abs,
                passed: min_gap >= -1e-12,
            }];
            if p == PExponent::TWO {
                rows.push(Row::at_most("parallelogram", case, max_abs, 1e-12, min_gap));
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

pub fn geometry_checks(cfg: &GeometryConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut rows = moment_rows(cfg);
    rows.extend(contraction_rows(cfg)?);
    rows.extend(distance_rows(cfg)?);
    rows.extend(half_ball_rows(cfg));
    rows.extend(convexity_rows(cfg)?);
    Ok(finish("geometry_checks", rows, json!({ "seed": cfg.seed, "samples": cfg.samples })))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentityConfig {
    pub dims: Vec<usize>,
    pub orders: Vec<usize>,
    pub p_list: Vec<PExponent>,
    /// Random instances per `(d, r, p)`.
    pub instances: usize,
    /// Random series for the direct / supremum comparison.
    pub series_count: usize,
    pub series_p: Vec<PExponent>,
    pub max_terms: usize,
    pub tolerance: f64,
    pub grid_resolution: usize,
    pub solver: SolverConfig,
    pub seed: u64,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        let p = |v: f64| PExponent::new(v).expect("valid exponent");
        IdentityConfig {
            dims: vec![2, 3],
            orders: vec![2, 3],
            p_list: vec![p(2.0), p(3.0), p(4.0)],
            instances: 2,
            series_count: 30,
            series_p: vec![p(2.0), p(4.0)],
            max_terms: 4,
            tolerance: 0.02,
            grid_resolution: 24,
            solver: SolverConfig::default(),
            seed: 0,
        }
    }
}

impl IdentityConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.dims.iter().all(|&d| (1..=3).contains(&d)),
            "identity checks use dimensions 1..=3"
        );
        ensure!(
            self.orders.iter().all(|&r| (2..=3).contains(&r)),
            "identity checks use orders 2 and 3"
        );
        ensure!(
            self.p_list.iter().chain(&self.series_p).all(|p| p.is_finite()),
            "identity checks need finite exponents"
        );
        ensure!(self.max_terms >= 1, "max_terms must be at least 1");
        ensure!(self.tolerance > 0.0, "tolerance must be positive");
        ensure!(self.grid_resolution >= 2, "grid_resolution must be at least 2");
        self.solver.validate()
    }

    fn cases(&self) -> Vec<(usize, usize, PExponent, usize)> {
        self.dims
            .iter()
            .flat_map(|&d| {
                self.orders.iter().flat_map(move |&r| {
                    self.p_list
                        .iter()
                        .flat_map(move |&p| (0..self.instances).map(move |i| (d, r, p, i)))
                })
            })
            .collect()
    }

    fn solver_for(&self, stream: u64, k: usize) -> SolverConfig {
        SolverConfig {
            seed: derive_seed(derive_seed(self.seed, stream), k as u64),
            ..self.solver.clone()
        }
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Largest of the alternating estimate and the grid search; both are lower
/// bounds on the norm.
fn cross_checked_norm(t: &Tensor, p: PExponent, cfg: &SolverConfig, resolution: usize) -> Result<f64> {
    let a = injective_norm(t, p, cfg)?.value;
    let g = grid_oracle(t, p, resolution)?.value;
    Ok(a.max(g))
}

/// `||A||_{I_2}` as the square root of the top eigenvalue of `A Aᵀ`.
fn operator_norm(a: &Tensor) -> Result<f64> {
    let at = Tensor::from_fn(2, a.dim(), |i| a.get(&[i[1], i[0]]))?;
    let gram = star(a, &at, 1)?;
    Ok(spectral_exact(&symmetrize(&gram))?.value.sqrt())
}

fn embedding_rows(cfg: &IdentityConfig) -> Result<Vec<Row>> {
    let tol = cfg.tolerance;
    let nested: Vec<Vec<Row>> = cfg
        .cases()
        .par_iter()
        .enumerate()
        .map(|(k, &(d, r, p, i))| {
            let mut rng = stream_rng(derive_seed(cfg.seed, 10), k as u64);
            let t = gaussian_tensor(r, d, &mut rng)?;
            let solver = cfg.solver_for(11, k);
            let base = cross_checked_norm(&t, p, &solver, cfg.grid_resolution)?;
            let s = sym_embed(&t)?;
            let embedded = symmetric_injective_norm(&s, p, &solver)?.value;
            let factor = factorial(r) / (r as f64).powf(r as f64 * p.recip());
            let case = format!("d={d} r={r} p={p} instance={i}");
            let mut rows = vec![Row::at_most(
                "sym_embed_factor",
                case.clone(),
                rel_err(embedded, factor * base),
                tol,
                factor,
            )];
            if r == 2 && p == PExponent::TWO {
                let dil = spectral_exact(&s)?.value;
                let op = operator_norm(&t)?;
                rows.push(Row::at_most("dilation", case, rel_err(dil, op), 1e-8, op));
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

fn sym_variance_rows(cfg: &IdentityConfig) -> Result<Vec<Row>> {
    let tol = cfg.tolerance;
    let cases: Vec<_> = cfg.cases().into_iter().filter(|c| c.0 == cfg.dims[0]).collect();
    let nested: Vec<Vec<Row>> = cases
        .par_iter()
        .enumerate()
        .map(|(k, &(d, r, p, i))| {
            let mut rng = stream_rng(derive_seed(cfg.seed, 20), k as u64);
            let n = 1 + k % cfg.max_terms.min(2);
            let terms = (0..n).map(|_| random_symmetric(r, d, &mut rng)).collect::<Result<Vec<_>>>()?;
            let embedded = terms.iter().map(sym_embed).collect::<Result<Vec<_>>>()?;
            let solver = cfg.solver_for(21, k);
            let base = variance_profile(&SparseSeries::from_series(&TensorSeries::new(terms)?), p, &solver)?;
            let sym = variance_profile(&SparseSeries::from_series(&TensorSeries::new(embedded)?), p, &solver)?;
            let rf = factorial(r);
            Ok((0..=r)
                .map(|q| {
                    Row::at_most(
                        "sym_variance",
                        format!("d={d} r={r} p={p} q={q} instance={i}"),
                        sym.sigma[q] / (rf * base.sigma[q]),
                        1.0 + tol,
                        base.sigma[q],
                    )
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

fn polarization_rows(cfg: &IdentityConfig) -> Result<Vec<Row>> {
    let tol = cfg.tolerance;
    let nested: Vec<Vec<Row>> = cfg
        .cases()
        .par_iter()
        .enumerate()
        .map(|(k, &(d, r, p, i))| {
            let mut rng = stream_rng(derive_seed(cfg.seed, 30), k as u64);
            let t = random_symmetric(r, d, &mut rng)?;
            let solver = cfg.solver_for(31, k);
            let sym = symmetric_injective_norm(&t, p, &solver)?.value;
            let general = cross_checked_norm(&t, p, &solver, cfg.grid_resolution)?;
            let c = (r as f64).powi(r as i32) / factorial(r);
            let case = format!("d={d} r={r} p={p} instance={i}");
            Ok(vec![
                Row::at_most("polarization_lower", case.clone(), sym / general, 1.0 + tol, general),
                Row::at_most("polarization_upper", case, general / (c * sym), 1.0 + tol, c),
            ])
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

fn sup_form_rows(cfg: &IdentityConfig) -> Result<Vec<Row>> {
    let tol = cfg.tolerance;
    let dmax = cfg.dims.iter().copied().max().unwrap_or(3);
    let nested: Vec<Vec<Row>> = (0..cfg.series_count)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream_rng(derive_seed(cfg.seed, 40), j as u64);
            let n = rng.gen_range(1..=cfg.max_terms);
            let d = rng.gen_range(1..=dmax);
            let r = rng.gen_range(1..=3);
            let terms = (0..n).map(|_| random_symmetric(r, d, &mut rng)).collect::<Result<Vec<_>>>()?;
            let series = TensorSeries::new(terms)?;
            let solver = cfg.solver_for(41, j);
            let mut rows = Vec::new();
            for &p in &cfg.series_p {
                for q in 0..=r {
                    let a = sigma_q_direct(&series, q, p, &solver)?;
                    let b = sigma_q_sup(&series, q, p, &solver)?;
                    let case = format!("series={j} n={n} d={d} r={r} p={p} q={q}");
                    if q == r {
                        rows.push(Row::at_most("sigma_top_exact", case, rel_err(a, b), 1e-12, a));
                    } else {
                        rows.push(Row::at_most("sigma_direct_sup", case, rel_err(a, b), tol, a));
                    }
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

pub fn identity_checks(cfg: &IdentityConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut rows = embedding_rows(cfg)?;
    rows.extend(sym_variance_rows(cfg)?);
    rows.extend(polarization_rows(cfg)?);
    rows.extend(sup_form_rows(cfg)?);
    Ok(finish(
        "identity_checks",
        rows,
        json!({ "seed": cfg.seed, "tolerance": cfg.tolerance }),
    ))
}

/// Both suites, as run by the `checks` command.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksConfig {
    pub geometry: GeometryConfig,
    pub identities: IdentityConfig,
}

impl ChecksConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.geometry.seed = seed;
        self.identities.seed = seed;
        self
    }
}

pub fn run_checks(cfg: &ChecksConfig) -> Result<ExperimentResult> {
    let g = geometry_checks(&cfg.geometry)?;
    let i = identity_checks(&cfg.identities)?;
    let mut res = ExperimentResult::new("checks", g.values.iter().chain(&i.values).copied().collect(), &COLUMNS);
    res.rows = g.rows.into_iter().chain(i.rows).collect();
    res.checks = g.checks.into_iter().chain(i.checks).collect();
    res.summary = json!({ "geometry": g.summary, "identities": i.summary });
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_values() {
        assert_eq!(slack_constant(2), 8.0);
        assert_eq!(slack_constant(3), 162.0);
    }

    #[test]
    fn diagonal_free_generator() {
        let mut rng = stream_rng(1, 0);
        let t = random_diagonal_free(3, 3, &mut rng).unwrap();
        assert!(crate::tensor::is_diagonal_free(&t));
        assert!(crate::tensor::is_symmetric(&t, 0.0));
    }

    #[test]
    fn surrogates_dominate_sigma_at_top() {
        let mut rng = stream_rng(2, 0);
        let t = random_symmetric(2, 3, &mut rng).unwrap();
        let s = SparseSeries::from_series(&TensorSeries::new(vec![t.clone()]).unwrap());
        let sur = sigma_surrogates(&s, PExponent::TWO).unwrap();
        assert!((sur[2] - frobenius(&t)).abs() < 1e-12);
    }
}
