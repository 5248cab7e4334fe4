//! Closed-form upper bounds on `E ||sum_k g_k T_k||_{I_p}`.
//!
//! Each bound carries a multiplicative constant `C` (default 1) because the
//! underlying inequalities hold up to constants depending only on `r`.
//! Logarithms are `ln(d + 1)` throughout so that `d = 1` stays finite.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{ensure, Result};
use crate::lp::{lp_norm, PExponent};
use crate::models::{adjacency_tensor, deltas, Hypergraph};
use crate::norm::{best_norm, SolverConfig};
use crate::tensor::{contract, Tensor, TensorSeries};
use crate::variance::{type2, SparseSeries, VarianceProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundName {
    Master,
    Sharpest,
    Type2,
    Trivial,
    IndepEntry,
    Hypergraph,
    LambdaThreshold,
    Matching,
    NckHolder,
}

impl BoundName {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundName::Master => "master",
            BoundName::Sharpest => "sharpest",
            BoundName::Type2 => "type2",
            BoundName::Trivial => "trivial",
            BoundName::IndepEntry => "indep_entry",
            BoundName::Hypergraph => "hypergraph",
            BoundName::LambdaThreshold => "lambda_threshold",
            BoundName::Matching => "matching",
            BoundName::NckHolder => "nck_holder",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: BoundName,
    pub value: f64,
    pub constant_used: f64,
    /// The quantities the bound was evaluated from.
    pub inputs: Value,
}

pub fn log_factor(d: usize) -> f64 {
    ((d + 1) as f64).ln()
}

fn check_constant(c: f64) -> Result<()> {
    ensure!(c > 0.0 && c.is_finite(), "the constant must be positive, got {c}");
    Ok(())
}

fn check_profile(profile: &VarianceProfile) -> Result<()> {
    ensure!(
        profile.sigma.len() == profile.order + 1,
        "profile has {} sigmas for order {}",
        profile.sigma.len(),
        profile.order
    );
    ensure!(
        profile.sigma.iter().all(|s| *s >= 0.0 && s.is_finite()),
        "sigmas must be finite and nonnegative"
    );
    Ok(())
}

/// `max_{2<=q<=r} σ_q^{1/q} σ_0^{(q-1)/q}`, zero for `r < 2`.
fn mixed_term(sigma: &[f64]) -> f64 {
    let r = sigma.len() - 1;
    (2..=r)
        .map(|q| {
            let qf = q as f64;
            sigma[q].powf(1.0 / qf) * sigma[0].powf((qf - 1.0) / qf)
        })
        .fold(0.0, f64::max)
}

fn master_core(profile: &VarianceProfile) -> f64 {
    let d = profile.dim;
    let pre = (d as f64).powf(0.5 - profile.p.recip());
    pre * (log_factor(d) * profile.sigma[1.min(profile.order)] + mixed_term(&profile.sigma))
}

fn profile_inputs(profile: &VarianceProfile) -> Value {
    json!({
        "d": profile.dim,
        "r": profile.order,
        "p": profile.p,
        "sigma": profile.sigma,
        "sigma_type2": profile.sigma_type2,
    })
}

/// `C d^{1/2-1/p} (ln(d+1) σ_1 + max_{2<=q<=r} σ_q^{1/q} σ_0^{(q-1)/q})`.
pub fn master_bound(profile: &VarianceProfile, c: f64) -> Result<BoundReport> {
    check_constant(c)?;
    check_profile(profile)?;
    Ok(BoundReport {
        name: BoundName::Master,
        value: c * master_core(profile),
        constant_used: c,
        inputs: profile_inputs(profile),
    })
}

/// The master bound with an extra `sqrt(p)`.
pub fn sharpest_bound(profile: &VarianceProfile, c: f64) -> Result<BoundReport> {
    check_constant(c)?;
    check_profile(profile)?;
    Ok(BoundReport {
        name: BoundName::Sharpest,
        value: c * profile.p.value().sqrt() * master_core(profile),
        constant_used: c,
        inputs: profile_inputs(profile),
    })
}

/// `C sqrt(p) ln(d+1) d^{1/2 - min(1/p, 1/(2r))} σ_T2`.
pub fn type2_bound(profile: &VarianceProfile, c: f64) -> Result<BoundReport> {
    check_constant(c)?;
    check_profile(profile)?;
    let (d, r) = (profile.dim as f64, profile.order.max(1) as f64);
    let expo = 0.5 - profile.p.recip().min(1.0 / (2.0 * r));
    Ok(BoundReport {
        name: BoundName::Type2,
        value: c * profile.p.value().sqrt() * log_factor(profile.dim) * d.powf(expo) * profile.sigma_type2,
        constant_used: c,
        inputs: profile_inputs(profile),
    })
}

/// `C sqrt(d) σ_0`.
pub fn trivial_bound(profile: &VarianceProfile, c: f64) -> Result<BoundReport> {
    check_constant(c)?;
    check_profile(profile)?;
    Ok(BoundReport {
        name: BoundName::Trivial,
        value: c * (profile.dim as f64).sqrt() * profile.sigma[0],
        constant_used: c,
        inputs: profile_inputs(profile),
    })
}

/// Bound for a symmetric tensor with independent entries of variance `A`:
/// `C d^{1/2-1/p} (ln(d+1) ||A1||^{1/2} + max_q ||A1^{⊗q}||^{1/(2q)} ||A||^{(q-1)/(2q)})`
/// with all norms in `I_{p/2}`. Needs `p >= 2`.
pub fn indep_entry_bound(variance: &Tensor, p: PExponent, c: f64, cfg: &SolverConfig) -> Result<BoundReport> {
    check_constant(c)?;
    ensure!(p.value() >= 2.0 && p.is_finite(), "the independent-entry bound needs 2 <= p < inf");
    ensure!(
        variance.entries().iter().all(|&a| a >= 0.0),
        "variances must be nonnegative"
    );
    let (r, d) = (variance.order(), variance.dim());
    ensure!(r >= 1, "variance tensor must have order at least 1");
    let half = PExponent::new(p.value() / 2.0)?;
    let ones = vec![1.0; d];
    // norms[q] = ||A 1^{⊗q}||_{I_{p/2}} for q = 0..=r.
    let norms = (0..=r)
        .map(|q| Ok(best_norm(&contract(variance, &ones, q)?, half, cfg)?.value))
        .collect::<Result<Vec<f64>>>()?;
    let mixed = (2..=r)
        .map(|q| {
            let qf = q as f64;
            norms[q].powf(1.0 / (2.0 * qf)) * norms[0].powf((qf - 1.0) / (2.0 * qf))
        })
        .fold(0.0, f64::max);
    let pre = (d as f64).powf(0.5 - p.recip());
    Ok(BoundReport {
        name: BoundName::IndepEntry,
        value: c * pre * (log_factor(d) * norms[1].sqrt() + mixed),
        constant_used: c,
        inputs: json!({ "d": d, "r": r, "p": p, "contracted_norms": norms }),
    })
}

/// `C (ln(d+1) Δ_{r-1}^{1/2} + max_{2<=q<=r} Δ_{r-q}^{1/(2q)})` from
/// `Δ_0, .., Δ_r`.
pub fn hypergraph_bound(delta: &[f64], d: usize, c: f64) -> Result<BoundReport> {
    check_constant(c)?;
    ensure!(delta.len() >= 2, "need Δ_0, .., Δ_r with r >= 1");
    ensure!(delta.iter().all(|x| *x >= 0.0), "Δ values must be nonnegative");
    let r = delta.len() - 1;
    let mixed = (2..=r)
        .map(|q| delta[r - q].powf(1.0 / (2.0 * q as f64)))
        .fold(0.0, f64::max);
    Ok(BoundReport {
        name: BoundName::Hypergraph,
        value: c * (log_factor(d) * delta[r - 1].sqrt() + mixed),
        constant_used: c,
        inputs: json!({ "d": d, "r": r, "delta": delta }),
    })
}

pub fn hypergraph_bound_for(h: &Hypergraph, c: f64) -> Result<BoundReport> {
    let delta: Vec<f64> = deltas(h).into_iter().map(|x| x as f64).collect();
    hypergraph_bound(&delta, h.d(), c)
}

/// Detection threshold `C · hypergraph_bound / ||A||_{I_2}` for censored PCA
/// on `h`.
pub fn lambda_threshold(h: &Hypergraph, c: f64, cfg: &SolverConfig) -> Result<BoundReport> {
    check_constant(c)?;
    ensure!(!h.edges().is_empty(), "the threshold needs at least one edge");
    let base = hypergraph_bound_for(h, 1.0)?;
    let a = adjacency_tensor(h)?;
    let norm = best_norm(&a, PExponent::TWO, cfg)?;
    Ok(BoundReport {
        name: BoundName::LambdaThreshold,
        value: c * base.value / norm.value,
        constant_used: c,
        inputs: json!({
            "d": h.d(),
            "r": h.r(),
            "hypergraph_bound": base.value,
            "adjacency_norm": norm.value,
            "adjacency_norm_exact": norm.is_exact(),
        }),
    })
}

/// Matching-series bound for `p >= 4`:
/// `C d^{1/2-1/p} ln(d+1) ||μ||_1^{1/4} ||Δ||_∞^{1/p} ||μ||_s^{1/2-1/p}`
/// with `s = (2p-4)/(p-4)`, read as `∞` at `p = 4`.
pub fn matching_bound(sizes: &[f64], degrees: &[f64], d: usize, p: PExponent, c: f64) -> Result<BoundReport> {
    check_constant(c)?;
    ensure!(p.value() >= 4.0 && p.is_finite(), "the matching bound needs 4 <= p < inf");
    ensure!(!sizes.is_empty(), "need at least one matching");
    let pv = p.value();
    let s = if pv == 4.0 {
        PExponent::INFINITY
    } else {
        PExponent::new((2.0 * pv - 4.0) / (pv - 4.0))?
    };
    let mu1 = lp_norm(sizes, PExponent::ONE);
    let mus = lp_norm(sizes, s);
    let dmax = lp_norm(degrees, PExponent::INFINITY);
    let value = c
        * (d as f64).powf(0.5 - 1.0 / pv)
        * log_factor(d)
        * mu1.powf(0.25)
        * dmax.powf(1.0 / pv)
        * mus.powf(0.5 - 1.0 / pv);
    Ok(BoundReport {
        name: BoundName::Matching,
        value,
        constant_used: c,
        inputs: json!({ "d": d, "p": p, "mu_l1": mu1, "mu_ls": mus, "s": s, "max_degree": dmax }),
    })
}

/// Non-commutative Khintchine with Hölder, matching form:
/// `C sqrt(ln(d+1)) d^{1-2/p} ||Δ||_∞^{1/2}`.
pub fn nck_holder_matching(degrees: &[f64], d: usize, p: PExponent, c: f64) -> Result<BoundReport> {
    check_constant(c)?;
    ensure!(p.value() >= 2.0 && p.is_finite(), "this bound needs 2 <= p < inf");
    let dmax = lp_norm(degrees, PExponent::INFINITY);
    Ok(BoundReport {
        name: BoundName::NckHolder,
        value: c * log_factor(d).sqrt() * (d as f64).powf(1.0 - 2.0 / p.value()) * dmax.sqrt(),
        constant_used: c,
        inputs: json!({ "d": d, "p": p, "max_degree": dmax }),
    })
}

/// General matrix form: `C sqrt(ln(d+1)) d^{1-2/p} (sum_k ||A_k||_{I_2}^2)^{1/2}`.
pub fn nck_holder_series(series: &TensorSeries, p: PExponent, c: f64, cfg: &SolverConfig) -> Result<BoundReport> {
    check_constant(c)?;
    ensure!(p.value() >= 2.0 && p.is_finite(), "this bound needs 2 <= p < inf");
    ensure!(series.order() == 2, "this bound is for matrix series");
    let d = series.dim();
    let (s, exact) = type2(&SparseSeries::from_series(series), PExponent::TWO, cfg)?;
    Ok(BoundReport {
        name: BoundName::NckHolder,
        value: c * log_factor(d).sqrt() * (d as f64).powf(1.0 - 2.0 / p.value()) * s,
        constant_used: c,
        inputs: json!({ "d": d, "p": p, "spectral_type2": s, "exact": exact }),
    })
}

/// `master`, `sharpest`, `type2` and `trivial` at constant `c`.
pub fn profile_bounds(profile: &VarianceProfile, c: f64) -> Result<Vec<BoundReport>> {
    Ok(vec![
        master_bound(profile, c)?,
        sharpest_bound(profile, c)?,
        type2_bound(profile, c)?,
        trivial_bound(profile, c)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variance::MethodTag;

    fn unit_profile(d: usize, r: usize, p: f64) -> VarianceProfile {
        VarianceProfile {
            p: PExponent::new(p).unwrap(),
            order: r,
            dim: d,
            sigma: vec![1.0; r + 1],
            sigma_type2: 1.0,
            methods: vec![MethodTag::Exact; r + 1],
            type2_method: MethodTag::Exact,
        }
    }

    #[test]
    fn master_at_unit_sigmas() {
        let b = master_bound(&unit_profile(2, 2, 2.0), 1.0).unwrap();
        assert!((b.value - (3f64.ln() + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn type2_at_d_one() {
        let b = type2_bound(&unit_profile(1, 3, 3.0), 2.0).unwrap();
        assert!((b.value - 2.0 * 3f64.sqrt() * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn constant_must_be_positive() {
        assert!(master_bound(&unit_profile(2, 2, 2.0), 0.0).is_err());
        assert!(hypergraph_bound(&[1.0, 1.0, 1.0], 2, -1.0).is_err());
    }

    #[test]
    fn matching_bound_needs_p_four() {
        assert!(matching_bound(&[1.0], &[1.0, 1.0], 2, PExponent::new(3.0).unwrap(), 1.0).is_err());
        assert!(matching_bound(&[1.0], &[1.0, 1.0], 2, PExponent::new(4.0).unwrap(), 1.0).is_ok());
    }

    #[test]
    fn indep_entry_needs_p_two() {
        let a = Tensor::diag(&[1.0, 1.0]).unwrap();
        assert!(indep_entry_bound(&a, PExponent::new(1.5).unwrap(), 1.0, &SolverConfig::default()).is_err());
    }
}
