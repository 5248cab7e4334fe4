//! Estimators and exact oracles for the injective norm
//! `||T||_{I_p} = sup { T[x_1, .., x_r] : ||x_k||_p <= 1 }`.
//!
//! The estimators return certified lower bounds: the reported value is the
//! multilinear form evaluated at the returned witnesses.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::lp::{basis, linear_maximizer, lp_norm, sample_ball, PExponent};
use crate::seed::stream_rng;
use crate::tensor::{self, contract, Tensor};

/// Settings of the multi-start ascent solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Random starts. `None` means `8 r ceil(sqrt d)`.
    pub restarts: Option<usize>,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            restarts: None,
            max_iters: 500,
            rel_tol: 1e-10,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(seed: u64) -> Self {
        SolverConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn restarts_for(&self, order: usize, dim: usize) -> usize {
        self.restarts
            .unwrap_or_else(|| 8 * order.max(1) * (dim as f64).sqrt().ceil() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.restarts != Some(0), "restarts must be at least 1");
        ensure!(self.max_iters >= 1, "max_iters must be at least 1");
        ensure!(
            self.rel_tol > 0.0 && self.rel_tol.is_finite(),
            "rel_tol must be positive"
        );
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Alternating,
    PowerSymmetric,
    GridOracle,
    SpectralExact,
    L1Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    /// One vector per slot, or a single vector for the symmetric solver.
    pub witnesses: Vec<Vec<f64>>,
    pub restarts_used: usize,
    pub iterations: usize,
    pub converged: bool,
    pub method: Method,
}

impl NormEstimate {
    /// The form re-evaluated at the witnesses.
    pub fn recompute(&self, t: &Tensor) -> Result<f64> {
        if t.order() == 0 {
            return Ok(t.entries()[0].abs());
        }
        if self.method == Method::PowerSymmetric {
            return Ok(t.form(&self.witnesses[0]).abs());
        }
        let v: Vec<&[f64]> = self.witnesses.iter().map(|w| w.as_slice()).collect();
        t.multilinear(&v)
    }

    /// Whether the value is the norm itself rather than a lower bound.
    pub fn is_exact(&self) -> bool {
        matches!(self.method, Method::SpectralExact | Method::L1Exact)
            || (self.method == Method::Alternating && self.witnesses.len() <= 1)
    }
}

/// One run of block-coordinate ascent from a fixed start.
#[derive(Clone, Debug)]
pub struct AscentRun {
    pub witnesses: Vec<Vec<f64>>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every single-slot update.
    pub trace: Vec<f64>,
}

/// Cycles through the slots, replacing each witness by the `ℓ_p` maximizer
/// of the linear functional left after contracting the others.
pub fn alternating_ascent(
    t: &Tensor,
    p: PExponent,
    start: Vec<Vec<f64>>,
    max_iters: usize,
    rel_tol: f64,
) -> AscentRun {
    let r = t.order();
    let mut x = start;
    let views: Vec<&[f64]> = x.iter().map(|v| v.as_slice()).collect();
    let mut value = t.multilinear(&views).unwrap_or(0.0);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut last_gain: Option<f64> = None;
    let mut anchor: Option<Vec<Vec<f64>>> = None;
    let mut plain = 0;
    while iterations < max_iters {
        iterations += 1;
        let prev = value;
        for j in 0..r {
            let c = t.contract_except(&x, j);
            let (xj, v) = linear_maximizer(&c, p);
            x[j] = xj;
            value = v;
            trace.push(v);
        }
        let gain = (value - prev).abs();
        // The geometric estimate is only meaningful across plain sweeps.
        let settled = last_gain.is_some_and(|g| remaining_gain(gain, g) <= rel_tol * value.abs());
        if value == 0.0 || settled {
            converged = true;
            break;
        }
        last_gain = Some(gain);
        // Extrapolate across two consecutive plain sweeps, and only after a
        // few of them so that fast-decaying components have died out; they
        // would otherwise be amplified by the jump.
        plain += 1;
        let jump = match anchor.take() {
            Some(a) if r > 1 && plain >= PLAIN_SWEEPS => extrapolate(t, p, &a, &x, value),
            _ => None,
        };
        match jump {
            Some((y, v)) => {
                x = y;
                value = v;
                trace.push(v);
                plain = 0;
                last_gain = None;
            }
            None => anchor = Some(x.clone()),
        }
    }
    AscentRun {
        witnesses: x,
        value,
        iterations,
        converged,
        trace,
    }
}

const PLAIN_SWEEPS: usize = 8;

/// Searches along the direction of the last sweep with doubling steps. The
/// last slot is re-solved exactly at every trial point, so only the other
/// slots are extrapolated.
fn extrapolate(
    t: &Tensor,
    p: PExponent,
    before: &[Vec<f64>],
    after: &[Vec<f64>],
    value: f64,
) -> Option<(Vec<Vec<f64>>, f64)> {
    let r = after.len();
    let mut best: Option<(Vec<Vec<f64>>, f64)> = None;
    let mut theta = 1.0;
    for _ in 0..40 {
        let mut cand: Vec<Vec<f64>> = before
            .iter()
            .zip(after)
            .take(r - 1)
            .map(|(b, a)| {
                let mut y: Vec<f64> = a.iter().zip(b).map(|(ai, bi)| ai + theta * (ai - bi)).collect();
                let n = lp_norm(&y, p);
                if n > 0.0 {
                    y.iter_mut().for_each(|v| *v /= n);
                }
                y
            })
            .collect();
        cand.push(after[r - 1].clone());
        let (last, f) = linear_maximizer(&t.contract_except(&cand, r - 1), p);
        cand[r - 1] = last;
        if f > best.as_ref().map_or(value, |b| b.1) {
            best = Some((cand, f));
            theta *= 2.0;
        } else {
            break;
        }
    }
    best
}

/// Gain still to come if successive gains shrink geometrically.
fn remaining_gain(gain: f64, last_gain: f64) -> f64 {
    let rho = gain / last_gain;
    if rho.is_finite() && rho < 1.0 {
        gain / (1.0 - rho)
    } else {
        gain
    }
}

fn largest_entry(t: &Tensor) -> Vec<usize> {
    let (k, _) = t
        .entries()
        .iter()
        .enumerate()
        .fold((0, -1.0), |(k, m), (i, x)| if x.abs() > m { (i, x.abs()) } else { (k, m) });
    t.multi_index(k)
}

/// Multi-start alternating maximization with default starts only.
pub fn injective_norm(t: &Tensor, p: PExponent, cfg: &SolverConfig) -> Result<NormEstimate> {
    injective_norm_with_starts(t, p, cfg, &[])
}

/// As [`injective_norm`], also running from each of `extra` starts.
pub fn injective_norm_with_starts(
    t: &Tensor,
    p: PExponent,
    cfg: &SolverConfig,
    extra: &[Vec<Vec<f64>>],
) -> Result<NormEstimate> {
    ensure!(p.is_finite(), "the injective norm estimator needs a finite p");
    cfg.validate()?;
    let (r, d) = (t.order(), t.dim());
    if r == 0 {
        return Ok(NormEstimate {
            value: t.entries()[0].abs(),
            witnesses: vec![],
            restarts_used: 0,
            iterations: 0,
            converged: true,
            method: Method::Alternating,
        });
    }
    for s in extra {
        ensure!(
            s.len() == r && s.iter().all(|v| v.len() == d),
            "extra start has the wrong shape"
        );
    }
    let peak = largest_entry(t);
    let mut starts: Vec<Option<Vec<Vec<f64>>>> = vec![Some(peak.iter().map(|&i| basis(d, i)).collect())];
    starts.extend(extra.iter().cloned().map(Some));
    let random = cfg.restarts_for(r, d);
    starts.extend((0..random).map(|_| None));

    let runs: Vec<AscentRun> = starts
        .into_par_iter()
        .enumerate()
        .map(|(i, s)| {
            let start = s.unwrap_or_else(|| {
                let mut rng = stream_rng(cfg.seed, i as u64);
                (0..r).map(|_| sample_ball(d, p, &mut rng)).collect()
            });
            alternating_ascent(t, p, start, cfg.max_iters, cfg.rel_tol)
        })
        .collect();
    let used = runs.len();
    let best = pick_best(runs);
    let mut est = NormEstimate {
        value: 0.0,
        witnesses: best.witnesses,
        restarts_used: used,
        iterations: best.iterations,
        converged: best.converged,
        method: Method::Alternating,
    };
    est.value = est.recompute(t)?;
    Ok(est)
}

fn pick_best(runs: Vec<AscentRun>) -> AscentRun {
    let mut it = runs.into_iter();
    let mut best = it.next().expect("at least one start");
    for run in it {
        if run.value > best.value {
            best = run;
        }
    }
    best
}

/// Safeguarded higher-order power iteration for `sup_u |T[u, .., u]|`.
///
/// Each step moves towards the `ℓ_p` maximizer of `s T u^{r-1}` where `s` is
/// the sign of the current value and pushes the point back to the sphere.
/// The better of the full and half step is taken, and the step is halved
/// further while neither increases the value.
pub fn power_ascent(
    t: &Tensor,
    p: PExponent,
    start: Vec<f64>,
    max_iters: usize,
    rel_tol: f64,
) -> AscentRun {
    let r = t.order();
    let mut u = start;
    let n = lp_norm(&u, p);
    if n > 0.0 {
        u.iter_mut().for_each(|x| *x /= n);
    }
    let mut f = t.form(&u);
    let mut trace = vec![f.abs()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        let s = if f < 0.0 { -1.0 } else { 1.0 };
        let g: Vec<f64> = contract(t, &u, r - 1)
            .expect("shapes agree")
            .into_entries()
            .into_iter()
            .map(|x| s * x)
            .collect();
        let (y, _) = linear_maximizer(&g, p);
        let current = s * f;
        let trial = |theta: f64| {
            let mut w: Vec<f64> = u.iter().zip(&y).map(|(a, b)| a + theta * (b - a)).collect();
            let n = lp_norm(&w, p);
            if n == 0.0 {
                return None;
            }
            w.iter_mut().for_each(|x| *x /= n);
            let fw = t.form(&w);
            (s * fw > current).then_some((w, fw))
        };
        // The full step alone can cycle between the eigenvectors of a ±λ
        // pair, so the half step is always compared with it.
        let mut step = match (trial(1.0), trial(0.5)) {
            (Some(a), Some(b)) => Some(if s * b.1 > s * a.1 { b } else { a }),
            (a, b) => a.or(b),
        };
        let mut theta = 0.25;
        for _ in 0..40 {
            if step.is_some() {
                break;
            }
            step = trial(theta);
            theta *= 0.5;
        }
        let Some((w, fw)) = step else {
            converged = true;
            break;
        };
        let gain = s * fw - current;
        u = w;
        f = fw;
        trace.push(f.abs());
        if gain <= rel_tol * f.abs() {
            converged = true;
            break;
        }
    }
    AscentRun {
        value: f.abs(),
        witnesses: vec![u],
        iterations,
        converged,
        trace,
    }
}

/// Multi-start estimate of `sup_{||u||_p <= 1} |T[u, .., u]|` for symmetric `T`.
pub fn symmetric_injective_norm(t: &Tensor, p: PExponent, cfg: &SolverConfig) -> Result<NormEstimate> {
    symmetric_injective_norm_with_starts(t, p, cfg, &[])
}

pub fn symmetric_injective_norm_with_starts(
    t: &Tensor,
    p: PExponent,
    cfg: &SolverConfig,
    extra: &[Vec<f64>],
) -> Result<NormEstimate> {
    ensure!(p.is_finite(), "the symmetric estimator needs a finite p");
    cfg.validate()?;
    let (r, d) = (t.order(), t.dim());
    ensure!(r >= 1, "the symmetric estimator needs order at least 1");
    ensure!(
        tensor::is_symmetric(t, 1e-10 * t.max_abs()),
        "symmetric_injective_norm called on an asymmetric tensor"
    );
    ensure!(extra.iter().all(|v| v.len() == d), "extra start has the wrong length");

    let mut starts: Vec<Option<Vec<f64>>> = Vec::new();
    let peak = largest_entry(t);
    let mut support = vec![0.0; d];
    for &i in &peak {
        support[i] = 1.0;
    }
    starts.push(Some(support));
    let diag = (0..d)
        .max_by(|&a, &b| {
            let fa = t.get(&vec![a; r]).abs();
            let fb = t.get(&vec![b; r]).abs();
            fa.total_cmp(&fb).then(b.cmp(&a))
        })
        .unwrap_or(0);
    starts.push(Some(basis(d, diag)));
    starts.extend(extra.iter().cloned().map(Some));
    starts.extend((0..cfg.restarts_for(r, d)).map(|_| None));

    let runs: Vec<AscentRun> = starts
        .into_par_iter()
        .enumerate()
        .map(|(i, s)| {
            let start = s.unwrap_or_else(|| sample_ball(d, p, &mut stream_rng(cfg.seed, i as u64)));
            power_ascent(t, p, start, cfg.max_iters, cfg.rel_tol)
        })
        .collect();
    let used = runs.len();
    let best = pick_best(runs);
    let mut est = NormEstimate {
        value: 0.0,
        witnesses: best.witnesses,
        restarts_used: used,
        iterations: best.iterations,
        converged: best.converged,
        method: Method::PowerSymmetric,
    };
    est.value = est.recompute(t)?;
    Ok(est)
}

/// The norm for `p = 1`: the largest entry modulus.
pub fn l1_injective_exact(t: &Tensor) -> NormEstimate {
    let (r, d) = (t.order(), t.dim());
    let peak = largest_entry(t);
    let value = t.get(&peak);
    let mut witnesses: Vec<Vec<f64>> = peak.iter().map(|&i| basis(d, i)).collect();
    if r > 0 && value < 0.0 {
        witnesses[r - 1].iter_mut().for_each(|x| *x = -*x);
    }
    NormEstimate {
        value: value.abs(),
        witnesses,
        restarts_used: 0,
        iterations: 0,
        converged: true,
        method: Method::L1Exact,
    }
}

/// Eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(t: &Tensor) -> Result<Vec<f64>> {
    Ok(symmetric_eigen(t)?.eigenvalues.iter().copied().collect())
}

fn symmetric_eigen(t: &Tensor) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    ensure!(t.order() == 2, "expected a matrix, got order {}", t.order());
    ensure!(
        tensor::is_symmetric(t, 1e-10 * t.max_abs()),
        "expected a symmetric matrix"
    );
    let d = t.dim();
    let m = DMatrix::from_row_slice(d, d, t.entries());
    Ok(SymmetricEigen::new(m))
}

/// The `p = 2` norm of a symmetric matrix, `max |λ_i|`, with an eigenvector
/// as witness.
pub fn spectral_exact(t: &Tensor) -> Result<NormEstimate> {
    let eig = symmetric_eigen(t)?;
    let (k, lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(k, m), (i, &l)| if l.abs() > m.abs() { (i, l) } else { (k, m) });
    let v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    let w: Vec<f64> = v.iter().map(|x| x * lambda.signum()).collect();
    Ok(NormEstimate {
        value: lambda.abs(),
        witnesses: vec![v, w],
        restarts_used: 0,
        iterations: 0,
        converged: true,
        method: Method::SpectralExact,
    })
}

/// Points of the unit `ℓ_p` sphere of `R^d`, one per antipodal pair, from an
/// angular grid on the Euclidean sphere.
fn sphere_grid(d: usize, p: PExponent, resolution: usize) -> Vec<Vec<f64>> {
    use std::f64::consts::PI;
    let mut pts: Vec<Vec<f64>> = match d {
        1 => vec![vec![1.0]],
        2 => (0..resolution)
            .map(|k| {
                let th = PI * k as f64 / resolution as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            let mut v = Vec::with_capacity((resolution + 1) * resolution);
            for a in 0..=resolution {
                let th = PI * a as f64 / resolution as f64;
                for b in 0..resolution {
                    let ph = PI * b as f64 / resolution as f64;
                    v.push(vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
                }
            }
            v
        }
    };
    for x in pts.iter_mut() {
        let n = lp_norm(x, p);
        x.iter_mut().for_each(|c| *c /= n);
    }
    pts
}

/// Brute-force norm for `d <= 3`, `r <= 3`: the first `r - 1` slots range
/// over a grid of the sphere and the last is solved exactly by duality.
pub fn grid_oracle(t: &Tensor, p: PExponent, resolution: usize) -> Result<NormEstimate> {
    let (r, d) = (t.order(), t.dim());
    ensure!(p.is_finite(), "the grid oracle needs a finite p");
    ensure!((1..=3).contains(&d), "the grid oracle needs d <= 3, got {d}");
    ensure!((1..=3).contains(&r), "the grid oracle needs 1 <= r <= 3, got {r}");
    ensure!(
        (1..=400).contains(&resolution),
        "resolution must lie in 1..=400, got {resolution}"
    );
    let pts = sphere_grid(d, p, resolution);
    let q = p.dual();
    let mut best = (-1.0, vec![]);
    let mut chosen = vec![0usize; r - 1];
    grid_search(t.entries(), d, r - 1, &pts, q, &mut chosen, 0, &mut best);
    let mut witnesses: Vec<Vec<f64>> = best.1.iter().map(|&i| pts[i].clone()).collect();
    let c = t.contract_except(
        &witnesses.iter().cloned().chain([vec![0.0; d]]).collect::<Vec<_>>(),
        r - 1,
    );
    witnesses.push(linear_maximizer(&c, p).0);
    let mut est = NormEstimate {
        value: 0.0,
        witnesses,
        restarts_used: 0,
        iterations: pts.len().pow((r - 1) as u32),
        converged: true,
        method: Method::GridOracle,
    };
    est.value = est.recompute(t)?;
    Ok(est)
}

#[allow(clippy::too_many_arguments)]
fn grid_search(
    cur: &[f64],
    d: usize,
    left: usize,
    pts: &[Vec<f64>],
    q: PExponent,
    chosen: &mut Vec<usize>,
    depth: usize,
    best: &mut (f64, Vec<usize>),
) {
    if left == 0 {
        let v = lp_norm(cur, q);
        if v > best.0 {
            *best = (v, chosen.clone());
        }
        return;
    }
    let stride = cur.len() / d;
    let mut next = vec![0.0; stride];
    for (k, x) in pts.iter().enumerate() {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (a, &xa) in x.iter().enumerate() {
            for (o, s) in next.iter_mut().zip(&cur[a * stride..(a + 1) * stride]) {
                *o += xa * s;
            }
        }
        chosen[depth] = k;
        grid_search(&next, d, left - 1, pts, q, chosen, depth + 1, best);
    }
}

/// The exact norm where a closed form exists, otherwise the estimator.
pub fn best_norm(t: &Tensor, p: PExponent, cfg: &SolverConfig) -> Result<NormEstimate> {
    if p == PExponent::ONE {
        return Ok(l1_injective_exact(t));
    }
    if t.order() == 2 && p == PExponent::TWO && tensor::is_symmetric(t, 1e-12 * t.max_abs()) {
        return spectral_exact(t);
    }
    injective_norm(t, p, cfg)
}
