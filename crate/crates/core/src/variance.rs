//! Variance parameters of a Gaussian series `sum_k g_k T_k`.
//!
//! `σ_q^2 = ||sum_k T_k ⋆_q T_k||_{I_p}` for `q = 0..=r`, together with the
//! type-2 proxy `σ_T2 = (sum_k ||T_k||_{I_p}^2)^{1/2}`. For symmetric terms the
//! same `σ_q^2` is also the supremum over `u_1, .., u_{r-q}` in the unit ball
//! of `sum_k ||T_k[u_1, .., u_{r-q}, ·, .., ·]||_F^2`, which avoids forming
//! the order `2r - 2q` tensor.

use std::collections::HashMap;

use itertools::Itertools;
use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::lp::{basis, linear_maximizer, sample_ball, PExponent};
use crate::norm::{best_norm, SolverConfig};
use crate::seed::stream_rng;
use crate::tensor::{self, checked_len_with_limit, Tensor, TensorSeries, MAX_ENTRIES};

/// Largest second-moment tensor the profile evaluates directly; beyond it
/// symmetric series use the supremum form.
pub const DIRECT_LIMIT: usize = 1 << 12;

/// A series whose terms are stored as `(flat index, value)` lists.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSeries {
    order: usize,
    dim: usize,
    symmetric: bool,
    terms: Vec<Vec<(usize, f64)>>,
}

impl SparseSeries {
    pub fn from_series(s: &TensorSeries) -> Self {
        SparseSeries {
            order: s.order(),
            dim: s.dim(),
            symmetric: s.is_symmetric(),
            terms: s
                .terms()
                .iter()
                .map(|t| {
                    t.entries()
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| **v != 0.0)
                        .map(|(i, v)| (i, *v))
                        .collect()
                })
                .collect(),
        }
    }

    /// The series of an independent-entry symmetric tensor whose entry at a
    /// sorted multi-index `a` has variance `variance[a]`: one term per sorted
    /// index, equal to `sqrt(variance[a])` on every permutation of `a`.
    pub fn orbit_series(variance: &Tensor) -> Result<Self> {
        let (r, d) = (variance.order(), variance.dim());
        ensure!(
            tensor::is_symmetric(variance, tensor::default_symmetry_tol(variance)),
            "the variance tensor must be symmetric"
        );
        ensure!(
            variance.entries().iter().all(|&a| a >= 0.0),
            "variances must be nonnegative"
        );
        let mut terms = Vec::new();
        for idx in (0..d).combinations_with_replacement(r) {
            let a = variance.get(&idx);
            if a == 0.0 {
                continue;
            }
            let w = a.sqrt();
            terms.push(orbit(&idx, d).into_iter().map(|k| (k, w)).collect());
        }
        if terms.is_empty() {
            terms.push(Vec::new());
        }
        Ok(SparseSeries {
            order: r,
            dim: d,
            symmetric: true,
            terms,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn terms(&self) -> &[Vec<(usize, f64)>] {
        &self.terms
    }

    pub fn term_tensor(&self, k: usize) -> Result<Tensor> {
        let mut t = Tensor::zeros(self.order, self.dim)?;
        for &(i, v) in &self.terms[k] {
            t.entries_mut()[i] = v;
        }
        Ok(t)
    }

    /// `sum_k ||T_k||_F^2`.
    pub fn frobenius_sq(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.iter().map(|(_, v)| v * v).sum::<f64>())
            .sum()
    }

    /// `(T_k[u, .., u])_k`; the natural distance is the Euclidean distance of
    /// these feature vectors.
    pub fn features(&self, u: &[f64]) -> Vec<f64> {
        let (r, d) = (self.order, self.dim);
        let mut idx = vec![0; r];
        self.terms
            .iter()
            .map(|t| {
                t.iter()
                    .map(|&(k, v)| {
                        decode(k, d, &mut idx);
                        v * idx.iter().map(|&i| u[i]).product::<f64>()
                    })
                    .sum()
            })
            .collect()
    }
}

/// Flat indices of all distinct permutations of `idx`.
pub(crate) fn orbit(idx: &[usize], d: usize) -> Vec<usize> {
    let r = idx.len();
    let mut flat: Vec<usize> = (0..r)
        .permutations(r)
        .map(|p| p.iter().fold(0, |acc, &s| acc * d + idx[s]))
        .collect();
    flat.sort_unstable();
    flat.dedup();
    flat
}

fn decode(mut flat: usize, d: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % d;
        flat /= d;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodTag {
    Exact,
    EstimatedLowerBound,
}

impl MethodTag {
    fn from_exact(exact: bool) -> Self {
        if exact {
            MethodTag::Exact
        } else {
            MethodTag::EstimatedLowerBound
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceProfile {
    pub p: PExponent,
    pub order: usize,
    pub dim: usize,
    /// `σ_0, .., σ_r`.
    pub sigma: Vec<f64>,
    pub sigma_type2: f64,
    /// One tag per entry of `sigma`.
    pub methods: Vec<MethodTag>,
    pub type2_method: MethodTag,
}

/// `sum_k T_k ⋆_q T_k` for a sparse series.
pub fn second_moment(series: &SparseSeries, q: usize, limit: usize) -> Result<Tensor> {
    let (r, d) = (series.order, series.dim);
    ensure!(q <= r, "q = {q} exceeds the order {r}");
    checked_len_with_limit(2 * (r - q), d, limit)?;
    let m = d.pow((r - q) as u32);
    let k = d.pow(q as u32);
    let mut h = vec![0.0; m * m];
    let mut tails: Vec<(usize, usize, f64)> = Vec::new();
    let mut heads: Vec<(usize, usize, f64)> = Vec::new();
    for term in &series.terms {
        tails.clear();
        heads.clear();
        for &(i, v) in term {
            tails.push((i % k, i / k, v));
            heads.push((i / m, i % m, v));
        }
        tails.sort_unstable_by_key(|e| e.0);
        heads.sort_unstable_by_key(|e| e.0);
        let mut hi = 0;
        for tgroup in tails.chunk_by(|a, b| a.0 == b.0) {
            let j = tgroup[0].0;
            while hi < heads.len() && heads[hi].0 < j {
                hi += 1;
            }
            let start = hi;
            let mut end = hi;
            while end < heads.len() && heads[end].0 == j {
                end += 1;
            }
            for &(_, a, v) in tgroup {
                let row = &mut h[a * m..(a + 1) * m];
                for &(_, c, w) in &heads[start..end] {
                    row[c] += v * w;
                }
            }
        }
    }
    Tensor::new(2 * (r - q), d, h)
}

fn check_q(series: &SparseSeries, q: usize) -> Result<()> {
    ensure!(q <= series.order, "q = {q} exceeds the order {}", series.order);
    Ok(())
}

/// `σ_q` from the second-moment tensor, with whether the value is exact.
pub fn sigma_direct(
    series: &SparseSeries,
    q: usize,
    p: PExponent,
    cfg: &SolverConfig,
) -> Result<(f64, bool)> {
    check_q(series, q)?;
    if q == series.order {
        return Ok((series.frobenius_sq().sqrt(), true));
    }
    let h = second_moment(series, q, MAX_ENTRIES)?;
    let est = best_norm(&h, p, cfg)?;
    Ok((est.value.max(0.0).sqrt(), est.is_exact()))
}

pub fn sigma_q_direct(series: &TensorSeries, q: usize, p: PExponent, cfg: &SolverConfig) -> Result<f64> {
    Ok(sigma_direct(&SparseSeries::from_series(series), q, p, cfg)?.0)
}

/// Entries of one term sharing the last `q` indices, with their first
/// `r - q` indices unpacked.
struct Group {
    heads: Vec<usize>,
    vals: Vec<f64>,
}

fn group_by_tail(series: &SparseSeries, heads: usize) -> Vec<Group> {
    let d = series.dim;
    let k = d.pow((series.order - heads) as u32);
    let mut groups = Vec::new();
    let mut buf: Vec<(usize, usize, f64)> = Vec::new();
    let mut idx = vec![0; heads];
    for term in &series.terms {
        buf.clear();
        buf.extend(term.iter().map(|&(i, v)| (i % k, i / k, v)));
        buf.sort_unstable_by_key(|e| e.0);
        for g in buf.chunk_by(|a, b| a.0 == b.0) {
            let mut group = Group {
                heads: Vec::with_capacity(g.len() * heads),
                vals: Vec::with_capacity(g.len()),
            };
            for &(_, h, v) in g {
                decode(h, d, &mut idx);
                group.heads.extend_from_slice(&idx);
                group.vals.push(v);
            }
            groups.push(group);
        }
    }
    groups
}

/// `Q` with `u_l^T Q u_l = sum_k ||T_k[u_1, .., u_m, ·]||_F^2` at the other
/// vectors fixed.
fn slot_matrix(groups: &[Group], u: &[Vec<f64>], l: usize, d: usize) -> Vec<f64> {
    let m = u.len();
    let mut q = vec![0.0; d * d];
    let mut w = vec![0.0; d];
    let mut touched: Vec<usize> = Vec::new();
    for g in groups {
        for (e, &v) in g.vals.iter().enumerate() {
            let h = &g.heads[e * m..(e + 1) * m];
            let mut c = v;
            for (s, &i) in h.iter().enumerate() {
                if s != l {
                    c *= u[s][i];
                }
            }
            let a = h[l];
            if w[a] == 0.0 {
                touched.push(a);
            }
            w[a] += c;
        }
        for &a in &touched {
            for &b in &touched {
                q[a * d + b] += w[a] * w[b];
            }
        }
        for &a in &touched {
            w[a] = 0.0;
        }
        touched.clear();
    }
    q
}

fn quad(q: &[f64], x: &[f64]) -> f64 {
    let d = x.len();
    (0..d)
        .map(|a| x[a] * (0..d).map(|b| q[a * d + b] * x[b]).sum::<f64>())
        .sum()
}

/// Maximizes the convex quadratic `x^T Q x` over the unit ball starting at
/// `x`. Exact for `p = 1` and `p = 2`; otherwise the monotone iteration
/// `x <- argmax <Qx, ·>`.
fn maximize_quadratic(q: &[f64], x: &[f64], p: PExponent, max_iters: usize, rel_tol: f64) -> (Vec<f64>, f64, bool) {
    let d = x.len();
    if p == PExponent::TWO {
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(d, d, q));
        let (k, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(k, m), (i, &l)| if l > m { (i, l) } else { (k, m) });
        let v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let f = quad(q, &v);
        return (v, f, true);
    }
    if p == PExponent::ONE {
        let a = (0..d).fold(0, |k, a| if q[a * d + a] > q[k * d + k] { a } else { k });
        return (basis(d, a), q[a * d + a], true);
    }
    let mut x = x.to_vec();
    let mut f = quad(q, &x);
    for _ in 0..max_iters {
        let g: Vec<f64> = (0..d).map(|a| (0..d).map(|b| q[a * d + b] * x[b]).sum()).collect();
        let (y, _) = linear_maximizer(&g, p);
        let fy = quad(q, &y);
        if fy <= f * (1.0 + rel_tol) {
            if fy > f {
                x = y;
                f = fy;
            }
            break;
        }
        x = y;
        f = fy;
    }
    (x, f, false)
}

/// `σ_q` from the supremum form, with whether the value is exact.
pub fn sigma_sup(series: &SparseSeries, q: usize, p: PExponent, cfg: &SolverConfig) -> Result<(f64, bool)> {
    check_q(series, q)?;
    ensure!(p.is_finite(), "the supremum form needs a finite p");
    cfg.validate()?;
    let (r, d) = (series.order, series.dim);
    if q == r {
        return Ok((series.frobenius_sq().sqrt(), true));
    }
    ensure!(
        series.symmetric,
        "the supremum form of σ_q equals the direct one only for symmetric terms"
    );
    let m = r - q;
    let groups = group_by_tail(series, m);

    let peak = series
        .terms
        .iter()
        .flatten()
        .fold((0usize, -1.0f64), |(k, a), &(i, v)| if v.abs() > a { (i, v.abs()) } else { (k, a) })
        .0;
    let mut peak_idx = vec![0; r];
    decode(peak, d, &mut peak_idx);
    let first: Vec<Vec<f64>> = peak_idx[..m].iter().map(|&i| basis(d, i)).collect();

    if m == 1 {
        let qm = slot_matrix(&groups, &first, 0, d);
        let starts = cfg.restarts_for(r, d);
        let exact = p == PExponent::ONE || p == PExponent::TWO;
        let runs: Vec<f64> = (0..=if exact { 0 } else { starts })
            .into_par_iter()
            .map(|i| {
                let x = if i == 0 {
                    first[0].clone()
                } else {
                    sample_ball(d, p, &mut stream_rng(cfg.seed, i as u64))
                };
                maximize_quadratic(&qm, &x, p, cfg.max_iters, cfg.rel_tol).1
            })
            .collect();
        let best = runs.into_iter().fold(0.0f64, f64::max);
        return Ok((best.sqrt(), exact));
    }

    let n = cfg.restarts_for(r, d);
    let runs: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let mut u = if i == 0 {
                first.clone()
            } else {
                let mut rng = stream_rng(cfg.seed, i as u64);
                (0..m).map(|_| sample_ball(d, p, &mut rng)).collect()
            };
            let mut value = 0.0;
            let mut last_gain: Option<f64> = None;
            for _ in 0..cfg.max_iters {
                let prev = value;
                for l in 0..m {
                    let qm = slot_matrix(&groups, &u, l, d);
                    let (x, f, _) = maximize_quadratic(&qm, &u[l], p, cfg.max_iters, cfg.rel_tol);
                    u[l] = x;
                    value = f;
                }
                let gain = (value - prev).abs();
                let settled = last_gain.is_some_and(|g| {
                    let rho = gain / g;
                    let rest = if rho < 1.0 { gain / (1.0 - rho) } else { gain };
                    rest <= cfg.rel_tol * value
                });
                if value == 0.0 || settled {
                    break;
                }
                last_gain = Some(gain);
            }
            value
        })
        .collect();
    let best = runs.into_iter().fold(0.0f64, f64::max);
    Ok((best.sqrt(), false))
}

pub fn sigma_q_sup(series: &TensorSeries, q: usize, p: PExponent, cfg: &SolverConfig) -> Result<f64> {
    Ok(sigma_sup(&SparseSeries::from_series(series), q, p, cfg)?.0)
}

/// `(sum_k ||T_k||_{I_p}^2)^{1/2}`, with whether every term norm is exact.
///
/// Each term is normed on the coordinates it touches; terms equal up to
/// scale and relabelling of those coordinates share one evaluation.
pub fn type2(series: &SparseSeries, p: PExponent, cfg: &SolverConfig) -> Result<(f64, bool)> {
    let (r, d) = (series.order, series.dim);
    let mut cache: HashMap<Vec<u64>, (f64, bool)> = HashMap::new();
    let mut total = 0.0;
    let mut exact = true;
    let mut idx = vec![0; r];
    for term in &series.terms {
        let scale = term.iter().fold(0.0f64, |a, (_, v)| a.max(v.abs()));
        if scale == 0.0 {
            continue;
        }
        let mut support: Vec<usize> = Vec::new();
        for &(k, _) in term {
            decode(k, d, &mut idx);
            support.extend_from_slice(&idx);
        }
        support.sort_unstable();
        support.dedup();
        let n = support.len();
        let mut local = Tensor::zeros(r, n)?;
        for &(k, v) in term {
            decode(k, d, &mut idx);
            let li: Vec<usize> = idx
                .iter()
                .map(|i| support.binary_search(i).expect("in support"))
                .collect();
            local.set(&li, v / scale);
        }
        let key: Vec<u64> = std::iter::once(n as u64)
            .chain(local.entries().iter().map(|x| x.to_bits()))
            .collect();
        let (norm, ex) = match cache.get(&key) {
            Some(&hit) => hit,
            None => {
                let est = best_norm(&local, p, cfg)?;
                let hit = (est.value, est.is_exact());
                cache.insert(key, hit);
                hit
            }
        };
        total += (scale * norm).powi(2);
        exact &= ex;
    }
    Ok((total.sqrt(), exact))
}

pub fn type2_variance(series: &TensorSeries, p: PExponent, cfg: &SolverConfig) -> Result<f64> {
    Ok(type2(&SparseSeries::from_series(series), p, cfg)?.0)
}

/// `sqrt(sum_k (T_k[u^r] - T_k[v^r])^2)` for symmetric terms.
pub fn natural_distance(series: &TensorSeries, u: &[f64], v: &[f64]) -> Result<f64> {
    ensure!(series.is_symmetric(), "the natural distance needs symmetric terms");
    ensure!(
        u.len() == series.dim() && v.len() == series.dim(),
        "points must have length {}",
        series.dim()
    );
    Ok(series
        .terms()
        .iter()
        .map(|t| (t.form(u) - t.form(v)).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// All `σ_q`, evaluated directly when the second moment is small or the
/// terms are asymmetric, and through the supremum form otherwise.
pub fn variance_profile(series: &SparseSeries, p: PExponent, cfg: &SolverConfig) -> Result<VarianceProfile> {
    variance_profile_with_limit(series, p, cfg, DIRECT_LIMIT)
}

pub fn variance_profile_with_limit(
    series: &SparseSeries,
    p: PExponent,
    cfg: &SolverConfig,
    direct_limit: usize,
) -> Result<VarianceProfile> {
    ensure!(p.is_finite(), "variance parameters need a finite p");
    let (r, d) = (series.order, series.dim);
    let mut sigma = Vec::with_capacity(r + 1);
    let mut methods = Vec::with_capacity(r + 1);
    for q in 0..=r {
        let small = checked_len_with_limit(2 * (r - q), d, direct_limit).is_ok();
        let (s, exact) = if small || !series.symmetric {
            sigma_direct(series, q, p, cfg)?
        } else {
            sigma_sup(series, q, p, cfg)?
        };
        sigma.push(s);
        methods.push(MethodTag::from_exact(exact));
    }
    let (t2, t2_exact) = type2(series, p, cfg)?;
    Ok(VarianceProfile {
        p,
        order: r,
        dim: d,
        sigma,
        sigma_type2: t2,
        methods,
        type2_method: MethodTag::from_exact(t2_exact),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_of_a_repeated_index() {
        let o = orbit(&[0, 0, 1], 2);
        assert_eq!(o, vec![1, 2, 4]);
    }

    #[test]
    fn single_matrix_profile() {
        let a = Tensor::diag(&[1.0, -2.0]).unwrap();
        let s = SparseSeries::from_series(&TensorSeries::new(vec![a]).unwrap());
        let prof = variance_profile(&s, PExponent::TWO, &SolverConfig::default()).unwrap();
        assert!((prof.sigma[1] - 2.0).abs() < 1e-12);
        assert!((prof.sigma[2] - 5f64.sqrt()).abs() < 1e-15);
        assert!((prof.sigma_type2 - 2.0).abs() < 1e-12);
        assert_eq!(prof.methods[1], MethodTag::Exact);
        assert_eq!(prof.methods[2], MethodTag::Exact);
    }

    #[test]
    fn sup_form_needs_symmetric_terms() {
        let a = Tensor::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let s = TensorSeries::new(vec![a]).unwrap();
        assert!(sigma_q_sup(&s, 1, PExponent::TWO, &SolverConfig::default()).is_err());
        assert!(sigma_q_sup(&s, 2, PExponent::TWO, &SolverConfig::default()).is_ok());
    }

    #[test]
    fn profile_json_tags() {
        let a = Tensor::diag(&[1.0, 1.0]).unwrap();
        let s = SparseSeries::from_series(&TensorSeries::new(vec![a]).unwrap());
        let prof = variance_profile(&s, PExponent::TWO, &SolverConfig::default()).unwrap();
        let text = serde_json::to_string(&prof).unwrap();
        assert!(text.contains("\"exact\""));
        let back: VarianceProfile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, prof);
    }
}
