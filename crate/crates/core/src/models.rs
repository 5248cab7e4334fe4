//! Random tensor models and structured coefficient families.
//!
//! Every model is a deterministic mean plus a Gaussian (or Rademacher) series
//! `sum_k c_k T_k`; [`Model`] holds that decomposition so that sampling and
//! the variance parameters use the same terms.

use std::collections::HashMap;

use itertools::Itertools;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::lp::PExponent;
use crate::tensor::{self, Tensor, TensorSeries};
use crate::variance::SparseSeries;

/// An `r`-uniform hypergraph on vertices `0..d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawHypergraph")]
pub struct Hypergraph {
    d: usize,
    r: usize,
    edges: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawHypergraph {
    d: usize,
    r: usize,
    edges: Vec<Vec<usize>>,
}

impl TryFrom<RawHypergraph> for Hypergraph {
    type Error = Error;
    fn try_from(raw: RawHypergraph) -> Result<Self> {
        Hypergraph::new(raw.d, raw.r, raw.edges)
    }
}

impl Hypergraph {
    /// Edges must be strictly increasing `r`-subsets of `0..d`, without repeats.
    pub fn new(d: usize, r: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        ensure!(d >= 1 && r >= 1, "a hypergraph needs d >= 1 and r >= 1");
        ensure!(r <= d, "edges of size {r} do not fit on {d} vertices");
        for e in &edges {
            ensure!(e.len() == r, "edge {e:?} does not have {r} vertices");
            ensure!(
                e.windows(2).all(|w| w[0] < w[1]),
                "edge {e:?} is not strictly increasing"
            );
            ensure!(e[r - 1] < d, "edge {e:?} has a vertex outside 0..{d}");
        }
        let mut sorted = edges.clone();
        sorted.sort();
        ensure!(
            sorted.windows(2).all(|w| w[0] != w[1]),
            "repeated edge in hypergraph"
        );
        Ok(Hypergraph { d, r, edges })
    }

    pub fn complete(d: usize, r: usize) -> Result<Self> {
        Hypergraph::new(d, r, (0..d).combinations(r).collect())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }
}

/// The symmetric 0/1 tensor with a one on every permutation of every edge.
pub fn adjacency_tensor(h: &Hypergraph) -> Result<Tensor> {
    let mut a = Tensor::zeros(h.r, h.d)?;
    for e in &h.edges {
        for k in crate::variance::orbit(e, h.d) {
            a.entries_mut()[k] = 1.0;
        }
    }
    Ok(a)
}

/// `Δ_0 = |E|`; for `j >= 1`, the largest number of edges containing a
/// common `j`-set of vertices.
pub fn delta_j(h: &Hypergraph, j: usize) -> Result<usize> {
    ensure!(j <= h.r, "j = {j} exceeds the edge size {}", h.r);
    if j == 0 {
        return Ok(h.edges.len());
    }
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    for e in &h.edges {
        for s in e.iter().copied().combinations(j) {
            *counts.entry(s).or_default() += 1;
        }
    }
    Ok(counts.values().copied().max().unwrap_or(0))
}

/// `Δ_0, .., Δ_r`.
pub fn deltas(h: &Hypergraph) -> Vec<usize> {
    (0..=h.r).map(|j| delta_j(h, j).expect("j in range")).collect()
}

/// A family of matchings on `0..d`, each a set of vertex-disjoint pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFamily")]
pub struct MatchingFamily {
    d: usize,
    matchings: Vec<Vec<[usize; 2]>>,
}

#[derive(Deserialize)]
struct RawFamily {
    d: usize,
    matchings: Vec<Vec<[usize; 2]>>,
}

impl TryFrom<RawFamily> for MatchingFamily {
    type Error = Error;
    fn try_from(raw: RawFamily) -> Result<Self> {
        MatchingFamily::new(raw.d, raw.matchings)
    }
}

impl MatchingFamily {
    pub fn new(d: usize, matchings: Vec<Vec<[usize; 2]>>) -> Result<Self> {
        ensure!(d >= 2, "matchings need at least two vertices");
        ensure!(!matchings.is_empty(), "a matching family needs at least one matching");
        for m in &matchings {
            let mut seen = vec![false; d];
            for &[a, b] in m {
                ensure!(a < d && b < d, "pair ({a}, {b}) has a vertex outside 0..{d}");
                ensure!(a != b, "pair ({a}, {b}) is a loop");
                ensure!(!seen[a] && !seen[b], "matching {m:?} reuses a vertex");
                seen[a] = true;
                seen[b] = true;
            }
        }
        Ok(MatchingFamily { d, matchings })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matchings(&self) -> &[Vec<[usize; 2]>] {
        &self.matchings
    }
}

/// Adjacency matrices of a matching family with their sizes `μ_k` and the
/// degrees of the union multigraph.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchingData {
    pub series: TensorSeries,
    pub sizes: Vec<f64>,
    pub degrees: Vec<f64>,
}

pub fn matching_series(f: &MatchingFamily) -> Result<MatchingData> {
    let d = f.d;
    let mut degrees = vec![0.0; d];
    let mut terms = Vec::with_capacity(f.matchings.len());
    for m in &f.matchings {
        let mut a = Tensor::zeros(2, d)?;
        for &[u, v] in m {
            a.set(&[u, v], 1.0);
            a.set(&[v, u], 1.0);
            degrees[u] += 1.0;
            degrees[v] += 1.0;
        }
        terms.push(a);
    }
    Ok(MatchingData {
        series: TensorSeries::new(terms)?,
        sizes: f.matchings.iter().map(|m| m.len() as f64).collect(),
        degrees,
    })
}

/// How the series coefficients are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficients {
    #[default]
    Gaussian,
    Rademacher,
}

impl Coefficients {
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Coefficients::Gaussian => StandardNormal.sample(rng),
            Coefficients::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

/// `sum_k c_k T_k` with coefficients drawn in term order.
pub fn draw_series<R: Rng + ?Sized>(series: &SparseSeries, coeffs: Coefficients, rng: &mut R) -> Result<Tensor> {
    let mut t = Tensor::zeros(series.order(), series.dim())?;
    let e = t.entries_mut();
    for term in series.terms() {
        let c = coeffs.draw(rng);
        for &(i, v) in term {
            e[i] += c * v;
        }
    }
    Ok(t)
}

/// Symmetric tensor with one standard Gaussian per sorted multi-index, copied
/// to every permutation of that index.
pub fn iid_symmetric<R: Rng + ?Sized>(d: usize, r: usize, rng: &mut R) -> Result<Tensor> {
    let ones = Tensor::from_fn(r, d, |_| 1.0)?;
    draw_series(&SparseSeries::orbit_series(&ones)?, Coefficients::Gaussian, rng)
}

/// Symmetric tensor with independent centered Gaussian entries (up to
/// symmetry) of variance `variance[a]` at each sorted index `a`. Indices of
/// zero variance consume no randomness.
pub fn nonhomogeneous<R: Rng + ?Sized>(variance: &Tensor, rng: &mut R) -> Result<Tensor> {
    draw_series(&SparseSeries::orbit_series(variance)?, Coefficients::Gaussian, rng)
}

fn check_signal(h: &Hypergraph, signal: &[f64], lambda: f64) -> Result<()> {
    ensure!(signal.len() == h.d, "signal must have length {}", h.d);
    ensure!(
        signal.iter().all(|&s| s == 1.0 || s == -1.0),
        "signal entries must be ±1"
    );
    ensure!(lambda >= 0.0 && lambda.is_finite(), "signal strength must be nonnegative");
    Ok(())
}

fn pca_mean(h: &Hypergraph, signal: &[f64], lambda: f64) -> Result<Tensor> {
    let a = adjacency_tensor(h)?;
    let planted = Tensor::power(signal, h.r)?.scaled(lambda);
    tensor::hadamard(&a, &planted)
}

/// `A ⊙ λ v^{⊗r} + W` with `W` independent Gaussian noise on the edges.
pub fn pca_observation<R: Rng + ?Sized>(h: &Hypergraph, signal: &[f64], lambda: f64, rng: &mut R) -> Result<Tensor> {
    check_signal(h, signal, lambda)?;
    let mut y = pca_mean(h, signal, lambda)?;
    let noise = nonhomogeneous(&adjacency_tensor(h)?, rng)?;
    y.add_scaled(1.0, &noise)?;
    Ok(y)
}

/// Terms `T_k = e_1 ⊗ .. ⊗ e_1 ⊗ e_k`, `k = 1..d`, each of unit norm, whose
/// Rademacher sums all have norm `d^{1-1/p}`.
pub fn lower_bound_series(d: usize, r: usize) -> Result<TensorSeries> {
    ensure!(r >= 1 && d >= 1, "need d >= 1 and r >= 1");
    let terms = (0..d)
        .map(|k| {
            let mut t = Tensor::zeros(r, d)?;
            let mut idx = vec![0; r];
            idx[r - 1] = k;
            t.set(&idx, 1.0);
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    TensorSeries::new(terms)
}

/// Witness `(e_1, .., e_1, (ε_k d^{-1/p})_k)` for `sum_k ε_k T_k`.
pub fn lower_bound_witness(d: usize, r: usize, p: PExponent, signs: &[f64]) -> Vec<Vec<f64>> {
    let mut w = vec![crate::lp::basis(d, 0); r - 1];
    let scale = (d as f64).powf(-p.recip());
    w.push(signs.iter().map(|s| s * scale).collect());
    w
}

/// Terms `u_k^{⊗r}`.
pub fn rank1_series(vectors: &[Vec<f64>], r: usize) -> Result<TensorSeries> {
    ensure!(!vectors.is_empty(), "need at least one vector");
    TensorSeries::new(
        vectors
            .iter()
            .map(|u| Tensor::power(u, r))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// A random tensor model, as written in experiment configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    IidSymmetric {
        d: usize,
        r: usize,
    },
    Nonhomogeneous {
        variance: Tensor,
    },
    CensoredPca {
        hypergraph: Hypergraph,
        /// All ones when absent.
        #[serde(default)]
        signal: Option<Vec<f64>>,
        lambda: f64,
    },
    Series {
        series: TensorSeries,
    },
    Matching {
        family: MatchingFamily,
    },
    Rank1 {
        vectors: Vec<Vec<f64>>,
        r: usize,
    },
    LowerBound {
        d: usize,
        r: usize,
    },
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::IidSymmetric { d, .. } | ModelSpec::LowerBound { d, .. } => *d,
            ModelSpec::Nonhomogeneous { variance } => variance.dim(),
            ModelSpec::CensoredPca { hypergraph, .. } => hypergraph.d(),
            ModelSpec::Series { series } => series.dim(),
            ModelSpec::Matching { family } => family.d(),
            ModelSpec::Rank1 { vectors, .. } => vectors.first().map_or(0, |v| v.len()),
        }
    }

    /// The same model on `R^d`. Only the dimension-indexed families can be
    /// resized; the others accept their own dimension.
    pub fn with_dim(&self, d: usize) -> Result<ModelSpec> {
        match self {
            ModelSpec::IidSymmetric { r, .. } => Ok(ModelSpec::IidSymmetric { d, r: *r }),
            ModelSpec::LowerBound { r, .. } => Ok(ModelSpec::LowerBound { d, r: *r }),
            other if other.dim() == d => Ok(other.clone()),
            _ => Err(Error::invalid(format!(
                "this model has fixed dimension {} and cannot be swept to {d}",
                self.dim()
            ))),
        }
    }

    pub fn build(&self) -> Result<Model> {
        let (mean, series) = match self {
            ModelSpec::IidSymmetric { d, r } => {
                let ones = Tensor::from_fn(*r, *d, |_| 1.0)?;
                (None, SparseSeries::orbit_series(&ones)?)
            }
            ModelSpec::Nonhomogeneous { variance } => (None, SparseSeries::orbit_series(variance)?),
            ModelSpec::CensoredPca {
                hypergraph,
                signal,
                lambda,
            } => {
                let v = signal.clone().unwrap_or_else(|| vec![1.0; hypergraph.d()]);
                check_signal(hypergraph, &v, *lambda)?;
                let a = adjacency_tensor(hypergraph)?;
                (
                    Some(pca_mean(hypergraph, &v, *lambda)?),
                    SparseSeries::orbit_series(&a)?,
                )
            }
            ModelSpec::Series { series } => (None, SparseSeries::from_series(series)),
            ModelSpec::Matching { family } => (None, SparseSeries::from_series(&matching_series(family)?.series)),
            ModelSpec::Rank1 { vectors, r } => (None, SparseSeries::from_series(&rank1_series(vectors, *r)?)),
            ModelSpec::LowerBound { d, r } => (None, SparseSeries::from_series(&lower_bound_series(*d, *r)?)),
        };
        Ok(Model { mean, series })
    }
}

/// A model reduced to its mean and random series.
#[derive(Clone, Debug)]
pub struct Model {
    pub mean: Option<Tensor>,
    pub series: SparseSeries,
}

impl Model {
    pub fn sample<R: Rng + ?Sized>(&self, coeffs: Coefficients, rng: &mut R) -> Result<Tensor> {
        let mut t = draw_series(&self.series, coeffs, rng)?;
        if let Some(m) = &self.mean {
            t.add_scaled(1.0, m)?;
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_deltas() {
        let h = Hypergraph::complete(4, 2).unwrap();
        assert_eq!(deltas(&h), vec![6, 3, 1]);
    }

    #[test]
    fn malformed_edges_are_rejected() {
        assert!(Hypergraph::new(4, 2, vec![vec![1, 0]]).is_err());
        assert!(Hypergraph::new(4, 2, vec![vec![0, 4]]).is_err());
        assert!(Hypergraph::new(4, 2, vec![vec![0, 1], vec![0, 1]]).is_err());
        assert!(serde_json::from_str::<Hypergraph>(r#"{"d":3,"r":2,"edges":[[0,0]]}"#).is_err());
    }

    #[test]
    fn matching_example() {
        let f = MatchingFamily::new(4, vec![vec![[0, 1]], vec![[0, 2], [1, 3]]]).unwrap();
        let m = matching_series(&f).unwrap();
        assert_eq!(m.sizes, vec![1.0, 2.0]);
        assert_eq!(m.degrees, vec![2.0, 2.0, 1.0, 1.0]);
        assert!(MatchingFamily::new(4, vec![vec![[0, 1], [1, 2]]]).is_err());
    }

    #[test]
    fn signal_must_be_signs() {
        let h = Hypergraph::complete(3, 2).unwrap();
        let mut rng = rand::rngs::mock::StepRng::new(0, 1);
        assert!(pca_observation(&h, &[1.0, 0.5, 1.0], 1.0, &mut rng).is_err());
        assert!(pca_observation(&h, &[1.0, 1.0, 1.0], -1.0, &mut rng).is_err());
    }

    #[test]
    fn negative_variance_is_rejected() {
        let a = Tensor::diag(&[1.0, -1.0]).unwrap();
        let mut rng = rand::rngs::mock::StepRng::new(0, 1);
        assert!(nonhomogeneous(&a, &mut rng).is_err());
    }

    #[test]
    fn only_indexed_families_resize() {
        let m = ModelSpec::IidSymmetric { d: 2, r: 3 };
        assert_eq!(m.with_dim(5).unwrap().dim(), 5);
        let s = ModelSpec::LowerBound { d: 2, r: 2 }.build().unwrap();
        assert_eq!(s.series.len(), 2);
        let f = ModelSpec::Matching {
            family: MatchingFamily::new(3, vec![vec![[0, 1]]]).unwrap(),
        };
        assert!(f.with_dim(4).is_err());
        assert!(f.with_dim(3).is_ok());
    }
}
