//! Dense real tensors of order `r` over `R^d`, stored row-major.
//!
//! The entry with multi-index `(i_1, ..., i_r)` lives at flat position
//! `sum_k i_k * d^(r-k)`. Order 0 tensors hold a single scalar.

use itertools::Itertools;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{ensure, Error, Result};

/// Default ceiling on the number of stored entries.
pub const MAX_ENTRIES: usize = 100_000_000;

/// Number of entries of a tensor of the given shape, or an error when it
/// exceeds `limit`.
pub fn checked_len_with_limit(order: usize, dim: usize, limit: usize) -> Result<usize> {
    let mut n: u128 = 1;
    for _ in 0..order {
        n = n.saturating_mul(dim as u128);
    }
    if n > limit as u128 {
        return Err(Error::TooLarge {
            order,
            dim,
            requested: n,
            limit,
        });
    }
    Ok(n as usize)
}

pub fn checked_len(order: usize, dim: usize) -> Result<usize> {
    checked_len_with_limit(order, dim, MAX_ENTRIES)
}

/// Step a row-major multi-index forward. Returns `false` after the last one.
pub fn advance(idx: &mut [usize], dim: usize) -> bool {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < dim {
            return true;
        }
        *slot = 0;
    }
    false
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor")]
pub struct Tensor {
    order: usize,
    dim: usize,
    entries: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTensor {
    order: usize,
    dim: usize,
    entries: Vec<f64>,
}

impl TryFrom<RawTensor> for Tensor {
    type Error = Error;
    fn try_from(raw: RawTensor) -> Result<Self> {
        Tensor::new(raw.order, raw.dim, raw.entries)
    }
}

impl Tensor {
    pub fn new(order: usize, dim: usize, entries: Vec<f64>) -> Result<Self> {
        ensure!(dim >= 1, "tensor dimension must be at least 1");
        let len = checked_len(order, dim)?;
        ensure!(
            entries.len() == len,
            "order {order}, dimension {dim} needs {len} entries, got {}",
            entries.len()
        );
        ensure!(
            entries.iter().all(|x| x.is_finite()),
            "tensor entries must be finite"
        );
        Ok(Tensor {
            order,
            dim,
            entries,
        })
    }

    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        ensure!(dim >= 1, "tensor dimension must be at least 1");
        let len = checked_len(order, dim)?;
        Ok(Tensor {
            order,
            dim,
            entries: vec![0.0; len],
        })
    }

    pub fn scalar(value: f64) -> Self {
        Tensor {
            order: 0,
            dim: 1,
            entries: vec![value],
        }
    }

    /// Builds a tensor by evaluating `f` at every multi-index.
    pub fn from_fn(order: usize, dim: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let mut t = Tensor::zeros(order, dim)?;
        let mut idx = vec![0usize; order];
        for e in t.entries.iter_mut() {
            *e = f(&idx);
            advance(&mut idx, dim);
        }
        Ok(t)
    }

    /// Square matrix from rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        ensure!(rows.iter().all(|r| r.len() == d), "matrix must be square");
        Tensor::new(2, d, rows.concat())
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        Tensor::from_fn(2, values.len(), |ix| if ix[0] == ix[1] { values[ix[0]] } else { 0.0 })
    }

    /// `v_1 ⊗ ... ⊗ v_r`.
    pub fn outer(vectors: &[&[f64]]) -> Result<Self> {
        ensure!(!vectors.is_empty(), "outer product of no vectors");
        let d = vectors[0].len();
        ensure!(vectors.iter().all(|v| v.len() == d), "vectors differ in length");
        Tensor::from_fn(vectors.len(), d, |ix| {
            ix.iter().zip(vectors).map(|(&i, v)| v[i]).product()
        })
    }

    /// `v ⊗ ... ⊗ v` with `order` factors.
    pub fn power(v: &[f64], order: usize) -> Result<Self> {
        Tensor::from_fn(order, v.len(), |ix| ix.iter().map(|&i| v[i]).product())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn same_shape(&self, other: &Tensor) -> bool {
        self.order == other.order && self.dim == other.dim
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order);
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.order];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.dim;
            flat /= self.dim;
        }
        idx
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.entries[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let k = self.flat_index(idx);
        self.entries[k] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, alpha: f64) -> Tensor {
        Tensor {
            order: self.order,
            dim: self.dim,
            entries: self.entries.iter().map(|x| alpha * x).collect(),
        }
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &Tensor) -> Result<()> {
        ensure!(self.same_shape(other), "shape mismatch in addition");
        for (x, y) in self.entries.iter_mut().zip(&other.entries) {
            *x += alpha * y;
        }
        Ok(())
    }

    /// Contracts one slot against `v`, lowering the order by one.
    pub fn contract_slot(&self, slot: usize, v: &[f64]) -> Result<Tensor> {
        ensure!(slot < self.order, "slot {slot} out of range for order {}", self.order);
        ensure!(v.len() == self.dim, "vector length {} != dimension {}", v.len(), self.dim);
        Ok(Tensor {
            order: self.order - 1,
            dim: self.dim,
            entries: fold_slot(&self.entries, self.dim, self.order, slot, v),
        })
    }

    /// `T[v_1, ..., v_r]`.
    pub fn multilinear(&self, vectors: &[&[f64]]) -> Result<f64> {
        ensure!(vectors.len() == self.order, "need {} vectors, got {}", self.order, vectors.len());
        ensure!(vectors.iter().all(|v| v.len() == self.dim), "vector length mismatch");
        let mut cur = self.entries.clone();
        for v in vectors.iter().rev() {
            cur = fold_last(&cur, self.dim, v);
        }
        Ok(cur[0])
    }

    /// The vector `T[v_1, .., v_{j-1}, ·, v_{j+1}, .., v_r]`; `vectors[free]` is ignored.
    pub fn contract_except<V: AsRef<[f64]>>(&self, vectors: &[V], free: usize) -> Vec<f64> {
        debug_assert_eq!(vectors.len(), self.order);
        let (d, r) = (self.dim, self.order);
        let mut cur = if free + 1 < r {
            let mut c = fold_last(&self.entries, d, vectors[r - 1].as_ref());
            for v in vectors[free + 1..r - 1].iter().rev() {
                c = fold_last(&c, d, v.as_ref());
            }
            c
        } else {
            self.entries.clone()
        };
        for v in &vectors[..free] {
            cur = fold_first(&cur, d, v.as_ref());
        }
        cur
    }

    /// `T[u, ..., u]`.
    pub fn form(&self, u: &[f64]) -> f64 {
        let mut cur = self.entries.clone();
        for _ in 0..self.order {
            cur = fold_last(&cur, self.dim, u);
        }
        cur[0]
    }
}

fn fold_last(src: &[f64], d: usize, v: &[f64]) -> Vec<f64> {
    src.chunks_exact(d)
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn fold_first(src: &[f64], d: usize, v: &[f64]) -> Vec<f64> {
    let stride = src.len() / d;
    let mut out = vec![0.0; stride];
    for (a, &va) in v.iter().enumerate() {
        if va == 0.0 {
            continue;
        }
        for (o, s) in out.iter_mut().zip(&src[a * stride..(a + 1) * stride]) {
            *o += va * s;
        }
    }
    out
}

fn fold_slot(src: &[f64], d: usize, order: usize, slot: usize, v: &[f64]) -> Vec<f64> {
    let inner = d.pow((order - slot - 1) as u32);
    if inner == 1 {
        return fold_last(src, d, v);
    }
    let outer = src.len() / (d * inner);
    let mut out = vec![0.0; outer * inner];
    for o in 0..outer {
        let dst = &mut out[o * inner..(o + 1) * inner];
        let base = o * d * inner;
        for (a, &va) in v.iter().enumerate() {
            if va == 0.0 {
                continue;
            }
            let block = &src[base + a * inner..base + (a + 1) * inner];
            for (x, y) in dst.iter_mut().zip(block) {
                *x += va * y;
            }
        }
    }
    out
}

fn ensure_same_shape(a: &Tensor, b: &Tensor) -> Result<()> {
    ensure!(
        a.same_shape(b),
        "shape mismatch: ({}, {}) vs ({}, {})",
        a.order,
        a.dim,
        b.order,
        b.dim
    );
    Ok(())
}

pub fn inner(a: &Tensor, b: &Tensor) -> Result<f64> {
    ensure_same_shape(a, b)?;
    Ok(a.entries.iter().zip(&b.entries).map(|(x, y)| x * y).sum())
}

pub fn frobenius(a: &Tensor) -> f64 {
    a.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn hadamard(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    ensure_same_shape(a, b)?;
    Ok(Tensor {
        order: a.order,
        dim: a.dim,
        entries: a.entries.iter().zip(&b.entries).map(|(x, y)| x * y).collect(),
    })
}

/// Contracts the last `q` slots of `a` against the first `q` slots of `b`.
///
/// The result has order `2r - 2q`: its leading `r - q` slots come from `a`
/// and its trailing ones from `b`. `star(a, b, r)` is the inner product and
/// `star(a, b, 0)` the outer product.
pub fn star(a: &Tensor, b: &Tensor, q: usize) -> Result<Tensor> {
    star_with_limit(a, b, q, MAX_ENTRIES)
}

pub fn star_with_limit(a: &Tensor, b: &Tensor, q: usize, limit: usize) -> Result<Tensor> {
    ensure_same_shape(a, b)?;
    let (r, d) = (a.order, a.dim);
    ensure!(q <= r, "contraction depth {q} exceeds order {r}");
    let out_order = 2 * (r - q);
    checked_len_with_limit(out_order, d, limit)?;
    let m = d.pow((r - q) as u32);
    let k = d.pow(q as u32);
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        let arow = &a.entries[i * k..(i + 1) * k];
        let orow = &mut out[i * m..(i + 1) * m];
        for (l, &x) in arow.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (o, y) in orow.iter_mut().zip(&b.entries[l * m..(l + 1) * m]) {
                *o += x * y;
            }
        }
    }
    Ok(Tensor {
        order: out_order,
        dim: d,
        entries: out,
    })
}

/// `A v^{⊗q}` with the last `q` slots contracted.
pub fn contract(a: &Tensor, v: &[f64], q: usize) -> Result<Tensor> {
    ensure!(q <= a.order, "cannot contract {q} slots of an order {} tensor", a.order);
    ensure!(v.len() == a.dim, "vector length {} != dimension {}", v.len(), a.dim);
    let mut cur = a.entries.clone();
    for _ in 0..q {
        cur = fold_last(&cur, a.dim, v);
    }
    Ok(Tensor {
        order: a.order - q,
        dim: a.dim,
        entries: cur,
    })
}

fn permuted(idx: &[usize], perm: &[usize], buf: &mut [usize]) {
    for (b, &p) in buf.iter_mut().zip(perm) {
        *b = idx[p];
    }
}

/// Average of `a` over all permutations of its slots.
pub fn symmetrize(a: &Tensor) -> Tensor {
    let r = a.order;
    let perms: Vec<Vec<usize>> = (0..r).permutations(r).collect();
    let scale = 1.0 / perms.len() as f64;
    let mut idx = vec![0; r];
    let mut buf = vec![0; r];
    let mut out = a.clone();
    for e in out.entries.iter_mut() {
        let mut s = 0.0;
        for p in &perms {
            permuted(&idx, p, &mut buf);
            s += a.get(&buf);
        }
        *e = s * scale;
        advance(&mut idx, a.dim);
    }
    out
}

/// `1e-12 * max |entry|`.
pub fn default_symmetry_tol(a: &Tensor) -> f64 {
    1e-12 * a.max_abs()
}

/// Whether every entry agrees with all of its slot permutations up to `tol`.
pub fn is_symmetric(a: &Tensor, tol: f64) -> bool {
    let r = a.order;
    if r < 2 {
        return true;
    }
    let perms: Vec<Vec<usize>> = (0..r).permutations(r).skip(1).collect();
    let mut idx = vec![0; r];
    let mut buf = vec![0; r];
    for &e in &a.entries {
        for p in &perms {
            permuted(&idx, p, &mut buf);
            if (a.get(&buf) - e).abs() > tol {
                return false;
            }
        }
        advance(&mut idx, a.dim);
    }
    true
}

pub fn has_repeated_index(idx: &[usize]) -> bool {
    idx.iter().enumerate().any(|(k, i)| idx[..k].contains(i))
}

/// Whether every entry with a repeated index is exactly zero.
pub fn is_diagonal_free(a: &Tensor) -> bool {
    let mut idx = vec![0; a.order];
    for &e in &a.entries {
        if e != 0.0 && has_repeated_index(&idx) {
            return false;
        }
        advance(&mut idx, a.dim);
    }
    true
}

/// Symmetric, diagonal-free embedding of an order `r` tensor over `R^d`
/// into order `r` over `R^{rd}`.
///
/// As a form, `sym_embed(T)[v_1, .., v_r] = sum_τ T[v_τ(1)^[1], .., v_τ(r)^[r]]`
/// where `v^[q]` is the `q`-th block of `d` coordinates. For matrices this is
/// the dilation `[[0, A], [Aᵀ, 0]]`.
pub fn sym_embed(t: &Tensor) -> Result<Tensor> {
    sym_embed_with_limit(t, MAX_ENTRIES)
}

pub fn sym_embed_with_limit(t: &Tensor, limit: usize) -> Result<Tensor> {
    let (r, d) = (t.order, t.dim);
    ensure!(r >= 1, "cannot embed an order 0 tensor");
    checked_len_with_limit(r, r * d, limit)?;
    let mut out = Tensor::zeros(r, r * d)?;
    let mut pos = vec![0; r];
    let mut src = vec![0; r];
    // `blocks[k]` is the block holding slot k; slot k reads index of the
    // original slot `blocks[k]`.
    for blocks in (0..r).permutations(r) {
        let mut idx = vec![0; r];
        loop {
            for k in 0..r {
                pos[k] = blocks[k] * d + idx[k];
                src[blocks[k]] = idx[k];
            }
            out.set(&pos, t.get(&src));
            if !advance(&mut idx, d) {
                break;
            }
        }
    }
    Ok(out)
}

/// The `q`-th block (1-based) of `d` consecutive coordinates of `v`.
pub fn vector_piece(v: &[f64], q: usize, d: usize) -> Result<&[f64]> {
    ensure!(d >= 1 && v.len() % d == 0, "length {} is not a multiple of {d}", v.len());
    let pieces = v.len() / d;
    ensure!(q >= 1 && q <= pieces, "piece {q} out of range 1..={pieces}");
    Ok(&v[(q - 1) * d..q * d])
}

/// A finite family of same-shape tensors, the coefficients of a Gaussian series.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(try_from = "Vec<Tensor>")]
pub struct TensorSeries {
    terms: Vec<Tensor>,
}

impl TryFrom<Vec<Tensor>> for TensorSeries {
    type Error = Error;
    fn try_from(terms: Vec<Tensor>) -> Result<Self> {
        TensorSeries::new(terms)
    }
}

impl Serialize for TensorSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.terms.serialize(s)
    }
}

impl TensorSeries {
    pub fn new(terms: Vec<Tensor>) -> Result<Self> {
        ensure!(!terms.is_empty(), "a series needs at least one term");
        ensure!(
            terms.iter().all(|t| t.same_shape(&terms[0])),
            "series terms differ in shape"
        );
        Ok(TensorSeries { terms })
    }

    pub fn terms(&self) -> &[Tensor] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn order(&self) -> usize {
        self.terms[0].order
    }

    pub fn dim(&self) -> usize {
        self.terms[0].dim
    }

    pub fn is_symmetric(&self) -> bool {
        self.terms.iter().all(|t| is_symmetric(t, 1e-10 * t.max_abs()))
    }

    /// `sum_k c_k T_k`.
    pub fn combine(&self, coeffs: &[f64]) -> Result<Tensor> {
        ensure!(coeffs.len() == self.terms.len(), "need one coefficient per term");
        let mut out = Tensor::zeros(self.order(), self.dim())?;
        for (c, t) in coeffs.iter().zip(&self.terms) {
            out.add_scaled(*c, t)?;
        }
        Ok(out)
    }

    /// `sum_k ||T_k||_F^2`.
    pub fn frobenius_sq(&self) -> f64 {
        self.terms.iter().map(|t| t.entries.iter().map(|x| x * x).sum::<f64>()).sum()
    }
}
