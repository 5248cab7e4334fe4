//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tensorconc::Tensor;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].powi(2))
            .sum();
        let scale: f64 = m.iter().map(|x| x * x).sum();
        if off <= 1e-30 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest eigenvalue modulus of a symmetric matrix.
pub fn jacobi_spectral_norm(a: &Tensor) -> f64 {
    jacobi_eigenvalues(a.entries(), a.dim())
        .into_iter()
        .fold(0.0, |m, x| m.max(x.abs()))
}

/// `sqrt(λ_max(A Aᵀ))` via Jacobi.
pub fn operator_norm(a: &Tensor) -> f64 {
    let n = a.dim();
    let e = a.entries();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = (0..n).map(|k| e[i * n + k] * e[j * n + k]).sum();
        }
    }
    jacobi_eigenvalues(&g, n).last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// `T[x_1, .., x_r]` summed entry by entry.
pub fn naive_multilinear(t: &Tensor, xs: &[Vec<f64>]) -> f64 {
    let (r, d) = (t.order(), t.dim());
    let mut total = 0.0;
    for (flat, &v) in t.entries().iter().enumerate() {
        let mut rest = flat;
        let mut prod = v;
        for k in (0..r).rev() {
            prod *= xs[k][rest % d];
            rest /= d;
        }
        total += prod;
    }
    total
}

pub fn pnorm(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else {
        v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

pub fn frobenius_sq(t: &Tensor) -> f64 {
    t.entries().iter().map(|x| x * x).sum()
}

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_tensor<R: Rng>(r: usize, d: usize, rng: &mut R) -> Tensor {
    Tensor::from_fn(r, d, |_| gaussian(rng)).unwrap()
}

/// Average over all index permutations, written out directly.
pub fn symmetrized<R: Rng>(r: usize, d: usize, rng: &mut R) -> Tensor {
    let t = random_tensor(r, d, rng);
    let perms = permutations(r);
    Tensor::from_fn(r, d, |idx| {
        perms
            .iter()
            .map(|p| {
                let j: Vec<usize> = p.iter().map(|&k| idx[k]).collect();
                t.get(&j)
            })
            .sum::<f64>()
            / perms.len() as f64
    })
    .unwrap()
}

pub fn permutations(r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(r - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, r - 1);
            out.push(q);
        }
    }
    out
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}
