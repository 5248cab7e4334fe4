//! `ℓ_p` geometry on `R^d`: norms, duality, uniform sampling from the unit
//! ball and the uniform-convexity quantities used by the chaining arguments.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ensure, Error, Result};

/// An exponent `p` in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct PExponent(f64);

impl PExponent {
    pub const ONE: PExponent = PExponent(1.0);
    pub const TWO: PExponent = PExponent(2.0);
    pub const INFINITY: PExponent = PExponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        ensure!(p >= 1.0, "exponent p must be at least 1, got {p}");
        Ok(PExponent(p))
    }

    pub fn finite(p: f64) -> Result<Self> {
        ensure!(p.is_finite(), "exponent p must be finite here");
        Self::new(p)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// `p* = p / (p - 1)`, with `1* = ∞` and `∞* = 1`.
    pub fn dual(self) -> PExponent {
        if self.0 == 1.0 {
            PExponent::INFINITY
        } else if self.0.is_infinite() {
            PExponent::ONE
        } else {
            PExponent(self.0 / (self.0 - 1.0))
        }
    }

    /// `1/p`, zero at infinity.
    pub fn recip(self) -> f64 {
        1.0 / self.0
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for PExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for PExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        let p = match Repr::deserialize(d)? {
            Repr::Num(p) => p,
            Repr::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => f64::INFINITY,
            Repr::Text(s) => return Err(serde::de::Error::custom(format!("bad exponent {s:?}"))),
        };
        PExponent::new(p).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<f64> for PExponent {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        PExponent::new(p)
    }
}

/// `||v||_p`, computed with a rescaling by `max |v_i|` so large exponents do
/// not overflow.
pub fn lp_norm(v: &[f64], p: PExponent) -> f64 {
    let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let p = p.0;
    if m == 0.0 || p.is_infinite() {
        return m;
    }
    if p == 1.0 {
        return v.iter().map(|x| x.abs()).sum();
    }
    if p == 2.0 {
        return m * v.iter().map(|x| (x / m) * (x / m)).sum::<f64>().sqrt();
    }
    m * v.iter().map(|x| (x.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

pub fn basis(d: usize, j: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[j] = 1.0;
    e
}

/// The maximizer of `<c, x>` over the unit `ℓ_p` ball and the maximum
/// `||c||_{p*}`.
///
/// For `p = 1` the maximizer is `sign(c_j) e_j` at the first index of largest
/// modulus. For `c = 0` it is `e_1` with value 0.
pub fn linear_maximizer(c: &[f64], p: PExponent) -> (Vec<f64>, f64) {
    let d = c.len();
    let (jmax, m) = c
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(j, m), (i, x)| if x.abs() > m { (i, x.abs()) } else { (j, m) });
    if m == 0.0 {
        return (basis(d, 0), 0.0);
    }
    if p.0 == 1.0 {
        let mut x = vec![0.0; d];
        x[jmax] = c[jmax].signum();
        return (x, m);
    }
    if p.0.is_infinite() {
        let x = c
            .iter()
            .map(|&ci| if ci == 0.0 { 0.0 } else { ci.signum() })
            .collect();
        return (x, lp_norm(c, PExponent::ONE));
    }
    let q = p.dual();
    let n = lp_norm(c, q);
    let e = q.0 - 1.0;
    let x = c.iter().map(|&ci| ci.signum() * (ci.abs() / n).powf(e)).collect();
    (x, n)
}

/// A draw from the uniform distribution on the unit `ℓ_p` ball of `R^d`.
///
/// With `G_i ~ Gamma(1/p, 1)`, independent signs and `W ~ Exp(1)`, the point
/// `s / (sum |s_i|^p + W)^{1/p}` with `s_i = ±G_i^{1/p}` is uniform.
pub fn sample_ball<R: Rng + ?Sized>(d: usize, p: PExponent, rng: &mut R) -> Vec<f64> {
    assert!(p.is_finite(), "sampling needs a finite exponent");
    let inv = 1.0 / p.0;
    let gamma = Gamma::new(inv, 1.0).expect("valid gamma shape");
    let mut s = Vec::with_capacity(d);
    let mut total = 0.0;
    for _ in 0..d {
        let g: f64 = gamma.sample(rng);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        total += g;
        s.push(sign * g.powf(inv));
    }
    let w: f64 = Exp1.sample(rng);
    let scale = (total + w).powf(-inv);
    s.iter_mut().for_each(|x| *x *= scale);
    s
}

/// A point of the unit `ℓ_p` sphere: a ball draw pushed radially outward.
pub fn sample_sphere<R: Rng + ?Sized>(d: usize, p: PExponent, rng: &mut R) -> Vec<f64> {
    loop {
        let mut x = sample_ball(d, p, rng);
        let n = lp_norm(&x, p);
        if n > 0.0 {
            x.iter_mut().for_each(|v| *v /= n);
            return x;
        }
    }
}

/// `E[b_1^2 ... b_r^2] <= d^{-2r/p}` for `b` uniform on the ball.
pub fn ball_moment_bound(d: usize, r: usize, p: PExponent) -> f64 {
    (d as f64).powf(-2.0 * r as f64 / p.0)
}

/// `||x||^2 + (p-1)||y||^2 - ((||x-y||^p + ||x+y||^p)/2)^{2/p}`, which is
/// nonnegative for `p >= 2`.
pub fn convexity_gap(x: &[f64], y: &[f64], p: PExponent) -> Result<f64> {
    ensure!(p.0 >= 2.0 && p.is_finite(), "the convexity inequality needs 2 <= p < inf");
    ensure!(x.len() == y.len(), "vector lengths differ");
    let pv = p.0;
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let nx = lp_norm(x, p);
    let ny = lp_norm(y, p);
    let avg = 0.5 * (lp_norm(&diff, p).powf(pv) + lp_norm(&sum, p).powf(pv));
    Ok(nx * nx + (pv - 1.0) * ny * ny - avg.powf(2.0 / pv))
}

/// Whether `||x + t b||_p <= sqrt(t^2 + p - 1)`.
pub fn half_ball_indicator(x: &[f64], t: f64, b: &[f64], p: PExponent) -> bool {
    let shifted: Vec<f64> = x.iter().zip(b).map(|(xi, bi)| xi + t * bi).collect();
    lp_norm(&shifted, p) <= (t * t + p.0 - 1.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn duals() {
        assert_eq!(PExponent::TWO.dual().value(), 2.0);
        assert_eq!(PExponent::ONE.dual(), PExponent::INFINITY);
        assert_eq!(PExponent::new(4.0).unwrap().dual().value(), 4.0 / 3.0);
        assert!(PExponent::new(0.5).is_err());
        assert!(PExponent::new(f64::NAN).is_err());
    }

    #[test]
    fn norm_values() {
        let v = [3.0, -4.0];
        assert_eq!(lp_norm(&v, PExponent::TWO), 5.0);
        assert_eq!(lp_norm(&v, PExponent::ONE), 7.0);
        assert_eq!(lp_norm(&v, PExponent::INFINITY), 4.0);
        assert!(lp_norm(&[1e200, 1e200], PExponent::new(50.0).unwrap()).is_finite());
    }

    #[test]
    fn maximizer_examples() {
        let (x, v) = linear_maximizer(&[3.0, 4.0], PExponent::TWO);
        assert!((x[0] - 0.6).abs() < 1e-15 && (x[1] - 0.8).abs() < 1e-15);
        assert_eq!(v, 5.0);
        let (x, v) = linear_maximizer(&[1.0, -2.0, 2.0], PExponent::ONE);
        assert_eq!(x, vec![0.0, -1.0, 0.0]);
        assert_eq!(v, 2.0);
        let (x, v) = linear_maximizer(&[0.0; 3], PExponent::new(3.0).unwrap());
        assert_eq!(x, vec![1.0, 0.0, 0.0]);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn p_infinity_round_trips_through_json() {
        let s = serde_json::to_string(&PExponent::INFINITY).unwrap();
        assert_eq!(s, "\"inf\"");
        let back: PExponent = serde_json::from_str(&s).unwrap();
        assert_eq!(back, PExponent::INFINITY);
        assert!(serde_json::from_str::<PExponent>("0.3").is_err());
    }

    #[test]
    fn sphere_points_have_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = PExponent::new(3.0).unwrap();
        for _ in 0..50 {
            let x = sample_sphere(5, p, &mut rng);
            assert!((lp_norm(&x, p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn convexity_gap_needs_p_at_least_two() {
        assert!(convexity_gap(&[1.0], &[0.0], PExponent::new(1.5).unwrap()).is_err());
    }
}
