mod common;

use common::*;
use proptest::prelude::*;
use tensorconc::lp::{
    ball_moment_bound, convexity_gap, half_ball_indicator, linear_maximizer, lp_norm, sample_ball, sample_sphere,
};
use tensorconc::PExponent;

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), Just(f64::INFINITY), 1.0f64..12.0]
}

fn vector(max_d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 1..=max_d)
}

proptest! {
    #[test]
    fn norm_matches_definition(v in vector(8), p in exponent()) {
        let got = lp_norm(&v, PExponent::new(p).unwrap());
        let want = pnorm(&v, p);
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want));
    }

    #[test]
    fn maximizer_attains_the_dual_norm(c in vector(8), p in exponent()) {
        let pe = PExponent::new(p).unwrap();
        let (x, value) = linear_maximizer(&c, pe);
        let dual = pe.dual().value();
        let want = pnorm(&c, dual);
        prop_assert!((value - want).abs() <= 1e-10 * (1.0 + want));
        let achieved: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
        prop_assert!((achieved - want).abs() <= 1e-9 * (1.0 + want));
        prop_assert!(pnorm(&x, p) <= 1.0 + 1e-12);
    }

    #[test]
    fn maximizer_beats_random_feasible_points(c in vector(6), p in 1.0f64..8.0, seed in 0u64..1000) {
        let pe = PExponent::new(p).unwrap();
        let (_, value) = linear_maximizer(&c, pe);
        let mut rng = rng(seed);
        for _ in 0..20 {
            let y = sample_ball(c.len(), pe, &mut rng);
            let v: f64 = c.iter().zip(&y).map(|(a, b)| a * b).sum();
            prop_assert!(v <= value + 1e-12);
        }
    }

    #[test]
    fn ball_samples_lie_in_the_ball(d in 1usize..10, p in 1.0f64..10.0, seed in 0u64..1000) {
        let pe = PExponent::new(p).unwrap();
        let mut rng = rng(seed);
        for _ in 0..20 {
            prop_assert!(pnorm(&sample_ball(d, pe, &mut rng), p) <= 1.0 + 1e-12);
            prop_assert!((pnorm(&sample_sphere(d, pe, &mut rng), p) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn convexity_gap_is_nonnegative(d in 1usize..8, p in 2.0f64..10.0, seed in 0u64..1000) {
        let pe = PExponent::new(p).unwrap();
        let mut rng = rng(seed);
        let x = sample_ball(d, pe, &mut rng);
        let y = sample_ball(d, pe, &mut rng);
        prop_assert!(convexity_gap(&x, &y, pe).unwrap() >= -1e-12);
    }

    #[test]
    fn parallelogram_law_at_two(x in vector(6), y in vector(6)) {
        let n = x.len().min(y.len());
        let g = convexity_gap(&x[..n], &y[..n], PExponent::TWO).unwrap();
        prop_assert!(g.abs() <= 1e-10 * (1.0 + pnorm(&x, 2.0).powi(2) + pnorm(&y, 2.0).powi(2)));
    }

    #[test]
    fn origin_is_always_in_the_half_ball(d in 1usize..8, p in 2.0f64..8.0, t in 0.01f64..4.0, seed in 0u64..1000) {
        let pe = PExponent::new(p).unwrap();
        let mut rng = rng(seed);
        let b = sample_ball(d, pe, &mut rng);
        prop_assert!(half_ball_indicator(&vec![0.0; d], t, &b, pe));
    }
}

#[test]
fn ball_first_coordinate_moment_at_two() {
    // For the uniform Euclidean ball E[b_1^2] = 1/(d+2), below d^{-2/2} = 1/d.
    let d = 5;
    let mut rng = rng(77);
    let n = 200_000;
    let vals: Vec<f64> = (0..n)
        .map(|_| sample_ball(d, PExponent::TWO, &mut rng)[0].powi(2))
        .collect();
    let (m, se) = mean_and_stderr(&vals);
    assert!((m - 1.0 / (d as f64 + 2.0)).abs() <= 4.0 * se, "mean {m} se {se}");
    assert!(m <= ball_moment_bound(d, 1, PExponent::TWO));
}

#[test]
fn l1_ball_volume_fraction() {
    // The cross-polytope in R^2 is the square |x|+|y| <= 1, so P(|x| <= 1/2)
    // = 1 - (1/2)^2 = 3/4.
    let mut rng = rng(78);
    let n = 100_000;
    let hits = (0..n)
        .filter(|_| sample_ball(2, PExponent::ONE, &mut rng)[0].abs() <= 0.5)
        .count() as f64
        / n as f64;
    let se = (0.75f64 * 0.25 / n as f64).sqrt();
    assert!((hits - 0.75).abs() <= 4.0 * se, "fraction {hits}");
}

#[test]
fn convexity_gap_rejects_small_p() {
    assert!(convexity_gap(&[1.0], &[1.0], PExponent::new(1.9).unwrap()).is_err());
    assert!(convexity_gap(&[1.0], &[1.0, 2.0], PExponent::TWO).is_err());
}
