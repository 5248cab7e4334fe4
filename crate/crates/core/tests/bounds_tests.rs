use proptest::prelude::*;
use tensorconc::bounds::{
    hypergraph_bound, hypergraph_bound_for, indep_entry_bound, lambda_threshold, master_bound, matching_bound,
    nck_holder_matching, nck_holder_series, profile_bounds, sharpest_bound, trivial_bound, type2_bound, BoundName,
};
use tensorconc::models::{adjacency_tensor, matching_series, Hypergraph, MatchingFamily};
use tensorconc::variance::{MethodTag, VarianceProfile};
use tensorconc::{PExponent, SolverConfig, Tensor, TensorSeries};

fn profile(d: usize, p: f64, sigma: Vec<f64>, t2: f64) -> VarianceProfile {
    let r = sigma.len() - 1;
    VarianceProfile {
        p: PExponent::new(p).unwrap(),
        order: r,
        dim: d,
        methods: vec![MethodTag::Exact; r + 1],
        sigma,
        sigma_type2: t2,
        type2_method: MethodTag::Exact,
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

#[test]
fn master_unit_profile() {
    let prof = profile(2, 2.0, vec![1.0; 3], 1.0);
    let b = master_bound(&prof, 1.0).unwrap();
    assert_eq!(b.name, BoundName::Master);
    assert!(close(b.value, 3f64.ln() + 1.0));
    assert!(close(master_bound(&prof, 2.0).unwrap().value, 2.0 * b.value));
    let s = sharpest_bound(&prof, 1.0).unwrap();
    assert!(close(s.value, 2f64.sqrt() * b.value));
}

#[test]
fn master_mixed_term_takes_the_largest_q() {
    // d = 16, p = 4: prefactor 16^{1/4} = 2.
    let prof = profile(16, 4.0, vec![1.0, 0.5, 4.0, 27.0], 1.0);
    let mixed = f64::max(4f64.sqrt(), 27f64.powf(1.0 / 3.0));
    let want = 2.0 * (17f64.ln() * 0.5 + mixed);
    assert!(close(master_bound(&prof, 1.0).unwrap().value, want));
}

#[test]
fn type2_examples() {
    let one = profile(1, 3.0, vec![1.0, 1.0], 1.0);
    assert!(close(type2_bound(&one, 1.0).unwrap().value, 3f64.sqrt() * 2f64.ln()));
    // Continuity at p = 2r.
    let r = 2;
    let below = type2_bound(&profile(9, 2.0 * r as f64 - 1e-9, vec![1.0; r + 1], 1.0), 1.0).unwrap().value;
    let at = type2_bound(&profile(9, 2.0 * r as f64, vec![1.0; r + 1], 1.0), 1.0).unwrap().value;
    let above = type2_bound(&profile(9, 2.0 * r as f64 + 1e-9, vec![1.0; r + 1], 1.0), 1.0).unwrap().value;
    assert!((below - at).abs() < 1e-6 && (above - at).abs() < 1e-6);
    // d unit-norm terms: σ_T2 = √d.
    let d = 10usize;
    for p in [2.0, 3.0, 6.0] {
        let prof = profile(d, p, vec![1.0; 4], (d as f64).sqrt());
        let want = p.sqrt() * 11f64.ln() * (d as f64).powf(1.0 - f64::min(1.0 / p, 1.0 / 6.0));
        assert!(close(type2_bound(&prof, 1.0).unwrap().value, want));
    }
}

#[test]
fn trivial_example() {
    let prof = profile(4, 2.0, vec![1.0, 1.0, 1.0], 1.0);
    assert!(close(trivial_bound(&prof, 1.0).unwrap().value, 2.0));
    let prof3 = profile(4, 2.0, vec![3.0, 1.0, 1.0], 1.0);
    assert!(close(trivial_bound(&prof3, 1.0).unwrap().value, 6.0));
}

#[test]
fn hypergraph_examples() {
    let single = Hypergraph::new(5, 3, vec![vec![0, 2, 4]]).unwrap();
    assert!(close(hypergraph_bound_for(&single, 1.0).unwrap().value, 6f64.ln() + 1.0));
    let k4 = Hypergraph::complete(4, 2).unwrap();
    let want = 5f64.ln() * 3f64.sqrt() + 6f64.powf(0.25);
    assert!(close(hypergraph_bound_for(&k4, 1.0).unwrap().value, want));
}

#[test]
fn hypergraph_bound_is_monotone_in_each_delta() {
    let base = [10.0, 4.0, 2.0, 1.0];
    let v0 = hypergraph_bound(&base, 8, 1.0).unwrap().value;
    for j in 0..base.len() {
        let mut up = base;
        up[j] *= 2.0;
        assert!(hypergraph_bound(&up, 8, 1.0).unwrap().value >= v0);
    }
}

#[test]
fn single_edge_threshold() {
    let h = Hypergraph::new(2, 2, vec![vec![0, 1]]).unwrap();
    let cfg = SolverConfig::default();
    for c in [1.0, 2.5] {
        let b = lambda_threshold(&h, c, &cfg).unwrap();
        assert!(close(b.value, c * (3f64.ln() + 1.0)));
        assert!(close(b.inputs["adjacency_norm"].as_f64().unwrap(), 1.0));
    }
    assert!(lambda_threshold(&Hypergraph::new(3, 2, vec![]).unwrap(), 1.0, &cfg).is_err());
}

#[test]
fn full_information_threshold_decays_like_the_dimension_power() {
    // λ_A ≍ ln(d) d^{(1-r)/2}; the ratio should stay within a bounded band.
    let cfg = SolverConfig::default();
    let ratios: Vec<f64> = [4usize, 8, 16, 32]
        .iter()
        .map(|&d| {
            let h = Hypergraph::complete(d, 2).unwrap();
            let v = lambda_threshold(&h, 1.0, &cfg).unwrap().value;
            v / (((d + 1) as f64).ln() * (d as f64).powf(-0.5))
        })
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo < 2.0, "ratios {ratios:?}");
}

#[test]
fn matching_single_matching_at_eight() {
    let d = 10;
    let m = 4.0;
    let degrees = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0];
    let b = matching_bound(&[m], &degrees, d, PExponent::new(8.0).unwrap(), 1.0).unwrap();
    let want = (d as f64).powf(3.0 / 8.0) * 11f64.ln() * m.powf(0.25 + 3.0 / 8.0);
    assert!(close(b.value, want));
}

#[test]
fn matching_at_four_uses_the_largest_size() {
    let sizes = [1.0, 3.0, 2.0];
    let degrees = [2.0; 6];
    let b = matching_bound(&sizes, &degrees, 6, PExponent::new(4.0).unwrap(), 1.0).unwrap();
    let want = 6f64.powf(0.25) * 7f64.ln() * 6f64.powf(0.25) * 2f64.powf(0.25) * 3f64.powf(0.25);
    assert!(close(b.value, want));
    // Approaching 4 from above converges to the same value.
    let near = matching_bound(&sizes, &degrees, 6, PExponent::new(4.0 + 1e-7).unwrap(), 1.0).unwrap();
    assert!((near.value - b.value).abs() < 1e-3 * b.value);
    assert!(matching_bound(&sizes, &degrees, 6, PExponent::new(3.9).unwrap(), 1.0).is_err());
}

#[test]
fn matching_beats_holder_on_an_irregular_star_family() {
    // d - 1 single-edge matchings through vertex 0: small sizes, one large degree.
    let d = 64;
    let family = MatchingFamily::new(d, (1..d).map(|k| vec![[0, k]]).collect()).unwrap();
    let data = matching_series(&family).unwrap();
    let p = PExponent::new(8.0).unwrap();
    let m = matching_bound(&data.sizes, &data.degrees, d, p, 1.0).unwrap().value;
    let n = nck_holder_matching(&data.degrees, d, p, 1.0).unwrap().value;
    assert!(m < n, "matching {m} vs holder {n}");
}

#[test]
fn holder_example() {
    let b = nck_holder_matching(&[2.0, 2.0, 1.0, 1.0], 4, PExponent::new(4.0).unwrap(), 1.0).unwrap();
    assert!(close(b.value, 5f64.ln().sqrt() * 2.0 * 2f64.sqrt()));
    let b3 = nck_holder_matching(&[2.0, 2.0, 1.0, 1.0], 4, PExponent::new(4.0).unwrap(), 3.0).unwrap();
    assert!(close(b3.value, 3.0 * b.value));
}

#[test]
fn holder_series_at_two_is_log_times_type2() {
    let a = Tensor::diag(&[1.0, -2.0, 0.5]).unwrap();
    let b = Tensor::from_rows(&[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap();
    let s = TensorSeries::new(vec![a, b]).unwrap();
    let v = nck_holder_series(&s, PExponent::TWO, 1.0, &SolverConfig::default()).unwrap().value;
    assert!(close(v, 4f64.ln().sqrt() * 5f64.sqrt()));
    let cube = TensorSeries::new(vec![Tensor::zeros(3, 2).unwrap()]).unwrap();
    assert!(nck_holder_series(&cube, PExponent::TWO, 1.0, &SolverConfig::default()).is_err());
}

#[test]
fn indep_entry_at_two_uses_max_entries() {
    let a = Tensor::from_rows(&[vec![1.0, 2.0, 0.0], vec![2.0, 0.0, 3.0], vec![0.0, 3.0, 4.0]]).unwrap();
    let cfg = SolverConfig::default();
    let b = indep_entry_bound(&a, PExponent::TWO, 1.0, &cfg).unwrap();
    // Row sums (3, 5, 7), total 15, largest entry 4.
    let want = 4f64.ln() * 7f64.sqrt() + (15f64.powf(0.25) * 4f64.powf(0.25));
    assert!(close(b.value, want), "{} vs {want}", b.value);
    assert_eq!(indep_entry_bound(&Tensor::zeros(3, 4).unwrap(), PExponent::new(3.0).unwrap(), 1.0, &cfg).unwrap().value, 0.0);
    assert!(indep_entry_bound(&a, PExponent::new(1.5).unwrap(), 1.0, &cfg).is_err());
}

#[test]
fn indep_entry_and_hypergraph_agree_up_to_order_slack() {
    let cfg = SolverConfig::default();
    for (d, r) in [(4, 2), (5, 2), (5, 3), (6, 3)] {
        for h in [
            Hypergraph::complete(d, r).unwrap(),
            Hypergraph::new(d, r, vec![(0..r).collect()]).unwrap(),
        ] {
            let a = adjacency_tensor(&h).unwrap();
            let x = indep_entry_bound(&a, PExponent::TWO, 1.0, &cfg).unwrap().value;
            let y = hypergraph_bound_for(&h, 1.0).unwrap().value;
            let slack = (r as f64).powi(r as i32);
            assert!(x / y >= 1.0 / slack && x / y <= slack, "d={d} r={r}: {x} vs {y}");
        }
    }
}

#[test]
fn pure_dimension_factors_grow_with_d() {
    let mut last = [0.0f64; 4];
    for d in 2..=64 {
        let prof = profile(d, 3.0, vec![1.0, 1.0, 1.0], 1.0);
        let now: Vec<f64> = profile_bounds(&prof, 1.0).unwrap().iter().map(|b| b.value).collect();
        for (a, b) in last.iter().zip(&now) {
            assert!(b >= a);
        }
        last.copy_from_slice(&now);
        let h = nck_holder_matching(&[1.0], d, PExponent::new(4.0).unwrap(), 1.0).unwrap().value;
        let h_prev = nck_holder_matching(&[1.0], d - 1, PExponent::new(4.0).unwrap(), 1.0).unwrap().value;
        assert!(h >= h_prev);
    }
}

#[test]
fn invalid_constants_are_rejected() {
    let prof = profile(2, 2.0, vec![1.0; 3], 1.0);
    assert!(master_bound(&prof, 0.0).is_err());
    assert!(trivial_bound(&prof, f64::NAN).is_err());
}

proptest! {
    #[test]
    fn profile_bounds_are_linear_in_c_and_scale(
        s in prop::collection::vec(0.01f64..10.0, 4),
        t2 in 0.01f64..10.0,
        c in 0.1f64..10.0,
        k in 0.1f64..10.0,
        p in 1.0f64..10.0,
        d in 1usize..100,
    ) {
        let base = profile(d, p, s.clone(), t2);
        let scaled = profile(d, p, s.iter().map(|x| k * x).collect(), k * t2);
        for (a, b) in profile_bounds(&base, 1.0).unwrap().iter().zip(profile_bounds(&base, c).unwrap()) {
            prop_assert!((b.value - c * a.value).abs() <= 1e-10 * b.value);
            prop_assert_eq!(b.constant_used, c);
        }
        for (a, b) in profile_bounds(&base, 1.0).unwrap().iter().zip(profile_bounds(&scaled, 1.0).unwrap()) {
            prop_assert!((b.value - k * a.value).abs() <= 1e-10 * b.value);
        }
    }

    #[test]
    fn variance_bounds_scale_with_the_standard_deviation(
        entries in prop::collection::vec(0.0f64..4.0, 9),
        k in 0.1f64..10.0,
        delta in prop::collection::vec(0.1f64..50.0, 2),
        d in 1usize..100,
    ) {
        // Variances and counts carry the square of the scale.
        let a = Tensor::from_fn(2, 3, |i| entries[3 * i[0].min(i[1]) + i[0].max(i[1])]).unwrap();
        let cfg = SolverConfig::default();
        let p = PExponent::new(3.0).unwrap();
        let x = indep_entry_bound(&a, p, 1.0, &cfg).unwrap().value;
        let y = indep_entry_bound(&a.scaled(k * k), p, 1.0, &cfg).unwrap().value;
        prop_assert!((y - k * x).abs() <= 1e-6 * y.max(1e-12));
        // With r = 1 only the Δ_{r-1}^{1/2} term is present.
        let h1 = hypergraph_bound(&delta, d, 1.0).unwrap().value;
        let h2 = hypergraph_bound(&delta.iter().map(|x| k * k * x).collect::<Vec<_>>(), d, 1.0).unwrap().value;
        prop_assert!((h2 - k * h1).abs() <= 1e-10 * h2);
        let n1 = nck_holder_matching(&delta, d, PExponent::new(4.0).unwrap(), 1.0).unwrap().value;
        let n2 = nck_holder_matching(&delta.iter().map(|x| k * k * x).collect::<Vec<_>>(), d, PExponent::new(4.0).unwrap(), 1.0).unwrap().value;
        prop_assert!((n2 - k * n1).abs() <= 1e-10 * n2);
    }
}
