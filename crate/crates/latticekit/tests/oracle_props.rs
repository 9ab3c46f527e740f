//! Cross-module property tests: randomized model agreement, index-set
//! closure, pair-sum identities against slow direct evaluation, and the
//! closed-form ω against a certified truncated cosine series.

use std::collections::BTreeMap;

use proptest::prelude::*;

use latticekit::cbc::units;
use latticekit::criterion::{brute_force_s, s_criterion, CriterionContext};
use latticekit::korobov::{
    enumerate_index_set, omega, r_value, support, SpaceParams,
};
use latticekit::weights::{
    materialize_explicit, paper_weight_family, sqrt_half_transform, weight_of, PaperFamily,
    WeightModel,
};

fn small_gamma() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.02f64..1.0, 1..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sqrt_transform_squares_back(gamma in small_gamma()) {
        let d = gamma.len();
        let model = WeightModel::new_product(gamma).unwrap();
        let (t, half) = sqrt_half_transform(&model, 4.0).unwrap();
        prop_assert_eq!(half, 2.0);
        for mask in 0u64..(1 << d) {
            let u: Vec<usize> = (1..=d).filter(|j| mask >> (j - 1) & 1 == 1).collect();
            let orig = weight_of(&model, &u).unwrap();
            let sq = weight_of(&t, &u).unwrap().powi(2);
            prop_assert!((sq - orig).abs() <= 1e-14 * (1.0 + orig));
        }
    }

    #[test]
    fn r_value_is_even_and_pure(gamma in small_gamma(), h in prop::collection::vec(-9i64..=9, 1..=4)) {
        let d = gamma.len().min(h.len());
        let model = WeightModel::new_product(gamma[..d].to_vec()).unwrap();
        let params = SpaceParams::new(d, 2.0, model).unwrap();
        let h = &h[..d];
        let neg: Vec<i64> = h.iter().map(|v| -v).collect();
        let a = r_value(&params, h);
        prop_assert_eq!(a.to_bits(), r_value(&params, &neg).to_bits());
        prop_assert_eq!(a.to_bits(), r_value(&params, h).to_bits());
    }

    #[test]
    fn index_set_closure_and_membership(gamma in small_gamma(), m in 0.5f64..40.0) {
        let d = gamma.len();
        let model = WeightModel::new_product(gamma).unwrap();
        let params = SpaceParams::new(d, 2.0, model).unwrap();
        let set = enumerate_index_set(&params, m).unwrap();
        for h in &set.entries {
            prop_assert!(r_value(&params, h) <= m);
            let neg: Vec<i64> = h.iter().map(|v| -v).collect();
            prop_assert!(set.contains(&neg));
        }
        if m >= 1.0 {
            prop_assert!(set.contains(&vec![0i64; d]));
        }
        // no member of the complement boundary sneaks in: spot-check the
        // axis points just outside the budget
        for j in 0..d {
            let mut h = vec![0i64; d];
            let g = weight_of(&params.weights, &[j + 1]).unwrap();
            let cut = (g * m).powf(0.5).floor() as i64;
            h[j] = cut + 1;
            prop_assert!(!set.contains(&h));
        }
    }

    #[test]
    fn fast_s_matches_residue_oracle(
        gamma in prop::collection::vec(0.05f64..1.0, 1..=2),
        n in 2usize..=12,
        seed in 0usize..5,
    ) {
        let d = gamma.len();
        let model = WeightModel::new_product(gamma).unwrap();
        let params = SpaceParams::new(d, 2.0, model).unwrap();
        let ctx = CriterionContext::new(n, params).unwrap();
        let us = units(n).unwrap();
        let z: Vec<usize> = (0..d).map(|i| us[(seed + 3 * i) % us.len()]).collect();
        let fast = s_criterion(&ctx, &z).unwrap().total;
        let oracle = brute_force_s(&ctx, &z, 4 * n).unwrap();
        prop_assert!(oracle.tail_bound <= 1e-8 * oracle.value);
        prop_assert!((fast - oracle.value).abs() <= 1e-6 * oracle.value,
            "fast {} vs oracle {}", fast, oracle.value);
    }
}

#[test]
fn structured_weights_match_explicit_tables_up_to_d10() {
    for d in [1usize, 4, 7, 10] {
        for kind in [PaperFamily::Product, PaperFamily::Pod, PaperFamily::Spod] {
            let model = paper_weight_family(kind, d, 2.0).unwrap();
            let explicit = materialize_explicit(&model).unwrap();
            for mask in 0u64..(1 << d) {
                let u: Vec<usize> = (1..=d).filter(|j| mask >> (j - 1) & 1 == 1).collect();
                let a = weight_of(&model, &u).unwrap();
                let b = weight_of(&explicit, &u).unwrap();
                assert!(
                    (a - b).abs() <= 1e-13 * (1.0 + b.abs()),
                    "{kind:?} d={d} u={u:?}"
                );
            }
        }
    }
}

// The closed Bernoulli form against the cosine series, certified by the
// truncation envelope 2 min( H^{1-α}/(α-1), 1/(H^α |sin πx|) ) plus the
// accumulated rounding of the partial sums.
#[test]
fn omega_closed_form_within_series_envelope() {
    let h_terms = 100_000u64;
    for &alpha in &[2.0f64, 4.0, 6.0] {
        for i in 1..1000u64 {
            let x = i as f64 / 1000.0;
            let mut partial = 0.0f64;
            for h in (1..=h_terms).rev() {
                partial += (2.0 * std::f64::consts::PI * h as f64 * x).cos()
                    * (h as f64).powf(-alpha);
            }
            let series = 2.0 * partial;
            let hf = h_terms as f64;
            let tail_flat = 2.0 * hf.powf(1.0 - alpha) / (alpha - 1.0);
            let tail_osc = hf.powf(-alpha) / (std::f64::consts::PI * x).sin().abs();
            let envelope = 2.0 * tail_flat.min(tail_osc) + 1e-11;
            let closed = omega(alpha, x).unwrap();
            assert!(
                (closed - series).abs() <= envelope,
                "α={alpha} x={x}: |{closed} - {series}| > {envelope}"
            );
        }
    }
}

#[test]
fn omega_endpoint_values() {
    for &alpha in &[2.0f64, 4.0, 6.0] {
        let w0 = omega(alpha, 0.0).unwrap();
        let zeta: f64 = (1..200_000u64).rev().map(|h| (h as f64).powf(-alpha)).sum();
        assert!((w0 - 2.0 * zeta).abs() < 1e-4 * w0); // loose: raw partial sum
    }
}

#[test]
fn explicit_weight_model_with_zero_entries_is_usable() {
    // zero weights shut whole supports off without NaN
    let table = BTreeMap::from([
        (vec![], 1.0),
        (vec![1], 0.8),
        (vec![2], 0.0),
        (vec![1, 2], 0.0),
    ]);
    let model = WeightModel::new_explicit(2, table).unwrap();
    let params = SpaceParams::new(2, 2.0, model).unwrap();
    assert_eq!(r_value(&params, &[0, 3]), f64::INFINITY);
    let set = enumerate_index_set(&params, 10.0).unwrap();
    for h in &set.entries {
        assert!(support(h).iter().all(|&j| j == 1), "unexpected member {h:?}");
    }
    let ctx = CriterionContext::new(6, params).unwrap();
    let s = s_criterion(&ctx, &[1, 5]).unwrap();
    assert!(s.total.is_finite() && s.total >= 0.0);
    let oracle = brute_force_s(&ctx, &[1, 5], 24).unwrap();
    assert!((s.total - oracle.value).abs() <= 1e-6 * oracle.value.max(1e-12));
}
