//! Statistics checked against independent oracles.

mod common;

use std::collections::BTreeSet;

use common::oracle::{bh_oracle, normal_tail_oracle, pearson_oracle, random_p_vector};
use proptest::prelude::*;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use wata_core::termstats::score_candidates;
use wata_core::{benjamini_hochberg, chi_square, chi_square_p, rank_terms, Comparison, ContingencyTable, Partition, RankParams};

#[test]
fn chi_square_matches_pearson_on_random_tables() {
    let mut r = common::rng(1);
    for _ in 0..1_000 {
        let t = ContingencyTable::new(
            r.random_range(0..10_000),
            r.random_range(0..10_000),
            r.random_range(0..100_000),
            r.random_range(0..100_000),
        );
        let got = chi_square(&t).unwrap();
        let want = pearson_oracle(&t);
        let rel = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
        assert!(rel <= 1e-9, "{t:?}: {got} vs {want}");
    }
}

#[test]
fn p_value_matches_two_oracles() {
    let gamma_route = ChiSquared::new(1.0).unwrap();
    for i in 0..200 {
        let x = i as f64 * 0.25;
        let p = chi_square_p(x).unwrap();
        assert!((p - normal_tail_oracle(x)).abs() < 1e-9, "x={x}");
        assert!((p - gamma_route.sf(x)).abs() < 1e-9, "x={x}");
    }
}

#[test]
fn bh_matches_definition_and_contains_bonferroni() {
    let mut r = common::rng(2);
    for _ in 0..2_000 {
        let p = random_p_vector(&mut r);
        let alpha = [0.01, 0.05, 0.1][r.random_range(0..3)];
        let got = benjamini_hochberg(&p, alpha).unwrap();
        assert_eq!(got, bh_oracle(&p, alpha), "{p:?}");
        let m = p.len() as f64;
        let bonferroni: BTreeSet<usize> = (0..p.len()).filter(|&i| p[i] <= alpha / m).collect();
        assert!(bonferroni.is_subset(&got));
    }
}

#[test]
fn ranked_terms_are_significant_and_over_represented() {
    let idx = common::planted_index(&["X", "Y", "Z"], 2_000, 0.05, 0.01, 5);
    let params = RankParams::default();
    for label in ["X", "Y", "Z"] {
        let target = Partition::new(label);
        let all = score_candidates(&target, &Comparison::Rest, &idx, params.min_df).unwrap();
        let p: Vec<f64> = all.iter().map(|s| s.p_value).collect();
        let rejected = benjamini_hochberg(&p, params.alpha).unwrap();
        let threshold = rejected.len() as f64 * params.alpha / p.len() as f64;

        let ranked = rank_terms(&target, &Comparison::Rest, &idx, &params).unwrap();
        assert!(ranked.len() <= params.top_k);
        for (i, s) in ranked.iter().enumerate() {
            assert_eq!(s.rank, i + 1);
            assert!(s.significant);
            assert!(s.table.over_represented());
            assert!(s.p_value <= threshold);
            assert!(s.chi2 >= 0.0 && (0.0..=1.0).contains(&s.p_value));
        }
        assert!(ranked.windows(2).all(|w| w[0].chi2 >= w[1].chi2));
        assert_eq!(ranked, rank_terms(&target, &Comparison::Rest, &idx, &params).unwrap());
    }
}

proptest! {
    #[test]
    fn chi_square_symmetries(a in 0u64..5_000, b in 0u64..5_000, c in 0u64..5_000, d in 0u64..5_000, k in 1u64..50) {
        prop_assume!(a + b + c + d > 0);
        let x = chi_square(&ContingencyTable::new(a, b, c, d)).unwrap();
        let close = |y: f64| (x - y).abs() <= 1e-9 * x.max(1.0);
        // Swap target and comparison rows.
        prop_assert!(close(chi_square(&ContingencyTable::new(c, d, a, b)).unwrap()));
        // Swap present and absent columns.
        prop_assert!(close(chi_square(&ContingencyTable::new(b, a, d, c)).unwrap()));
        let scaled = chi_square(&ContingencyTable::new(a * k, b * k, c * k, d * k)).unwrap();
        prop_assert!((scaled - k as f64 * x).abs() <= 1e-9 * scaled.max(1.0));
    }

    #[test]
    fn p_value_is_monotone(x in 0.0f64..200.0, dx in 0.0f64..10.0) {
        prop_assert!(chi_square_p(x + dx).unwrap() <= chi_square_p(x).unwrap());
    }
}
