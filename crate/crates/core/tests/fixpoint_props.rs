mod common;

use cayley_gibbs::fixpoint::{
    compare_root_oracles, positive_intersections, predict_count_for_slope,
};
use cayley_gibbs::{
    critical_points, find_positive_fixed_points, iterate_map, predict_count, quartic_coefficients,
    scalar_map_dg, scalar_map_g, Regime, Stability, TransferWeights,
};
use proptest::prelude::*;

fn cd(lo: f64, hi: f64) -> impl Strategy<Value = TransferWeights> {
    (1e-2..10.0f64, lo..hi).prop_map(|(c, d)| TransferWeights::from_cd(c, d).unwrap())
}

/// `1/η` at `c = 1`: since η is linear in `c`, these are the two values of
/// `c` at which `y = x` is tangent to `g`.
fn tangency_cs(d: f64) -> (f64, f64) {
    let th = critical_points(&TransferWeights::from_cd(1.0, d).unwrap());
    (1.0 / th.eta2.unwrap(), 1.0 / th.eta1.unwrap())
}

fn count(c: f64, d: f64) -> usize {
    find_positive_fixed_points(&TransferWeights::from_cd(c, d).unwrap())
        .unwrap()
        .count
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn at_most_three_roots(w in cd(1e-2, 10.0)) {
        let r = find_positive_fixed_points(&w).unwrap();
        prop_assert!((1..=3).contains(&r.count));
        for &x in &r.roots {
            prop_assert!((scalar_map_g(x, &w) - x).abs() <= 1e-10 * x.max(1.0));
        }
        prop_assert!(r.roots.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn decreasing_map_has_one_root(w in cd(1e-3, 1.0)) {
        prop_assert_eq!(find_positive_fixed_points(&w).unwrap().count, 1);
        prop_assert_eq!(predict_count(&w).unwrap().count, 1);
    }

    #[test]
    fn middle_band_has_one_root(w in cd(1.0, 2.0)) {
        prop_assert_eq!(Regime::of(&w), Regime::Unstated);
        prop_assert_eq!(find_positive_fixed_points(&w).unwrap().count, 1);
    }

    #[test]
    fn quartic_agrees_with_bracketing(w in cd(1e-2, 10.0)) {
        let cmp = compare_root_oracles(&w).unwrap();
        prop_assert!(cmp.agree, "{:?}", cmp);
    }

    #[test]
    fn quartic_vanishes_at_roots(w in cd(1e-2, 10.0)) {
        let q = quartic_coefficients(&w);
        for x in find_positive_fixed_points(&w).unwrap().roots {
            let value = q.iter().fold(0.0, |acc, k| acc * x + k);
            let scale = q.iter().enumerate().map(|(i, k)| (k * x.powi(4 - i as i32)).abs()).sum::<f64>();
            prop_assert!(value.abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn prediction_matches_count_above_two(w in cd(2.0 + 1e-6, 10.0)) {
        let predicted = predict_count(&w).unwrap();
        prop_assert_eq!(predicted.regime, Regime::MultiCapable);
        prop_assert_eq!(predicted.count, find_positive_fixed_points(&w).unwrap().count);
    }

    #[test]
    fn general_slope_prediction(w in cd(2.0 + 1e-6, 10.0), slope in 0.1..10.0f64) {
        let predicted = predict_count_for_slope(&w, slope).unwrap().count;
        prop_assert_eq!(predicted, positive_intersections(&w, slope).unwrap().len());
    }

    #[test]
    fn count_changes_only_at_tangency(d in 2.05..8.0f64) {
        let (c_lo, c_hi) = tangency_cs(d);
        prop_assert!(c_lo < c_hi);
        for c_tan in [c_lo, c_hi] {
            prop_assert_ne!(count(c_tan * (1.0 - 1e-4), d), count(c_tan * (1.0 + 1e-4), d));
            let w = TransferWeights::from_cd(c_tan, d).unwrap();
            let roots = find_positive_fixed_points(&w).unwrap().roots;
            prop_assert!(roots.iter().any(|&r| (scalar_map_dg(r, &w) - 1.0).abs() < 1e-6));
        }
        prop_assert_eq!(count(0.5 * (c_lo + c_hi), d), 3);
    }

    #[test]
    fn stable_roots_attract_unstable_roots_repel(w in cd(1e-2, 10.0)) {
        let r = find_positive_fixed_points(&w).unwrap();
        for (k, (&x, &dg)) in r.roots.iter().zip(&r.derivative).enumerate() {
            if (dg.abs() - 1.0).abs() < 1e-2 {
                continue;
            }
            for sign in [-1.0, 1.0] {
                let start = x * (1.0 + sign * 1e-6);
                let it = iterate_map(start, &w, 5000, 1e-14).unwrap();
                match r.stability[k] {
                    Stability::Stable => {
                        prop_assert!((it.limit - x).abs() <= 1e-8 * x.max(1.0));
                    }
                    Stability::Unstable => {
                        let far = it.trajectory.iter().any(|y| (y - x).abs() > 1e-4 * x);
                        prop_assert!(far, "stayed near unstable root {x}");
                    }
                    Stability::Marginal => {}
                }
            }
        }
    }
}

#[test]
fn tuned_tangency_at_d_two_and_a_half() {
    let d = 2.5;
    let (_, c) = tangency_cs(d);
    let w = TransferWeights::from_cd(c, d).unwrap();
    let th = critical_points(&w);
    assert!((th.eta1.unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(predict_count(&w).unwrap().count, 2);
    let report = find_positive_fixed_points(&w).unwrap();
    assert_eq!(report.count, 2);
    let tangent = report
        .derivative
        .iter()
        .position(|dg| (dg - 1.0).abs() < 1e-6)
        .expect("a tangent root");
    assert!((report.roots[tangent] - th.x_crit_1.unwrap()).abs() < 1e-6 * th.x_crit_1.unwrap());
    assert_eq!(report.stability[tangent], Stability::Marginal);
}

#[test]
fn closed_form_etas_agree_with_derivation() {
    let mut rng = common::rng(7);
    for _ in 0..200 {
        use rand::Rng;
        let w =
            TransferWeights::from_cd(rng.gen_range(0.01..10.0), rng.gen_range(2.01..10.0)).unwrap();
        let th = critical_points(&w);
        assert_eq!(th.closed_form_agrees, Some(true), "{th:?}");
        let (e1, e2) = (th.eta1.unwrap(), th.eta2.unwrap());
        assert!(0.0 < e1 && e1 < e2);
        for x in [th.x_crit_1.unwrap(), th.x_crit_2.unwrap()] {
            // tangency: g'(x*) equals the slope g(x*)/x*
            let slope = scalar_map_g(x, &w) / x;
            assert!((scalar_map_dg(x, &w) - slope).abs() <= 1e-9 * slope);
        }
    }
}

#[test]
fn reference_points() {
    let a = find_positive_fixed_points(&common::weights(common::THREE_ROOTS)).unwrap();
    assert_eq!(a.count, 3);
    assert!(a.has_phase_transition());
    let b = compare_root_oracles(&common::weights(common::DISPUTED)).unwrap();
    assert!(b.agree);
    assert_eq!(b.bracketing.len(), 1);
    let c = find_positive_fixed_points(&common::weights(common::ONE_ROOT)).unwrap();
    assert_eq!(c.count, 1);
    assert!(!c.has_phase_transition());
}
