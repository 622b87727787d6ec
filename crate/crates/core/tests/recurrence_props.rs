mod common;

use cayley_gibbs::recurrence::{reduced_scalar_image, DIRECT_CLASSES};
use cayley_gibbs::{
    check_identities, field_from_scalar, find_positive_fixed_points, full_step, reduced_step,
    scalar_map_d2g, scalar_map_dg, scalar_map_g, TransferWeights, UVector, VVector,
};
use common::{central_differences, relative_error};
use proptest::prelude::*;

fn log_weights() -> impl Strategy<Value = TransferWeights> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(la, lb)| TransferWeights::from_logs(la, lb).unwrap())
}

fn u_vector() -> impl Strategy<Value = UVector> {
    prop::array::uniform8(-2.0..2.0f64).prop_map(|l| UVector::new(l.map(f64::exp)).unwrap())
}

fn v_vector() -> impl Strategy<Value = VVector> {
    prop::array::uniform4(-1.5..1.5f64).prop_map(|l| {
        let [a, b, c, d] = l.map(f64::exp);
        VVector::new(a, b, c, d).unwrap()
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn outputs_satisfy_cube_identities(u in u_vector(), w in log_weights()) {
        let (raw, _) = full_step(&u, &w).unwrap();
        for r in check_identities(&raw) {
            prop_assert!(r < 1e-10, "residual {r}");
        }
    }

    #[test]
    fn gauge_preserves_identities(u in u_vector(), w in log_weights(), ln_l in -3.0..3.0f64) {
        let (raw, _) = full_step(&u, &w).unwrap();
        for r in check_identities(&raw.apply_gauge(ln_l.exp())) {
            prop_assert!(r < 1e-10);
        }
    }

    #[test]
    fn gauge_round_trips(u in u_vector(), ln_l in -3.0..3.0f64) {
        let l = ln_l.exp();
        let back = u.apply_gauge(l).apply_gauge(1.0 / l);
        for (x, y) in back.components().iter().zip(u.components()) {
            prop_assert!(close(*x, y, 1e-14));
        }
        let scaled = u.apply_gauge(l).components();
        for k in DIRECT_CLASSES {
            prop_assert!(close(scaled[k], u.components()[k] * l, 1e-14));
        }
    }

    #[test]
    fn reduced_step_is_cube_root_of_full_step(v in v_vector(), w in log_weights()) {
        let (full, full_gauge) = full_step(&v.to_uvector(), &w).unwrap();
        let (red, red_gauge) = reduced_step(&v, &w).unwrap();
        let f = full.components();
        let [v1, v4, v5, v8] = red.as_array();
        prop_assert!(close(f[0], v1.powi(3), 1e-10));
        prop_assert!(close(f[3], v4.powi(3), 1e-10));
        prop_assert!(close(f[4], v5.powi(3), 1e-10));
        prop_assert!(close(f[7], v8.powi(3), 1e-10));
        prop_assert!(close(full_gauge, red_gauge.powi(3), 1e-10));
        for (x, y) in f.iter().zip(red.to_uvector().components()) {
            prop_assert!(close(*x, y, 1e-9));
        }
    }

    #[test]
    fn symmetric_slice_reduces_to_scalar_map(ln_v in -1.5..1.5f64, w in log_weights()) {
        let v4 = ln_v.exp();
        let v = VVector::on_set_a(v4, v4).unwrap();
        let image = reduced_scalar_image(&v, &w).unwrap();
        let g = scalar_map_g(v4.powi(4), &w);
        prop_assert!(close(image, g, 1e-10), "{image} vs {g}");
    }

    #[test]
    fn scalar_map_monotone_by_d(x in 0.0..100.0f64, ln_c in -2.0..2.0f64, ln_d in -2.0..2.0f64) {
        prop_assume!(ln_d.abs() > 1e-6);
        let w = TransferWeights::from_cd(ln_c.exp(), ln_d.exp()).unwrap();
        let dg = scalar_map_dg(x, &w);
        prop_assert_eq!(dg > 0.0, w.d() > 1.0);
        prop_assert!(scalar_map_g(x, &w) > 0.0);
    }

    #[test]
    fn derivatives_match_differences(x in 0.0..100.0f64, c in 1e-3..10.0f64, d in 1e-3..10.0f64) {
        let w = TransferWeights::from_cd(c, d).unwrap();
        let (fd1, fd2) = central_differences(x, c, d);
        let d1 = scalar_map_dg(x, &w);
        let d2 = scalar_map_d2g(x, &w);
        prop_assert!(relative_error(d1, fd1) < 1e-6, "g' {d1} vs {fd1}");
        // g'' vanishes at the inflection point; skip its immediate neighbourhood
        if (x - (d * d - 2.0) / (c * d)).abs() > 1e-6 * x.max(1.0) {
            prop_assert!(relative_error(d2, fd2) < 1e-6, "g'' {d2} vs {fd2}");
        }
    }
}

#[test]
fn fixed_points_lift_to_invariant_boundary_fields() {
    for p in [
        common::THREE_ROOTS,
        common::DISPUTED,
        common::ONE_ROOT,
        (1.0, 2.0, 1.5),
        (-0.3, 4.0, 2.0),
    ] {
        let w = common::weights(p);
        for x in find_positive_fixed_points(&w).unwrap().roots {
            let u = UVector::from_field(&field_from_scalar(x).unwrap()).unwrap();
            let (raw, gauge) = full_step(&u, &w).unwrap();
            let back = raw.apply_gauge(gauge);
            for (a, b) in back.components().iter().zip(u.components()) {
                assert!(close(*a, b, 1e-10), "{p:?} x={x}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn non_fixed_points_are_not_invariant() {
    let w = common::weights(common::THREE_ROOTS);
    let u = UVector::from_field(&field_from_scalar(1.0).unwrap()).unwrap();
    let (raw, gauge) = full_step(&u, &w).unwrap();
    let back = raw.apply_gauge(gauge).components();
    let worst = back
        .iter()
        .zip(u.components())
        .map(|(a, b)| relative_error(*a, b))
        .fold(0.0, f64::max);
    assert!(worst > 1e-3);
}
