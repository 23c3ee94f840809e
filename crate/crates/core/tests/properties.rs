use homoglab::discrete_calculus::{
    cauchy_defect, discrete_gradient, neumaier_sum, norms, potential_from_discrete_gradient,
};
use homoglab::grid_fields::{Grid, ScalarField};
use proptest::prelude::*;

/// Trigonometric test function with random coefficients.
fn trig(c: &[f64; 4]) -> impl Fn([f64; 2]) -> f64 + '_ {
    move |x| c[0] * (1.3 * x[0]).sin() + c[1] * (0.7 * x[1]).cos() + c[2] * (x[0] * x[1] * 0.2).sin() + c[3]
}

fn coeffs() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-2.0f64..2.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gradient_is_linear(f in coeffs(), g in coeffs(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let grid = Grid::centered_box(2, 3.0, 4).unwrap();
        let ff = ScalarField::from_fn(grid.clone(), trig(&f)).unwrap();
        let gg = ScalarField::from_fn(grid, trig(&g)).unwrap();
        let comb = discrete_gradient(&ff.lin_comb(a, &gg, b).unwrap()).unwrap();
        let (df, dg) = (discrete_gradient(&ff).unwrap(), discrete_gradient(&gg).unwrap());
        for axis in 0..2 {
            let expected = df.component(axis).lin_comb(a, dg.component(axis), b).unwrap();
            let gap = comb.component(axis).lin_comb(1.0, &expected, -1.0).unwrap().max_abs();
            prop_assert!(gap <= 1e-13 * (1.0 + expected.max_abs()), "axis {axis}: {gap}");
        }
    }

    #[test]
    fn gradient_commutes_with_integer_translation(f in coeffs(), k in -3i32..=3, l in -3i32..=3) {
        let grid = Grid::centered_box(2, 2.5, 4).unwrap();
        let shifted = grid.with_origin(&[grid.origin()[0] + k as f64, grid.origin()[1] + l as f64]).unwrap();
        let u = ScalarField::from_fn(grid, trig(&f)).unwrap();
        let v = ScalarField::from_fn(shifted, |x| trig(&f)([x[0] - k as f64, x[1] - l as f64])).unwrap();
        let (du, dv) = (discrete_gradient(&u).unwrap(), discrete_gradient(&v).unwrap());
        for axis in 0..2 {
            let a = du.component(axis).values();
            let b = dv.component(axis).values();
            let gap = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            prop_assert!(gap <= 1e-12, "axis {axis}: {gap}");
        }
    }

    #[test]
    fn gradient_of_a_field_reconstructs_it(f in coeffs()) {
        let grid = Grid::from_box(&[0.0, 0.0], &[4.0, 3.0], 4).unwrap();
        let u = ScalarField::from_fn(grid, trig(&f)).unwrap();
        let t = discrete_gradient(&u).unwrap();
        prop_assert!(cauchy_defect(&t) <= 1e-13 * (1.0 + t.max_abs()));
        let v = potential_from_discrete_gradient(&t, None).unwrap();
        // the potential is unique up to a Q-periodic function; matching δ is the invariant
        let tv = discrete_gradient(&v).unwrap();
        prop_assert!(tv.max_distance(&t).unwrap() <= 1e-12);
    }

    #[test]
    fn norms_are_absolutely_homogeneous(f in coeffs(), c in -4.0f64..4.0, p in 1.1f64..1.9) {
        let grid = Grid::centered_box(2, 4.0, 2).unwrap();
        let u = ScalarField::from_fn(grid, trig(&f)).unwrap();
        let (r1, r2) = (norms(&u, p).unwrap(), norms(&u.map(|v| c * v), p).unwrap());
        for (x, y) in [(r1.lp_norm, r2.lp_norm), (r1.lp_of_delta, r2.lp_of_delta), (r1.ep_norm.unwrap(), r2.ep_norm.unwrap()), (r1.l2_unif, r2.l2_unif)] {
            prop_assert!((y - c.abs() * x).abs() <= 1e-12 * (1.0 + y.abs()), "{x} {y}");
        }
    }

    #[test]
    fn compensated_sum_is_order_independent(mut v in prop::collection::vec(-1e6f64..1e6, 1..200), seed in 0usize..1000) {
        let s1 = neumaier_sum(v.iter().copied());
        let len = v.len();
        v.rotate_left(seed % len);
        v.reverse();
        let s2 = neumaier_sum(v.iter().copied());
        let scale: f64 = v.iter().map(|x| x.abs()).sum();
        prop_assert!((s1 - s2).abs() <= 4.0 * f64::EPSILON * scale.max(1.0));
    }
}
