use std::f64::consts::PI;

use homoglab::elliptic_solver::{assemble, solve, BoundaryCondition};
use homoglab::fit::fit_line;
use homoglab::grid_fields::{
    sample_rescaled, Bump, BumpProfile, CoefficientKind, CoefficientSpec, EpsDescriptor, Grid,
    ScalarField, VectorField,
};
use homoglab::homogenize_harness::{
    centered_gradient, first_order_approx, rate_sweep, solve_1d_exact, solve_eps_problem, Domain,
    EpsProblemOptions, SolverKind, SourceTerm, SweepOptions,
};
use homoglab::corrector::{cell_problem, CellOptions};
use homoglab::grid_fields::sample_field;

fn unit_interval() -> Domain {
    Domain::Interval { lo: 0.0, hi: 1.0 }
}

#[test]
fn log_domain_matches_naive_evaluation() {
    let spec = CoefficientSpec::radial_log(2.0, 1.0);
    let eps = 1e-3;
    let opts = EpsProblemOptions::default();
    let d = Domain::Interval { lo: 1.0, hi: 2.0 };
    let f = SourceTerm::constant(1.0);
    let lit = solve_eps_problem(&spec, &EpsDescriptor::literal(eps).unwrap(), &d, &f, &opts).unwrap();
    let naive = solve_1d_exact(|x| spec.eval([x / eps, 0.0], 1).xx, lit.u.grid(), &f, lit.u.grid().h()).unwrap();
    let gap = lit.u.lin_comb(1.0, &naive.u, -1.0).unwrap().max_abs();
    assert!(gap < 1e-10, "{gap}");
    // the same ε written as exp(−2π − y)
    let y = -eps.ln() - 2.0 * PI;
    let seq = solve_eps_problem(&spec, &EpsDescriptor::exp_sequence(y, 1), &d, &f, &opts).unwrap();
    let gap = seq.u.lin_comb(1.0, &lit.u, -1.0).unwrap().max_abs();
    assert!(gap < 1e-10, "{gap}");
}

#[test]
fn exact_and_finite_volume_agree_to_second_order() {
    let spec = CoefficientSpec::sine(2.0, 1.0);
    let eps = EpsDescriptor::literal(0.25).unwrap();
    let f = SourceTerm::Polynomial { coefficients: vec![1.0, -1.0] };
    let errs: Vec<f64> = [64usize, 128, 256]
        .iter()
        .map(|&n| {
            let g = Grid::unit_cell(1, n).unwrap();
            let a = sample_rescaled(&spec, &g, &eps).unwrap();
            let op = assemble(&a, BoundaryCondition::DirichletZero).unwrap();
            let src = ScalarField::from_fn(g.clone(), |x| f.eval(x)).unwrap();
            let fv = solve(&op, &src, &VectorField::zeros(g.clone())).unwrap().0;
            let ex = solve_1d_exact(|x| spec.eval_rescaled([x, 0.0], 1, &eps).unwrap().xx, &g, &f, g.h()).unwrap();
            fv.lin_comb(1.0, &ex.u, -1.0).unwrap().lp_norm(2.0)
        })
        .collect();
    for w in errs.windows(2) {
        let r = w[0] / w[1];
        assert!((3.0..=5.0).contains(&r), "{errs:?}");
    }
}

#[test]
fn energy_bound_holds() {
    // ‖∇u‖ ≤ ‖f‖_{H⁻¹}/λ and ‖f‖_{H⁻¹} ≤ ‖f‖_{L²}/π on (0, 1)
    let spec = CoefficientSpec::sine(2.0, 1.5);
    for e in [0.5, 0.1, 0.01] {
        let eps = EpsDescriptor::literal(e).unwrap();
        let s = solve_eps_problem(&spec, &eps, &unit_interval(), &SourceTerm::constant(1.0), &EpsProblemOptions::default()).unwrap();
        assert_eq!(s.method, SolverKind::ExactQuadrature);
        let grad = centered_gradient(&s.u).l2_norm();
        assert!(grad <= 1.0 / (PI * spec.lambda), "ε = {e}: {grad}");
    }
}

#[test]
fn annulus_finite_volume_matches_radial_solution() {
    // −Δu = 1 on 1 < r < 2, u = 0 at both radii: u = −r²/4 + A ln r + B
    let a_c = 3.0 / (4.0 * 2f64.ln());
    let exact = |r: f64| (1.0 - r * r) / 4.0 + a_c * r.ln();
    let d = Domain::Annulus { inner: 1.0, outer: 2.0 };
    let errs: Vec<f64> = [16usize, 32]
        .iter()
        .map(|&n| {
            let opts = EpsProblemOptions { cells_per_unit: n, ..Default::default() };
            let s = solve_eps_problem(&CoefficientSpec::constant(1.0), &EpsDescriptor::literal(1.0).unwrap(), &d, &SourceTerm::constant(1.0), &opts).unwrap();
            let g = s.u.grid();
            let inner = d.interior_mask(g);
            g.indices()
                .filter(|&k| inner[k])
                .map(|k| {
                    let c = g.center(k);
                    (s.u.values()[k] - exact(c[0].hypot(c[1]))).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    // the staircase boundary limits the rate to first order
    assert!(errs[1] < 0.01 && errs[1] < 0.75 * errs[0], "{errs:?}");
}

#[test]
fn perturbed_periodic_sweep_extrapolates_to_zero() {
    let per = CoefficientSpec::sine(2.0, 1.0);
    let kind = CoefficientKind::PerturbedPeriodic {
        periodic: Box::new(per.kind.clone()),
        bump: Bump {
            amplitude: 0.5,
            center: [3.0, 0.0],
            width: 1.0,
            profile: BumpProfile::Gaussian,
        },
    };
    let spec = CoefficientSpec::new(kind, 1.0, 3.5).unwrap();
    let eps: Vec<f64> = (4..=8).map(|k| 0.5f64.powi(k)).collect();
    let rep = rate_sweep(&spec, &eps, &unit_interval(), &SourceTerm::constant(1.0), &SweepOptions::default()).unwrap();
    let errs: Vec<f64> = rep.rows.iter().map(|r| r.err_l2).collect();
    let fit = fit_line(&eps, &errs).unwrap();
    assert!(fit.intercept.abs() <= 3.0 * fit.intercept_stderr.max(1e-3 * errs[0]), "{fit:?} {errs:?}");
    assert!((rep.a_star.unwrap().xx - 3f64.sqrt()).abs() < 1e-6);
}

#[test]
fn remainder_is_much_smaller_than_gradient_error() {
    let rep = rate_sweep(
        &CoefficientSpec::sine(2.0, 1.0),
        &[0.0625, 0.03125, 0.015625, 0.0078125],
        &unit_interval(),
        &SourceTerm::constant(1.0),
        &SweepOptions::default(),
    )
    .unwrap();
    for r in &rep.rows {
        assert!(5.0 * r.grad_r_l2 <= r.grad_err_l2, "{r:?}");
    }
}

#[test]
fn sweeps_are_deterministic_across_thread_counts() {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                rate_sweep(
                    &CoefficientSpec::sine(2.0, 1.0),
                    &[0.25, 0.125, 0.0625, 0.03125],
                    &unit_interval(),
                    &SourceTerm::constant(1.0),
                    &SweepOptions::default(),
                )
                .unwrap()
            })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn first_order_approximation_in_two_dimensions() {
    // laminate across x₁ with a* = diag(1.5, 2): the remainder shrinks with ε
    let spec = CoefficientSpec::laminate(1.0, 3.0, 0);
    let (correctors, tensor) = cell_problem(&sample_field(&spec, &Grid::unit_cell(2, 32).unwrap()).unwrap(), &CellOptions::default()).unwrap();
    let d = Domain::Box { lo: [0.0, 0.0], hi: [1.0, 1.0] };
    let opts = EpsProblemOptions { cells_per_unit: 128, ..Default::default() };
    let f = SourceTerm::constant(1.0);
    let mut gaps = Vec::new();
    for e in [0.25, 0.125] {
        let eps = EpsDescriptor::literal(e).unwrap();
        let ue = solve_eps_problem(&spec, &eps, &d, &f, &opts).unwrap().u;
        let a_star = homoglab::grid_fields::MatrixField::constant(ue.grid().clone(), tensor.matrix);
        let us_star = homoglab::homogenize_harness::solve_fv(&a_star, &d, &f, &opts).unwrap().u;
        let fo = first_order_approx(&us_star, &correctors, e, &ue).unwrap();
        gaps.push(fo.remainder.lp_norm(2.0));
    }
    assert!(gaps[1] < 0.7 * gaps[0], "{gaps:?}");
}

#[test]
fn periodic_solution_is_order_eps_from_closed_form_limit() {
    let spec = CoefficientSpec::sine(2.0, 1.0);
    let s3 = 3f64.sqrt();
    let mut errs = Vec::new();
    for e in [1.0 / 32.0, 1.0 / 64.0] {
        let eps = EpsDescriptor::literal(e).unwrap();
        let s = solve_eps_problem(&spec, &eps, &unit_interval(), &SourceTerm::constant(1.0), &EpsProblemOptions::default()).unwrap();
        let star = ScalarField::from_fn(s.u.grid().clone(), |x| x[0] * (1.0 - x[0]) / (2.0 * s3)).unwrap();
        errs.push(s.u.lin_comb(1.0, &star, -1.0).unwrap().lp_norm(2.0) / e);
    }
    // ‖u^ε − u*‖/ε is bounded and stable
    assert!(errs[1] < 0.1 && (errs[0] / errs[1] - 1.0).abs() < 0.1, "{errs:?}");
}

#[test]
fn non_homogenizable_diagnostics_agree() {
    use homoglab::homogenize_harness::{counterexample_1d, counterexample_2d};
    use homoglab::periodic_extraction::cesaro_periodic_part;
    let grid = Grid::centered_box(2, 17.0, 4).unwrap();
    let one = SourceTerm::constant(1.0);
    for (k, spec) in [CoefficientSpec::radial_log(2.0, 1.0), CoefficientSpec::radial_iter_log(2.0, 1.0)].iter().enumerate() {
        let a = sample_field(spec, &grid).unwrap().component(0, 0);
        let flagged = cesaro_periodic_part(&a, 16).unwrap().non_convergent;
        let rep = if k == 0 {
            counterexample_1d(&[1, 2], &one, 0.0, &EpsProblemOptions::default()).unwrap()
        } else {
            counterexample_2d(&[1], &one, &EpsProblemOptions { cells_per_unit: 16, ..Default::default() }).unwrap()
        };
        let distinct = rep.cross_branch_distance > 0.01 * rep.branches[0].limit_l2_norm;
        assert!(flagged && distinct, "coefficient {k}: flagged {flagged}, distinct {distinct}");
    }
}
