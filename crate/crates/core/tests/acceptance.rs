//! One test per acceptance criterion; each prints a single PASS/FAIL line.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use homoglab::corrector::{
    cell_problem, defect_corrector_direct, defect_corrector_fixed_point, CellOptions,
};
use homoglab::discrete_calculus::{
    ball_average_decay, discrete_gradient, potential_from_discrete_gradient, weak_star_vanishing,
    ShiftedDifferenceField,
};
use homoglab::elliptic_solver::{
    assemble, assemble_with, solve, solve_vec, AssembleOptions, BoundaryCondition, SolveOptions,
};
use homoglab::grid_fields::{
    sample_field, CoefficientSpec, Grid, MatrixField, ScalarField, SymMat, VectorField,
};
use homoglab::homogenize_harness::{
    counterexample_1d, counterexample_2d, mu_exponent, rate_sweep, Domain, EpsProblemOptions,
    SourceTerm, SweepOptions,
};
use homoglab::periodic_extraction::{
    cesaro_indices, cesaro_periodic_part, cesaro_periodic_part_with, extend_matrix_periodically,
    gns_verify, holder_lebesgue_exponent, CesaroOptions, PeriodicBackground,
};
use homoglab::quadrature::{adaptive, GaussRule};
use homoglab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(k: u32, pass: bool, detail: String) {
    println!("criterion {k:>2} {}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {k} failed: {detail}");
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(", ")
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

#[test]
fn criterion_01_harmonic_mean_1d() {
    let t = Instant::now();
    let g = Grid::unit_cell(1, 512).unwrap();
    let a = sample_field(&CoefficientSpec::sine(2.0, 1.0), &g).unwrap();
    let (_, tensor) = cell_problem(&a, &CellOptions::default()).unwrap();
    let elapsed = t.elapsed();
    let oracle = 1.0 / adaptive(|y| 1.0 / (2.0 + (2.0 * PI * y).sin()), 0.0, 1.0, 1e-15, 1e-15);
    let err = (tensor.matrix.xx - oracle).abs();
    let err_sqrt3 = (oracle - 3f64.sqrt()).abs();
    report(
        1,
        err < 1e-4 && err_sqrt3 < 1e-12 && within(elapsed, 1.0),
        format!("a* = {:.12}, oracle {oracle:.12}, |diff| {err:.2e}, time {elapsed:?}", tensor.matrix.xx),
    );
}

#[test]
fn criterion_02_laminate_2d() {
    let t = Instant::now();
    let (lo, hi) = (1.0, 3.0);
    let g = Grid::unit_cell(2, 128).unwrap();
    let a = sample_field(&CoefficientSpec::laminate(lo, hi, 0), &g).unwrap();
    let (_, tensor) = cell_problem(&a, &CellOptions::default()).unwrap();
    let elapsed = t.elapsed();
    let harmonic = 2.0 / (1.0 / lo + 1.0 / hi);
    let arithmetic = 0.5 * (lo + hi);
    let m = tensor.matrix;
    let err = (m.xx - harmonic).abs().max((m.yy - arithmetic).abs()).max(m.xy.abs());
    report(
        2,
        err < 1e-3 && within(elapsed, 30.0),
        format!("a* = [{:.6}, {:.2e}; {:.6}], max error {err:.2e}, time {elapsed:?}", m.xx, m.xy, m.yy),
    );
}

#[test]
fn criterion_03_constant_coefficient_suite() {
    let c = 2.75;
    let mut worst_w = 0.0f64;
    let mut worst_tilde = 0.0f64;
    let mut worst_tensor = 0.0f64;
    for dim in [1, 2] {
        let q = Grid::unit_cell(dim, 8).unwrap();
        let a_per = MatrixField::constant(q, SymMat::scalar(c));
        let (cs, tensor) = cell_problem(&a_per, &CellOptions::default()).unwrap();
        worst_w = cs.iter().map(|w| w.w.max_abs()).fold(worst_w, f64::max);
        let expected = SymMat::scalar(c);
        let dev = if dim == 1 { (tensor.matrix.xx - c).abs() } else { tensor.matrix.sub(&expected).max_abs() };
        worst_tensor = worst_tensor.max(dev / c);
        if dim == 2 {
            let bx = Grid::centered_box(2, 8.0, 4).unwrap();
            let a = MatrixField::constant(bx, SymMat::scalar(c));
            let a_per4 = MatrixField::constant(Grid::unit_cell(2, 4).unwrap(), SymMat::scalar(c));
            let (cs4, _) = cell_problem(&a_per4, &CellOptions::default()).unwrap();
            for q in 0..2 {
                let sol = defect_corrector_direct(&a, &a_per4, &cs4[q], q, 2.0).unwrap();
                worst_tilde = worst_tilde.max(sol.w_tilde.max_abs());
            }
        }
    }
    report(
        3,
        worst_w == 0.0 && worst_tilde == 0.0 && worst_tensor <= 4.0 * f64::EPSILON,
        format!("max|w_per| {worst_w:.1e}, max|w̃| {worst_tilde:.1e}, relative a* error {worst_tensor:.1e}"),
    );
}

/// Tent `(1 − |x − c|/R)₊` and bump `(1 − |x − c|²/R²)²₊`.
fn gns_member(grid: &Grid, shape: usize, r: f64, c: [f64; 2]) -> ScalarField {
    ScalarField::from_fn(grid.clone(), |x| {
        let s = (x[0] - c[0]).hypot(x[1] - c[1]) / r;
        if shape == 0 {
            (1.0 - s).max(0.0)
        } else {
            (1.0 - s * s).max(0.0).powi(2)
        }
    })
    .unwrap()
}

#[test]
fn criterion_04_discrete_gns_family() {
    let t = Instant::now();
    let grid = Grid::centered_box(2, 24.0, 4).unwrap();
    let dilations = [4.0, 8.0, 12.0];
    let translates = [[0.0, 0.0], [3.0, -2.0]];
    let mut by_dilation = vec![0.0f64; dilations.len()];
    let mut translation_gap = 0.0f64;
    let mut all_finite = true;
    let mut members = 0;
    for shape in 0..2 {
        for (di, &r) in dilations.iter().enumerate() {
            let ratios: Vec<f64> = translates
                .iter()
                .map(|&c| {
                    members += 1;
                    let f = gns_member(&grid, shape, r, c);
                    gns_verify(&f, 1.5, &PeriodicBackground::Zero).unwrap().ratio.unwrap_or(f64::NAN)
                })
                .collect();
            all_finite &= ratios.iter().all(|v| v.is_finite() && *v > 0.0);
            translation_gap = translation_gap.max((ratios[0] - ratios[1]).abs() / ratios[0]);
            by_dilation[di] = by_dilation[di].max(ratios[0].max(ratios[1]));
        }
    }
    let elapsed = t.elapsed();
    let (mn, mx) = by_dilation.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    let spread = (mx - mn) / mn;
    report(
        4,
        members == 12 && all_finite && translation_gap < 1e-10 && spread < 0.2 && within(elapsed, 10.0),
        format!(
            "{members} members, family max per dilation {by_dilation:.4?}, spread {:.1}%, translation gap {translation_gap:.1e}, time {elapsed:?}",
            100.0 * spread
        ),
    );
}

#[test]
fn criterion_05_cesaro_extraction() {
    let n_max = 32usize;
    let grid = Grid::centered_box(2, 33.0, 4).unwrap();
    let a_per = |x: [f64; 2]| 2.0 + 0.5 * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos();
    let bump = |x: [f64; 2]| (1.0 + x[0].hypot(x[1])).powi(-2);
    let f = ScalarField::from_fn(grid.clone(), |x| a_per(x) + bump(x)).unwrap();
    let opts = CesaroOptions {
        stop_early: false,
        ..Default::default()
    };
    let dec = cesaro_periodic_part_with(&f, n_max, &opts).unwrap();
    let exact = ScalarField::from_fn(dec.periodic_part.grid().clone(), a_per).unwrap();
    let err = dec.periodic_part.lin_comb(1.0, &exact, -1.0).unwrap().lp_norm(1.0);
    // tail-sum oracle: mean over I_N of the bump's mass on Q + k, by tensor Gauss rules
    let rule = GaussRule::new(8);
    let ks = cesaro_indices(2, n_max);
    let mass: f64 = ks
        .iter()
        .map(|k| {
            let (x0, y0) = (k[0] as f64, k[1] as f64);
            rule.composite(
                |x| rule.composite(|y| bump([x, y]), y0, y0 + 1.0, 4),
                x0,
                x0 + 1.0,
                4,
            )
        })
        .sum();
    let oracle = mass / ks.len() as f64;

    let log_osc = ScalarField::from_fn(grid.clone(), |x| 2.0 + (1.0 + x[0].hypot(x[1])).ln().sin()).unwrap();
    let iter_osc = ScalarField::from_fn(grid.clone(), |x| {
        2.0 + (1.0 + (1.0 + x[0].hypot(x[1])).ln()).ln().sin()
    })
    .unwrap();
    let flags = [
        cesaro_periodic_part(&log_osc, n_max).unwrap().non_convergent,
        cesaro_periodic_part(&iter_osc, n_max).unwrap().non_convergent,
    ];
    report(
        5,
        dec.n_used == n_max && err <= 2.0 * oracle && flags == [true, true],
        format!("L¹(Q) error {err:.4e}, tail-sum oracle {oracle:.4e}, NonConvergent flags {flags:?}"),
    );
}

#[test]
fn criterion_06_ball_decay_and_weak_star() {
    // |x|^{−1/3} has ball averages ∝ R^{−1/3} = R^{−d/p*} for d = 2, p = 3/2
    let grid = Grid::centered_box(2, 33.0, 4).unwrap();
    let f = ScalarField::from_fn(grid, |x| x[0].hypot(x[1]).powf(-1.0 / 3.0)).unwrap();
    let fit = ball_average_decay(&f, &[4.0, 8.0, 16.0, 32.0]).unwrap();
    let slope = fit.fitted_exponent.unwrap();
    let target = -2.0 / 6.0;
    let phi = |x: [f64; 2]| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2 < 1.0 {
            (1.0 - r2).powi(2)
        } else {
            0.0
        }
    };
    let w = weak_star_vanishing(&f, &[0.5, 0.25, 0.125], phi, 1.0).unwrap();
    let decreasing = w.windows(2).all(|p| p[1] < p[0]);
    report(
        6,
        (slope - target).abs() <= 0.15 && decreasing,
        format!("fitted exponent {slope:.4} (target {target:.4}), weak-* integrals [{}]", sci(&w)),
    );
}

#[test]
fn criterion_07_de_rham_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = Grid::centered_box(2, 4.0, 8).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let modes: Vec<(f64, f64, f64, f64)> = (0..4)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.0..2.0 * PI)))
            .collect();
        let quad: f64 = rng.gen_range(-0.3..0.3);
        let v = ScalarField::from_fn(grid.clone(), |x| {
            quad * x[0] * x[1] + modes.iter().map(|(c, k0, k1, ph)| c * (k0 * x[0] + k1 * x[1] + ph).sin()).sum::<f64>()
        })
        .unwrap();
        let t = discrete_gradient(&v).unwrap();
        let u = potential_from_discrete_gradient(&t, None).unwrap();
        worst = worst.max(discrete_gradient(&u).unwrap().max_distance(&t).unwrap());
    }
    // perturb one difference so the shifted Cauchy relation fails
    let v = ScalarField::from_fn(grid.clone(), |x| x[0] * x[1]).unwrap();
    let t = discrete_gradient(&v).unwrap();
    let mut comps = t.components().to_vec();
    comps[0].values_mut()[10] += 1e-3;
    let bad = ShiftedDifferenceField::new(grid, comps).unwrap();
    let rejected = matches!(potential_from_discrete_gradient(&bad, None), Err(Error::IncompatibleField { .. }));
    report(
        7,
        worst <= 1e-12 && rejected,
        format!("max |δ(potential(δv)) − δv| {worst:.2e}, incompatible field rejected: {rejected}"),
    );
}

fn fixed_point_case(amp: f64, tol: f64) -> (f64, f64) {
    let bx = Grid::centered_box(2, 4.0, 8).unwrap();
    let per = sample_field(&CoefficientSpec::sine(2.0, 0.5), &Grid::unit_cell(2, 8).unwrap()).unwrap();
    let a_per = extend_matrix_periodically(&per, &bx).unwrap();
    let shape = ScalarField::from_fn(bx.clone(), |x| 1.0 / (1.0 + x[0] * x[0] + x[1] * x[1])).unwrap();
    let scale = amp / shape.max_abs();
    let a_tilde = MatrixField::new(bx.clone(), shape.values().iter().map(|v| SymMat::scalar(scale * v)).collect()).unwrap();
    let rhs = VectorField::new(bx.clone(), vec![bx.indices().map(|k| bx.center(k)[0]).collect(), vec![0.0; bx.len()]]).unwrap();
    let fp = defect_corrector_fixed_point(&a_per, &a_tilde, &rhs, tol).unwrap();
    let a = a_per.add(&a_tilde).unwrap();
    let op = assemble_with(&a, BoundaryCondition::DirichletZero, &AssembleOptions::default()).unwrap();
    let b = op.div_source_load(&rhs).unwrap();
    let tight = SolveOptions { tol: 1e-13, max_iterations: None };
    let (x, _) = solve_vec(&op, &b, &tight).unwrap();
    let direct = ScalarField::new(bx, op.scatter(&x)).unwrap();
    let diff = fp.u.lin_comb(1.0, &direct, -1.0).unwrap();
    let gap = op.cell_gradient(&diff).unwrap().l2_norm();
    (fp.contraction, gap)
}

#[test]
fn criterion_08_fixed_point_defect_solver() {
    let tol = 1e-8;
    let cases: Vec<(f64, f64)> = [0.1, 0.2, 0.4].iter().map(|&amp| fixed_point_case(amp, tol)).collect();
    let ratios: Vec<f64> = cases.iter().map(|c| c.0).collect();
    let growing = ratios.windows(2).all(|w| w[1] > w[0]);
    report(
        8,
        ratios[0] < 0.5 && cases[0].1 <= 10.0 * tol && growing,
        format!("contraction ratios {ratios:.4?}, fixed point vs direct at 0.1: {:.2e} (limit {:.0e})", cases[0].1, 10.0 * tol),
    );
}

#[test]
fn criterion_09_rate_sweep_1d() {
    let t = Instant::now();
    let eps: Vec<f64> = (3..=8).map(|k| 0.5f64.powi(k)).collect();
    let rep = rate_sweep(
        &CoefficientSpec::sine(2.0, 1.0),
        &eps,
        &Domain::Interval { lo: 0.0, hi: 1.0 },
        &SourceTerm::constant(1.0),
        &SweepOptions::default(),
    )
    .unwrap();
    let elapsed = t.elapsed();
    let s_err = rep.fits.err_l2.as_ref().unwrap().slope;
    let s_grad = rep.fits.grad_r_l2.as_ref().unwrap().slope;
    report(
        9,
        (0.85..=1.15).contains(&s_err) && (0.8..=1.2).contains(&s_grad) && within(elapsed, 10.0),
        format!("slope ‖u^ε − u*‖ {s_err:.4}, slope ‖∇R^ε‖ {s_grad:.4}, time {elapsed:?}"),
    );
}

#[test]
fn criterion_10_exponent_formulas() {
    let mu = mu_exponent(1.5, 2).unwrap();
    let worst = [0.2, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&alpha: &f64| {
            let p = 2.0 / (alpha + 1.0);
            (holder_lebesgue_exponent(p, alpha, 1).unwrap() - 1.0 / alpha).abs() * alpha
        })
        .fold(0.0f64, f64::max);
    report(
        10,
        mu == 1.0 / 3.0 && worst < 1e-14,
        format!("μ(3/2, 2) = {mu:?}, worst relative gap q vs 1/α {worst:.1e}"),
    );
}

#[test]
fn criterion_11_counterexample_1d() {
    let t = Instant::now();
    let opts = EpsProblemOptions {
        cells_per_unit: 1024,
        ..Default::default()
    };
    let rep = counterexample_1d(&[1, 2, 3], &SourceTerm::constant(1.0), 0.0, &opts).unwrap();
    let elapsed = t.elapsed();
    let b = &rep.branches[0];
    let d: Vec<f64> = b.rows.iter().map(|r| r.distance).collect();
    let decreasing = d.windows(2).all(|w| w[1] < w[0]);
    let separated = rep.cross_branch_distance >= 0.01 * b.limit_l2_norm;
    report(
        11,
        separated && decreasing && within(elapsed, 5.0),
        format!(
            "‖u*₁ − u*₂‖ {:.4e} vs 1% of ‖u*₁‖ {:.4e}, distances [{}], time {elapsed:?}",
            rep.cross_branch_distance,
            0.01 * b.limit_l2_norm,
            sci(&d)
        ),
    );
}

#[test]
fn criterion_12_counterexample_2d() {
    let t = Instant::now();
    let opts = EpsProblemOptions {
        cells_per_unit: 32,
        ..Default::default()
    };
    let rep = counterexample_2d(&[1, 2, 3], &SourceTerm::constant(1.0), &opts).unwrap();
    let elapsed = t.elapsed();
    let mut dev = Vec::new();
    let mut bounded = true;
    for b in &rep.branches {
        for r in &b.rows {
            dev.push((b.label.clone(), r.n, r.sup_deviation));
            bounded &= r.distance <= r.perturbation_bound.unwrap();
        }
    }
    let sup_ok = dev.iter().all(|(_, _, v)| *v < 1e-3);
    let scaling = rep.limit_scaling_defect.unwrap();
    let worst: Vec<String> = dev.iter().filter(|d| d.2 >= 1e-3).map(|d| format!("{} n={}: {:.3e}", d.0, d.1, d.2)).collect();
    report(
        12,
        sup_ok && scaling < 1e-8 && bounded && within(elapsed, 60.0),
        format!(
            "deviations ≥ 1e-3: [{}], ‖u*₂ − (2/3)u*₁‖/‖u*₂‖ {scaling:.1e}, distances within bounds: {bounded}, time {elapsed:?}",
            worst.join(", ")
        ),
    );
}

fn manufactured_error(dim: usize, n: usize) -> f64 {
    // −div(a∇u) = f with a = 2 + sin(2πx)cos(2πy)/2, u = sin(πx)sin(πy); y-factors drop in 1D
    let g = Grid::unit_cell(dim, n).unwrap();
    let two = dim == 2;
    let sy = |x: [f64; 2]| if two { (PI * x[1]).sin() } else { 1.0 };
    let cy = |x: [f64; 2]| if two { (2.0 * PI * x[1]).cos() } else { 1.0 };
    let a = |x: [f64; 2]| 2.0 + 0.5 * (2.0 * PI * x[0]).sin() * cy(x);
    let coeff = MatrixField::new(g.clone(), g.indices().map(|k| SymMat::scalar(a(g.center(k)))).collect()).unwrap();
    let f = |x: [f64; 2]| {
        let ux = PI * (PI * x[0]).cos() * sy(x);
        let uy = if two { PI * (PI * x[0]).sin() * (PI * x[1]).cos() } else { 0.0 };
        let ax = PI * (2.0 * PI * x[0]).cos() * cy(x);
        let ay = if two { -PI * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin() } else { 0.0 };
        let lap = -(dim as f64) * PI * PI * (PI * x[0]).sin() * sy(x);
        -(ax * ux + ay * uy + a(x) * lap)
    };
    let op = assemble(&coeff, BoundaryCondition::DirichletZero).unwrap();
    let src = ScalarField::from_fn(g.clone(), f).unwrap();
    let u = solve(&op, &src, &VectorField::zeros(g.clone())).unwrap().0;
    let exact = ScalarField::from_fn(g, |x| (PI * x[0]).sin() * sy(x)).unwrap();
    u.lin_comb(1.0, &exact, -1.0).unwrap().lp_norm(2.0)
}

#[test]
fn criterion_13_solver_order() {
    let mut ratios = Vec::new();
    for dim in [1, 2] {
        let e: Vec<f64> = [16, 32, 64].iter().map(|&n| manufactured_error(dim, n)).collect();
        ratios.extend(e.windows(2).map(|w| (dim, w[0] / w[1])));
    }
    let pass = ratios.iter().all(|(_, r)| (3.5..=4.5).contains(r));
    report(13, pass, format!("error ratios (d, ratio) {ratios:.3?}"));
}
