use serde::{Deserialize, Serialize};

use crate::discrete_calculus::{norms_vector, DecayFit, NormReport, Span};
use crate::elliptic_solver::{
    assemble_with, solve_vec, Affine, AssembleOptions, BoundaryCondition, DiscreteOperator,
    InterfaceAveraging, SolveOptions, SolveStats,
};
use crate::grid_fields::{Grid, MatrixField, ScalarField, VectorField};
use crate::periodic_extraction::{extend_matrix_periodically, extend_periodically};
use crate::{Error, Result};

use super::cell::PeriodicCorrector;
use super::profile::sublinearity_profile;

/// Relative `L²(Q_{R_inner})` change tolerated between the `R` and `R/2` solves.
pub const TRUNCATION_TOL: f64 = 0.05;
/// Consecutive update ratios at or above this value mean no contraction.
pub const CONTRACTION_LIMIT: f64 = 0.95;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectOptions {
    /// Diagnostic window half-width; defaults to `R/4`.
    pub r_inner: Option<f64>,
    /// Exponent for the `A^p` report and the sublinearity profile.
    pub p: f64,
    pub check_truncation: bool,
    pub averaging: InterfaceAveraging,
    pub solve: SolveOptions,
}

impl Default for DefectOptions {
    fn default() -> Self {
        DefectOptions {
            r_inner: None,
            p: 1.5,
            check_truncation: true,
            averaging: InterfaceAveraging::Harmonic,
            solve: SolveOptions::default(),
        }
    }
}

/// Half-width `R` of a box grid `]−R, R[^d` on the integer lattice.
fn box_half_width(g: &Grid) -> Result<f64> {
    let r = -g.origin()[0];
    let n = g.cells_per_unit();
    let expected = Grid::centered_box(g.dim(), r, n).ok();
    if expected.as_ref() != Some(g) || r.fract() != 0.0 {
        return Err(Error::InvalidGrid("defect problems need a centred box ]-R, R[^d with integer R".into()));
    }
    Ok(r)
}

/// `−div(a∇w̃) = div((a − a_per)(∇w_per + e_q))` on a box with `w̃ = 0` on its boundary.
///
/// The load is the difference of the two operators' pairings with
/// `w_per + x_q` over interior faces, so it vanishes identically when `a = a_per`.
#[derive(Clone, Debug)]
pub struct DefectProblem {
    pub q: usize,
    pub op_full: DiscreteOperator,
    pub op_per: DiscreteOperator,
    pub load: Vec<f64>,
}

impl DefectProblem {
    pub fn new(
        a: &MatrixField,
        a_per: &MatrixField,
        w_per: &ScalarField,
        q: usize,
        averaging: InterfaceAveraging,
    ) -> Result<Self> {
        let g = a.grid();
        if a_per.grid() != w_per.grid() {
            return Err(Error::ResolutionMismatch("a_per and w_per grids differ".into()));
        }
        if q >= g.dim() {
            return Err(Error::InvalidArgument(format!("direction {q} outside dimension {}", g.dim())));
        }
        let a_per_box = extend_matrix_periodically(a_per, g)?;
        let w_box = extend_periodically(w_per, g)?;
        let opts = AssembleOptions { averaging, mask: None };
        let op_full = assemble_with(a, BoundaryCondition::DirichletZero, &opts)?;
        let op_per = assemble_with(&a_per_box, BoundaryCondition::DirichletZero, &opts)?;
        let phi = Affine::with_slope(w_box.values(), q);
        let gf = op_full.form_gradient(phi);
        let gp = op_per.form_gradient(phi);
        let load = gf.iter().zip(&gp).map(|(x, y)| -(x - y)).collect();
        Ok(DefectProblem {
            q,
            op_full,
            op_per,
            load,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.op_full.grid()
    }

    /// Dirichlet solution of the full-coefficient problem.
    pub fn solve_direct(&self, opts: &SolveOptions) -> Result<(ScalarField, SolveStats)> {
        let (x, stats) = solve_vec(&self.op_full, &self.load, opts)?;
        Ok((ScalarField::new(self.grid().clone(), self.op_full.scatter(&x))?, stats))
    }

    pub fn solve_fixed_point(&self, tol: f64, opts: &SolveOptions) -> Result<FixedPointResult> {
        fixed_point_solve(&self.op_full, &self.op_per, &self.load, tol, opts)
    }
}

/// Whole-space defect corrector `w̃_q` truncated to a box, with diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectorSolution {
    pub q: usize,
    pub w_per: ScalarField,
    pub grad_w_per: VectorField,
    /// `w̃_q` on the box, anchored to vanish at the cell whose lower corner is the origin.
    pub w_tilde: ScalarField,
    pub grad_w_tilde: VectorField,
    pub inner_window: Span,
    /// Norms of `∇w̃` on the inner window.
    pub ap_report: NormReport,
    /// Absent when the inner window holds fewer than three dyadic shells.
    pub sublinearity: Option<DecayFit>,
    /// `‖(A w − b)|_{inner}‖ / ‖b‖`.
    pub inner_residual: f64,
    pub sup_inner: f64,
    /// `max |∇w̃(x + h e_i) − ∇w̃(x)| / h` over neighbouring inner cells: a
    /// grid-scale difference quotient, not a Hölder constant.
    pub grad_difference_quotient: f64,
    /// Relative `L²` change of `w̃` on the inner window when `R` is halved.
    pub truncation_difference: Option<f64>,
    pub stats: SolveStats,
}

fn anchored(w: &ScalarField) -> Result<ScalarField> {
    let g = w.grid();
    let h = g.h();
    let probe: Vec<f64> = vec![0.5 * h; g.dim()];
    let c = g
        .locate(&probe)
        .ok_or_else(|| Error::DomainTooSmall("box does not contain the origin".into()))?;
    let w0 = w.values()[c];
    Ok(w.map(|v| v - w0))
}

fn difference_quotient(v: &VectorField) -> f64 {
    let g = v.grid();
    let cells = g.cells();
    let mut worst = 0.0f64;
    for k in g.indices() {
        let [i, j] = g.multi_index(k);
        for axis in 0..g.dim() {
            let next = match axis {
                0 if i + 1 < cells[0] => g.index(i + 1, j),
                1 if j + 1 < cells[1] => g.index(i, j + 1),
                _ => continue,
            };
            let jump = (0..g.dim())
                .map(|c| (v.component(c)[next] - v.component(c)[k]).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(jump);
        }
    }
    worst / g.h()
}

fn defect_solve(
    a: &MatrixField,
    a_per: &MatrixField,
    w_per: &ScalarField,
    q: usize,
    opts: &DefectOptions,
) -> Result<(DefectProblem, ScalarField, SolveStats)> {
    let problem = DefectProblem::new(a, a_per, w_per, q, opts.averaging)?;
    let (w, stats) = problem.solve_direct(&opts.solve)?;
    Ok((problem, w, stats))
}

/// Direct solve of the defect equation on `Q_R` with diagnostics on `Q_{R_inner}`.
pub fn defect_corrector_direct(
    a: &MatrixField,
    a_per: &MatrixField,
    w_per: &PeriodicCorrector,
    q: usize,
    r_inner: f64,
) -> Result<CorrectorSolution> {
    let opts = DefectOptions {
        r_inner: Some(r_inner),
        ..Default::default()
    };
    defect_corrector_direct_with(a, a_per, w_per, q, &opts)
}

pub fn defect_corrector_direct_with(
    a: &MatrixField,
    a_per: &MatrixField,
    w_per: &PeriodicCorrector,
    q: usize,
    opts: &DefectOptions,
) -> Result<CorrectorSolution> {
    let g = a.grid();
    let d = g.dim();
    let r = box_half_width(g)?;
    let r_inner = opts.r_inner.unwrap_or(r / 4.0);
    if !(r_inner > 0.0) || 4.0 * r_inner > r {
        return Err(Error::InvalidArgument(format!("need R ≥ 4·R_inner, got R = {r}, R_inner = {r_inner}")));
    }
    let (problem, w_dir, stats) = defect_solve(a, a_per, &w_per.w, q, opts)?;
    let w_tilde = anchored(&w_dir)?;
    let grad_w_tilde = problem.op_full.cell_gradient(&w_dir)?;
    let inner = Grid::centered_box(d, r_inner, g.cells_per_unit())?;

    let mut res = problem.op_full.matrix().mul(&problem.op_full.gather(w_dir.values()));
    res.iter_mut().zip(&problem.load).for_each(|(x, b)| *x -= b);
    let res_full = ScalarField::new(g.clone(), problem.op_full.scatter(&res))?;
    let bnorm = problem.load.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rin = res_full.restrict(&inner)?.values().iter().map(|v| v * v).sum::<f64>().sqrt();
    let inner_residual = if bnorm > 0.0 { rin / bnorm } else { 0.0 };

    let w_in = w_tilde.restrict(&inner)?;
    let grad_in = grad_w_tilde.restrict(&inner)?;
    let ap_report = norms_vector(&grad_in, opts.p)?;
    let sublinearity = match sublinearity_profile(&w_in, opts.p) {
        Ok(fit) => Some(fit),
        Err(Error::InsufficientRadii { .. }) => None,
        Err(e) => return Err(e),
    };

    let truncation_difference = if opts.check_truncation {
        let half = Grid::centered_box(d, (r / 2.0).floor(), g.cells_per_unit())?;
        let a_half = MatrixField::new(half.clone(), {
            let off = crate::grid_fields::sub_offset(g, &half)?;
            half.indices()
                .map(|k| {
                    let [i, j] = half.multi_index(k);
                    *a.at(g.index(i + off[0], j + off[1]))
                })
                .collect()
        })?;
        let (_, w_half, _) = defect_solve(&a_half, a_per, &w_per.w, q, opts)?;
        let w_half_in = anchored(&w_half)?.restrict(&inner)?;
        let num = w_in.lin_comb(1.0, &w_half_in, -1.0)?.lp_norm(2.0);
        let den = w_in.lp_norm(2.0);
        let rel = if den > 0.0 { num / den } else if num > 0.0 { f64::INFINITY } else { 0.0 };
        if rel > TRUNCATION_TOL {
            return Err(Error::TruncationUnstable {
                relative_difference: rel,
            });
        }
        Some(rel)
    } else {
        None
    };
    Ok(CorrectorSolution {
        q,
        w_per: w_per.w.clone(),
        grad_w_per: w_per.grad.clone(),
        sup_inner: w_in.max_abs(),
        grad_difference_quotient: difference_quotient(&grad_in),
        w_tilde,
        grad_w_tilde,
        inner_window: Span::of_cells(&inner),
        ap_report,
        sublinearity,
        inner_residual,
        truncation_difference,
        stats,
    })
}

/// Outcome of `u_{n+1} = A_per⁻¹(b − (A − A_per) u_n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub u: ScalarField,
    /// `‖∇(u_{n+1} − u_n)‖_{L²}` per update.
    pub update_norms: Vec<f64>,
    /// Successive quotients of `update_norms`.
    pub ratios: Vec<f64>,
    /// Geometric mean of `ratios` (0 when there are none).
    pub contraction: f64,
    /// Updates performed before the stopping test held.
    pub iterations: usize,
}

/// Upper bound on fixed-point updates.
pub const MAX_FIXED_POINT_ITERATIONS: usize = 500;

/// Fixed-point iteration between two Dirichlet operators on the same grid.
pub fn fixed_point_solve(
    op_full: &DiscreteOperator,
    op_per: &DiscreteOperator,
    b: &[f64],
    tol: f64,
    opts: &SolveOptions,
) -> Result<FixedPointResult> {
    if op_full.grid() != op_per.grid() || op_full.unknowns() != op_per.unknowns() {
        return Err(Error::ResolutionMismatch("fixed-point operators live on different grids".into()));
    }
    let g = op_full.grid().clone();
    let mut u = vec![0.0; op_full.unknowns()];
    let mut update_norms = Vec::new();
    let mut ratios = Vec::new();
    for n in 0..MAX_FIXED_POINT_ITERATIONS {
        let af = op_full.matrix().mul(&u);
        let ap = op_per.matrix().mul(&u);
        let rhs: Vec<f64> = b.iter().zip(af.iter().zip(&ap)).map(|(bi, (f, p))| bi - (f - p)).collect();
        let (next, _) = solve_vec(op_per, &rhs, opts)?;
        let diff: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
        let diff_field = ScalarField::new(g.clone(), op_per.scatter(&diff))?;
        let norm = op_per.cell_gradient(&diff_field)?.l2_norm();
        if let Some(&prev) = update_norms.last() {
            if prev > 0.0 {
                ratios.push(norm / prev);
            }
        }
        update_norms.push(norm);
        u = next;
        let k = ratios.len();
        if k >= 2 && ratios[k - 1] >= CONTRACTION_LIMIT && ratios[k - 2] >= CONTRACTION_LIMIT {
            return Err(Error::NotContracting { ratios });
        }
        if norm <= tol {
            let contraction = if ratios.is_empty() {
                0.0
            } else {
                (ratios.iter().map(|r| r.max(f64::MIN_POSITIVE).ln()).sum::<f64>() / ratios.len() as f64).exp()
            };
            return Ok(FixedPointResult {
                u: ScalarField::new(g, op_full.scatter(&u))?,
                update_norms,
                ratios,
                contraction,
                iterations: n,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_FIXED_POINT_ITERATIONS,
        residual: update_norms.last().copied().unwrap_or(f64::NAN),
    })
}

/// Solves `−div(a_per∇u) = div(f + ã∇u)` by fixed-point iteration with `u = 0` on the box boundary.
pub fn defect_corrector_fixed_point(
    a_per: &MatrixField,
    a_tilde: &MatrixField,
    rhs: &VectorField,
    tol: f64,
) -> Result<FixedPointResult> {
    let a = a_per.add(a_tilde)?;
    let opts = AssembleOptions::default();
    let op_full = assemble_with(&a, BoundaryCondition::DirichletZero, &opts)?;
    let op_per = assemble_with(a_per, BoundaryCondition::DirichletZero, &opts)?;
    let b = op_full.div_source_load(rhs)?;
    fixed_point_solve(&op_full, &op_per, &b, tol, &SolveOptions::default())
}
