use serde::{Deserialize, Serialize};

use crate::elliptic_solver::{
    assemble_with, solve_vec, AssembleOptions, BoundaryCondition, InterfaceAveraging, SolveOptions,
    SolveStats,
};
use crate::grid_fields::{
    check_uniform_ellipticity, sample_rescaled, CoefficientSpec, EpsDescriptor, Grid, MatrixField,
    ScalarField,
};
use crate::{Error, Result};

use super::exact1d::solve_1d_exact;
use super::source::SourceTerm;

/// Minimum number of finite-volume cells across one fast period of `a(·/ε)`.
pub const MIN_CELLS_PER_PERIOD: usize = 8;

/// Bounded domain of the ε-problem, with homogeneous Dirichlet data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Domain {
    Interval { lo: f64, hi: f64 },
    Box { lo: [f64; 2], hi: [f64; 2] },
    /// `{inner < |x| < outer}`, staircased on `[−outer, outer]²`.
    Annulus { inner: f64, outer: f64 },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Domain::Interval { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            Domain::Box { lo, hi } => (0..2).all(|a| lo[a].is_finite() && hi[a].is_finite() && lo[a] < hi[a]),
            Domain::Annulus { inner, outer } => inner.is_finite() && outer.is_finite() && 0.0 <= inner && inner < outer,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("degenerate domain {self:?}")))
        }
    }

    /// Cell-centred grid covering the domain's bounding box.
    pub fn grid(&self, cells_per_unit: usize) -> Result<Grid> {
        self.validate()?;
        match *self {
            Domain::Interval { lo, hi } => Grid::from_box(&[lo], &[hi], cells_per_unit),
            Domain::Box { lo, hi } => Grid::from_box(&lo, &hi, cells_per_unit),
            Domain::Annulus { outer, .. } => Grid::centered_box(2, outer, cells_per_unit),
        }
    }

    /// Cells whose centre lies in the domain.
    pub fn mask(&self, grid: &Grid) -> Option<Vec<bool>> {
        match *self {
            Domain::Annulus { inner, outer } => Some(
                grid.indices()
                    .map(|k| {
                        let c = grid.center(k);
                        let r = c[0].hypot(c[1]);
                        inner < r && r < outer
                    })
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Cells at distance at least a quarter of the diameter from the boundary;
    /// for the annulus, the middle half of the radial range.
    pub fn interior_mask(&self, grid: &Grid) -> Vec<bool> {
        grid.indices()
            .map(|k| {
                let c = grid.center(k);
                match *self {
                    Domain::Interval { lo, hi } => {
                        let q = 0.25 * (hi - lo);
                        c[0] >= lo + q && c[0] <= hi - q
                    }
                    Domain::Box { lo, hi } => {
                        let q = 0.25 * (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
                        (0..2).all(|a| c[a] >= lo[a] + q && c[a] <= hi[a] - q)
                    }
                    Domain::Annulus { inner, outer } => {
                        let q = 0.25 * (outer - inner);
                        let r = c[0].hypot(c[1]);
                        r >= inner + q && r <= outer - q
                    }
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsProblemOptions {
    /// Minimum output (1D) or finite-volume (2D) resolution.
    pub cells_per_unit: usize,
    /// 1D output samples per fast period of `a(·/ε)`.
    pub samples_per_period: usize,
    pub averaging: InterfaceAveraging,
    pub solve: SolveOptions,
}

impl Default for EpsProblemOptions {
    fn default() -> Self {
        EpsProblemOptions {
            cells_per_unit: 64,
            samples_per_period: 64,
            averaging: InterfaceAveraging::default(),
            solve: SolveOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    ExactQuadrature,
    FiniteVolume,
}

/// `u^ε` at cell centres; inactive cells of a masked domain hold zero.
#[derive(Clone, Debug)]
pub struct EpsSolution {
    pub u: ScalarField,
    pub mask: Option<Vec<bool>>,
    pub method: SolverKind,
    pub flux_constant: Option<f64>,
    pub stats: Option<SolveStats>,
}

/// Solves `−div(a(·/ε)∇u) = f` on the domain with `u = 0` on its boundary.
///
/// One-dimensional problems use quadrature of the closed-form solution, so
/// they carry no discretisation error beyond the quadrature tolerance; the
/// output is sampled at `max(cells_per_unit, samples_per_period/(ε·period))`
/// points per unit. Two-dimensional problems use the finite-volume solver and
/// require at least [`MIN_CELLS_PER_PERIOD`] cells per fast period.
pub fn solve_eps_problem(
    spec: &CoefficientSpec,
    eps: &EpsDescriptor,
    domain: &Domain,
    f: &SourceTerm,
    opts: &EpsProblemOptions,
) -> Result<EpsSolution> {
    spec.validate()?;
    eps.validate()?;
    f.validate()?;
    domain.validate()?;
    if opts.cells_per_unit == 0 || opts.samples_per_period == 0 {
        return Err(Error::InvalidArgument("resolutions must be positive".into()));
    }
    let fast = spec.fast_period().map(|p| p * eps.value());
    if let Some(l) = fast {
        if !(l > 0.0) {
            return Err(Error::ResolutionInsufficient {
                cells_per_period: 0.0,
                required: MIN_CELLS_PER_PERIOD,
            });
        }
    }
    if domain.dim() == 1 {
        let n = match fast {
            Some(l) => opts
                .cells_per_unit
                .max((opts.samples_per_period as f64 / l).ceil() as usize),
            None => opts.cells_per_unit,
        };
        let grid = domain.grid(n)?;
        let a = |x: f64| spec.eval_rescaled([x, 0.0], 1, eps).map(|m| m.xx).unwrap_or(f64::NAN);
        // the coefficient is smooth within a sixteenth of its fast period
        let panel = fast.map_or(grid.h(), |l| (l / 16.0).min(grid.h()));
        let ex = solve_1d_exact(a, &grid, f, panel)?;
        return Ok(EpsSolution {
            u: ex.u,
            mask: None,
            method: SolverKind::ExactQuadrature,
            flux_constant: Some(ex.flux_constant),
            stats: None,
        });
    }
    if let Some(l) = fast {
        let cpp = l * opts.cells_per_unit as f64;
        if cpp < MIN_CELLS_PER_PERIOD as f64 {
            return Err(Error::ResolutionInsufficient {
                cells_per_period: cpp,
                required: MIN_CELLS_PER_PERIOD,
            });
        }
    }
    let grid = domain.grid(opts.cells_per_unit)?;
    let a = sample_rescaled(spec, &grid, eps)?;
    solve_fv(&a, domain, f, opts)
}

/// Finite-volume Dirichlet solve with a sampled coefficient on `domain.grid(..)`.
pub fn solve_fv(a: &MatrixField, domain: &Domain, f: &SourceTerm, opts: &EpsProblemOptions) -> Result<EpsSolution> {
    let grid = a.grid().clone();
    let mask = domain.mask(&grid);
    let (lambda, _) = check_uniform_ellipticity(a);
    if !(lambda > 0.0) {
        return Err(Error::EllipticityViolation {
            cell: 0,
            eigenvalue: lambda,
            floor: 0.0,
        });
    }
    let op = assemble_with(
        a,
        BoundaryCondition::DirichletZero,
        &AssembleOptions {
            averaging: opts.averaging,
            mask: mask.clone(),
        },
    )?;
    let src = ScalarField::from_fn(grid.clone(), |x| f.eval(x))?;
    let b = op.source_load(&src)?;
    let (x, stats) = solve_vec(&op, &b, &opts.solve)?;
    Ok(EpsSolution {
        u: ScalarField::new(grid, op.scatter(&x))?,
        mask,
        method: SolverKind::FiniteVolume,
        flux_constant: None,
        stats: Some(stats),
    })
}

/// `L²` norm over the cells selected by `mask` (all cells when `None`).
pub fn masked_l2(u: &ScalarField, mask: Option<&[bool]>) -> f64 {
    masked_lr(u.values(), u.grid().cell_volume(), mask, 2.0)
}

pub(crate) fn masked_lr(values: &[f64], vol: f64, mask: Option<&[bool]>, r: f64) -> f64 {
    let terms = values
        .iter()
        .enumerate()
        .filter(|(k, _)| mask.is_none_or(|m| m[*k]))
        .map(|(_, v)| v.abs().powf(r) * vol);
    crate::discrete_calculus::neumaier_sum(terms).powf(1.0 / r)
}
