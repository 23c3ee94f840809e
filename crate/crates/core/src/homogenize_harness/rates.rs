use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corrector::{cell_problem, CellOptions};
use crate::discrete_calculus::sobolev_conjugate;
use crate::fit::{fit_loglog, LineFit};
use crate::grid_fields::io::fmt_f64;
use crate::grid_fields::{
    sample_field, sample_rescaled, CoefficientSpec, EpsDescriptor, Grid, MatrixField, ScalarField,
    SymMat,
};
use crate::periodic_extraction::holder_lebesgue_exponent;
use crate::{Error, Result};

use super::eps_problem::{masked_lr, solve_fv, Domain, EpsProblemOptions, MIN_CELLS_PER_PERIOD};
use super::exact1d::solve_1d_exact;
use super::first_order::{centered_gradient, first_order_approx};
use super::source::SourceTerm;

/// Fewest ε values accepted by a rate sweep.
pub const MIN_SWEEP_POINTS: usize = 4;

/// Predicted `L²` rate exponent of the remainder driven by a perturbation in `A^p`.
///
/// `μ = d/p*` for `p > d/2` (which needs `p < d`), `μ = 1` for `p < d/2`;
/// `p = d/2` is the borderline case and is rejected.
pub fn mu_exponent(p: f64, d: usize) -> Result<f64> {
    let half = d as f64 / 2.0;
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::ExponentOutOfRange(format!("p = {p} must be positive")));
    }
    if p == half {
        return Err(Error::ExponentOutOfRange(format!("p = d/2 = {half} is the borderline case")));
    }
    if p < half {
        return Ok(1.0);
    }
    let ps = sobolev_conjugate(p, d)
        .ok_or_else(|| Error::ExponentOutOfRange(format!("p = {p} must be below d = {d}")))?;
    Ok(d as f64 / ps)
}

/// `ν = d/q` for `q > d`, `ν = 1` for `q < d`; `q = d` is rejected.
pub fn nu_exponent(q: f64, d: usize) -> Result<f64> {
    let df = d as f64;
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::ExponentOutOfRange(format!("q = {q} must be positive")));
    }
    if q == df {
        return Err(Error::ExponentOutOfRange(format!("q = d = {d} is the borderline case")));
    }
    Ok(if q > df { df / q } else { 1.0 })
}

/// Errors at one `ε`, measured against the homogenized solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    /// `‖u^ε − u*‖_{L²(Ω)}`.
    pub err_l2: f64,
    /// `‖∇R^ε‖_{L²(Ω₁)}`.
    pub grad_r_l2: f64,
    /// `‖∇R^ε‖_{L^r(Ω₁)}`.
    pub grad_r_lr: f64,
    /// `‖∇(u^ε − u*)‖_{L²(Ω₁)}`, which does not vanish with `ε`.
    pub grad_err_l2: f64,
    pub cells_per_unit: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepFits {
    pub err_l2: Option<LineFit>,
    pub grad_r_l2: Option<LineFit>,
    pub grad_r_lr: Option<LineFit>,
}

/// Log-log slopes of a sweep and the predicted exponents they are compared with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub dim: usize,
    pub r: f64,
    pub p: f64,
    pub alpha: f64,
    pub rows: Vec<SweepRow>,
    pub fits: SweepFits,
    pub mu: Option<f64>,
    pub q: Option<f64>,
    pub nu: Option<f64>,
    /// Which branch of the predicted exponents applies, or why none does.
    pub reference: String,
    pub a_star: Option<SymMat>,
}

impl SweepReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["eps", "cells_per_unit", "err_l2", "grad_r_l2", "grad_r_lr", "grad_err_l2"])?;
        for r in &self.rows {
            out.write_record([
                fmt_f64(r.eps),
                r.cells_per_unit.to_string(),
                fmt_f64(r.err_l2),
                fmt_f64(r.grad_r_l2),
                fmt_f64(r.grad_r_lr),
                fmt_f64(r.grad_err_l2),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// `(ln ε, ln error)` series keyed by error name.
    pub fn plot_series(&self) -> Vec<(String, Vec<(f64, f64)>)> {
        let series = |name: &str, pick: fn(&SweepRow) -> f64| {
            (
                name.to_string(),
                self.rows.iter().map(|r| (r.eps.ln(), pick(r).ln())).collect(),
            )
        };
        vec![
            series("err_l2", |r| r.err_l2),
            series("grad_r_l2", |r| r.grad_r_l2),
            series("grad_r_lr", |r| r.grad_r_lr),
        ]
    }
}

/// Fits the sweep rows and attaches the predicted exponents for `(p, α, d)`.
///
/// Requires at least [`MIN_SWEEP_POINTS`] distinct, strictly decreasing `ε`.
pub fn remainder_rates(rows: Vec<SweepRow>, dim: usize, r: f64, p: f64, alpha: f64) -> Result<SweepReport> {
    if rows.len() < MIN_SWEEP_POINTS {
        return Err(Error::InsufficientPoints {
            needed: MIN_SWEEP_POINTS,
            got: rows.len(),
        });
    }
    if rows.windows(2).any(|w| !(w[1].eps < w[0].eps)) {
        return Err(Error::InvalidArgument("ε values must be strictly decreasing".into()));
    }
    if !(r >= 1.0) {
        return Err(Error::ExponentOutOfRange(format!("r = {r} must satisfy r ≥ 1")));
    }
    let eps: Vec<f64> = rows.iter().map(|x| x.eps).collect();
    let fit = |pick: fn(&SweepRow) -> f64| fit_loglog(&eps, &rows.iter().map(pick).collect::<Vec<_>>());
    let fits = SweepFits {
        err_l2: fit(|x| x.err_l2),
        grad_r_l2: fit(|x| x.grad_r_l2),
        grad_r_lr: fit(|x| x.grad_r_lr),
    };
    let mu = mu_exponent(p, dim);
    let q = holder_lebesgue_exponent(p, alpha, dim);
    let nu = q.as_ref().map_err(|e| e.to_string()).and_then(|q| nu_exponent(*q, dim).map_err(|e| e.to_string()));
    let half = dim as f64 / 2.0;
    let mut notes = Vec::new();
    match &mu {
        Ok(_) if p > half => notes.push(format!("μ = d/p* since p > d/2 = {half}")),
        Ok(_) => notes.push(format!("μ = 1 since p < d/2 = {half}")),
        Err(e) => notes.push(format!("μ unavailable: {e}")),
    }
    match (&q, &nu) {
        (Ok(q), Ok(_)) if *q > dim as f64 => notes.push(format!("ν = d/q since q = {q:.6} > d")),
        (Ok(q), Ok(_)) => notes.push(format!("ν = 1 since q = {q:.6} < d")),
        (_, Err(e)) => notes.push(format!("ν unavailable: {e}")),
        (Err(_), Ok(_)) => unreachable!("ν is derived from q"),
    }
    Ok(SweepReport {
        dim,
        r,
        p,
        alpha,
        rows,
        fits,
        mu: mu.ok(),
        q: q.ok(),
        nu: nu.ok(),
        reference: notes.join("; "),
        a_star: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub problem: EpsProblemOptions,
    /// Cell-problem resolution; defaults to 4096 in 1D and 128 in 2D.
    pub corrector_cells: Option<usize>,
    pub r: f64,
    pub p: f64,
    pub alpha: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            problem: EpsProblemOptions::default(),
            corrector_cells: None,
            r: 4.0,
            p: 1.5,
            alpha: 0.5,
        }
    }
}

/// Solves the ε-problems for a decreasing list of literal `ε`, builds the
/// first-order approximation from the periodic part's correctors and fits the
/// error rates.
///
/// `u*` uses the homogenized tensor of the periodic part on the same grid as
/// each `u^ε`: exact quadrature in 1D, finite volumes in 2D.
pub fn rate_sweep(
    spec: &CoefficientSpec,
    eps_list: &[f64],
    domain: &Domain,
    f: &SourceTerm,
    opts: &SweepOptions,
) -> Result<SweepReport> {
    spec.validate()?;
    f.validate()?;
    domain.validate()?;
    if eps_list.len() < MIN_SWEEP_POINTS {
        return Err(Error::InsufficientPoints {
            needed: MIN_SWEEP_POINTS,
            got: eps_list.len(),
        });
    }
    let eps_d: Vec<EpsDescriptor> = eps_list.iter().map(|e| EpsDescriptor::literal(*e)).collect::<Result<_>>()?;
    let per = spec
        .periodic_part()
        .ok_or_else(|| Error::InvalidArgument("rate sweeps need a coefficient with a periodic part".into()))?;
    let d = domain.dim();
    let nc = opts.corrector_cells.unwrap_or(if d == 1 { 4096 } else { 128 });
    let a_per = sample_field(&per, &Grid::unit_cell(d, nc)?)?;
    let (correctors, tensor) = cell_problem(&a_per, &CellOptions::default())?;
    let a_star = tensor.matrix;
    let period = spec.fast_period();
    let rows = eps_d
        .par_iter()
        .zip(eps_list.par_iter())
        .map(|(ed, &eps)| {
            let l = period.map(|p| p * eps);
            let n = if d == 1 {
                l.map_or(opts.problem.cells_per_unit, |l| {
                    opts.problem
                        .cells_per_unit
                        .max((opts.problem.samples_per_period as f64 / l).ceil() as usize)
                })
            } else {
                let n = opts.problem.cells_per_unit;
                if let Some(l) = l {
                    if l * (n as f64) < MIN_CELLS_PER_PERIOD as f64 {
                        return Err(Error::ResolutionInsufficient {
                            cells_per_period: l * n as f64,
                            required: MIN_CELLS_PER_PERIOD,
                        });
                    }
                }
                n
            };
            let grid = domain.grid(n)?;
            let (u_eps, u_star) = if d == 1 {
                let a = |x: f64| spec.eval_rescaled([x, 0.0], 1, ed).map(|m| m.xx).unwrap_or(f64::NAN);
                let panel = l.map_or(grid.h(), |l| (l / 16.0).min(grid.h()));
                let ue = solve_1d_exact(a, &grid, f, panel)?.u;
                let us = solve_1d_exact(|_| a_star.xx, &grid, f, grid.h())?.u;
                (ue, us)
            } else {
                let ae = sample_rescaled(spec, &grid, ed)?;
                let ue = solve_fv(&ae, domain, f, &opts.problem)?.u;
                let us = solve_fv(&MatrixField::constant(grid.clone(), a_star), domain, f, &opts.problem)?.u;
                (ue, us)
            };
            sweep_row(&u_eps, &u_star, &correctors, eps, domain, opts.r, n)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = remainder_rates(rows, d, opts.r, opts.p, opts.alpha)?;
    report.a_star = Some(a_star);
    Ok(report)
}

fn sweep_row(
    u_eps: &ScalarField,
    u_star: &ScalarField,
    correctors: &[crate::corrector::PeriodicCorrector],
    eps: f64,
    domain: &Domain,
    r: f64,
    n: usize,
) -> Result<SweepRow> {
    let g = u_eps.grid();
    let vol = g.cell_volume();
    let mask = domain.mask(g);
    let inner = domain.interior_mask(g);
    let fo = first_order_approx(u_star, correctors, eps, u_eps)?;
    let diff = u_eps.lin_comb(1.0, u_star, -1.0)?;
    let grad_diff = centered_gradient(&diff);
    let vec_norm = |v: &crate::grid_fields::VectorField, r: f64| {
        let mag = v.magnitude();
        masked_lr(mag.values(), vol, Some(&inner), r)
    };
    Ok(SweepRow {
        eps,
        err_l2: masked_lr(diff.values(), vol, mask.as_deref(), 2.0),
        grad_r_l2: vec_norm(&fo.grad_remainder, 2.0),
        grad_r_lr: vec_norm(&fo.grad_remainder, r),
        grad_err_l2: vec_norm(&grad_diff, 2.0),
        cells_per_unit: n,
    })
}
