use serde::{Deserialize, Serialize};

use crate::grid_fields::{ScalarField, VectorField};
use crate::{Error, Result};

use super::csr::{dot, sum};
use super::operator::{BoundaryCondition, DiscreteOperator};

/// Default relative residual target.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    /// Defaults to `50·√N + 10⁴`.
    pub max_iterations: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: DEFAULT_TOL,
            max_iterations: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// `‖b − Au‖ / ‖b‖`, recomputed from the returned iterate.
    pub relative_residual: f64,
    /// Whether iterates were projected onto zero-mean vectors.
    pub kernel_projection: bool,
}

fn project_mean(x: &mut [f64]) {
    let m = sum(x) / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= m);
}

/// Jacobi-preconditioned conjugate gradients on the operator's unknowns.
///
/// For periodic operators the load must sum to zero (relative to its `ℓ¹`
/// size) and both the residual and the preconditioned residual are kept
/// mean-free, so the iterate stays in the complement of the constants.
pub fn solve_vec(op: &DiscreteOperator, b: &[f64], opts: &SolveOptions) -> Result<(Vec<f64>, SolveStats)> {
    let n = op.unknowns();
    if b.len() != n {
        return Err(Error::InvalidArgument(format!("load has {} entries, operator {n}", b.len())));
    }
    let periodic = op.bc() == BoundaryCondition::PeriodicZeroMean;
    let mut b = b.to_vec();
    if periodic {
        let total = sum(&b);
        let scale: f64 = b.iter().map(|v| v.abs()).sum();
        if total.abs() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Singular(format!(
                "periodic load sums to {total:.3e} (ℓ¹ size {scale:.3e})"
            )));
        }
        project_mean(&mut b);
    }
    let bnorm = dot(&b, &b).sqrt();
    if bnorm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveStats {
                iterations: 0,
                relative_residual: 0.0,
                kernel_projection: periodic,
            },
        ));
    }
    let cap = opts
        .max_iterations
        .unwrap_or(50 * (n as f64).sqrt().ceil() as usize + 10_000);
    let inv_diag: Vec<f64> = op.matrix().diagonal().iter().map(|d| 1.0 / d).collect();
    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    if periodic {
        project_mean(&mut z);
    }
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    let mut rel = 1.0;
    while iterations < cap {
        op.matrix().mul_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Singular(format!("non-positive curvature p·Ap = {pap:.3e}")));
        }
        let alpha = rz / pap;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.iter_mut().zip(&ap).for_each(|(ri, ai)| *ri -= alpha * ai);
        if periodic {
            project_mean(&mut r);
        }
        iterations += 1;
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= opts.tol {
            break;
        }
        z.iter_mut()
            .zip(r.iter().zip(&inv_diag))
            .for_each(|(zi, (ri, di))| *zi = ri * di);
        if periodic {
            project_mean(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    if periodic {
        project_mean(&mut x);
    }
    let mut res = op.matrix().mul(&x);
    res.iter_mut().zip(&b).for_each(|(a, bi)| *a = bi - *a);
    let true_rel = dot(&res, &res).sqrt() / bnorm;
    if rel > opts.tol {
        return Err(Error::NoConvergence {
            iterations,
            residual: true_rel,
        });
    }
    Ok((
        x,
        SolveStats {
            iterations,
            relative_residual: true_rel,
            kernel_projection: periodic,
        },
    ))
}

/// Solves `−div(a∇u) = source + div(div_source)` with the operator's boundary condition.
pub fn solve(
    op: &DiscreteOperator,
    source: &ScalarField,
    div_source: &VectorField,
) -> Result<(ScalarField, SolveStats)> {
    solve_with(op, source, div_source, &SolveOptions::default())
}

pub fn solve_with(
    op: &DiscreteOperator,
    source: &ScalarField,
    div_source: &VectorField,
    opts: &SolveOptions,
) -> Result<(ScalarField, SolveStats)> {
    let mut b = op.source_load(source)?;
    let g = op.div_source_load(div_source)?;
    b.iter_mut().zip(&g).for_each(|(x, y)| *x += y);
    let (x, stats) = solve_vec(op, &b, opts)?;
    Ok((ScalarField::new(op.grid().clone(), op.scatter(&x))?, stats))
}
