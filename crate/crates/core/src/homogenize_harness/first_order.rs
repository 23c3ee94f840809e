use rayon::prelude::*;

use crate::corrector::PeriodicCorrector;
use crate::grid_fields::{ScalarField, VectorField};
use crate::{Error, Result};

/// Four-point Lagrange weights at offset `s ∈ [0, 1)` from the second node.
fn cubic_weights(s: f64) -> [f64; 4] {
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

/// Periodic tensor-cubic interpolation of a field sampled on a unit-periodic
/// cell grid. Exact on cubic polynomials away from the wrap.
pub fn periodic_interpolate(w: &ScalarField, y: [f64; 2]) -> f64 {
    let g = w.grid();
    let d = g.dim();
    let n = g.cells_per_unit() as f64;
    let mut base = [0i64; 2];
    let mut wts = [[1.0, 0.0, 0.0, 0.0]; 2];
    for a in 0..d {
        let t = (y[a] - g.origin()[a]) * n - 0.5;
        let i0 = t.floor();
        base[a] = i0 as i64;
        wts[a] = cubic_weights(t - i0);
    }
    let wrap = |i: i64, a: usize| i.rem_euclid(g.cells()[a] as i64) as usize;
    if d == 1 {
        (0..4).map(|k| wts[0][k] * w.values()[wrap(base[0] + k as i64 - 1, 0)]).sum()
    } else {
        let mut acc = 0.0;
        for kj in 0..4 {
            let j = wrap(base[1] + kj as i64 - 1, 1);
            for ki in 0..4 {
                let i = wrap(base[0] + ki as i64 - 1, 0);
                acc += wts[0][ki] * wts[1][kj] * w.at(i, j);
            }
        }
        acc
    }
}

/// Centred differences in the interior, one-sided at the grid edges.
pub fn centered_gradient(u: &ScalarField) -> VectorField {
    let g = u.grid();
    let h = g.h();
    let comps = (0..g.dim())
        .map(|axis| {
            let n = g.cells()[axis];
            g.indices()
                .map(|k| {
                    let mut ij = g.multi_index(k);
                    let i = ij[axis];
                    if n < 2 {
                        return 0.0;
                    }
                    let mut at = |m: usize| {
                        ij[axis] = m;
                        u.at(ij[0], ij[1])
                    };
                    if i == 0 {
                        (at(1) - at(0)) / h
                    } else if i + 1 == n {
                        (at(i) - at(i - 1)) / h
                    } else {
                        (at(i + 1) - at(i - 1)) / (2.0 * h)
                    }
                })
                .collect()
        })
        .collect();
    VectorField::new(g.clone(), comps).expect("component lengths match the grid")
}

/// `u^{ε,1} = u* + ε Σ_i ∂_i u* w_i(·/ε)` and the remainder `R^ε = u^ε − u^{ε,1}`.
#[derive(Clone, Debug)]
pub struct FirstOrder {
    pub u_eps1: ScalarField,
    pub remainder: ScalarField,
    pub grad_remainder: VectorField,
}

/// Builds the two-scale expansion on the grid shared by `u_star` and `u_eps`.
///
/// `∇u*` and `∇R^ε` are centred differences; corrector values at `x/ε` come
/// from periodic cubic interpolation of the cell-problem solution.
pub fn first_order_approx(
    u_star: &ScalarField,
    correctors: &[PeriodicCorrector],
    eps: f64,
    u_eps: &ScalarField,
) -> Result<FirstOrder> {
    let g = u_star.grid();
    if g != u_eps.grid() {
        return Err(Error::ResolutionMismatch("u* and u^ε live on different grids".into()));
    }
    let d = g.dim();
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("ε must be positive (got {eps})")));
    }
    let mut by_dir: Vec<Option<&ScalarField>> = vec![None; d];
    for c in correctors {
        if c.w.grid().dim() != d || c.q >= d {
            return Err(Error::ResolutionMismatch("corrector dimension differs from the grid".into()));
        }
        by_dir[c.q] = Some(&c.w);
    }
    let ws: Vec<&ScalarField> = by_dir
        .into_iter()
        .enumerate()
        .map(|(q, w)| w.ok_or_else(|| Error::ResolutionMismatch(format!("no corrector for direction {q}"))))
        .collect::<Result<_>>()?;
    let grad = centered_gradient(u_star);
    let u1: Vec<f64> = g
        .indices()
        .into_par_iter()
        .map(|k| {
            let x = g.center(k);
            let y = [x[0] / eps, x[1] / eps];
            let corr: f64 = (0..d).map(|i| grad.component(i)[k] * periodic_interpolate(ws[i], y)).sum();
            u_star.values()[k] + eps * corr
        })
        .collect();
    let u_eps1 = ScalarField::new(g.clone(), u1)?;
    let remainder = u_eps.lin_comb(1.0, &u_eps1, -1.0)?;
    let grad_remainder = centered_gradient(&remainder);
    Ok(FirstOrder {
        u_eps1,
        remainder,
        grad_remainder,
    })
}
