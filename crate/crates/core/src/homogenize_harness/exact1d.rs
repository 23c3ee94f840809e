use rayon::prelude::*;

use crate::discrete_calculus::neumaier_sum;
use crate::grid_fields::{Grid, ScalarField};
use crate::quadrature::adaptive_with_error;
use crate::{Error, Result};

use super::source::SourceTerm;

/// Per-panel quadrature tolerances.
const ABS_TOL: f64 = 1e-16;
const REL_TOL: f64 = 1e-14;

/// Quadrature solution of `−(a u′)′ = f`, `u(lo) = u(hi) = 0`, at cell centres.
#[derive(Clone, Debug)]
pub struct Exact1d {
    pub u: ScalarField,
    /// `C` in `a u′ = C − F`.
    pub flux_constant: f64,
}

/// `a u′ = C − F` with `F = ∫_lo f`, hence `u = ∫_lo (C − F)/a` and
/// `C = ∫ F/a / ∫ 1/a` from `u(hi) = 0`.
///
/// Integrals are accumulated between consecutive cell centres with adaptive
/// Gauss–Kronrod on panels no longer than `panel`.
pub fn solve_1d_exact(
    a: impl Fn(f64) -> f64 + Sync,
    grid: &Grid,
    source: &SourceTerm,
    panel: f64,
) -> Result<Exact1d> {
    if grid.dim() != 1 {
        return Err(Error::InvalidGrid("exact quadrature solver is one-dimensional".into()));
    }
    if !(panel > 0.0) {
        return Err(Error::InvalidArgument("panel length must be positive".into()));
    }
    let lo = grid.origin()[0];
    let hi = grid.upper()[0];
    let mut pts = Vec::with_capacity(grid.len() + 2);
    pts.push(lo);
    pts.extend(grid.indices().map(|k| grid.center(k)[0]));
    pts.push(hi);
    let segs: Vec<(f64, f64)> = pts
        .par_windows(2)
        .map(|w| {
            let (s, e) = (w[0], w[1]);
            let pieces = ((e - s) / panel).ceil().max(1.0) as usize;
            let step = (e - s) / pieces as f64;
            let mut i1 = Vec::with_capacity(pieces);
            let mut i2 = Vec::with_capacity(pieces);
            for k in 0..pieces {
                let a0 = s + k as f64 * step;
                let b0 = if k + 1 == pieces { e } else { a0 + step };
                let tol = ABS_TOL * (b0 - a0);
                i1.push(adaptive_with_error(|x| 1.0 / a(x), a0, b0, tol, REL_TOL, 200).0);
                i2.push(
                    adaptive_with_error(|x| source.antiderivative(lo, x) / a(x), a0, b0, tol, REL_TOL, 200).0,
                );
            }
            (neumaier_sum(i1), neumaier_sum(i2))
        })
        .collect();
    if segs.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::NonFinite {
            cell: 0,
            detail: "coefficient quadrature produced a non-finite value".into(),
        });
    }
    // prefix sums in double-double via running Neumaier compensation
    let prefix = |pick: fn(&(f64, f64)) -> f64| {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let mut out = Vec::with_capacity(segs.len());
        for s in &segs {
            let v = pick(s);
            let t = sum + v;
            comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
            sum = t;
            out.push(sum + comp);
        }
        out
    };
    let i1 = prefix(|s| s.0);
    let i2 = prefix(|s| s.1);
    let total1 = i1[i1.len() - 1];
    let total2 = i2[i2.len() - 1];
    let c = total2 / total1;
    let u = (0..grid.len()).map(|k| c * i1[k] - i2[k]).collect();
    Ok(Exact1d {
        u: ScalarField::new(grid.clone(), u)?,
        flux_constant: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_coefficient_parabola() {
        let g = Grid::unit_cell(1, 16).unwrap();
        let s = solve_1d_exact(|_| 1.0, &g, &SourceTerm::constant(1.0), 1.0).unwrap();
        for k in g.indices() {
            let x = g.center(k)[0];
            assert!((s.u.values()[k] - x * (1.0 - x) / 2.0).abs() < 1e-15);
        }
        assert!((s.flux_constant - 0.5).abs() < 1e-15);
    }

    #[test]
    fn piecewise_coefficient_matches_closed_form() {
        // a = 1 on (0, ½), 3 on (½, 1), f = 0 except via C: use f ≡ 1
        let g = Grid::unit_cell(1, 8).unwrap();
        let a = |x: f64| if x < 0.5 { 1.0 } else { 3.0 };
        let s = solve_1d_exact(a, &g, &SourceTerm::constant(1.0), 0.5).unwrap();
        // ∫1/a = 2/3, ∫x/a = 1/8 + 1/8 = 1/4 → C = 3/8
        assert!((s.flux_constant - 0.375).abs() < 1e-14);
        let x = g.center(1)[0];
        assert!((s.u.values()[1] - (0.375 * x - x * x / 2.0)).abs() < 1e-14);
    }
}
