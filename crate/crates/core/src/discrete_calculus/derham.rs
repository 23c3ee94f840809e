use crate::grid_fields::{sub_offset, Grid, ScalarField};
use crate::{Error, Result};

use super::gradient::ShiftedDifferenceField;

/// Compatibility tolerance, absolute for `|T| ≤ 1` and relative above.
const CAUCHY_TOL: f64 = 1e-12;

/// Largest violation of `δ_2 T_1 = δ_1 T_2` on the overlap domain.
pub fn cauchy_defect(t: &ShiftedDifferenceField) -> f64 {
    let g = t.source_grid();
    if g.dim() < 2 {
        return 0.0;
    }
    let n = g.cells_per_unit();
    let (t1, t2) = (t.component(0), t.component(1));
    let (c0, c1) = (g.cells()[0], g.cells()[1]);
    let mut worst = 0.0f64;
    for j in 0..c1 - n {
        for i in 0..c0 - n {
            let d21 = t1.at(i, j + n) - t1.at(i, j);
            let d12 = t2.at(i + n, j) - t2.at(i, j);
            worst = worst.max((d21 - d12).abs());
        }
    }
    worst
}

/// Reconstructs `u` with `δu = T`.
///
/// `u` equals `base` on the unit block covered by `base`'s grid. Without
/// `base`, `u` vanishes on `Q = ]0,1[^d` when the grid contains it aligned,
/// otherwise on the lower-corner unit block.
pub fn potential_from_discrete_gradient(
    t: &ShiftedDifferenceField,
    base: Option<&ScalarField>,
) -> Result<ScalarField> {
    let g = t.source_grid();
    let n = g.cells_per_unit();
    let scale = t.max_abs().max(1.0);
    let defect = cauchy_defect(t);
    if defect > CAUCHY_TOL * scale {
        return Err(Error::IncompatibleField {
            defect,
            tolerance: CAUCHY_TOL * scale,
        });
    }
    let anchor = match base {
        Some(b) => {
            if b.grid().cells().iter().any(|&c| c != n) {
                return Err(Error::InvalidArgument(
                    "base data must cover exactly one unit block".into(),
                ));
            }
            sub_offset(g, b.grid())?
        }
        None => Grid::unit_cell(g.dim(), n)
            .ok()
            .and_then(|q| sub_offset(g, &q).ok())
            .unwrap_or([0, 0]),
    };
    let c0 = g.cells()[0];
    let c1 = g.cells().get(1).copied().unwrap_or(1);
    let mut u = vec![0.0; g.len()];
    if let Some(b) = base {
        for k in b.grid().indices() {
            let [i, j] = b.grid().multi_index(k);
            u[g.index(anchor[0] + i, anchor[1] + j)] = b.values()[k];
        }
    }
    // along axis 1 within the anchor columns
    if g.dim() == 2 {
        let t2 = t.component(1);
        for i in anchor[0]..anchor[0] + n {
            for j in anchor[1] + n..c1 {
                u[g.index(i, j)] = u[g.index(i, j - n)] + t2.at(i, j - n);
            }
            for j in (0..anchor[1]).rev() {
                u[g.index(i, j)] = u[g.index(i, j + n)] - t2.at(i, j);
            }
        }
    }
    // along axis 0 for every row
    let t1 = t.component(0);
    for j in 0..c1 {
        for i in anchor[0] + n..c0 {
            u[g.index(i, j)] = u[g.index(i - n, j)] + t1.at(i - n, j);
        }
        for i in (0..anchor[0]).rev() {
            u[g.index(i, j)] = u[g.index(i + n, j)] - t1.at(i, j);
        }
    }
    ScalarField::new(g.clone(), u)
}
