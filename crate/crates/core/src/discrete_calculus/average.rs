use crate::grid_fields::{Grid, ScalarField};
use crate::{Error, Result};

use super::summation::SummedArea;

/// Grid whose cell centres are the admissible lower corners `z` of unit
/// windows `Q + z` aligned with the source cells.
pub(crate) fn window_grid(grid: &Grid) -> Result<Grid> {
    let n = grid.cells_per_unit();
    if grid.cells().iter().any(|&c| c < n) {
        return Err(Error::GridTooSmall(
            "local averages need at least one unit of extent per axis".into(),
        ));
    }
    let half = 0.5 * grid.h();
    let origin: Vec<f64> = grid.origin().iter().map(|o| o - half).collect();
    let cells: Vec<usize> = grid.cells().iter().map(|c| c - n + 1).collect();
    Grid::new(grid.dim(), &origin, n, &cells)
}

/// Midpoint-rule integrals `∫_{Q+z} v` for every aligned window, via a summed-area table.
pub(crate) fn window_integrals(grid: &Grid, values: &[f64]) -> Result<ScalarField> {
    let out = window_grid(grid)?;
    let n = grid.cells_per_unit();
    let w1 = if grid.dim() == 2 { n } else { 1 };
    let sat = SummedArea::new(grid, values);
    let vol = grid.cell_volume();
    let vals = out
        .indices()
        .map(|k| {
            let [i, j] = out.multi_index(k);
            sat.window(i, j, n, w1) * vol
        })
        .collect();
    ScalarField::new(out, vals)
}

/// Local average `M(|f|)(z) = ∫_{Q+z} |f|`.
///
/// The result's cell centres are the window corners `z`; windows are exact
/// unions of source cells, so the output grid is offset by half a cell.
pub fn local_average(f: &ScalarField) -> Result<ScalarField> {
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    window_integrals(f.grid(), &abs)
}

/// Uniformly local `L²` norm: largest `L²` norm over aligned unit windows.
pub fn l2_unif(f: &ScalarField) -> Result<f64> {
    let sq: Vec<f64> = f.values().iter().map(|v| v * v).collect();
    Ok(window_integrals(f.grid(), &sq)?.max_abs().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete_calculus::neumaier_sum;

    #[test]
    fn half_overlap_of_unit_indicator() {
        let g = Grid::centered_box(1, 3.0, 8).unwrap();
        let f = ScalarField::from_fn(g, |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
        let m = local_average(&f).unwrap();
        let k = m.grid().locate(&[-0.5 + 1e-9]).unwrap();
        assert!((m.grid().center(k)[0] + 0.5).abs() < 1e-15);
        assert_eq!(m.values()[k], 0.5);
    }

    #[test]
    fn matches_direct_window_sum() {
        let g = Grid::centered_box(2, 3.0, 5).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x| (3.0 * x[0]).sin() * 1e3 + x[1] * x[1]).unwrap();
        let m = local_average(&f).unwrap();
        let n = 5;
        for k in [0, 17, m.grid().len() - 1] {
            let [i, j] = m.grid().multi_index(k);
            let direct = neumaier_sum(
                (j..j + n).flat_map(|b| (i..i + n).map(move |a| (a, b))).map(|(a, b)| f.at(a, b).abs()),
            ) * g.cell_volume();
            assert!((m.values()[k] - direct).abs() <= 1e-13 * direct.abs());
        }
    }
}
