use serde::{Deserialize, Serialize};

use crate::grid_fields::{Grid, ScalarField};
use crate::{Error, Result};

/// Unit-shift differences `δ_i f = f(· + e_i) − f`.
///
/// Component `i` lives on the source grid shortened by one unit along axis `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftedDifferenceField {
    source_grid: Grid,
    components: Vec<ScalarField>,
}

impl ShiftedDifferenceField {
    /// Assembles a field from components; each must sit on the expected shortened grid.
    pub fn new(source_grid: Grid, components: Vec<ScalarField>) -> Result<Self> {
        if components.len() != source_grid.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} components, got {}",
                source_grid.dim(),
                components.len()
            )));
        }
        for (axis, c) in components.iter().enumerate() {
            let expected = shrunken_grid(&source_grid, axis)?;
            if c.grid() != &expected {
                return Err(Error::ResolutionMismatch(format!(
                    "component {axis} is not on the source grid shortened along axis {axis}"
                )));
            }
        }
        Ok(ShiftedDifferenceField {
            source_grid,
            components,
        })
    }

    pub fn source_grid(&self) -> &Grid {
        &self.source_grid
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &ScalarField {
        &self.components[axis]
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    /// `(Σ_i ‖δ_i f‖_{L^p}^p)^{1/p}`, each component over its own domain.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        let s: f64 = self.components.iter().map(|c| c.lp_norm(p).powf(p)).sum();
        s.powf(1.0 / p)
    }

    /// Largest pointwise difference to another shifted field on the same grid.
    pub fn max_distance(&self, other: &ShiftedDifferenceField) -> Result<f64> {
        if self.source_grid != other.source_grid {
            return Err(Error::ResolutionMismatch("difference fields on different grids".into()));
        }
        Ok(self
            .components
            .iter()
            .zip(&other.components)
            .flat_map(|(a, b)| a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max))
    }
}

/// The grid on which `δ_axis` is defined.
pub(crate) fn shrunken_grid(grid: &Grid, axis: usize) -> Result<Grid> {
    let n = grid.cells_per_unit();
    let mut cells = grid.cells().to_vec();
    if cells[axis] <= n {
        return Err(Error::GridTooSmall(format!(
            "axis {axis} holds {} cells, a unit shift needs more than {n}",
            cells[axis]
        )));
    }
    cells[axis] -= n;
    grid.with_cells(&cells)
}

/// Exact unit-shift differences of a sampled field.
///
/// Requires at least two units of extent along every axis.
pub fn discrete_gradient(f: &ScalarField) -> Result<ShiftedDifferenceField> {
    let grid = f.grid();
    let n = grid.cells_per_unit();
    for (axis, &c) in grid.cells().iter().enumerate() {
        if c < 2 * n {
            return Err(Error::GridTooSmall(format!(
                "axis {axis} spans {} units, the discrete gradient needs at least 2",
                c as f64 / n as f64
            )));
        }
    }
    let components = (0..grid.dim())
        .map(|axis| {
            let sub = shrunken_grid(grid, axis)?;
            let shift = if axis == 0 { n } else { n * grid.cells()[0] };
            let values = sub
                .indices()
                .map(|k| {
                    let [i, j] = sub.multi_index(k);
                    let src = grid.index(i, j);
                    f.values()[src + shift] - f.values()[src]
                })
                .collect();
            ScalarField::new(sub, values)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShiftedDifferenceField {
        source_grid: grid.clone(),
        components,
    })
}
