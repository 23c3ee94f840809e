use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform tensor-product grid in dimension 1 or 2.
///
/// Spacing is always `h = 1 / cells_per_unit`, so every unit cube holds an
/// integer number of cells and unit shifts are exact index shifts. Unused
/// trailing axes (for `dim == 1`) carry one cell and a zero origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    origin: [f64; 2],
    cells_per_unit: usize,
    cells: [usize; 2],
}

impl Grid {
    pub fn new(dim: usize, origin: &[f64], cells_per_unit: usize, cells: &[usize]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if origin.len() != dim || cells.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "origin/cells must have {dim} entries (got {} and {})",
                origin.len(),
                cells.len()
            )));
        }
        if cells_per_unit < 2 {
            return Err(Error::InvalidGrid(format!(
                "cells_per_unit must be at least 2 (got {cells_per_unit})"
            )));
        }
        if cells.contains(&0) {
            return Err(Error::InvalidGrid("every axis needs at least one cell".into()));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        let mut o = [0.0; 2];
        let mut c = [1; 2];
        o[..dim].copy_from_slice(origin);
        c[..dim].copy_from_slice(cells);
        Ok(Grid {
            dim,
            origin: o,
            cells_per_unit,
            cells: c,
        })
    }

    /// Grid covering the box `[lo, hi]`; both corners must sit on multiples of `h`.
    pub fn from_box(lo: &[f64], hi: &[f64], cells_per_unit: usize) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::InvalidGrid("box corners differ in dimension".into()));
        }
        let n = cells_per_unit as f64;
        let mut cells = Vec::with_capacity(lo.len());
        for (a, b) in lo.iter().zip(hi) {
            let span = (b - a) * n;
            let count = span.round();
            if count < 1.0 || (span - count).abs() > 1e-9 * span.abs().max(1.0) {
                return Err(Error::InvalidGrid(format!(
                    "box [{a}, {b}] is not a positive multiple of h = 1/{cells_per_unit}"
                )));
            }
            cells.push(count as usize);
        }
        Grid::new(lo.len(), lo, cells_per_unit, &cells)
    }

    /// The unit cell `Q = ]0,1[^d` at resolution `n`.
    pub fn unit_cell(dim: usize, cells_per_unit: usize) -> Result<Self> {
        Grid::new(
            dim,
            &vec![0.0; dim],
            cells_per_unit,
            &vec![cells_per_unit; dim],
        )
    }

    /// Centred cube `Q_R = ]-R, R[^d`.
    pub fn centered_box(dim: usize, half_width: f64, cells_per_unit: usize) -> Result<Self> {
        Grid::from_box(&vec![-half_width; dim], &vec![half_width; dim], cells_per_unit)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn cells_per_unit(&self) -> usize {
        self.cells_per_unit
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn h(&self) -> f64 {
        1.0 / self.cells_per_unit as f64
    }

    /// `h^d`, the midpoint-rule weight of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    pub fn extent(&self) -> Vec<f64> {
        self.cells().iter().map(|&c| c as f64 * self.h()).collect()
    }

    /// Upper corner of the grid's bounding box.
    pub fn upper(&self) -> Vec<f64> {
        self.origin()
            .iter()
            .zip(self.extent())
            .map(|(o, e)| o + e)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of the multi-index `(i, j)`; `x` varies fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.cells[0] * j
    }

    #[inline]
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        [idx % self.cells[0], idx / self.cells[0]]
    }

    /// Cell centre `origin + (i + ½) h`; the unused coordinate is 0 for `dim == 1`.
    #[inline]
    pub fn center(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.multi_index(idx);
        let h = self.h();
        let x = self.origin[0] + (i as f64 + 0.5) * h;
        let y = if self.dim == 2 {
            self.origin[1] + (j as f64 + 0.5) * h
        } else {
            0.0
        };
        [x, y]
    }

    /// Same grid with a different cell count, keeping origin and spacing.
    pub fn with_cells(&self, cells: &[usize]) -> Result<Self> {
        Grid::new(self.dim, self.origin(), self.cells_per_unit, cells)
    }

    /// Same grid with the origin moved, keeping spacing and counts.
    pub fn with_origin(&self, origin: &[f64]) -> Result<Self> {
        Grid::new(self.dim, origin, self.cells_per_unit, self.cells())
    }

    /// Cell containing the point, if any.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let n = self.cells_per_unit as f64;
        let mut ij = [0usize; 2];
        for a in 0..self.dim {
            let s = ((x[a] - self.origin[a]) * n).floor();
            if s < 0.0 || s >= self.cells[a] as f64 {
                return None;
            }
            ij[a] = s as usize;
        }
        Some(self.index(ij[0], ij[1]))
    }

    /// Index offset of the cell containing the physical point, rounded to the
    /// nearest cell boundary. Used to align unit-cube windows.
    pub fn offset_of(&self, x: f64, axis: usize) -> isize {
        ((x - self.origin[axis]) * self.cells_per_unit as f64).round() as isize
    }

    /// Whether two grids share spacing and node lattice (so shifts are exact).
    pub fn is_aligned_with(&self, other: &Grid) -> bool {
        if self.dim != other.dim || self.cells_per_unit != other.cells_per_unit {
            return false;
        }
        let n = self.cells_per_unit as f64;
        (0..self.dim).all(|a| {
            let s = (self.origin[a] - other.origin[a]) * n;
            (s - s.round()).abs() < 1e-9
        })
    }

    /// Iterator over flat indices.
    pub fn indices(&self) -> std::ops::Range<usize> {
        0..self.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_coarse_resolution() {
        assert!(matches!(
            Grid::new(1, &[0.0], 1, &[4]),
            Err(Error::InvalidGrid(_))
        ));
        assert!(Grid::new(3, &[0.0; 3], 4, &[2; 3]).is_err());
    }

    #[test]
    fn centers_are_cell_midpoints() {
        let g = Grid::from_box(&[-1.0, 0.0], &[1.0, 1.0], 4).unwrap();
        assert_eq!(g.cells(), &[8, 4]);
        assert_eq!(g.center(0), [-0.875, 0.125]);
        let idx = g.index(7, 3);
        assert_eq!(g.center(idx), [0.875, 0.875]);
        assert_eq!(g.locate(&[0.9, 0.9]), Some(idx));
        assert_eq!(g.locate(&[1.1, 0.5]), None);
    }

    #[test]
    fn extent_matches_cells_times_h() {
        let g = Grid::centered_box(2, 3.0, 8).unwrap();
        assert_eq!(g.extent(), vec![6.0, 6.0]);
        assert_eq!(g.upper(), vec![3.0, 3.0]);
        assert!(Grid::from_box(&[0.0], &[0.3], 4).is_err());
    }
}
