use serde::{Deserialize, Serialize};

use super::Grid;
use crate::{Error, Result};

/// Symmetric `d×d` matrix, `d ≤ 2`. For `d = 1` only `xx` is meaningful.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMat {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMat {
    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        SymMat { xx, xy, yy }
    }

    pub const fn scalar(c: f64) -> Self {
        SymMat { xx: c, xy: 0.0, yy: c }
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        SymMat { xx: a, xy: 0.0, yy: b }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.xx,
            (1, 1) => self.yy,
            _ => self.xy,
        }
    }

    /// Eigenvalues `(min, max)` of the leading `dim×dim` block.
    pub fn eigen_range(&self, dim: usize) -> (f64, f64) {
        if dim == 1 {
            return (self.xx, self.xx);
        }
        let m = 0.5 * (self.xx + self.yy);
        let r = (0.25 * (self.xx - self.yy).powi(2) + self.xy * self.xy).sqrt();
        (m - r, m + r)
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }

    pub fn is_diagonal(&self) -> bool {
        self.xy == 0.0
    }

    pub fn scale(&self, s: f64) -> Self {
        SymMat::new(self.xx * s, self.xy * s, self.yy * s)
    }

    pub fn add(&self, o: &SymMat) -> Self {
        SymMat::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }

    pub fn sub(&self, o: &SymMat) -> Self {
        SymMat::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.xx * v[0] + self.xy * v[1],
            self.xy * v[0] + self.yy * v[1],
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.xx.abs().max(self.xy.abs()).max(self.yy.abs())
    }
}

/// Scalar samples at cell centres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                cell,
                detail: format!("{}", values[cell]),
            });
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        ScalarField {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        let n = grid.len();
        ScalarField {
            grid,
            values: vec![c; n],
        }
    }

    /// Samples a closure at every cell centre.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = grid.indices().map(|i| f(grid.center(i))).collect();
        ScalarField::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn abs(&self) -> ScalarField {
        self.map(f64::abs)
    }

    /// Pointwise `α·self + β·other` on identical grids.
    pub fn lin_comb(&self, alpha: f64, other: &ScalarField, beta: f64) -> Result<ScalarField> {
        if self.grid != other.grid {
            return Err(Error::ResolutionMismatch("fields live on different grids".into()));
        }
        Ok(ScalarField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Midpoint-rule integral.
    pub fn integral(&self) -> f64 {
        crate::discrete_calculus::neumaier_sum(self.values.iter().copied()) * self.grid.cell_volume()
    }

    /// Midpoint-rule `L^p` norm over the whole grid.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let w = self.grid.cell_volume();
        if p.is_infinite() {
            return self.max_abs();
        }
        let s = crate::discrete_calculus::neumaier_sum(self.values.iter().map(|v| v.abs().powf(p)));
        (s * w).powf(1.0 / p)
    }

    /// Restriction to the sub-grid `sub`, which must be aligned and contained.
    pub fn restrict(&self, sub: &Grid) -> Result<ScalarField> {
        let off = sub_offset(&self.grid, sub)?;
        let [c0, c1] = [sub.cells()[0], *sub.cells().get(1).unwrap_or(&1)];
        let mut values = Vec::with_capacity(sub.len());
        for j in 0..c1 {
            for i in 0..c0 {
                values.push(self.at(i + off[0], j + off[1]));
            }
        }
        Ok(ScalarField {
            grid: sub.clone(),
            values,
        })
    }
}

/// Offset (in cells) of an aligned, contained sub-grid.
pub(crate) fn sub_offset(outer: &Grid, sub: &Grid) -> Result<[usize; 2]> {
    if !outer.is_aligned_with(sub) {
        return Err(Error::ResolutionMismatch("sub-grid not aligned with field grid".into()));
    }
    let mut off = [0usize; 2];
    for a in 0..outer.dim() {
        let o = outer.offset_of(sub.origin()[a], a);
        if o < 0 || o as usize + sub.cells()[a] > outer.cells()[a] {
            return Err(Error::DomainTooSmall("sub-grid exceeds field grid".into()));
        }
        off[a] = o as usize;
    }
    Ok(off)
}

/// Symmetric-matrix samples at cell centres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixField {
    grid: Grid,
    values: Vec<SymMat>,
}

impl MatrixField {
    pub fn new(grid: Grid, mut values: Vec<SymMat>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                cell,
                detail: format!("{:?}", values[cell]),
            });
        }
        if grid.dim() == 1 {
            for v in &mut values {
                v.xy = 0.0;
                v.yy = v.xx;
            }
        }
        Ok(MatrixField { grid, values })
    }

    pub fn constant(grid: Grid, m: SymMat) -> Self {
        let n = grid.len();
        let m = if grid.dim() == 1 { SymMat::scalar(m.xx) } else { m };
        MatrixField {
            grid,
            values: vec![m; n],
        }
    }

    /// Wraps a scalar field as `c(x)·I`.
    pub fn from_scalar(f: &ScalarField) -> Self {
        MatrixField {
            grid: f.grid().clone(),
            values: f.values().iter().map(|&c| SymMat::scalar(c)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[SymMat] {
        &self.values
    }

    #[inline]
    pub fn at(&self, idx: usize) -> &SymMat {
        &self.values[idx]
    }

    /// Entry `(i, j)` as a scalar field.
    pub fn component(&self, i: usize, j: usize) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|m| m.entry(i, j)).collect(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.values.iter().all(SymMat::is_diagonal)
    }

    pub fn sub(&self, other: &MatrixField) -> Result<MatrixField> {
        if self.grid != other.grid {
            return Err(Error::ResolutionMismatch("fields live on different grids".into()));
        }
        Ok(MatrixField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.sub(b))
                .collect(),
        })
    }

    pub fn add(&self, other: &MatrixField) -> Result<MatrixField> {
        if self.grid != other.grid {
            return Err(Error::ResolutionMismatch("fields live on different grids".into()));
        }
        Ok(MatrixField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.max_abs()))
    }
}

/// `d` scalar components sharing one grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    grid: Grid,
    components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(grid: Grid, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.dim() || components.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::InvalidArgument(
                "vector field needs one full-length component per dimension".into(),
            ));
        }
        Ok(VectorField { grid, components })
    }

    pub fn zeros(grid: Grid) -> Self {
        let components = vec![vec![0.0; grid.len()]; grid.dim()];
        VectorField { grid, components }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.components[axis]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn component_field(&self, axis: usize) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.components[axis].clone(),
        }
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let values = (0..self.grid.len())
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c[i] * c[i])
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        ScalarField {
            grid: self.grid.clone(),
            values,
        }
    }

    /// `(∫ |v|²)^{1/2}` with the midpoint rule.
    pub fn l2_norm(&self) -> f64 {
        self.magnitude().lp_norm(2.0)
    }

    pub fn restrict(&self, sub: &Grid) -> Result<VectorField> {
        let comps = (0..self.grid.dim())
            .map(|a| {
                self.component_field(a)
                    .restrict(sub)
                    .map(ScalarField::into_values)
            })
            .collect::<Result<Vec<_>>>()?;
        VectorField::new(sub.clone(), comps)
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        if self.grid != other.grid {
            return Err(Error::ResolutionMismatch("fields live on different grids".into()));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        Ok(VectorField {
            grid: self.grid.clone(),
            components,
        })
    }
}
