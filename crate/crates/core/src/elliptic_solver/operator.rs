use serde::{Deserialize, Serialize};

use crate::grid_fields::{check_uniform_ellipticity, Grid, MatrixField, ScalarField, VectorField};
use crate::{Error, Result};

use super::csr::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// The grid is one period; solutions have zero mean.
    PeriodicZeroMean,
    /// `u = 0` on the grid boundary and on inactive cells.
    DirichletZero,
}

/// Interface coefficient rule for scalar and diagonal coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterfaceAveraging {
    #[default]
    Harmonic,
    Arithmetic,
}

#[derive(Clone, Debug, Default)]
pub struct AssembleOptions {
    pub averaging: InterfaceAveraging,
    /// Active cells; inactive ones are held at zero (Dirichlet only).
    pub mask: Option<Vec<bool>>,
}

/// One contribution to the discrete energy `B(u, v)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Term {
    /// Two-point flux between `lo` and its `+e_axis` neighbour `hi`.
    Face { lo: usize, hi: usize, axis: usize, t: f64 },
    /// Half-cell flux from `cell` to a zero boundary value on side `outward = ±1`.
    Boundary { cell: usize, axis: usize, outward: f64, t: f64 },
    /// Mixed-derivative coupling at a vertex; cells ordered `00, 10, 01, 11`.
    Cross { cells: [usize; 4], a12: f64 },
}

/// Cell values plus an optional affine part `x_q`.
#[derive(Clone, Copy, Debug)]
pub struct Affine<'a> {
    pub values: Option<&'a [f64]>,
    pub slope: Option<usize>,
}

impl<'a> Affine<'a> {
    pub fn cells(values: &'a [f64]) -> Self {
        Affine {
            values: Some(values),
            slope: None,
        }
    }

    pub fn coordinate(q: usize) -> Self {
        Affine {
            values: None,
            slope: Some(q),
        }
    }

    pub fn with_slope(values: &'a [f64], q: usize) -> Self {
        Affine {
            values: Some(values),
            slope: Some(q),
        }
    }

    #[inline]
    fn at(&self, c: usize) -> f64 {
        self.values.map_or(0.0, |v| v[c])
    }

    #[inline]
    fn rise(&self, axis: usize, length: f64) -> f64 {
        if self.slope == Some(axis) {
            length
        } else {
            0.0
        }
    }
}

const ALPHA: [f64; 4] = [-0.5, 0.5, -0.5, 0.5];
const BETA: [f64; 4] = [-0.5, -0.5, 0.5, 0.5];

/// Cell-centred finite-volume discretisation of `−div(a∇u)`, scaled by `h^d`.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    grid: Grid,
    coefficient: MatrixField,
    bc: BoundaryCondition,
    averaging: InterfaceAveraging,
    active: Vec<bool>,
    cell_of: Vec<usize>,
    terms: Vec<Term>,
    matrix: CsrMatrix,
}

/// Assembles with harmonic interface averaging and no mask.
pub fn assemble(a: &MatrixField, bc: BoundaryCondition) -> Result<DiscreteOperator> {
    assemble_with(a, bc, &AssembleOptions::default())
}

pub fn assemble_with(
    a: &MatrixField,
    bc: BoundaryCondition,
    opts: &AssembleOptions,
) -> Result<DiscreteOperator> {
    let grid = a.grid().clone();
    let d = grid.dim();
    let (lmin, _) = check_uniform_ellipticity(a);
    if !(lmin > 0.0) {
        let cell = a
            .values()
            .iter()
            .position(|m| !(m.eigen_range(d).0 > 0.0))
            .unwrap_or(0);
        return Err(Error::EllipticityViolation {
            cell,
            eigenvalue: lmin,
            floor: 0.0,
        });
    }
    let active = match &opts.mask {
        Some(m) => {
            if bc != BoundaryCondition::DirichletZero {
                return Err(Error::InvalidArgument("cell masks need Dirichlet conditions".into()));
            }
            if m.len() != grid.len() {
                return Err(Error::InvalidArgument("mask length differs from grid size".into()));
            }
            m.clone()
        }
        None => vec![true; grid.len()],
    };
    let diagonal = a.is_diagonal();
    if !diagonal {
        for (cell, m) in a.values().iter().enumerate() {
            let limit = m.xx.min(m.yy);
            if m.xy.abs() >= limit {
                return Err(Error::AnisotropyTooStrong {
                    cell,
                    a12: m.xy,
                    limit,
                });
            }
        }
    }
    let averaging = if diagonal {
        opts.averaging
    } else {
        InterfaceAveraging::Arithmetic
    };
    let h = grid.h();
    let hd2 = h.powi(d as i32 - 2);
    let cells = [grid.cells()[0], grid.cells().get(1).copied().unwrap_or(1)];
    let coeff = |c: usize, axis: usize| a.at(c).entry(axis, axis);
    let mut terms = Vec::new();
    for axis in 0..d {
        for c in grid.indices() {
            if !active[c] {
                continue;
            }
            let ij = grid.multi_index(c);
            let ap = coeff(c, axis);
            let up = if ij[axis] + 1 < cells[axis] {
                let mut nb = ij;
                nb[axis] += 1;
                Some(grid.index(nb[0], nb[1]))
            } else if bc == BoundaryCondition::PeriodicZeroMean {
                let mut nb = ij;
                nb[axis] = 0;
                Some(grid.index(nb[0], nb[1]))
            } else {
                None
            };
            match up {
                Some(nb) if active[nb] => {
                    let an = coeff(nb, axis);
                    let face = match averaging {
                        InterfaceAveraging::Harmonic => 2.0 * ap * an / (ap + an),
                        InterfaceAveraging::Arithmetic => 0.5 * (ap + an),
                    };
                    terms.push(Term::Face {
                        lo: c,
                        hi: nb,
                        axis,
                        t: face * hd2,
                    });
                }
                _ => terms.push(Term::Boundary {
                    cell: c,
                    axis,
                    outward: 1.0,
                    t: 2.0 * ap * hd2,
                }),
            }
            if bc == BoundaryCondition::DirichletZero {
                let down_active = ij[axis] > 0 && {
                    let mut nb = ij;
                    nb[axis] -= 1;
                    active[grid.index(nb[0], nb[1])]
                };
                if !down_active {
                    terms.push(Term::Boundary {
                        cell: c,
                        axis,
                        outward: -1.0,
                        t: 2.0 * ap * hd2,
                    });
                }
            }
        }
    }
    if !diagonal && d == 2 {
        let periodic = bc == BoundaryCondition::PeriodicZeroMean;
        let (vi, vj) = if periodic {
            (cells[0], cells[1])
        } else {
            (cells[0] - 1, cells[1] - 1)
        };
        for j in 0..vj {
            for i in 0..vi {
                let (i1, j1) = ((i + 1) % cells[0], (j + 1) % cells[1]);
                let quad = [
                    grid.index(i, j),
                    grid.index(i1, j),
                    grid.index(i, j1),
                    grid.index(i1, j1),
                ];
                if quad.iter().all(|&c| active[c]) {
                    let a12 = quad.iter().map(|&c| a.at(c).xy).sum::<f64>() / 4.0;
                    if a12 != 0.0 {
                        terms.push(Term::Cross {
                            cells: quad,
                            a12: a12 * hd2,
                        });
                    }
                }
            }
        }
    }
    let mut unknown_of = vec![None; grid.len()];
    let mut cell_of = Vec::new();
    for c in grid.indices() {
        if active[c] {
            unknown_of[c] = Some(cell_of.len());
            cell_of.push(c);
        }
    }
    let u = |c: usize| unknown_of[c].expect("term touches an active cell");
    let mut trip = Vec::with_capacity(terms.len() * 4);
    for term in &terms {
        match *term {
            Term::Face { lo, hi, t, .. } => {
                let (l, r) = (u(lo), u(hi));
                trip.extend([(l, l, t), (r, r, t), (l, r, -t), (r, l, -t)]);
            }
            Term::Boundary { cell, t, .. } => {
                let k = u(cell);
                trip.push((k, k, t));
            }
            Term::Cross { cells, a12 } => {
                for x in 0..4 {
                    for y in 0..4 {
                        let v = a12 * (ALPHA[x] * BETA[y] + BETA[x] * ALPHA[y]);
                        trip.push((u(cells[x]), u(cells[y]), v));
                    }
                }
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(cell_of.len(), trip);
    Ok(DiscreteOperator {
        grid,
        coefficient: a.clone(),
        bc,
        averaging,
        active,
        cell_of,
        terms,
        matrix,
    })
}

impl DiscreteOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coefficient(&self) -> &MatrixField {
        &self.coefficient
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn averaging(&self) -> InterfaceAveraging {
        self.averaging
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn unknowns(&self) -> usize {
        self.cell_of.len()
    }

    /// Unknown vector from full-grid cell values.
    pub fn gather(&self, values: &[f64]) -> Vec<f64> {
        self.cell_of.iter().map(|&c| values[c]).collect()
    }

    /// Full-grid values from an unknown vector; inactive cells are zero.
    pub fn scatter(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (k, &c) in self.cell_of.iter().enumerate() {
            out[c] = x[k];
        }
        out
    }

    /// `A u` on the full grid (inactive cells report zero).
    pub fn apply(&self, u: &ScalarField) -> Result<ScalarField> {
        if u.grid() != &self.grid {
            return Err(Error::ResolutionMismatch("field and operator grids differ".into()));
        }
        let y = self.matrix.mul(&self.gather(u.values()));
        ScalarField::new(self.grid.clone(), self.scatter(&y))
    }

    fn face_diff(&self, f: &Affine, term: &Term) -> (f64, f64) {
        let h = self.grid.h();
        match *term {
            Term::Face { lo, hi, axis, .. } => (f.at(hi) - f.at(lo) + f.rise(axis, h), 0.0),
            Term::Boundary {
                cell,
                axis,
                outward,
                ..
            } => (-outward * f.at(cell) + f.rise(axis, 0.5 * h), 0.0),
            Term::Cross { cells, .. } => {
                let mut da = f.rise(0, h);
                let mut db = f.rise(1, h);
                for k in 0..4 {
                    da += ALPHA[k] * f.at(cells[k]);
                    db += BETA[k] * f.at(cells[k]);
                }
                (da, db)
            }
        }
    }

    /// Discrete energy pairing `B(u, v)`; boundary half-faces are skipped unless requested.
    pub fn bilinear(&self, u: Affine, v: Affine, include_boundary: bool) -> f64 {
        let mut s = 0.0;
        for term in &self.terms {
            match *term {
                Term::Face { t, .. } => s += t * self.face_diff(&u, term).0 * self.face_diff(&v, term).0,
                Term::Boundary { t, .. } => {
                    if include_boundary {
                        s += t * self.face_diff(&u, term).0 * self.face_diff(&v, term).0;
                    }
                }
                Term::Cross { a12, .. } => {
                    let (ua, ub) = self.face_diff(&u, term);
                    let (va, vb) = self.face_diff(&v, term);
                    s += a12 * (ua * vb + ub * va);
                }
            }
        }
        s
    }

    /// `g_c = ∂B(v, φ)/∂v_c` for every unknown, skipping boundary half-faces.
    ///
    /// With `φ = x_q` this is the load of a unit mean gradient; the cell problem
    /// reads `A w = −g`.
    pub fn form_gradient(&self, phi: Affine) -> Vec<f64> {
        let mut g = vec![0.0; self.grid.len()];
        for term in &self.terms {
            match *term {
                Term::Face { lo, hi, t, .. } => {
                    let flux = t * self.face_diff(&phi, term).0;
                    g[hi] += flux;
                    g[lo] -= flux;
                }
                Term::Boundary { .. } => {}
                Term::Cross { cells, a12 } => {
                    let (pa, pb) = self.face_diff(&phi, term);
                    for k in 0..4 {
                        g[cells[k]] += a12 * (ALPHA[k] * pb + BETA[k] * pa);
                    }
                }
            }
        }
        self.gather(&g)
    }

    /// Load of `−div(a∇u) = div(F)` for a cell-sampled `F`: face values are
    /// arithmetic averages of the two adjacent cells, one-sided at boundaries.
    pub fn div_source_load(&self, f: &VectorField) -> Result<Vec<f64>> {
        if f.grid() != &self.grid {
            return Err(Error::ResolutionMismatch("div_source grid differs from operator grid".into()));
        }
        let w = self.grid.h().powi(self.grid.dim() as i32 - 1);
        let mut g = vec![0.0; self.grid.len()];
        for term in &self.terms {
            match *term {
                Term::Face { lo, hi, axis, .. } => {
                    let c = f.component(axis);
                    let flux = 0.5 * (c[lo] + c[hi]) * w;
                    g[hi] -= flux;
                    g[lo] += flux;
                }
                Term::Boundary {
                    cell,
                    axis,
                    outward,
                    ..
                } => g[cell] += outward * f.component(axis)[cell] * w,
                Term::Cross { .. } => {}
            }
        }
        Ok(self.gather(&g))
    }

    /// Load of a cell source `f`: `h^d f_c`.
    pub fn source_load(&self, f: &ScalarField) -> Result<Vec<f64>> {
        if f.grid() != &self.grid {
            return Err(Error::ResolutionMismatch("source grid differs from operator grid".into()));
        }
        let vol = self.grid.cell_volume();
        Ok(self.cell_of.iter().map(|&c| f.values()[c] * vol).collect())
    }

    /// Centred cell gradient; Dirichlet sides use the odd reflection through
    /// the zero face value, periodic sides wrap.
    pub fn cell_gradient(&self, u: &ScalarField) -> Result<VectorField> {
        if u.grid() != &self.grid {
            return Err(Error::ResolutionMismatch("field and operator grids differ".into()));
        }
        let g = &self.grid;
        let h = g.h();
        let cells = [g.cells()[0], g.cells().get(1).copied().unwrap_or(1)];
        let v = u.values();
        let comps = (0..g.dim())
            .map(|axis| {
                g.indices()
                    .map(|c| {
                        if !self.active[c] {
                            return 0.0;
                        }
                        let ij = g.multi_index(c);
                        let side = |step: isize| -> f64 {
                            let k = ij[axis] as isize + step;
                            let mut nb = ij;
                            if k < 0 || k >= cells[axis] as isize {
                                if self.bc == BoundaryCondition::PeriodicZeroMean {
                                    nb[axis] = k.rem_euclid(cells[axis] as isize) as usize;
                                } else {
                                    return -v[c];
                                }
                            } else {
                                nb[axis] = k as usize;
                            }
                            let n = g.index(nb[0], nb[1]);
                            if self.active[n] {
                                v[n]
                            } else {
                                -v[c]
                            }
                        };
                        (side(1) - side(-1)) / (2.0 * h)
                    })
                    .collect()
            })
            .collect();
        VectorField::new(g.clone(), comps)
    }
}
