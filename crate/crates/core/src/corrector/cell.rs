use serde::{Deserialize, Serialize};

use crate::elliptic_solver::{
    assemble_with, solve_vec, Affine, AssembleOptions, BoundaryCondition, DiscreteOperator,
    InterfaceAveraging, SolveOptions, SolveStats,
};
use crate::grid_fields::{MatrixField, ScalarField, SymMat, VectorField};
use crate::{Error, Result};

/// How the mean gradient `q` enters the cell problem `−div(a(∇w + q)) = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectorForcing {
    /// Face flux `a_face·q` with the operator's own interface coefficient.
    #[default]
    FaceConsistent,
    /// Cell samples `a·q` averaged arithmetically onto faces.
    CellAverage,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CellOptions {
    pub averaging: InterfaceAveraging,
    pub forcing: CorrectorForcing,
    pub solve: SolveOptions,
}

/// Zero-mean periodic corrector `w_per,q` on the unit cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicCorrector {
    pub q: usize,
    pub w: ScalarField,
    pub grad: VectorField,
    pub stats: SolveStats,
}

fn unit_cell_operator(a_per: &MatrixField, opts: &CellOptions) -> Result<DiscreteOperator> {
    let g = a_per.grid();
    if g.cells().iter().any(|&c| c != g.cells_per_unit()) {
        return Err(Error::InvalidGrid("periodic coefficient must be sampled on one unit cell".into()));
    }
    assemble_with(
        a_per,
        BoundaryCondition::PeriodicZeroMean,
        &AssembleOptions {
            averaging: opts.averaging,
            mask: None,
        },
    )
}

/// Solves `−div(a_per(∇w + e_q)) = 0` with periodic conditions and zero mean.
pub fn periodic_corrector(a_per: &MatrixField, q: usize) -> Result<PeriodicCorrector> {
    periodic_corrector_with(a_per, q, &CellOptions::default())
}

pub fn periodic_corrector_with(a_per: &MatrixField, q: usize, opts: &CellOptions) -> Result<PeriodicCorrector> {
    let op = unit_cell_operator(a_per, opts)?;
    corrector_on(&op, a_per, q, opts)
}

fn corrector_on(op: &DiscreteOperator, a_per: &MatrixField, q: usize, opts: &CellOptions) -> Result<PeriodicCorrector> {
    let g = a_per.grid();
    if q >= g.dim() {
        return Err(Error::InvalidArgument(format!("direction {q} outside dimension {}", g.dim())));
    }
    let b: Vec<f64> = match opts.forcing {
        CorrectorForcing::FaceConsistent => op.form_gradient(Affine::coordinate(q)).iter().map(|v| -v).collect(),
        CorrectorForcing::CellAverage => {
            let comps = (0..g.dim())
                .map(|i| a_per.values().iter().map(|m| m.entry(i, q)).collect())
                .collect();
            op.div_source_load(&VectorField::new(g.clone(), comps)?)?
        }
    };
    let (x, stats) = solve_vec(op, &b, &opts.solve)?;
    let w = ScalarField::new(g.clone(), op.scatter(&x))?;
    let grad = op.cell_gradient(&w)?;
    Ok(PeriodicCorrector { q, w, grad, stats })
}

/// Effective tensor `a*` with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogenizedTensor {
    /// Symmetrised `a*`.
    pub matrix: SymMat,
    /// Unsymmetrised entries `∫ e_iᵀ a (e_j + ∇w_j)`, row-major.
    pub raw: Vec<Vec<f64>>,
    /// `|a*_12 − a*_21|`.
    pub asymmetry: f64,
    pub cells_per_unit: usize,
    pub stats: Vec<SolveStats>,
}

impl HomogenizedTensor {
    pub fn eigen_range(&self) -> (f64, f64) {
        let d = self.raw.len();
        self.matrix.eigen_range(d)
    }
}

/// Flux quadrature of `a*_ij = ∫_Q e_iᵀ a_per (e_j + ∇w_j)`, discretised as
/// the energy pairing `B(x_i, x_j + w_j)` of the cell operator.
pub fn homogenized_tensor(a_per: &MatrixField, correctors: &[PeriodicCorrector]) -> Result<HomogenizedTensor> {
    homogenized_tensor_with(a_per, correctors, &CellOptions::default())
}

pub fn homogenized_tensor_with(
    a_per: &MatrixField,
    correctors: &[PeriodicCorrector],
    opts: &CellOptions,
) -> Result<HomogenizedTensor> {
    let g = a_per.grid();
    let d = g.dim();
    let mut by_dir: Vec<Option<&PeriodicCorrector>> = vec![None; d];
    for c in correctors {
        if c.w.grid() != g {
            return Err(Error::ResolutionMismatch(format!(
                "corrector for e_{} sampled on a different grid than a_per",
                c.q + 1
            )));
        }
        if c.q < d {
            by_dir[c.q] = Some(c);
        }
    }
    let by_dir: Vec<&PeriodicCorrector> = by_dir
        .into_iter()
        .enumerate()
        .map(|(q, c)| c.ok_or_else(|| Error::ResolutionMismatch(format!("missing corrector for e_{}", q + 1))))
        .collect::<Result<_>>()?;
    let op = unit_cell_operator(a_per, opts)?;
    let raw: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| op.bilinear(Affine::coordinate(i), Affine::with_slope(by_dir[j].w.values(), j), false))
                .collect()
        })
        .collect();
    let matrix = if d == 1 {
        SymMat::scalar(raw[0][0])
    } else {
        SymMat::new(raw[0][0], 0.5 * (raw[0][1] + raw[1][0]), raw[1][1])
    };
    let asymmetry = if d == 2 { (raw[0][1] - raw[1][0]).abs() } else { 0.0 };
    Ok(HomogenizedTensor {
        matrix,
        raw,
        asymmetry,
        cells_per_unit: g.cells_per_unit(),
        stats: by_dir.iter().map(|c| c.stats.clone()).collect(),
    })
}

/// All `d` correctors (solved concurrently) and the resulting tensor.
pub fn cell_problem(a_per: &MatrixField, opts: &CellOptions) -> Result<(Vec<PeriodicCorrector>, HomogenizedTensor)> {
    let op = unit_cell_operator(a_per, opts)?;
    let d = a_per.grid().dim();
    let correctors: Vec<PeriodicCorrector> = if d == 2 {
        let (a, b) = rayon::join(|| corrector_on(&op, a_per, 0, opts), || corrector_on(&op, a_per, 1, opts));
        vec![a?, b?]
    } else {
        vec![corrector_on(&op, a_per, 0, opts)?]
    };
    let tensor = homogenized_tensor_with(a_per, &correctors, opts)?;
    Ok((correctors, tensor))
}
