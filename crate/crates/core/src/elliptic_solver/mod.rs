//! Finite-volume `−div(a∇u)` on cell-centred grids with periodic (zero-mean)
//! or homogeneous Dirichlet conditions, solved by Jacobi-preconditioned CG.

mod csr;
mod operator;
mod pcg;

pub use csr::CsrMatrix;
pub use operator::{
    assemble, assemble_with, Affine, AssembleOptions, BoundaryCondition, DiscreteOperator,
    InterfaceAveraging, Term,
};
pub use pcg::{solve, solve_vec, solve_with, SolveOptions, SolveStats, DEFAULT_TOL};
