//! Grids, sampled fields and the coefficient library.

mod coefficient;
mod eps;
mod field;
mod grid;
pub mod io;

pub use coefficient::{
    check_uniform_ellipticity, iterated_log1p_scaled, log1p_scaled, sample_field,
    sample_rescaled, Bump, BumpProfile, CoefficientKind, CoefficientSpec, TrigTerm,
};
pub use eps::EpsDescriptor;
pub(crate) use field::sub_offset;
pub use field::{MatrixField, ScalarField, SymMat, VectorField};
pub use grid::Grid;
