//! Periodic cell problem and homogenized tensor, the defect corrector on a
//! truncated box (direct and fixed-point), and sublinearity profiles.

mod cell;
mod defect;
mod profile;

pub use cell::{
    cell_problem, homogenized_tensor, homogenized_tensor_with, periodic_corrector,
    periodic_corrector_with, CellOptions, CorrectorForcing, HomogenizedTensor, PeriodicCorrector,
};
pub use defect::{
    defect_corrector_direct, defect_corrector_direct_with, defect_corrector_fixed_point,
    fixed_point_solve, CorrectorSolution, DefectOptions, DefectProblem, FixedPointResult,
    CONTRACTION_LIMIT, MAX_FIXED_POINT_ITERATIONS, TRUNCATION_TOL,
};
pub use profile::{dyadic_radii, sublinearity_profile, sublinearity_profile_at};
