//! ε-problems on bounded domains, the two-scale first-order approximation,
//! remainder rate fitting and the two non-homogenizable counter-examples.

mod counterexample;
mod eps_problem;
mod exact1d;
mod first_order;
mod rates;
mod source;

pub use counterexample::{
    counterexample_1d, counterexample_2d, BranchReport, SubsequenceReport, SubsequenceRow,
    MAX_INDEX_1D, MAX_INDEX_2D,
};
pub use eps_problem::{
    masked_l2, solve_eps_problem, solve_fv, Domain, EpsProblemOptions, EpsSolution, SolverKind,
    MIN_CELLS_PER_PERIOD,
};
pub use exact1d::{solve_1d_exact, Exact1d};
pub use first_order::{centered_gradient, first_order_approx, periodic_interpolate, FirstOrder};
pub use rates::{
    mu_exponent, nu_exponent, rate_sweep, remainder_rates, SweepFits, SweepOptions, SweepReport,
    SweepRow, MIN_SWEEP_POINTS,
};
pub use source::SourceTerm;
