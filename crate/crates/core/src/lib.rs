//! Numerical laboratory for elliptic homogenization with coefficients that are
//! almost translation-invariant at infinity.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid_fields`]: uniform cell-centred grids, sampled fields and the
//!   coefficient library, including overflow-free evaluation of `a(x/ε)`.
//! * [`discrete_calculus`]: unit-shift gradient `δ`, local averages `M`,
//!   `E^p`/`A^p` norms, discrete de Rham reconstruction and decay diagnostics.
//! * [`periodic_extraction`]: Cesàro extraction of the periodic background and
//!   the discrete Gagliardo–Nirenberg–Sobolev checks.
//! * [`elliptic_solver`]: finite-volume `−div(a∇u)` with periodic or Dirichlet
//!   conditions and a projected Jacobi-PCG solver.
//! * [`corrector`]: cell problem, homogenized tensor, defect corrector
//!   (direct and fixed-point) and sublinearity profiles.
//! * [`homogenize_harness`]: ε-problems, first-order approximation, rate
//!   fitting and the two non-homogenizable counter-examples.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod corrector;
pub mod discrete_calculus;
pub mod elliptic_solver;
pub mod error;
pub mod fit;
pub mod grid_fields;
pub mod homogenize_harness;
pub mod periodic_extraction;
pub mod quadrature;

pub use error::{Error, Result};
