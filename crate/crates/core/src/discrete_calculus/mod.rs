//! Discrete calculus on unit shifts: the gradient `δ`, local averages `M`, the
//! `E^p`/`A^p`/`L²_unif` norms, de Rham reconstruction, the annulus periodic
//! mean and decay diagnostics.

mod annulus;
mod average;
mod decay;
mod derham;
mod gradient;
mod norms;
mod summation;

pub use annulus::{annulus_indices, annulus_periodic_mean, AnnulusMean, DisconnectedWarning};
pub use average::{l2_unif, local_average};
pub use decay::{ball_average_decay, weak_star_vanishing, DecayFit};
pub use derham::{cauchy_defect, potential_from_discrete_gradient};
pub use gradient::{discrete_gradient, ShiftedDifferenceField};
pub use norms::{norms, norms_vector, sobolev_conjugate, NormReport, Span};
pub use summation::neumaier_sum;

pub(crate) use decay::{check_radii, inscribed_radius};
