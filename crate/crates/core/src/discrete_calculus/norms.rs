use serde::{Deserialize, Serialize};

use crate::grid_fields::{Grid, ScalarField, VectorField};
use crate::{Error, Result};

use super::average::{l2_unif, local_average};
use super::gradient::discrete_gradient;

/// Axis-aligned box `[lo, hi]` recording where a quantity was evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Span {
    /// Box covered by the cells of `grid`.
    pub fn of_cells(grid: &Grid) -> Self {
        Span {
            lo: grid.origin().to_vec(),
            hi: grid.upper(),
        }
    }

    /// Box spanned by the cell centres of `grid`.
    pub fn of_centres(grid: &Grid) -> Self {
        let h = grid.h();
        Span {
            lo: grid.origin().iter().map(|o| o + 0.5 * h).collect(),
            hi: grid.upper().iter().map(|u| u - 0.5 * h).collect(),
        }
    }
}

/// `L^p`, `E^p`, `A^p` and `L²_unif` values of one sampled field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub p: f64,
    /// `pd/(d−p)`, present iff `p < d`.
    pub p_star: Option<f64>,
    pub lp_norm: f64,
    /// `‖δf‖_{L^p}` over the shrunken overlap domains.
    pub lp_of_delta: f64,
    /// `‖M(|f|)‖_{L^{p*}}` over admissible window corners.
    pub ep_norm: Option<f64>,
    /// `ep_norm + lp_of_delta`.
    pub ap_norm: Option<f64>,
    pub l2_unif: f64,
    /// Cells on which each `δ_i f` was evaluated.
    pub delta_domains: Vec<Span>,
    /// Window corners `z` used for `M`.
    pub window_corners: Span,
}

/// Sobolev conjugate `p* = pd/(d−p)`; `None` when `p ≥ d`.
pub fn sobolev_conjugate(p: f64, d: usize) -> Option<f64> {
    let d = d as f64;
    (p < d).then(|| p * d / (d - p))
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0) || p.is_nan() {
        return Err(Error::ExponentOutOfRange(format!("p = {p} must satisfy p ≥ 1")));
    }
    Ok(())
}

/// Discrete norms of a scalar field.
pub fn norms(f: &ScalarField, p: f64) -> Result<NormReport> {
    check_exponent(p)?;
    let delta = discrete_gradient(f)?;
    let m = local_average(f)?;
    let p_star = sobolev_conjugate(p, f.grid().dim());
    let lp_of_delta = delta.lp_norm(p);
    let ep_norm = p_star.map(|ps| m.lp_norm(ps));
    Ok(NormReport {
        p,
        p_star,
        lp_norm: f.lp_norm(p),
        lp_of_delta,
        ep_norm,
        ap_norm: ep_norm.map(|e| e + lp_of_delta),
        l2_unif: l2_unif(f)?,
        delta_domains: delta.components().iter().map(|c| Span::of_cells(c.grid())).collect(),
        window_corners: Span::of_centres(m.grid()),
    })
}

/// Discrete norms of a vector field: `E^p` and `L²_unif` use `|v|`, the
/// difference term sums `‖δ_i v_c‖^p` over all components `c`.
pub fn norms_vector(v: &VectorField, p: f64) -> Result<NormReport> {
    check_exponent(p)?;
    let mag = v.magnitude();
    let mut report = norms(&mag, p)?;
    let mut sum = 0.0;
    for c in 0..v.grid().dim() {
        let d = discrete_gradient(&v.component_field(c))?;
        sum += d.lp_norm(p).powf(p);
    }
    report.lp_of_delta = sum.powf(1.0 / p);
    report.ap_norm = report.ep_norm.map(|e| e + report.lp_of_delta);
    Ok(report)
}
