use crate::discrete_calculus::{inscribed_radius, DecayFit};
use crate::grid_fields::ScalarField;
use crate::{Error, Result};

/// Dyadic radii `4·2^k` inside the sampled window, or `2^k` from 1 when the
/// window is too small for three of those.
pub fn dyadic_radii(reach: f64) -> Vec<f64> {
    let from = |start: f64| {
        let mut r = start;
        let mut out = Vec::new();
        while r + 0.5 <= reach {
            out.push(r);
            r *= 2.0;
        }
        out
    };
    let radii = from(4.0);
    if radii.len() >= 3 {
        radii
    } else {
        from(1.0)
    }
}

/// `max_{|x|≈r} |w(x)|/(1+|x|)` over shells `r − ½ ≤ |x| < r + ½`, fitted
/// against `r` on dyadic radii.
pub fn sublinearity_profile(w: &ScalarField, p: f64) -> Result<DecayFit> {
    let d = w.grid().dim() as f64;
    if !(p > d / 2.0 && p < d) {
        return Err(Error::ExponentOutOfRange(format!(
            "sublinearity profile needs d/2 < p < d, got p = {p}"
        )));
    }
    sublinearity_profile_at(w, &dyadic_radii(inscribed_radius(w)))
}

pub fn sublinearity_profile_at(w: &ScalarField, radii: &[f64]) -> Result<DecayFit> {
    crate::discrete_calculus::check_radii(radii)?;
    let reach = inscribed_radius(w);
    let last = radii[radii.len() - 1];
    if last + 0.5 > reach {
        return Err(Error::DomainTooSmall(format!("shell at radius {last} leaves the window {reach}")));
    }
    let g = w.grid();
    let values = radii
        .iter()
        .map(|&r| {
            g.indices()
                .filter_map(|k| {
                    let x = g.center(k);
                    let rho = x[0].hypot(x[1]);
                    (rho >= r - 0.5 && rho < r + 0.5).then(|| w.values()[k].abs() / (1.0 + rho))
                })
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(DecayFit::from_samples(radii.to_vec(), values))
}
