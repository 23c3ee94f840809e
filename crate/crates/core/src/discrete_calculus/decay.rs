use serde::{Deserialize, Serialize};

use crate::fit::fit_loglog;
use crate::grid_fields::ScalarField;
use crate::{Error, Result};

use super::summation::neumaier_sum;

/// Log-log least-squares fit of a radial profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub radii: Vec<f64>,
    pub averaged_values: Vec<f64>,
    /// Slope of `ln value` against `ln radius`; `None` when some value vanishes.
    pub fitted_exponent: Option<f64>,
    pub r2: Option<f64>,
    pub slope_stderr: Option<f64>,
}

impl DecayFit {
    pub(crate) fn from_samples(radii: Vec<f64>, values: Vec<f64>) -> Self {
        let fit = fit_loglog(&radii, &values);
        DecayFit {
            fitted_exponent: fit.as_ref().map(|f| f.slope),
            r2: fit.as_ref().map(|f| f.r2),
            slope_stderr: fit.as_ref().map(|f| f.slope_stderr),
            radii,
            averaged_values: values,
        }
    }
}

pub(crate) fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.len() < 3 {
        return Err(Error::InsufficientRadii {
            needed: 3,
            got: radii.len(),
        });
    }
    if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("radii must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// Half-width of the largest origin-centred cube inside the grid.
pub(crate) fn inscribed_radius(f: &ScalarField) -> f64 {
    let g = f.grid();
    g.origin()
        .iter()
        .zip(g.upper())
        .map(|(lo, hi)| (-lo).min(hi))
        .fold(f64::INFINITY, f64::min)
}

/// Mean of `|f|` over the discrete balls `{|x| < R}` (cell centres), with a
/// log-log fit of the means against `R`.
pub fn ball_average_decay(f: &ScalarField, radii: &[f64]) -> Result<DecayFit> {
    check_radii(radii)?;
    let reach = inscribed_radius(f);
    if radii[radii.len() - 1] > reach {
        return Err(Error::DomainTooSmall(format!(
            "radius {} exceeds the sampled extent {reach}",
            radii[radii.len() - 1]
        )));
    }
    let g = f.grid();
    let values = radii
        .iter()
        .map(|&r| {
            let mut count = 0usize;
            let sum = neumaier_sum(g.indices().filter_map(|k| {
                let x = g.center(k);
                (x[0].hypot(x[1]) < r).then(|| {
                    count += 1;
                    f.values()[k].abs()
                })
            }));
            if count == 0 {
                0.0
            } else {
                sum / count as f64
            }
        })
        .collect();
    Ok(DecayFit::from_samples(radii.to_vec(), values))
}

/// `∫ |f(x/ε)| φ(x) dx` for each `ε`, computed on `f`'s own cells after the
/// change of variables `x = εy`, so no interpolation is involved.
///
/// `support_radius` bounds `supp φ` in the max-norm; `supp φ / ε` must lie
/// inside the sampled extent.
pub fn weak_star_vanishing(
    f: &ScalarField,
    eps_list: &[f64],
    phi: impl Fn([f64; 2]) -> f64,
    support_radius: f64,
) -> Result<Vec<f64>> {
    let g = f.grid();
    let d = g.dim() as i32;
    let reach = inscribed_radius(f);
    eps_list
        .iter()
        .map(|&eps| {
            if !(eps > 0.0) {
                return Err(Error::InvalidArgument(format!("ε = {eps} must be positive")));
            }
            if support_radius / eps > reach {
                return Err(Error::DomainTooSmall(format!(
                    "support radius {support_radius}/ε = {} exceeds the sampled extent {reach}",
                    support_radius / eps
                )));
            }
            let s = neumaier_sum(g.indices().map(|k| {
                let y = g.center(k);
                f.values()[k].abs() * phi([eps * y[0], eps * y[1]])
            }));
            Ok(s * g.cell_volume() * eps.powi(d))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_fields::Grid;

    #[test]
    fn constant_field_has_flat_profile() {
        let g = Grid::centered_box(2, 8.0, 4).unwrap();
        let fit = ball_average_decay(&ScalarField::constant(g.clone(), 1.0), &[1.0, 2.0, 4.0]).unwrap();
        assert!(fit.fitted_exponent.unwrap().abs() < 1e-14);
        let zero = ball_average_decay(&ScalarField::zeros(g), &[1.0, 2.0, 4.0]).unwrap();
        assert!(zero.fitted_exponent.is_none());
        assert_eq!(zero.averaged_values, vec![0.0; 3]);
    }

    #[test]
    fn radii_checked() {
        let g = Grid::centered_box(2, 4.0, 2).unwrap();
        let f = ScalarField::zeros(g);
        assert!(matches!(ball_average_decay(&f, &[1.0, 2.0]), Err(Error::InsufficientRadii { .. })));
        assert!(matches!(ball_average_decay(&f, &[1.0, 2.0, 8.0]), Err(Error::DomainTooSmall(_))));
    }

    #[test]
    fn periodic_control_does_not_vanish() {
        let g = Grid::centered_box(1, 16.0, 16).unwrap();
        let tau = std::f64::consts::TAU;
        let f = ScalarField::from_fn(g, |x| (tau * x[0]).sin()).unwrap();
        let ind = |x: [f64; 2]| if x[0].abs() < 1.0 { 1.0 } else { 0.0 };
        let v = weak_star_vanishing(&f, &[0.5, 0.25, 0.125], ind, 1.0).unwrap();
        // mean of |sin| is 2/π, ∫φ = 2
        for x in v {
            assert!((x - 4.0 / std::f64::consts::PI).abs() < 1e-2);
        }
    }
}
