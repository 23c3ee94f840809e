use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EpsDescriptor, Grid, MatrixField, SymMat};
use crate::{Error, Result};

/// One term `amplitude · sin(2π k·x + phase)` of a trigonometric coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub frequency: [i64; 2],
    #[serde(default)]
    pub phase: f64,
}

/// Radial profile of a localized defect.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum BumpProfile {
    /// `(1 + |x−c|/w)^{−decay}`
    Algebraic { decay: f64 },
    /// `exp(−|x−c|²/w²)`
    Gaussian,
}

/// Scalar defect `amplitude · profile(|x − center| / width)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub amplitude: f64,
    #[serde(default)]
    pub center: [f64; 2],
    pub width: f64,
    #[serde(flatten)]
    pub profile: BumpProfile,
}

impl Bump {
    pub fn eval(&self, x: [f64; 2], dim: usize) -> f64 {
        let r = radius(
            [x[0] - self.center[0], x[1] - self.center[1]],
            dim,
        ) / self.width;
        let shape = match self.profile {
            BumpProfile::Algebraic { decay } => (1.0 + r).powf(-decay),
            BumpProfile::Gaussian => (-r * r).exp(),
        };
        self.amplitude * shape
    }
}

/// Closed-form coefficient families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CoefficientKind {
    Constant {
        value: SymMat,
    },
    /// `base + Σ amplitude·sin(2π k·x + phase)`, Q-periodic for integer `k`.
    PeriodicTrig {
        base: f64,
        terms: Vec<TrigTerm>,
    },
    /// `low` where `frac(x_axis) < split`, `high` elsewhere.
    Laminate {
        low: f64,
        high: f64,
        axis: usize,
        #[serde(default = "half")]
        split: f64,
    },
    /// `base + amplitude·sin(ln(1 + |x|))`
    RadialLogOsc { base: f64, amplitude: f64 },
    /// `base + amplitude·sin(ln(1 + ln(1 + |x|)))`
    RadialIterLogOsc { base: f64, amplitude: f64 },
    /// Periodic background plus a scalar bump (added on the diagonal).
    PerturbedPeriodic {
        periodic: Box<CoefficientKind>,
        bump: Bump,
    },
    /// Piecewise-constant lookup in a sampled field; optionally wrapped periodically.
    Tabulated {
        field: MatrixField,
        #[serde(default)]
        periodic: bool,
    },
}

fn half() -> f64 {
    0.5
}

/// A coefficient family together with its declared ellipticity bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSpec {
    pub kind: CoefficientKind,
    /// Ellipticity floor `λ`.
    pub lambda: f64,
    /// Declared upper bound `Λ`.
    pub upper: f64,
    /// Hölder exponent (metadata only).
    #[serde(default = "half")]
    pub holder_alpha: f64,
}

impl CoefficientSpec {
    pub fn new(kind: CoefficientKind, lambda: f64, upper: f64) -> Result<Self> {
        let spec = CoefficientSpec {
            kind,
            lambda,
            upper,
            holder_alpha: 0.5,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn constant(c: f64) -> Self {
        CoefficientSpec {
            kind: CoefficientKind::Constant {
                value: SymMat::scalar(c),
            },
            lambda: c,
            upper: c,
            holder_alpha: 0.5,
        }
    }

    /// `base + amplitude·sin(2π x₁)`.
    pub fn sine(base: f64, amplitude: f64) -> Self {
        CoefficientSpec {
            kind: CoefficientKind::PeriodicTrig {
                base,
                terms: vec![TrigTerm {
                    amplitude,
                    frequency: [1, 0],
                    phase: 0.0,
                }],
            },
            lambda: base - amplitude.abs(),
            upper: base + amplitude.abs(),
            holder_alpha: 0.5,
        }
    }

    pub fn laminate(low: f64, high: f64, axis: usize) -> Self {
        CoefficientSpec {
            kind: CoefficientKind::Laminate {
                low,
                high,
                axis,
                split: 0.5,
            },
            lambda: low.min(high),
            upper: low.max(high),
            holder_alpha: 0.5,
        }
    }

    pub fn radial_log(base: f64, amplitude: f64) -> Self {
        CoefficientSpec {
            kind: CoefficientKind::RadialLogOsc { base, amplitude },
            lambda: base - amplitude.abs(),
            upper: base + amplitude.abs(),
            holder_alpha: 0.5,
        }
    }

    pub fn radial_iter_log(base: f64, amplitude: f64) -> Self {
        CoefficientSpec {
            kind: CoefficientKind::RadialIterLogOsc { base, amplitude },
            lambda: base - amplitude.abs(),
            upper: base + amplitude.abs(),
            holder_alpha: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.upper >= self.lambda) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < λ ≤ Λ (got λ = {}, Λ = {})",
                self.lambda, self.upper
            )));
        }
        if !(self.holder_alpha > 0.0 && self.holder_alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "Hölder exponent must lie in ]0,1[ (got {})",
                self.holder_alpha
            )));
        }
        match &self.kind {
            CoefficientKind::RadialLogOsc { base, amplitude }
            | CoefficientKind::RadialIterLogOsc { base, amplitude } => {
                if base - amplitude.abs() < self.lambda {
                    return Err(Error::InvalidArgument(format!(
                        "base − |amplitude| = {} is below λ = {}",
                        base - amplitude.abs(),
                        self.lambda
                    )));
                }
            }
            CoefficientKind::Laminate { axis, split, .. } => {
                if *axis > 1 || !(*split > 0.0 && *split < 1.0) {
                    return Err(Error::InvalidArgument("laminate axis/split out of range".into()));
                }
            }
            CoefficientKind::PerturbedPeriodic { periodic, bump } => {
                if !periodic.is_periodic() {
                    return Err(Error::InvalidArgument(
                        "perturbed-periodic background must be periodic".into(),
                    ));
                }
                if !(bump.width > 0.0) {
                    return Err(Error::InvalidArgument("bump width must be positive".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Value at a physical point.
    pub fn eval(&self, x: [f64; 2], dim: usize) -> SymMat {
        self.kind.eval(x, dim)
    }

    /// Value of `a(x/ε)`. Radial kinds are evaluated in log-domain from the
    /// stored parameters of `eps`, so sequence members that underflow every
    /// float format remain exact to rounding.
    pub fn eval_rescaled(&self, x: [f64; 2], dim: usize, eps: &EpsDescriptor) -> Result<SymMat> {
        self.kind.eval_rescaled(x, dim, eps)
    }

    /// Periodic background, when the family has one.
    pub fn periodic_part(&self) -> Option<CoefficientSpec> {
        let kind = match &self.kind {
            CoefficientKind::PerturbedPeriodic { periodic, .. } => (**periodic).clone(),
            k if k.is_periodic() => k.clone(),
            _ => return None,
        };
        Some(CoefficientSpec {
            kind,
            lambda: self.lambda,
            upper: self.upper,
            holder_alpha: self.holder_alpha,
        })
    }

    /// Shortest oscillation length of the unscaled coefficient, if it has one.
    pub fn fast_period(&self) -> Option<f64> {
        self.kind.fast_period()
    }
}

impl CoefficientKind {
    pub fn is_periodic(&self) -> bool {
        match self {
            CoefficientKind::Constant { .. }
            | CoefficientKind::PeriodicTrig { .. }
            | CoefficientKind::Laminate { .. } => true,
            CoefficientKind::Tabulated { periodic, .. } => *periodic,
            _ => false,
        }
    }

    fn fast_period(&self) -> Option<f64> {
        match self {
            CoefficientKind::PeriodicTrig { terms, .. } => terms
                .iter()
                .filter(|t| t.amplitude != 0.0)
                .map(|t| t.frequency[0].abs().max(t.frequency[1].abs()))
                .max()
                .filter(|&k| k > 0)
                .map(|k| 1.0 / k as f64),
            CoefficientKind::Laminate { .. } => Some(1.0),
            CoefficientKind::Tabulated { periodic: true, .. } => Some(1.0),
            CoefficientKind::PerturbedPeriodic { periodic, .. } => periodic.fast_period(),
            _ => None,
        }
    }

    fn eval(&self, x: [f64; 2], dim: usize) -> SymMat {
        match self {
            CoefficientKind::Constant { value } => *value,
            CoefficientKind::PeriodicTrig { base, terms } => {
                let mut v = *base;
                for t in terms {
                    let mut arg = t.frequency[0] as f64 * x[0];
                    if dim == 2 {
                        arg += t.frequency[1] as f64 * x[1];
                    }
                    v += t.amplitude * (2.0 * PI * arg + t.phase).sin();
                }
                SymMat::scalar(v)
            }
            CoefficientKind::Laminate {
                low,
                high,
                axis,
                split,
            } => {
                let s = x[*axis] - x[*axis].floor();
                SymMat::scalar(if s < *split { *low } else { *high })
            }
            CoefficientKind::RadialLogOsc { base, amplitude } => {
                SymMat::scalar(base + amplitude * radius(x, dim).ln_1p().sin())
            }
            CoefficientKind::RadialIterLogOsc { base, amplitude } => {
                SymMat::scalar(base + amplitude * radius(x, dim).ln_1p().ln_1p().sin())
            }
            CoefficientKind::PerturbedPeriodic { periodic, bump } => {
                let b = bump.eval(x, dim);
                periodic.eval(x, dim).add(&SymMat::scalar(b))
            }
            CoefficientKind::Tabulated { field, periodic } => tabulated_lookup(field, *periodic, x),
        }
    }

    fn eval_rescaled(&self, x: [f64; 2], dim: usize, eps: &EpsDescriptor) -> Result<SymMat> {
        match self {
            CoefficientKind::Constant { value } => Ok(*value),
            CoefficientKind::RadialLogOsc { base, amplitude } => {
                let l = log1p_scaled(radius(x, dim), eps);
                Ok(SymMat::scalar(base + amplitude * l.sin()))
            }
            CoefficientKind::RadialIterLogOsc { base, amplitude } => {
                let m = iterated_log1p_scaled(radius(x, dim), eps);
                Ok(SymMat::scalar(base + amplitude * m.sin()))
            }
            _ => {
                let y = match *eps {
                    EpsDescriptor::Literal { eps } => [x[0] / eps, x[1] / eps],
                    _ => {
                        let inv = eps.inverse().ok_or_else(|| Error::NonFinite {
                            cell: 0,
                            detail: "1/ε overflows and this coefficient has no log-domain path"
                                .into(),
                        })?;
                        [x[0] * inv, x[1] * inv]
                    }
                };
                if !(y[0].is_finite() && y[1].is_finite()) {
                    return Err(Error::NonFinite {
                        cell: 0,
                        detail: "x/ε overflows".into(),
                    });
                }
                Ok(self.eval(y, dim))
            }
        }
    }
}

fn tabulated_lookup(field: &MatrixField, periodic: bool, x: [f64; 2]) -> SymMat {
    let g = field.grid();
    let n = g.cells_per_unit() as f64;
    let mut ij = [0usize; 2];
    for a in 0..g.dim() {
        let c = g.cells()[a] as i64;
        let s = ((x[a] - g.origin()[a]) * n).floor() as i64;
        ij[a] = if periodic { s.rem_euclid(c) } else { s.clamp(0, c - 1) } as usize;
    }
    *field.at(g.index(ij[0], ij[1]))
}

pub(crate) fn radius(x: [f64; 2], dim: usize) -> f64 {
    if dim == 1 {
        x[0].abs()
    } else {
        x[0].hypot(x[1])
    }
}

/// `ln(1 + r/ε)` from `ln r` and `−ln ε`, never forming `r/ε`.
pub fn log1p_scaled(r: f64, eps: &EpsDescriptor) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let t = r.ln() + eps.neg_ln();
    if t < 0.0 {
        t.exp().ln_1p()
    } else {
        t + (-t).exp().ln_1p()
    }
}

/// `ln(1 + ln(1 + r/ε))`; for double-exponential sequences the outer
/// logarithm is assembled from the stored `ln(−ln ε)`.
pub fn iterated_log1p_scaled(r: f64, eps: &EpsDescriptor) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    match *eps {
        EpsDescriptor::DoubleExpSequence { .. } => {
            // L = −ln ε + ln r + ln1p(ε/r) and ln(1+L) = ln L + ln1p(1/L)
            let neg_ln = eps.neg_ln();
            let t = r.ln() + neg_ln;
            let tail = r.ln() + if t < 0.0 { t.exp().ln_1p() - t } else { (-t).exp().ln_1p() };
            let ln_l = eps.ln_neg_ln() + (tail / neg_ln).ln_1p();
            let inv_l = (-ln_l).exp();
            ln_l + inv_l.ln_1p()
        }
        _ => log1p_scaled(r, eps).ln_1p(),
    }
}

/// Cell-centred samples of the coefficient.
pub fn sample_field(spec: &CoefficientSpec, grid: &Grid) -> Result<MatrixField> {
    sample_with(spec, grid, |x| Ok(spec.eval(x, grid.dim())))
}

/// Cell-centred samples of `x ↦ a(x/ε)`.
pub fn sample_rescaled(
    spec: &CoefficientSpec,
    grid: &Grid,
    eps: &EpsDescriptor,
) -> Result<MatrixField> {
    eps.validate()?;
    sample_with(spec, grid, |x| spec.eval_rescaled(x, grid.dim(), eps))
}

fn sample_with(
    spec: &CoefficientSpec,
    grid: &Grid,
    eval: impl Fn([f64; 2]) -> Result<SymMat> + Sync,
) -> Result<MatrixField> {
    let dim = grid.dim();
    let values = grid
        .indices()
        .into_par_iter()
        .map(|i| {
            let m = eval(grid.center(i)).map_err(|e| match e {
                Error::NonFinite { detail, .. } => Error::NonFinite { cell: i, detail },
                other => other,
            })?;
            if !m.is_finite() {
                return Err(Error::NonFinite {
                    cell: i,
                    detail: format!("{m:?}"),
                });
            }
            let (lo, _) = m.eigen_range(dim);
            // one ulp of slack per unit of λ absorbs sin() rounding at the floor
            if lo < spec.lambda * (1.0 - 4.0 * f64::EPSILON) {
                return Err(Error::EllipticityViolation {
                    cell: i,
                    eigenvalue: lo,
                    floor: spec.lambda,
                });
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    MatrixField::new(grid.clone(), values)
}

/// Extremal eigenvalues over all cells.
pub fn check_uniform_ellipticity(field: &MatrixField) -> (f64, f64) {
    let dim = field.grid().dim();
    field
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| {
            let (a, b) = m.eigen_range(dim);
            (lo.min(a), hi.max(b))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_is_constant() {
        let g = Grid::centered_box(2, 1.0, 4).unwrap();
        let f = sample_field(&CoefficientSpec::constant(2.0), &g).unwrap();
        assert!(f.values().iter().all(|m| *m == SymMat::scalar(2.0)));
        assert_eq!(check_uniform_ellipticity(&f), (2.0, 2.0));
    }

    #[test]
    fn radial_log_at_origin_is_base() {
        let s = CoefficientSpec::radial_log(2.0, 1.0);
        assert_eq!(s.eval([0.0, 0.0], 2).xx, 2.0);
        let e = EpsDescriptor::exp_sequence(0.0, 3);
        assert_eq!(s.eval_rescaled([0.0, 0.0], 2, &e).unwrap().xx, 2.0);
    }

    #[test]
    fn periodic_trig_matches_formula() {
        let g = Grid::unit_cell(2, 8).unwrap();
        let f = sample_field(&CoefficientSpec::sine(2.0, 1.0), &g).unwrap();
        assert_eq!(f.grid().len(), 64);
        for i in g.indices() {
            let x = g.center(i);
            let exact = 2.0 + (2.0 * PI * x[0]).sin();
            assert!((f.at(i).xx - exact).abs() <= 1e-15);
            assert!((f.at(i).yy - exact).abs() <= 1e-15);
        }
    }

    #[test]
    fn ellipticity_violation_reported() {
        let mut s = CoefficientSpec::sine(2.0, 1.0);
        s.lambda = 1.5;
        let g = Grid::unit_cell(1, 8).unwrap();
        assert!(matches!(
            sample_field(&s, &g),
            Err(Error::EllipticityViolation { .. })
        ));
    }

    #[test]
    fn laminate_eigen_range() {
        let g = Grid::unit_cell(2, 8).unwrap();
        let f = sample_field(&CoefficientSpec::laminate(1.0, 3.0, 0), &g).unwrap();
        assert_eq!(check_uniform_ellipticity(&f), (1.0, 3.0));
        let d = MatrixField::constant(g, SymMat::diag(1.0, 3.0));
        assert_eq!(check_uniform_ellipticity(&d), (1.0, 3.0));
    }

    #[test]
    fn sequence_without_log_path_is_non_finite() {
        let g = Grid::unit_cell(1, 4).unwrap();
        let e = EpsDescriptor::iterated_log_branch(1, 2).unwrap();
        let err = sample_rescaled(&CoefficientSpec::sine(2.0, 1.0), &g, &e).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn radial_kinds_validate_floor() {
        let mut s = CoefficientSpec::radial_log(2.0, 1.0);
        s.lambda = 1.5;
        assert!(s.validate().is_err());
    }
}
