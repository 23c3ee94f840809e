use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Scale parameter `ε`, stored through its defining parameters so that
/// sequences far below the smallest float remain representable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum EpsDescriptor {
    /// Plain `ε ∈ ]0, 1]`.
    Literal { eps: f64 },
    /// `ε = exp(−2nπ − y)`.
    ExpSequence { y: f64, n: u32 },
    /// `ε = exp(−exp(c·n + c0))`.
    DoubleExpSequence { c: f64, c0: f64, n: u32 },
}

impl EpsDescriptor {
    pub fn literal(eps: f64) -> Result<Self> {
        let d = EpsDescriptor::Literal { eps };
        d.validate()?;
        Ok(d)
    }

    /// `ε_n = exp(−2nπ − y)`, the phase family of the log-oscillating coefficient.
    pub fn exp_sequence(y: f64, n: u32) -> Self {
        EpsDescriptor::ExpSequence { y, n }
    }

    /// Branch `1` is `exp(−exp(2nπ))`, branch `2` is `exp(−exp((4n+1)π/2))`.
    pub fn iterated_log_branch(branch: u8, n: u32) -> Result<Self> {
        let c0 = match branch {
            1 => 0.0,
            2 => 0.5 * PI,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "iterated-log branch must be 1 or 2 (got {branch})"
                )))
            }
        };
        Ok(EpsDescriptor::DoubleExpSequence { c: 2.0 * PI, c0, n })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            EpsDescriptor::Literal { eps } if !(eps > 0.0 && eps <= 1.0) => Err(
                Error::InvalidArgument(format!("literal ε must lie in ]0, 1] (got {eps})")),
            ),
            EpsDescriptor::ExpSequence { y, .. } if !(y.is_finite() && y >= 0.0) => Err(
                Error::InvalidArgument(format!("phase y must be finite and ≥ 0 (got {y})")),
            ),
            EpsDescriptor::DoubleExpSequence { c, c0, .. } if !(c.is_finite() && c0.is_finite()) => {
                Err(Error::InvalidArgument("double-exponential parameters must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// `−ln ε`. May be `+∞` for double-exponential sequences with huge `n`.
    pub fn neg_ln(&self) -> f64 {
        match *self {
            EpsDescriptor::Literal { eps } => -eps.ln(),
            EpsDescriptor::ExpSequence { y, n } => 2.0 * PI * n as f64 + y,
            EpsDescriptor::DoubleExpSequence { c, c0, n } => (c * n as f64 + c0).exp(),
        }
    }

    /// `ln(−ln ε)`, exact from the parameters for double-exponential sequences.
    pub fn ln_neg_ln(&self) -> f64 {
        match *self {
            EpsDescriptor::DoubleExpSequence { c, c0, n } => c * n as f64 + c0,
            _ => self.neg_ln().ln(),
        }
    }

    /// The float value of `ε`; underflows to 0 for deep sequence members.
    pub fn value(&self) -> f64 {
        match *self {
            EpsDescriptor::Literal { eps } => eps,
            _ => (-self.neg_ln()).exp(),
        }
    }

    /// `1/ε` when representable.
    pub fn inverse(&self) -> Option<f64> {
        let v = match *self {
            EpsDescriptor::Literal { eps } => 1.0 / eps,
            _ => self.neg_ln().exp(),
        };
        v.is_finite().then_some(v)
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, EpsDescriptor::Literal { .. })
    }
}
