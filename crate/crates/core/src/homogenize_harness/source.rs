use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Right-hand side `f` of the ε-problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SourceTerm {
    Constant { value: f64 },
    /// `Σ c_k x₁^k`.
    Polynomial { coefficients: Vec<f64> },
}

impl SourceTerm {
    pub fn constant(value: f64) -> Self {
        SourceTerm::Constant { value }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            SourceTerm::Constant { value } => value.is_finite(),
            SourceTerm::Polynomial { coefficients } => coefficients.iter().all(|c| c.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument("source coefficients must be finite".into()))
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SourceTerm::Constant { value } => *value == 0.0,
            SourceTerm::Polynomial { coefficients } => coefficients.iter().all(|c| *c == 0.0),
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match self {
            SourceTerm::Constant { value } => *value,
            SourceTerm::Polynomial { coefficients } => coefficients.iter().rev().fold(0.0, |acc, c| acc * x[0] + c),
        }
    }

    /// `F(x) = ∫_lo^x f` along the first axis.
    pub fn antiderivative(&self, lo: f64, x: f64) -> f64 {
        match self {
            SourceTerm::Constant { value } => value * (x - lo),
            SourceTerm::Polynomial { coefficients } => {
                let prim = |t: f64| {
                    coefficients
                        .iter()
                        .enumerate()
                        .rev()
                        .fold(0.0, |acc, (k, c)| acc * t + c / (k + 1) as f64)
                        * t
                };
                prim(x) - prim(lo)
            }
        }
    }
}
