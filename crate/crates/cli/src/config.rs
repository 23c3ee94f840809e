use std::path::PathBuf;

use homoglab::elliptic_solver::{SolveOptions, DEFAULT_TOL};
use homoglab::grid_fields::CoefficientSpec;
use homoglab::homogenize_harness::{Domain, SourceTerm};
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: DEFAULT_TOL,
            max_iterations: None,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_iterations: self.max_iterations,
        }
    }
}

/// One scenario run. Each scenario reads a subset of the optional fields;
/// setting a field the scenario does not read is an error.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<CoefficientSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells_per_unit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrector_cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_inner: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilations: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::config(format!("config does not parse: {}", e.message())))
    }

    /// Names of the optional fields that are set.
    pub fn set_fields(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        macro_rules! check {
            ($($f:ident),*) => {
                $(if self.$f.is_some() { out.push(stringify!($f)); })*
            };
        }
        check!(
            coefficient, cells_per_unit, corrector_cells, half_width, r_inner, n_max, p, r, alpha,
            eps, n_list, phases, dilations, source, domain, solver
        );
        out
    }

    /// Fills unset fields from `defaults`.
    pub fn merge_defaults(mut self, defaults: ScenarioConfig) -> Self {
        macro_rules! fill {
            ($($f:ident),*) => {
                $(if self.$f.is_none() { self.$f = defaults.$f; })*
            };
        }
        fill!(
            coefficient, cells_per_unit, corrector_cells, half_width, r_inner, n_max, p, r, alpha,
            eps, n_list, phases, dilations, source, domain, solver
        );
        self
    }
}

/// Unwraps a field the scenario's defaults always provide.
pub fn field<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T, Failure> {
    v.as_ref().ok_or_else(|| Failure::config(format!("missing field `{name}`")))
}

pub fn positive(v: f64, name: &str) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::config(format!("`{name}` must be positive and finite (got {v})")))
    }
}

pub fn in_range(v: usize, lo: usize, hi: usize, name: &str) -> Result<usize, Failure> {
    if (lo..=hi).contains(&v) {
        Ok(v)
    } else {
        Err(Failure::config(format!("`{name}` must lie in {lo}..={hi} (got {v})")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ScenarioConfig::parse("scenario = \"harmonic-1d\"\npp = 2.0\n").is_err());
        assert!(ScenarioConfig::parse("scenario = \"x\"\n[solver]\ntoll = 1e-8\n").is_err());
        let c = ScenarioConfig::parse("scenario = \"x\"\np = 1.5\n").unwrap();
        assert_eq!(c.set_fields(), vec!["p"]);
    }

    #[test]
    fn nested_coefficient_parses() {
        let text = r#"
scenario = "harmonic-1d"
[coefficient]
lambda = 1.0
upper = 3.0
[coefficient.kind]
type = "periodic_trig"
base = 2.0
terms = [{ amplitude = 1.0, frequency = [1, 0] }]
"#;
        let c = ScenarioConfig::parse(text).unwrap();
        assert_eq!(c.coefficient.unwrap(), CoefficientSpec::sine(2.0, 1.0));
    }
}
