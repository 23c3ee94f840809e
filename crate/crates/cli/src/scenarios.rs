use std::f64::consts::PI;

use homoglab::corrector::{cell_problem, defect_corrector_direct_with, CellOptions, DefectOptions};
use homoglab::elliptic_solver::InterfaceAveraging;
use homoglab::grid_fields::io::{fmt_f64, write_csv};
use homoglab::grid_fields::{
    sample_field, Bump, BumpProfile, CoefficientKind, CoefficientSpec, Grid, ScalarField, TrigTerm,
};
use homoglab::homogenize_harness::{
    counterexample_1d, counterexample_2d, rate_sweep, Domain, EpsProblemOptions, SourceTerm,
    SubsequenceReport, SweepOptions,
};
use homoglab::periodic_extraction::{cesaro_periodic_part, gns_family, PeriodicBackground};
use homoglab::quadrature::adaptive;
use serde_json::{json, Value};

use crate::config::{field, in_range, positive, ScenarioConfig, SolverConfig};
use crate::failure::{in_module, Failure};
use crate::output::{csv_table, plot_data};

/// Results of one scenario: the summary payload and the files beside it.
pub struct Outcome {
    pub results: Value,
    pub files: Vec<(String, Vec<u8>)>,
}

pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    /// Optional config fields the scenario reads.
    pub fields: &'static [&'static str],
    pub defaults: fn() -> ScenarioConfig,
    pub run: fn(&ScenarioConfig) -> Result<Outcome, Failure>,
}

/// Alphabetical.
pub static REGISTRY: &[Scenario] = &[
    Scenario {
        name: "cesaro-extract",
        description: "Cesàro extraction of the periodic background with its convergence trace",
        fields: &["coefficient", "half_width", "cells_per_unit", "n_max"],
        defaults: cesaro_defaults,
        run: run_cesaro,
    },
    Scenario {
        name: "counterexample-1d",
        description: "log-oscillating 1D coefficient: phase subsequences with distinct limits",
        fields: &["n_list", "phases", "source", "cells_per_unit"],
        defaults: ce1d_defaults,
        run: run_ce1d,
    },
    Scenario {
        name: "counterexample-2d",
        description: "iterated-log coefficient on the annulus: two branches with limits 2 and 3",
        fields: &["n_list", "source", "cells_per_unit", "solver"],
        defaults: ce2d_defaults,
        run: run_ce2d,
    },
    Scenario {
        name: "defect-corrector",
        description: "defect corrector on a truncated box with sublinearity and A^p diagnostics",
        fields: &["coefficient", "half_width", "cells_per_unit", "r_inner", "p", "solver"],
        defaults: defect_defaults,
        run: run_defect,
    },
    Scenario {
        name: "gns-suite",
        description: "discrete Gagliardo-Nirenberg-Sobolev ratios over tents and bumps",
        fields: &["half_width", "cells_per_unit", "p", "dilations"],
        defaults: gns_defaults,
        run: run_gns,
    },
    Scenario {
        name: "harmonic-1d",
        description: "1D cell problem against the harmonic-mean quadrature oracle",
        fields: &["coefficient", "cells_per_unit", "solver"],
        defaults: harmonic_defaults,
        run: run_harmonic,
    },
    Scenario {
        name: "laminate-2d",
        description: "2D cell problem for a laminate, with arithmetic and harmonic mean bounds",
        fields: &["coefficient", "cells_per_unit", "solver"],
        defaults: laminate_defaults,
        run: run_laminate,
    },
    Scenario {
        name: "rate-sweep-1d",
        description: "epsilon sweep with exact 1D solves, first-order remainder and rate fits",
        fields: &["coefficient", "eps", "domain", "source", "cells_per_unit", "corrector_cells", "p", "r", "alpha"],
        defaults: sweep_defaults,
        run: run_sweep,
    },
];

pub fn find(name: &str) -> Option<&'static Scenario> {
    REGISTRY.iter().find(|s| s.name == name)
}

pub fn names() -> Vec<String> {
    REGISTRY.iter().map(|s| s.name.to_string()).collect()
}

/// Checks the fields against the scenario and fills in its defaults.
pub fn resolve(cfg: ScenarioConfig, sc: &Scenario) -> Result<ScenarioConfig, Failure> {
    for f in cfg.set_fields() {
        if !sc.fields.contains(&f) {
            return Err(Failure::config(format!(
                "field `{f}` is not used by scenario `{}` (accepted: {})",
                sc.name,
                sc.fields.join(", ")
            )));
        }
    }
    Ok(cfg.merge_defaults((sc.defaults)()))
}

fn base(name: &str) -> ScenarioConfig {
    ScenarioConfig {
        scenario: name.into(),
        ..Default::default()
    }
}

/// `2 + ½ sin(2πx₁)` plus an algebraic bump `½(1 + |x|)^{−4}`.
fn perturbed_default() -> CoefficientSpec {
    let periodic = CoefficientKind::PeriodicTrig {
        base: 2.0,
        terms: vec![TrigTerm {
            amplitude: 0.5,
            frequency: [1, 0],
            phase: 0.0,
        }],
    };
    let kind = CoefficientKind::PerturbedPeriodic {
        periodic: Box::new(periodic),
        bump: Bump {
            amplitude: 0.5,
            center: [0.0, 0.0],
            width: 1.0,
            profile: BumpProfile::Algebraic { decay: 4.0 },
        },
    };
    CoefficientSpec::new(kind, 1.5, 3.5).expect("default coefficient is valid")
}

fn solver(cfg: &ScenarioConfig) -> SolverConfig {
    cfg.solver.clone().unwrap_or_default()
}

fn checked_spec(cfg: &ScenarioConfig) -> Result<&CoefficientSpec, Failure> {
    let spec = field(&cfg.coefficient, "coefficient")?;
    spec.validate().map_err(in_module("grid_fields"))?;
    Ok(spec)
}

fn harmonic_defaults() -> ScenarioConfig {
    ScenarioConfig {
        coefficient: Some(CoefficientSpec::sine(2.0, 1.0)),
        cells_per_unit: Some(512),
        solver: Some(SolverConfig::default()),
        ..base("harmonic-1d")
    }
}

fn run_harmonic(cfg: &ScenarioConfig) -> Result<Outcome, Failure> {
    let spec = checked_spec(cfg)?;
    if !spec.kind.is_periodic() {
        return Err(Failure::config("harmonic-1d needs a periodic coefficient"));
    }
    let n = in_range(*field(&cfg.cells_per_unit, "cells_per_unit")?, 4, 1 << 16, "cells_per_unit")?;
    let g = Grid::unit_cell(1, n).map_err(in_module("grid_fields"))?;
    let a = sample_field(spec, &g).map_err(in_module("grid_fields"))?;
    let opts = CellOptions {
        solve: solver(cfg).options(),
        ..Default::default()
    };
    let (cs, tensor) = cell_problem(&a, &opts).map_err(in_module("corrector"))?;
    let oracle = 1.0 / adaptive(|y| 1.0 / spec.eval([y, 0.0], 1).xx, 0.0, 1.0, 1e-15, 1e-14);
    let w = &cs[0].w;
    let mut table = Vec::new();
    write_csv(w, &mut table).map_err(in_module("grid_fields"))?;
    let profile: Vec<(f64, f64)> = g.indices().map(|k| (g.center(k)[0], w.values()[k])).collect();
    Ok(Outcome {
        results: json!({
            "a_star": tensor.matrix.xx,
            "harmonic_mean_oracle": oracle,
            "abs_error": (tensor.matrix.xx - oracle).abs(),
            "solver": cs[0].stats,
        }),
        files: vec![
            ("corrector.csv".into(), table),
            ("plot_corrector.dat".into(), plot_data("y", "w", &profile)),
        ],
    })
}

fn laminate_defaults() -> ScenarioConfig {
    ScenarioConfig {
        coefficient: Some(CoefficientSpec::laminate(1.0, 3.0, 0)),
        cells_per_unit: Some(128),
        solver: Some(SolverConfig::default()),
        ..base("laminate-2d")
    }
}

fn run_laminate(cfg: &ScenarioConfig) -> Result<Outcome, Failure> {
    let spec = checked_spec(cfg)?;
    if !spec.kind.is_periodic() {
        return Err(Failure::config("laminate-2d needs a periodic coefficient"));
    }
    let n = in_range(*field(&cfg.cells_per_unit, "cells_per_unit")?, 4, 2048, "cells_per_unit")?;
    let g = Grid::unit_cell(2, n).map_err(in_module("grid_fields"))?;
    let a = sample_field(spec, &g).map_err(in_module("grid_fields"))?;
    let opts = CellOptions {
        solve: solver(cfg).options(),
        ..Default::default()
    };
    let (_, tensor) = cell_problem(&a, &opts).map_err(in_module("corrector"))?;
    // for a scalar coefficient the tensor lies between the harmonic and arithmetic means
    let xx = a.component(0, 0);
    let arithmetic = xx.integral();
    let harmonic = 1.0 / xx.map(|v| 1.0 / v).integral();
    let m = tensor.matrix;
    let rows = vec![
        vec!["0".into(), "0".into(), fmt_f64(m.xx)],
        vec!["0".into(), "1".into(), fmt_f64(m.xy)],
        vec!["1".into(), "1".into(), fmt_f64(m.yy)],
    ];
    Ok(Outcome {
        results: json!({
            "a_star": m,
            "raw": tensor.raw,
            "asymmetry": tensor.asymmetry,
            "eigen_range": tensor.eigen_range(),
            "arithmetic_mean": arithmetic,
            "harmonic_mean": harmonic,
            "solver": tensor.stats,
        }),
        files: vec![("a_star.csv".into(), csv_table(&["i", "j", "value"], &rows))],
    })
}

fn gns_defaults() -> ScenarioConfig {
    ScenarioConfig {
        half_width: Some(24.0),
        cells_per_unit: Some(4),
        p: Some(1.5),
        dilations: Some(vec![4.0, 8.0, 12.0]),
        ..base("gns-suite")
    }
}

const GNS_TRANSLATES: [[f64; 2]; 2] = [[0.0, 0.0], [3.0, -2.0]];

fn run_gns(cfg: &ScenarioConfig) -> Result<Outcome, Failure> {
    let hw = positive(*field(&cfg.half_width, "half_width")?, "half_width")?;
    let n = in_range(*field(&cfg.cells_per_unit, "cells_per_unit")?, 1, 64, "cells_per_unit")?;
    let p = *field(&cfg.p, "p")?;
    let dil = field(&cfg.dilations, "dilations")?;
    if dil.is_empty() {
        return Err(Failure::config("`dilations` must not be empty"));
    }
    let grid = Grid::centered_box(2, hw, n).map_err(in_module("grid_fields"))?;
    let mut members = Vec::new();
    for (shape, label) in [(0, "tent"), (1, "bump")] {
        for &r in dil {
            positive(r, "dilations")?;
            for c in GNS_TRANSLATES {
                let f = ScalarField::from_fn(grid.clone(), |x| {
                    let s = (x[0] - c[0]).hypot(x[1] - c[1]) / r;
                    if shape == 0 {
                        (1.0 - s).max(0.0)
                    } else {
                        (1.0 - s * s).max(0.0).powi(2)
                    }
                })
                .map_err(in_module("grid_fields"))?;
                members.push((format!("{label}-R{r}-at({},{})", c[0], c[1]), f));
            }
        }
    }
    let rep = gns_family(&members, p, &PeriodicBackground::Zero).map_err(in_module("periodic_extraction"))?;
    let rows: Vec<Vec<String>> = rep
        .members
        .iter()
        .map(|(name, r)| {
            vec![
                name.clone(),
                fmt_f64(r.ep_of_perturbation),
                fmt_f64(r.lp_of_delta),
                r.ratio.map(fmt_f64).unwrap_or_default(),
            ]
        })
        .collect();
    Ok(Outcome {
        results: json!({ "members": rep.members, "max_ratio": rep.max_ratio }),
        files: vec![("gns.csv".into(), csv_table(&["member", "ep_of_perturbation", "lp_of_delta", "ratio"], &rows))],
    })
}

fn cesaro_defaults() -> ScenarioConfig {
    ScenarioConfig {
        coefficient: Some(perturbed_default()),
        half_width: Some(33.0),
        cells_per_unit: Some(4),
        n_max: Some(32),
        ..base("cesaro-extract")
    }
}

fn run_cesaro(cfg: &ScenarioConfig) -> Result<Outcome, Failure> {
    let spec = checked_spec(cfg)?;
    let hw = positive(*field(&cfg.half_width, "half_width")?, "half_width")?;
    let n = in_range(*field(&cfg.cells_per_unit, "cells_per_unit")?, 1, 64, "cells_per_unit")?;
    let n_max = in_range(*field(&cfg.n_max, "n_max")?, 1, 4096, "n_max")?;
    let grid = Grid::centered_box(2, hw, n).map_err(in_module("grid_fields"))?;
    let f = sample_field(spec, &grid).map_err(in_module("grid_fields"))?.component(0, 0);
    let dec = cesaro_periodic_part(&f, n_max).map_err(in_module("periodic_extraction"))?;
    let l1_error = match spec.periodic_part() {
        Some(per) => {
            let exact = sample_field(&per, dec.periodic_part.grid()).map_err(in_module("grid_fields"))?.component(0, 0);
            Some(dec.periodic_part.lin_comb(1.0, &exact, -1.0).map_err(in_module("grid_fields"))?.lp_norm(1.0))
        }
        None => None,
    };
    let rows: Vec<Vec<String>> = dec
        .convergence_trace
        .iter()
        .map(|t| vec![t.n.to_string(), fmt_f64(t.distance)])
        .collect();
    let plot: Vec<(f64, f64)> = dec
        .convergence_trace
        .iter()
        .filter(|t| t.distance > 0.0)
        .map(|t| ((t.n as f64).ln(), t.distance.ln()))
        .collect();
    Ok(Outcome {
        results: json!({
            "n_used": dec.n_used,
            "non_convergent": dec.non_convergent,
            "convergence_trace": dec.convergence_trace,
            "l1_error_vs_periodic_part": l1_error,
        }),
        files: vec![
            ("trace.csv".into(), csv_table(&["n", "distance"], &rows)),
            ("plot_trace.dat".into(), plot_data("ln_n", "ln_distance", &plot)),
        ],
    })
}

fn defect_defaults() -> ScenarioConfig {
    ScenarioConfig {
        coefficient: Some(perturbed_default()),
        // the R/2 re-solve must stay within 5% on Q_{r_inner}
        half_width: Some(16.0),
        cells_per_unit: Some(8),
        r_inner: Some(2.0),
        p: Some(1.5),
        solver: Some(SolverConfig::default()),
        ..base("defect-corrector")
    }
}

fn run_defect(cfg: &ScenarioConfig) -> Result<Outcome, Failure> {
    let spec = checked_spec(cfg)?;
    let per = spec
        .periodic_part()
        .ok_or_else(|| Failure::config("defect-corrector needs a coefficient with a periodic part"))?;
    let hw = positive(*field(&cfg.half_width, "half_width")?, "half_width")?;
    let n = in_range(*field(&cfg.cells_per_unit, "cells_per_unit")?, 2, 64, "cells_per_unit")?;
    let opts = DefectOptions {
        r_inner: Some(positive(*field(&cfg.r_inner, "r_inner")?, "r_inner")?),
        p: *field(&cfg.p, "p")?,
        check_truncation: true,
        averaging: InterfaceAveraging::Harmonic,
        solve: solver(cfg).options(),
    };
    let q = Grid::unit_cell(2, n).map_err(in_module("grid_fields"))?;
    let a_per = sample_field(&per, &q).map_err(in_module("grid_fields"))?;
    let bx = Grid::centered_box(2, hw, n).map_err(in_module("grid_fields"))?;
    let a = sample_field(spec, &bx).map_err(in_module("grid_fields"))?;
    let cell = CellOptions {
        solve: opts.solve.clone(),
        ..Default::default()
    };
    let (cs, tensor) = cell_problem(&a_per, &cell).map_err(in_module("corrector"))?;
    let mut directions = Vec::new();
    let mut rows = Vec::new();
    let mut files = Vec::new();
    for (k, c) in cs.iter().enumerate() {
        let sol = defect_corrector_direct_with(&a, &a_per, c, k, &opts).map_err(in_module("corrector"))?;
        if let Some(fit) = &sol.sublinearity {
            for (r, v) in fit.radii.iter().zip(&fit.averaged_values) {
                rows.push(vec![k.to_string(), fmt_f64(*r), fmt_f64(*v)]);
            }
            let pts: Vec<(f64, f64)> = fit
                .radii
                .iter()
                .zip(&fit.averaged_values)
                .filter(|(_, v)| **v > 0.0)
                .map(|(r, v)| (r.ln(), v.ln()))
                .collect();
            files.push((format!("plot_sublinearity_{k}.dat"), plot_data("ln_r", "ln_profile", &pts)));
        }
        directions.push(json!({
            "q": k,
            "ap_report": sol.ap_report,
            "sublinearity": sol.sublinearity,
            "sup_inner": sol.sup_inner,
            "grad_difference_quotient": sol.grad_difference_quotient,
            "inner_residual": sol.inner_residual,
            "truncation_difference": sol.truncation_difference,
            "solver": sol.stats,
        }));
    }
    files.insert(0, ("sublinearity.csv".into(), csv_table(&["q", "radius", "profile"], &rows)));
    Ok(Outcome {
        results: json!({ "a_star_periodic": tensor.matrix, "directions": directions }),
        files,
    })
}

fn sweep_defaults() -> ScenarioConfig {
    ScenarioConfig {
        coefficient: Some(CoefficientSpec::sine(2.0, 1.0)),
        eps: Some((3..=8).map(|k| 0.5f64.powi(k)).collect()),
        domain: Some(Domain::Interval { lo: 0.0, hi: 1.0 }),
        source: Some(SourceTerm::constant(1.0)),
        cells_per_unit: Some(64),
        corrector_cells: Some(4096),
        p: Some(1.5),
        r: Some(4.0),
        alpha: Some(0.5),
        ..base("rate-sweep-1d")
    }
}

fn run_sweep(cfg: &ScenarioConfig) -> Result<Outcome, Failure> {
    let spec = checked_spec(cfg)?;
    let domain = field(&cfg.domain, "domain")?;
    if domain.dim() != 1 {
        return Err(Failure::config("rate-sweep-1d needs an interval domain"));
    }
    let opts = SweepOptions {
        problem: EpsProblemOptions {
            cells_per_unit: in_range(*field(&cfg.cells_per_unit, "cells_per_unit")?, 1, 1 << 16, "cells_per_unit")?,
            ..Default::default()
        },
        corrector_cells: Some(in_range(*field(&cfg.corrector_cells, "corrector_cells")?, 4, 1 << 16, "corrector_cells")?),
        r: *field(&cfg.r, "r")?,
        p: *field(&cfg.p, "p")?,
        alpha: *field(&cfg.alpha, "alpha")?,
    };
    let rep = rate_sweep(spec, field(&cfg.eps, "eps")?, domain, field(&cfg.source, "source")?, &opts)
        .map_err(in_module("homogenize_harness"))?;
    let mut table = Vec::new();
    rep.write_csv(&mut table).map_err(in_module("homogenize_harness"))?;
    let mut files = vec![("sweep.csv".to_string(), table)];
    for (name, pts) in rep.plot_series() {
        files.push((format!("plot_{name}.dat"), plot_data("ln_eps", &format!("ln_{name}"), &pts)));
    }
    Ok(Outcome {
        results: serde_json::to_value(&rep).expect("report serializes"),
        files,
    })
}

fn subsequence_files(rep: &SubsequenceReport, tag: &str) -> Result<Vec<(String, Vec<u8>)>, Failure> {
    let mut table = Vec::new();
    rep.write_csv(&mut table).map_err(in_module("homogenize_harness"))?;
    let mut files = vec![(format!("subsequence{tag}.csv"), table)];
    for (label, pts) in rep.plot_series() {
        let pts: Vec<(f64, f64)> = pts.into_iter().filter(|p| p.1.is_finite()).collect();
        files.push((format!("plot{tag}_{label}.dat"), plot_data("ln_eps", "ln_distance", &pts)));
    }
    Ok(files)
}

fn ce1d_defaults() -> ScenarioConfig {
    ScenarioConfig {
        n_list: Some(vec![1, 2, 3]),
        phases: Some(vec![0.0, 0.5 * PI, PI, 1.5 * PI]),
        source: Some(SourceTerm::constant(1.0)),
        cells_per_unit: Some(1024),
        ..base("counterexample-1d")
    }
}

fn run_ce1d(cfg: &ScenarioConfig) -> Result<Outcome, Failure> {
    let phases = field(&cfg.phases, "phases")?;
    if phases.is_empty() {
        return Err(Failure::config("`phases` must not be empty"));
    }
    let opts = EpsProblemOptions {
        cells_per_unit: in_range(*field(&cfg.cells_per_unit, "cells_per_unit")?, 1, 1 << 16, "cells_per_unit")?,
        ..Default::default()
    };
    let mut reports = Vec::new();
    let mut files = Vec::new();
    for (i, &y) in phases.iter().enumerate() {
        let rep = counterexample_1d(field(&cfg.n_list, "n_list")?, field(&cfg.source, "source")?, y, &opts)
            .map_err(in_module("homogenize_harness"))?;
        files.extend(subsequence_files(&rep, &format!("_phase{i}"))?);
        reports.push(rep);
    }
    Ok(Outcome {
        results: json!({
            "cross_branch_distance": reports[0].cross_branch_distance,
            "phases": reports,
        }),
        files,
    })
}

fn ce2d_defaults() -> ScenarioConfig {
    ScenarioConfig {
        n_list: Some(vec![1, 2, 3]),
        source: Some(SourceTerm::constant(1.0)),
        cells_per_unit: Some(64),
        solver: Some(SolverConfig::default()),
        ..base("counterexample-2d")
    }
}

fn run_ce2d(cfg: &ScenarioConfig) -> Result<Outcome, Failure> {
    let opts = EpsProblemOptions {
        cells_per_unit: in_range(*field(&cfg.cells_per_unit, "cells_per_unit")?, 4, 512, "cells_per_unit")?,
        solve: solver(cfg).options(),
        ..Default::default()
    };
    let rep = counterexample_2d(field(&cfg.n_list, "n_list")?, field(&cfg.source, "source")?, &opts)
        .map_err(in_module("homogenize_harness"))?;
    let files = subsequence_files(&rep, "")?;
    Ok(Outcome {
        results: serde_json::to_value(&rep).expect("report serializes"),
        files,
    })
}
