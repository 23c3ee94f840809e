use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic_solver::{assemble_with, Affine, AssembleOptions, BoundaryCondition};
use crate::grid_fields::io::fmt_f64;
use crate::grid_fields::{sample_rescaled, CoefficientSpec, EpsDescriptor, MatrixField, ScalarField, SymMat};
use crate::{Error, Result};

use super::eps_problem::{masked_l2, solve_fv, Domain, EpsProblemOptions, EpsSolution};
use super::exact1d::solve_1d_exact;
use super::source::SourceTerm;

/// First zero of the Bessel function `J₀`.
const BESSEL_J0_ZERO: f64 = 2.404_825_557_695_773;

/// One member `ε_n` of a subsequence and its distance to the branch limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsequenceRow {
    pub n: u32,
    pub eps: EpsDescriptor,
    /// `−ln ε_n`, exact from the sequence parameters.
    pub neg_ln_eps: f64,
    /// `‖u^{ε_n} − u*‖_{L²}` over the domain.
    pub distance: f64,
    /// `sup |a(x/ε_n) − a*(x)|` over the sampled cells.
    pub sup_deviation: f64,
    /// Coefficient-perturbation bound on `distance`, when one is computed.
    pub perturbation_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub label: String,
    /// Phase `y` in 1D, branch index in 2D.
    pub parameter: f64,
    /// Human-readable limit coefficient.
    pub limit_coefficient: String,
    pub limit_l2_norm: f64,
    pub rows: Vec<SubsequenceRow>,
}

/// Distances of two subsequences of `u^ε` to two different limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsequenceReport {
    pub dim: usize,
    pub cells_per_unit: usize,
    pub branches: Vec<BranchReport>,
    /// `‖u*₁ − u*₂‖_{L²}` between the two branch limits.
    pub cross_branch_distance: f64,
    /// `‖u*₂ − (2/3)u*₁‖ / ‖u*₂‖` for the constant limits in 2D.
    pub limit_scaling_defect: Option<f64>,
}

impl SubsequenceReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["branch", "parameter", "n", "neg_ln_eps", "distance", "sup_deviation", "perturbation_bound"])?;
        for b in &self.branches {
            for r in &b.rows {
                out.write_record([
                    b.label.clone(),
                    fmt_f64(b.parameter),
                    r.n.to_string(),
                    fmt_f64(r.neg_ln_eps),
                    fmt_f64(r.distance),
                    fmt_f64(r.sup_deviation),
                    r.perturbation_bound.map(fmt_f64).unwrap_or_default(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// `(ln ε, ln distance)` per branch.
    pub fn plot_series(&self) -> Vec<(String, Vec<(f64, f64)>)> {
        self.branches
            .iter()
            .map(|b| (b.label.clone(), b.rows.iter().map(|r| (-r.neg_ln_eps, r.distance.ln())).collect()))
            .collect()
    }

    pub fn branch(&self, label: &str) -> Option<&BranchReport> {
        self.branches.iter().find(|b| b.label == label)
    }
}

/// Largest subsequence index accepted in 1D and in 2D.
pub const MAX_INDEX_1D: u32 = 8;
pub const MAX_INDEX_2D: u32 = 4;

fn check_n_list(n_list: &[u32], lo: u32, hi: u32) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::InsufficientPoints { needed: 1, got: 0 });
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("subsequence indices must be strictly increasing".into()));
    }
    if n_list[0] < lo || n_list[n_list.len() - 1] > hi {
        return Err(Error::InvalidArgument(format!("subsequence indices must lie in {lo}..={hi}")));
    }
    Ok(())
}

/// The log-oscillating coefficient `2 + sin(ln(1 + |x|))` on `(1, 2)` along
/// `ε_n = exp(−2nπ − y)` and along the opposite phase `y + π (mod 2π)`.
///
/// Along phase `y` the coefficient tends to `2 + sin(y + ln x)`, so the
/// two subsequences converge to different limits.
pub fn counterexample_1d(n_list: &[u32], f: &SourceTerm, y: f64, opts: &EpsProblemOptions) -> Result<SubsequenceReport> {
    check_n_list(n_list, 0, MAX_INDEX_1D)?;
    f.validate()?;
    if !(0.0..2.0 * PI).contains(&y) {
        return Err(Error::InvalidArgument(format!("phase y = {y} must lie in [0, 2π)")));
    }
    let spec = CoefficientSpec::radial_log(2.0, 1.0);
    let domain = Domain::Interval { lo: 1.0, hi: 2.0 };
    let grid = domain.grid(opts.cells_per_unit)?;
    let h = grid.h();
    let phases = [y, (y + PI) % (2.0 * PI)];
    let limits: Vec<ScalarField> = phases
        .par_iter()
        .map(|&yb| Ok(solve_1d_exact(|x| 2.0 + (yb + x.ln()).sin(), &grid, f, h)?.u))
        .collect::<Result<_>>()?;
    let branches = phases
        .iter()
        .zip(&limits)
        .enumerate()
        .map(|(b, (&yb, limit))| {
            let rows = n_list
                .par_iter()
                .map(|&n| {
                    let eps = EpsDescriptor::exp_sequence(yb, n);
                    let a = |x: f64| spec.eval_rescaled([x, 0.0], 1, &eps).map(|m| m.xx).unwrap_or(f64::NAN);
                    let u = solve_1d_exact(a, &grid, f, h)?.u;
                    let sup_deviation = grid
                        .indices()
                        .map(|k| {
                            let x = grid.center(k)[0];
                            (a(x) - (2.0 + (yb + x.ln()).sin())).abs()
                        })
                        .fold(0.0, f64::max);
                    Ok(SubsequenceRow {
                        n,
                        eps,
                        neg_ln_eps: eps.neg_ln(),
                        distance: masked_l2(&u.lin_comb(1.0, limit, -1.0)?, None),
                        sup_deviation,
                        perturbation_bound: None,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(BranchReport {
                label: format!("phase-{}", b + 1),
                parameter: yb,
                limit_coefficient: format!("2 + sin({yb} + ln x)"),
                limit_l2_norm: masked_l2(limit, None),
                rows,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SubsequenceReport {
        dim: 1,
        cells_per_unit: opts.cells_per_unit,
        branches,
        cross_branch_distance: masked_l2(&limits[0].lin_comb(1.0, &limits[1], -1.0)?, None),
        limit_scaling_defect: None,
    })
}

/// The iterated-log coefficient `2 + sin(ln(1 + ln(1 + |x|)))` on the annulus
/// `1 < |x| < 2`, along `ε_n = exp(−exp(2nπ))` (limit `2`) and
/// `ε_n = exp(−exp((4n+1)π/2))` (limit `3`).
///
/// Each distance is compared with the discrete perturbation bound
/// `(δ/λ) C_P ‖∇u*‖`, where `δ` is the sup deviation of the coefficient from
/// its limit, `λ` its smallest eigenvalue on the annulus and `C_P` the
/// Poincaré constant of the disk that contains the staircased domain.
pub fn counterexample_2d(n_list: &[u32], f: &SourceTerm, opts: &EpsProblemOptions) -> Result<SubsequenceReport> {
    check_n_list(n_list, 1, MAX_INDEX_2D)?;
    f.validate()?;
    let spec = CoefficientSpec::radial_iter_log(2.0, 1.0);
    let domain = Domain::Annulus { inner: 1.0, outer: 2.0 };
    let grid = domain.grid(opts.cells_per_unit)?;
    let mask = domain.mask(&grid).expect("annulus is masked");
    let poincare = (2.0 + grid.h()) / BESSEL_J0_ZERO;
    let limits_c = [2.0, 3.0];
    let limits: Vec<(EpsSolution, f64)> = limits_c
        .par_iter()
        .map(|&c| {
            let a = MatrixField::constant(grid.clone(), SymMat::scalar(c));
            let s = solve_fv(&a, &domain, f, opts)?;
            let op = assemble_with(
                &a,
                BoundaryCondition::DirichletZero,
                &AssembleOptions {
                    averaging: opts.averaging,
                    mask: Some(mask.clone()),
                },
            )?;
            let full = s.u.values();
            let energy = op.bilinear(Affine::cells(full), Affine::cells(full), true) / c;
            Ok((s, energy.max(0.0).sqrt()))
        })
        .collect::<Result<_>>()?;
    let branches = (0..2)
        .map(|b| {
            let c = limits_c[b];
            let (limit, grad_norm) = (&limits[b].0, limits[b].1);
            let rows = n_list
                .par_iter()
                .map(|&n| {
                    let eps = EpsDescriptor::iterated_log_branch(b as u8 + 1, n)?;
                    let a = sample_rescaled(&spec, &grid, &eps)?;
                    let mut dev = 0.0f64;
                    let mut lam = f64::INFINITY;
                    for (k, m) in a.values().iter().enumerate() {
                        if mask[k] {
                            dev = dev.max((m.xx - c).abs());
                            lam = lam.min(m.eigen_range(2).0);
                        }
                    }
                    let u = solve_fv(&a, &domain, f, opts)?.u;
                    Ok(SubsequenceRow {
                        n,
                        eps,
                        neg_ln_eps: eps.neg_ln(),
                        distance: masked_l2(&u.lin_comb(1.0, &limit.u, -1.0)?, Some(&mask)),
                        sup_deviation: dev,
                        perturbation_bound: Some(dev / lam * poincare * grad_norm),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(BranchReport {
                label: format!("branch-{}", b + 1),
                parameter: (b + 1) as f64,
                limit_coefficient: format!("{c}"),
                limit_l2_norm: masked_l2(&limit.u, Some(&mask)),
                rows,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (u1, u2) = (&limits[0].0.u, &limits[1].0.u);
    let scaled = u2.lin_comb(1.0, u1, -2.0 / 3.0)?;
    Ok(SubsequenceReport {
        dim: 2,
        cells_per_unit: opts.cells_per_unit,
        branches,
        cross_branch_distance: masked_l2(&u1.lin_comb(1.0, u2, -1.0)?, Some(&mask)),
        limit_scaling_defect: Some(masked_l2(&scaled, Some(&mask)) / masked_l2(u2, Some(&mask))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_branches_separate() {
        let opts = EpsProblemOptions {
            cells_per_unit: 128,
            ..Default::default()
        };
        let rep = counterexample_1d(&[1, 2], &SourceTerm::constant(1.0), 0.0, &opts).unwrap();
        assert_eq!(rep.branches.len(), 2);
        let b = &rep.branches[0];
        assert!(b.rows[1].distance < b.rows[0].distance);
        assert!(rep.cross_branch_distance > 0.01 * b.limit_l2_norm);
        // sup deviation behaves like ε_n
        assert!(b.rows[0].sup_deviation < 10.0 * (-2.0 * PI).exp());
    }

    #[test]
    fn zero_source_gives_zero_everywhere() {
        let z = SourceTerm::constant(0.0);
        let r1 = counterexample_1d(&[0, 1], &z, 0.0, &EpsProblemOptions::default()).unwrap();
        let r2 = counterexample_2d(&[1], &z, &EpsProblemOptions { cells_per_unit: 8, ..Default::default() }).unwrap();
        for r in [&r1, &r2] {
            assert_eq!(r.cross_branch_distance, 0.0);
            assert!(r.branches.iter().flat_map(|b| &b.rows).all(|row| row.distance == 0.0));
        }
    }

    #[test]
    fn opposite_phase_wraps() {
        let r = counterexample_1d(&[1], &SourceTerm::constant(1.0), 1.5 * PI, &EpsProblemOptions::default()).unwrap();
        assert!((r.branches[1].parameter - 0.5 * PI).abs() < 1e-15);
        assert!(counterexample_1d(&[1], &SourceTerm::constant(1.0), 2.0 * PI, &EpsProblemOptions::default()).is_err());
        assert!(counterexample_2d(&[5], &SourceTerm::constant(1.0), &EpsProblemOptions::default()).is_err());
    }

    #[test]
    fn indices_must_increase() {
        let r = counterexample_1d(&[2, 1], &SourceTerm::constant(1.0), 0.0, &EpsProblemOptions::default());
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }
}
