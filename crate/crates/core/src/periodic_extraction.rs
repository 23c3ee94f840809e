//! Periodic background of almost translation-invariant fields: Cesàro
//! extraction, the decomposition `f = f_per + f̃`, and the discrete
//! Gagliardo–Nirenberg–Sobolev ratio.

use serde::{Deserialize, Serialize};

use crate::discrete_calculus::{discrete_gradient, local_average, sobolev_conjugate};
use crate::grid_fields::{Grid, MatrixField, ScalarField};
use crate::{Error, Result};

/// Successive Cesàro means closer than this in `L¹(Q)` count as converged.
pub const CESARO_TOL: f64 = 1e-4;
/// Number of trailing trace entries that must be nonincreasing.
pub const MONOTONE_TAIL: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub n: usize,
    /// `L¹(Q)` distance between the means at `n` and `n − 1`.
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CesaroOptions {
    pub tol: f64,
    /// Stop at the first radius whose step falls below `tol`.
    pub stop_early: bool,
    /// Exponent for the reported GNS ratio; skipped when absent or `p ≥ d`.
    pub p: Option<f64>,
}

impl Default for CesaroOptions {
    fn default() -> Self {
        CesaroOptions {
            tol: CESARO_TOL,
            stop_early: true,
            p: None,
        }
    }
}

/// `f = periodic_part + perturbation` on the sample domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// `f_per` on the unit cell.
    pub periodic_part: ScalarField,
    /// `f − f_per` on `f`'s grid.
    pub perturbation: ScalarField,
    pub gns_ratio: Option<f64>,
    pub n_used: usize,
    pub convergence_trace: Vec<TracePoint>,
    pub non_convergent: bool,
}

impl Decomposition {
    /// `f_per` sampled on any grid aligned with the integer lattice.
    pub fn periodic_on(&self, grid: &Grid) -> Result<ScalarField> {
        extend_periodically(&self.periodic_part, grid)
    }
}

/// Lattice points `k` with Euclidean `|k| ≤ N`, sorted by `|k|²` then lexicographically.
pub fn cesaro_indices(dim: usize, big_n: usize) -> Vec<[i64; 2]> {
    let n = big_n as i64;
    let r2 = n * n;
    let mut ks = Vec::new();
    let k1s = if dim == 2 { -n..=n } else { 0..=0 };
    for k1 in k1s {
        for k0 in -n..=n {
            if k0 * k0 + k1 * k1 <= r2 {
                ks.push([k0, k1]);
            }
        }
    }
    ks.sort_by_key(|k| (k[0] * k[0] + k[1] * k[1], k[1], k[0]));
    ks
}

/// Grid origin in unit blocks; the grid must sit on the integer lattice.
fn lattice_offset(grid: &Grid) -> Result<[i64; 2]> {
    let q = Grid::unit_cell(grid.dim(), grid.cells_per_unit())?;
    if !grid.is_aligned_with(&q) {
        return Err(Error::ResolutionMismatch(
            "grid is not aligned with the integer lattice".into(),
        ));
    }
    let n = grid.cells_per_unit() as isize;
    let mut off = [0i64; 2];
    for a in 0..grid.dim() {
        let cells = grid.offset_of(0.0, a);
        if cells % n != 0 {
            return Err(Error::ResolutionMismatch(
                "grid origin is not an integer point".into(),
            ));
        }
        off[a] = -(cells / n) as i64;
    }
    Ok(off)
}

/// For each cell of `grid`, the unit-cell cell it maps to under periodic wrap.
pub(crate) fn periodic_source_cells(q: &Grid, grid: &Grid) -> Result<Vec<usize>> {
    if !grid.is_aligned_with(q) || q.cells().iter().any(|&c| c != q.cells_per_unit()) {
        return Err(Error::ResolutionMismatch(
            "target grid not aligned with a unit-cell grid of the same resolution".into(),
        ));
    }
    let n = q.cells_per_unit() as isize;
    let shift: Vec<isize> = (0..grid.dim()).map(|a| -q.offset_of(grid.origin()[a], a)).collect();
    Ok(grid
        .indices()
        .map(|k| {
            let ij = grid.multi_index(k);
            let r = (ij[0] as isize - shift[0]).rem_euclid(n) as usize;
            let s = if grid.dim() == 2 {
                (ij[1] as isize - shift[1]).rem_euclid(n) as usize
            } else {
                0
            };
            q.index(r, s)
        })
        .collect())
}

/// Samples a unit-cell field on another grid by periodic extension.
pub fn extend_periodically(per: &ScalarField, grid: &Grid) -> Result<ScalarField> {
    let map = periodic_source_cells(per.grid(), grid)?;
    ScalarField::new(grid.clone(), map.iter().map(|&c| per.values()[c]).collect())
}

/// Matrix-valued counterpart of [`extend_periodically`].
pub fn extend_matrix_periodically(per: &MatrixField, grid: &Grid) -> Result<MatrixField> {
    let map = periodic_source_cells(per.grid(), grid)?;
    MatrixField::new(grid.clone(), map.iter().map(|&c| *per.at(c)).collect())
}

/// Cesàro means `(1/#I_N) Σ_{|k|≤N} f(· + k)` on `Q` for `N = 1..=n_max`.
pub fn cesaro_periodic_part(f: &ScalarField, n_max: usize) -> Result<Decomposition> {
    cesaro_periodic_part_with(f, n_max, &CesaroOptions::default())
}

pub fn cesaro_periodic_part_with(
    f: &ScalarField,
    n_max: usize,
    opts: &CesaroOptions,
) -> Result<Decomposition> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("N_max must be positive".into()));
    }
    let g = f.grid();
    let d = g.dim();
    let n = g.cells_per_unit();
    let off = lattice_offset(g)?;
    // block index range [−N, N] must be present
    for a in 0..d {
        let blocks = (g.cells()[a] / n) as i64;
        if off[a] > -(n_max as i64) || off[a] + blocks < n_max as i64 + 1 {
            return Err(Error::GridTooSmall(format!(
                "grid must cover [-{n_max}, {}] along axis {a}",
                n_max + 1
            )));
        }
    }
    let q = Grid::unit_cell(d, n)?;
    let ks = cesaro_indices(d, n_max);
    let block_start = |k: [i64; 2], a: usize| ((k[a] - off[a]) as usize) * n;

    let mut sum = vec![0.0; q.len()];
    let mut count = 0usize;
    let mut prev: Option<Vec<f64>> = None;
    let mut trace = Vec::new();
    let mut cursor = 0;
    let mut n_used = 0;
    for big_n in 1..=n_max {
        let r2 = (big_n * big_n) as i64;
        while cursor < ks.len() && ks[cursor][0].pow(2) + ks[cursor][1].pow(2) <= r2 {
            let k = ks[cursor];
            let (i0, j0) = (block_start(k, 0), if d == 2 { block_start(k, 1) } else { 0 });
            for c in q.indices() {
                let [r, s] = q.multi_index(c);
                sum[c] += f.at(i0 + r, j0 + s);
            }
            count += 1;
            cursor += 1;
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
        n_used = big_n;
        if let Some(p) = &prev {
            let dist = mean.iter().zip(p).map(|(a, b)| (a - b).abs()).sum::<f64>() * q.cell_volume();
            trace.push(TracePoint { n: big_n, distance: dist });
            prev = Some(mean);
            if opts.stop_early && dist < opts.tol {
                break;
            }
        } else {
            prev = Some(mean);
        }
    }
    let periodic_part = ScalarField::new(q, prev.expect("at least one mean"))?;
    let non_convergent = !trace_converged(&trace, opts.tol);
    let per_full = extend_periodically(&periodic_part, g)?;
    let perturbation = f.lin_comb(1.0, &per_full, -1.0)?;
    let gns_ratio = match opts.p {
        Some(p) if sobolev_conjugate(p, d).is_some() => {
            gns_ratio_parts(f, &perturbation, p)?.ratio
        }
        _ => None,
    };
    Ok(Decomposition {
        periodic_part,
        perturbation,
        gns_ratio,
        n_used,
        convergence_trace: trace,
        non_convergent,
    })
}

/// Converged iff the last step is below `tol` and the trailing steps never increase.
pub fn trace_converged(trace: &[TracePoint], tol: f64) -> bool {
    let Some(last) = trace.last() else {
        return false;
    };
    let tail = &trace[trace.len().saturating_sub(MONOTONE_TAIL)..];
    last.distance < tol && tail.windows(2).all(|w| w[1].distance <= w[0].distance)
}

/// Periodic background subtracted before the GNS ratio is formed.
#[derive(Clone, Debug, PartialEq)]
pub enum PeriodicBackground {
    /// `f_per = 0`, the compactly supported / `L^p` case.
    Zero,
    /// A known unit-cell field.
    Given(ScalarField),
    /// Cesàro extraction up to the given radius.
    Cesaro { n_max: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnsReport {
    pub p: f64,
    pub p_star: f64,
    /// `‖M(|f − f_per|)‖_{L^{p*}}`.
    pub ep_of_perturbation: f64,
    /// `‖δf‖_{L^p}`.
    pub lp_of_delta: f64,
    /// `None` is the `0/0` sentinel; a positive numerator over zero gives `+∞`.
    pub ratio: Option<f64>,
}

fn gns_ratio_parts(f: &ScalarField, perturbation: &ScalarField, p: f64) -> Result<GnsReport> {
    let d = f.grid().dim();
    let p_star = sobolev_conjugate(p, d)
        .ok_or_else(|| Error::ExponentOutOfRange(format!("p = {p} must be below d = {d}")))?;
    let ep = local_average(perturbation)?.lp_norm(p_star);
    let lp = discrete_gradient(f)?.lp_norm(p);
    let ratio = if lp > 0.0 {
        Some(ep / lp)
    } else if ep > 0.0 {
        Some(f64::INFINITY)
    } else {
        None
    };
    Ok(GnsReport {
        p,
        p_star,
        ep_of_perturbation: ep,
        lp_of_delta: lp,
        ratio,
    })
}

/// Both sides of `‖f − f_per‖_{E^p} ≤ C ‖δf‖_{L^p}` and their ratio.
///
/// Requires `1 ≤ p < d` and a sample domain containing `[−8, 8]^d`.
pub fn gns_verify(f: &ScalarField, p: f64, background: &PeriodicBackground) -> Result<GnsReport> {
    let d = f.grid().dim();
    if !(p >= 1.0) || sobolev_conjugate(p, d).is_none() {
        return Err(Error::ExponentOutOfRange(format!(
            "GNS needs 1 ≤ p < d, got p = {p}, d = {d}"
        )));
    }
    if crate::discrete_calculus::inscribed_radius(f) < 8.0 {
        return Err(Error::DomainTooSmall("GNS checks need a domain containing [-8, 8]^d".into()));
    }
    let perturbation = match background {
        PeriodicBackground::Zero => f.clone(),
        PeriodicBackground::Given(per) => f.lin_comb(1.0, &extend_periodically(per, f.grid())?, -1.0)?,
        PeriodicBackground::Cesaro { n_max } => cesaro_periodic_part(f, *n_max)?.perturbation,
    };
    gns_ratio_parts(f, &perturbation, p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnsFamilyReport {
    pub members: Vec<(String, GnsReport)>,
    /// Empirical constant for this family only.
    pub max_ratio: Option<f64>,
}

/// GNS ratios over a named test family; the maximum is the family's empirical constant.
pub fn gns_family(
    members: &[(String, ScalarField)],
    p: f64,
    background: &PeriodicBackground,
) -> Result<GnsFamilyReport> {
    let reports = members
        .iter()
        .map(|(name, f)| Ok((name.clone(), gns_verify(f, p, background)?)))
        .collect::<Result<Vec<_>>>()?;
    let max_ratio = reports
        .iter()
        .filter_map(|(_, r)| r.ratio)
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
    Ok(GnsFamilyReport {
        members: reports,
        max_ratio,
    })
}

/// Lebesgue exponent `q = (p(α + d) − d)/α` reached by `α`-Hölder `A^p` functions.
pub fn holder_lebesgue_exponent(p: f64, alpha: f64, d: usize) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::ExponentOutOfRange(format!("p = {p} must satisfy p ≥ 1")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::ExponentOutOfRange(format!("α = {alpha} must lie in ]0, 1]")));
    }
    if d == 0 {
        return Err(Error::ExponentOutOfRange("dimension must be positive".into()));
    }
    let d = d as f64;
    Ok((p * (alpha + d) - d) / alpha)
}
