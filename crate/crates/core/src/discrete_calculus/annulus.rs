use serde::{Deserialize, Serialize};

use crate::grid_fields::{Grid, ScalarField};
use crate::{Error, Result};

use super::gradient::discrete_gradient;

/// Raised when the annulus `Q_{2N} \ Q_N` is disconnected (`d = 1`), where the
/// annulus estimate cannot hold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisconnectedWarning {
    pub message: String,
}

/// Annulus periodic mean and the estimate ratio
/// `‖f − f_per,N‖_{L^p(A_N)} / (N ‖δf‖_{L^p(Q_{6N} \ Q_N)})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusMean {
    pub n: usize,
    /// `f_per,N` on the unit cell.
    pub periodic_part: ScalarField,
    pub index_count: usize,
    pub numerator: f64,
    /// `N ‖δf‖_{L^p(Q_{6N} \ Q_N)}`.
    pub denominator: f64,
    /// `+∞` for a positive numerator over a zero denominator, `0` when both vanish.
    pub ratio: f64,
    pub warning: Option<DisconnectedWarning>,
}

/// Unit-block offsets `k` with `Q + k ⊂ Q_{2N} \ Q_N`, lexicographically sorted.
pub fn annulus_indices(dim: usize, big_n: usize) -> Vec<[i64; 2]> {
    let n = big_n as i64;
    let range = -2 * n..2 * n;
    let outside = |k: i64| k >= n || k < -n;
    if dim == 1 {
        return range.filter(|&k| outside(k)).map(|k| [k, 0]).collect();
    }
    let mut out = Vec::new();
    for k1 in range.clone() {
        for k0 in range.clone() {
            if outside(k0) || outside(k1) {
                out.push([k0, k1]);
            }
        }
    }
    out
}

/// Averages `f` over the unit translates filling the annulus `Q_{2N} \ Q_N`.
///
/// The grid must contain `Q_{6N}` on the integer lattice. In `d = 1` the result
/// carries a [`DisconnectedWarning`].
pub fn annulus_periodic_mean(f: &ScalarField, big_n: usize, p: f64) -> Result<AnnulusMean> {
    if big_n == 0 {
        return Err(Error::InvalidArgument("annulus radius N must be positive".into()));
    }
    if !(p >= 1.0) {
        return Err(Error::ExponentOutOfRange(format!("p = {p} must satisfy p ≥ 1")));
    }
    let g0 = f.grid();
    let d = g0.dim();
    let n = g0.cells_per_unit();
    let r6 = 6 * big_n;
    let big = Grid::centered_box(d, r6 as f64, n)?;
    let f6 = f.restrict(&big).map_err(|_| {
        Error::GridTooSmall(format!("grid must contain Q_{r6} aligned with the integer lattice"))
    })?;
    let g = f6.grid();
    let ks = annulus_indices(d, big_n);
    let cell_of = |k: [i64; 2], r: usize, s: usize| {
        let i = ((k[0] + r6 as i64) as usize) * n + r;
        let j = if d == 2 { ((k[1] + r6 as i64) as usize) * n + s } else { 0 };
        g.index(i, j)
    };
    let q = Grid::unit_cell(d, n)?;
    let per: Vec<f64> = q
        .indices()
        .map(|c| {
            let [r, s] = q.multi_index(c);
            ks.iter().map(|&k| f6.values()[cell_of(k, r, s)]).sum::<f64>() / ks.len() as f64
        })
        .collect();
    let vol = g.cell_volume();
    let mut num = 0.0;
    for &k in &ks {
        for c in q.indices() {
            let [r, s] = q.multi_index(c);
            num += (f6.values()[cell_of(k, r, s)] - per[c]).abs().powf(p) * vol;
        }
    }
    let numerator = num.powf(1.0 / p);

    let inner = |i: usize| {
        let b = (i / n) as i64 - r6 as i64;
        (-(big_n as i64)..big_n as i64).contains(&b)
    };
    let delta = discrete_gradient(&f6)?;
    let mut den = 0.0;
    for comp in delta.components() {
        let cg = comp.grid();
        for (idx, v) in comp.values().iter().enumerate() {
            let [i, j] = cg.multi_index(idx);
            let in_qn = inner(i) && (d == 1 || inner(j));
            if !in_qn {
                den += v.abs().powf(p) * vol;
            }
        }
    }
    let denominator = big_n as f64 * den.powf(1.0 / p);
    let ratio = if denominator > 0.0 {
        numerator / denominator
    } else if numerator > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let warning = (d == 1).then(|| DisconnectedWarning {
        message: "annulus Q_2N \\ Q_N is disconnected in one dimension; the estimate does not apply"
            .into(),
    });
    Ok(AnnulusMean {
        n: big_n,
        periodic_part: ScalarField::new(q, per)?,
        index_count: ks.len(),
        numerator,
        denominator,
        ratio,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_set_counts() {
        // (4N)^d − (2N)^d blocks
        assert_eq!(annulus_indices(2, 2).len(), 64 - 16);
        assert_eq!(annulus_indices(1, 3).len(), 6);
    }

    #[test]
    fn periodic_field_is_its_own_mean() {
        let g = Grid::centered_box(2, 12.0, 4).unwrap();
        let tau = std::f64::consts::TAU;
        let f = ScalarField::from_fn(g, |x| 2.0 + (tau * x[0]).sin() * (tau * x[1]).cos()).unwrap();
        let a = annulus_periodic_mean(&f, 2, 1.5).unwrap();
        let q = Grid::unit_cell(2, 4).unwrap();
        let fq = f.restrict(&q).unwrap();
        for (x, y) in a.periodic_part.values().iter().zip(fq.values()) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!(a.numerator < 1e-13);
    }

    #[test]
    fn one_dimensional_staircase_breaks_estimate() {
        let g = Grid::centered_box(1, 12.0, 4).unwrap();
        let f = ScalarField::from_fn(g, |x| if x[0] < 0.0 { 2.0 } else { 1.0 }).unwrap();
        let a = annulus_periodic_mean(&f, 2, 1.5).unwrap();
        assert!(a.warning.is_some());
        assert_eq!(a.ratio, f64::INFINITY);
        assert!(a.periodic_part.values().iter().all(|v| *v == 1.5));
    }
}
