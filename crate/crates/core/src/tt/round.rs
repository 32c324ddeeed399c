//! TT-rounding: right-to-left QR orthogonalization followed by a
//! left-to-right sweep of truncated SVDs.

use nalgebra::{DMatrix, SVD};

use super::dense::rank_for_tolerance;
use super::{TtCore, TtTensor};
use crate::error::{Error, Result};

/// How aggressively [`tt_round`] may truncate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ToleranceSpec {
    /// Relative Frobenius accuracy: `||round(A) - A|| <= eps ||A||`.
    Accuracy(f64),
    /// Cap every interior rank at this value.
    MaxRank(usize),
}

/// Recompress `a` to lower TT-ranks.
pub fn tt_round(a: &TtTensor, tol: ToleranceSpec) -> Result<TtTensor> {
    match tol {
        ToleranceSpec::Accuracy(eps) if !(eps > 0.0) => {
            return Err(Error::arg(format!("rounding accuracy must be positive, got {eps}")))
        }
        ToleranceSpec::MaxRank(0) => return Err(Error::arg("rounding rank cap must be at least 1")),
        _ => {}
    }
    let d = a.order();
    if d == 1 {
        return Ok(a.clone());
    }
    // Product of core norms bounds ||A||; anything below its rounding noise is zero.
    let bound: f64 = a.cores().iter().map(|c| frob(c.data())).product();
    let mut cores: Vec<TtCore> = a.cores().to_vec();
    orthogonalize_right(&mut cores);

    let norm = frob(cores[0].data());
    if norm <= 4.0 * d as f64 * f64::EPSILON * bound {
        return Ok(TtTensor::zeros(&a.mode_sizes()));
    }
    let delta = match tol {
        ToleranceSpec::Accuracy(eps) => eps * norm / ((d - 1) as f64).sqrt(),
        ToleranceSpec::MaxRank(_) => 0.0,
    };

    for i in 0..d - 1 {
        let (l, n, r) = (cores[i].left(), cores[i].size(), cores[i].right());
        let m = DMatrix::from_row_slice(l * n, r, cores[i].data());
        let (u, s, vt) = truncated_svd(m, |sv| match tol {
            ToleranceSpec::Accuracy(_) => rank_for_tolerance(sv, delta),
            ToleranceSpec::MaxRank(cap) => {
                // Numerically null directions carry nothing worth keeping.
                let floor = sv[0] * f64::EPSILON;
                sv.iter().take(cap).filter(|&&x| x > floor).count().max(1)
            }
        });
        let rank = s.len();
        cores[i] = TtCore::new(l, n, rank, row_major(&u))?;
        // Carry S V^T into the next core.
        let next = &cores[i + 1];
        let (nl, nn, nr) = (next.left(), next.size(), next.right());
        debug_assert_eq!(nl, r);
        let mut sv = vt;
        for (row, &sigma) in s.iter().enumerate() {
            sv.row_mut(row).scale_mut(sigma);
        }
        let rhs = DMatrix::from_row_slice(nl, nn * nr, next.data());
        let merged = sv * rhs;
        cores[i + 1] = TtCore::new(rank, nn, nr, row_major(&merged))?;
    }
    Ok(TtTensor::from_cores_unchecked(cores))
}

/// Make cores `1..d` right-orthogonal, pushing the non-orthogonal factors
/// into core 0. Ranks may shrink when a right unfolding is wide.
pub(crate) fn orthogonalize_right(cores: &mut [TtCore]) {
    for i in (1..cores.len()).rev() {
        let (l, n, r) = (cores[i].left(), cores[i].size(), cores[i].right());
        // QR of the transposed right unfolding: M^T = Q R, so M = R^T Q^T.
        let mt = DMatrix::from_column_slice(n * r, l, cores[i].data());
        let qr = mt.qr();
        let (q, rf) = (qr.q(), qr.r());
        let m = q.ncols();
        // New core i is Q^T laid out as (m, n, r): element (a, k, b) = Q[(k*r+b), a].
        let mut data = vec![0.0; m * n * r];
        for a in 0..m {
            for kb in 0..n * r {
                data[a * n * r + kb] = q[(kb, a)];
            }
        }
        cores[i] = TtCore { left: m, size: n, right: r, data };
        // Core i-1 absorbs R^T on the right.
        let prev = &cores[i - 1];
        let (pl, pn) = (prev.left(), prev.size());
        let lhs = DMatrix::from_row_slice(pl * pn, l, prev.data());
        let merged = lhs * rf.transpose();
        cores[i - 1] = TtCore { left: pl, size: pn, right: m, data: row_major(&merged) };
    }
}

/// SVD with singular values sorted in decreasing order, truncated to the rank
/// picked by `choose` (which sees the sorted singular values).
pub(crate) fn truncated_svd(
    m: DMatrix<f64>,
    choose: impl Fn(&[f64]) -> usize,
) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (rows, cols) = m.shape();
    // Tall matrices: compress with QR first so the SVD runs on a square factor.
    let (q_left, m) = if rows > 2 * cols {
        let qr = m.qr();
        (Some(qr.q()), qr.r())
    } else {
        (None, m)
    };
    let svd = SVD::new(m, true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sorted: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let r = choose(&sorted).clamp(1, sorted.len());
    let mut uu = DMatrix::zeros(u.nrows(), r);
    let mut vv = DMatrix::zeros(r, vt.ncols());
    for (j, &src) in order.iter().take(r).enumerate() {
        uu.set_column(j, &u.column(src));
        vv.set_row(j, &vt.row(src));
    }
    let uu = match q_left {
        Some(q) => q * uu,
        None => uu,
    };
    (uu, sorted[..r].to_vec(), vv)
}

pub(crate) fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let (rows, cols) = m.shape();
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn frob(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::super::testutil::random_tt;
    use super::super::{tt_add, tt_scale, tt_sub, tt_to_dense, tt_norm};
    use super::*;

    fn dense_dev(a: &TtTensor, b: &TtTensor) -> f64 {
        let (da, db) = (tt_to_dense(a).unwrap(), tt_to_dense(b).unwrap());
        da.values().iter().zip(db.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn rejects_bad_tolerances() {
        let a = TtTensor::ones(&[2, 2]);
        assert!(tt_round(&a, ToleranceSpec::Accuracy(0.0)).is_err());
        assert!(tt_round(&a, ToleranceSpec::Accuracy(-1.0)).is_err());
        assert!(tt_round(&a, ToleranceSpec::MaxRank(0)).is_err());
    }

    #[test]
    fn doubled_tensor_recovers_ranks() {
        let a = random_tt(&[4, 5, 3], &[3, 2], 21);
        let rounded = tt_round(&tt_add(&a, &a).unwrap(), ToleranceSpec::Accuracy(1e-12)).unwrap();
        assert_eq!(rounded.ranks(), a.ranks());
        assert!(dense_dev(&rounded, &tt_scale(2.0, &a)) < 1e-12);
    }

    #[test]
    fn max_rank_at_current_rank_is_lossless() {
        let a = random_tt(&[4, 5, 3, 4], &[3, 4, 2], 22);
        let rounded = tt_round(&a, ToleranceSpec::MaxRank(a.max_rank())).unwrap();
        assert!(dense_dev(&rounded, &a) < 1e-12);
    }

    #[test]
    fn accuracy_contract() {
        let a = random_tt(&[5, 5, 5, 5], &[4, 4, 4], 23);
        for eps in [1e-1, 1e-2, 1e-6] {
            let r = tt_round(&a, ToleranceSpec::Accuracy(eps)).unwrap();
            let err = tt_norm(&tt_sub(&r, &a).unwrap());
            assert!(err <= eps * tt_norm(&a) * (1.0 + 1e-10), "eps {eps}: err {err}");
        }
    }

    #[test]
    fn rank_cap_is_respected() {
        let a = random_tt(&[5, 6, 5, 4], &[4, 4, 4], 24);
        let r = tt_round(&a, ToleranceSpec::MaxRank(2)).unwrap();
        assert!(r.interior_ranks().iter().all(|&x| x <= 2));
    }

    #[test]
    fn zero_rounds_to_rank_one_zero() {
        let z = tt_sub(&TtTensor::ones(&[3, 3, 3]), &TtTensor::ones(&[3, 3, 3])).unwrap();
        let r = tt_round(&z, ToleranceSpec::Accuracy(1e-8)).unwrap();
        assert_eq!(r.interior_ranks(), vec![1, 1]);
        assert!(r.cores().iter().all(|c| c.data().iter().all(|&v| v == 0.0)));
    }
}
