//! Core-wise algebra on TT tensors. None of these densify.

use super::{TtCore, TtTensor};
use crate::error::Result;

/// Elementwise sum. Interior ranks add; the first and last cores are
/// concatenated and the interior cores become block diagonal.
pub fn tt_add(a: &TtTensor, b: &TtTensor) -> Result<TtTensor> {
    a.check_same_shape(b, "tt_add")?;
    let d = a.order();
    if d == 1 {
        let (ca, cb) = (a.core(0), b.core(0));
        let data = ca.data().iter().zip(cb.data()).map(|(x, y)| x + y).collect();
        return Ok(TtTensor::from_cores_unchecked(vec![TtCore::new(1, ca.size(), 1, data)?]));
    }
    let mut cores = Vec::with_capacity(d);
    for i in 0..d {
        let (ca, cb) = (a.core(i), b.core(i));
        let n = ca.size();
        let left = if i == 0 { 1 } else { ca.left() + cb.left() };
        let right = if i == d - 1 { 1 } else { ca.right() + cb.right() };
        let mut out = TtCore::zeros(left, n, right);
        // Offsets of the B block inside the result.
        let (ab, bb) = (if i == 0 { 0 } else { ca.left() }, if i == d - 1 { 0 } else { ca.right() });
        let data = out.data_mut();
        for x in 0..ca.left() {
            for k in 0..n {
                for y in 0..ca.right() {
                    data[(x * n + k) * right + y] = ca.at(x, k, y);
                }
            }
        }
        for x in 0..cb.left() {
            for k in 0..n {
                for y in 0..cb.right() {
                    data[((x + ab) * n + k) * right + y + bb] = cb.at(x, k, y);
                }
            }
        }
        cores.push(out);
    }
    Ok(TtTensor::from_cores_unchecked(cores))
}

/// Multiply every element by `c`; only the first core changes.
pub fn tt_scale(c: f64, a: &TtTensor) -> TtTensor {
    let mut out = a.clone();
    for x in out.cores_mut()[0].data_mut() {
        *x *= c;
    }
    out
}

/// `a - b`, ranks add as in [`tt_add`].
pub fn tt_sub(a: &TtTensor, b: &TtTensor) -> Result<TtTensor> {
    tt_add(a, &tt_scale(-1.0, b))
}

/// Elementwise (Hadamard) product: each slice is the Kronecker product of the
/// operands' slices, so interior ranks multiply.
pub fn tt_hadamard(a: &TtTensor, b: &TtTensor) -> Result<TtTensor> {
    a.check_same_shape(b, "tt_hadamard")?;
    let cores = a
        .cores()
        .iter()
        .zip(b.cores())
        .map(|(ca, cb)| {
            let n = ca.size();
            let (l, r) = (ca.left() * cb.left(), ca.right() * cb.right());
            let mut out = TtCore::zeros(l, n, r);
            let data = out.data_mut();
            for xa in 0..ca.left() {
                for xb in 0..cb.left() {
                    let row = xa * cb.left() + xb;
                    for k in 0..n {
                        let base = (row * n + k) * r;
                        for ya in 0..ca.right() {
                            let va = ca.at(xa, k, ya);
                            let bslice = &cb.data()[(xb * n + k) * cb.right()..][..cb.right()];
                            let dst = &mut data[base + ya * cb.right()..][..cb.right()];
                            for (o, &vb) in dst.iter_mut().zip(bslice) {
                                *o = va * vb;
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();
    Ok(TtTensor::from_cores_unchecked(cores))
}

/// Frobenius inner product by left-to-right contraction, `O(d K r^3)`.
pub fn tt_inner(a: &TtTensor, b: &TtTensor) -> Result<f64> {
    a.check_same_shape(b, "tt_inner")?;
    // state[x * rb + y] couples rank index x of `a` with y of `b`.
    let mut state = vec![1.0];
    for (ca, cb) in a.cores().iter().zip(b.cores()) {
        let (ra, rb, n) = (ca.right(), cb.right(), ca.size());
        let mut next = vec![0.0; ra * rb];
        let mut tmp = vec![0.0; ra * cb.left()];
        for k in 0..n {
            // tmp[y', x] = sum_x0 state[x0, x] * A[x0, k, y'] ... stored as (ra x lb)
            tmp.iter_mut().for_each(|t| *t = 0.0);
            for x0 in 0..ca.left() {
                let arow = &ca.data()[(x0 * n + k) * ra..][..ra];
                for xb in 0..cb.left() {
                    let s = state[x0 * cb.left() + xb];
                    if s == 0.0 {
                        continue;
                    }
                    for (ya, &av) in arow.iter().enumerate() {
                        tmp[ya * cb.left() + xb] += s * av;
                    }
                }
            }
            for ya in 0..ra {
                let out = &mut next[ya * rb..(ya + 1) * rb];
                for xb in 0..cb.left() {
                    let t = tmp[ya * cb.left() + xb];
                    if t == 0.0 {
                        continue;
                    }
                    let brow = &cb.data()[(xb * n + k) * rb..][..rb];
                    for (o, &bv) in out.iter_mut().zip(brow) {
                        *o += t * bv;
                    }
                }
            }
        }
        state = next;
    }
    Ok(state[0])
}

/// Frobenius norm, `sqrt(<A, A>)` with negative rounding noise clamped to zero.
pub fn tt_norm(a: &TtTensor) -> f64 {
    tt_inner(a, a).expect("same shape").max(0.0).sqrt()
}

/// `sum_k A_k B_k C_k` without forming any Hadamard product. Equal to
/// `<A, B (.) C>` at a cost of `O(d K r_a r_b r_c (r_a + r_b + r_c))`.
pub fn tt_dot3(a: &TtTensor, b: &TtTensor, c: &TtTensor) -> Result<f64> {
    a.check_same_shape(b, "tt_dot3")?;
    a.check_same_shape(c, "tt_dot3")?;
    let mut state = vec![1.0];
    let (mut la, mut lb, mut lc) = (1usize, 1usize, 1usize);
    for ((ca, cb), cc) in a.cores().iter().zip(b.cores()).zip(c.cores()) {
        let (ra, rb, rc, n) = (ca.right(), cb.right(), cc.right(), ca.size());
        let mut next = vec![0.0; ra * rb * rc];
        let mut t1 = vec![0.0; ra * lb * lc];
        let mut t2 = vec![0.0; ra * rb * lc];
        for k in 0..n {
            // t1[ya, xb, xc] = sum_xa A[xa, k, ya] state[xa, xb, xc]
            t1.iter_mut().for_each(|t| *t = 0.0);
            for xa in 0..la {
                let arow = &ca.data()[(xa * n + k) * ra..][..ra];
                let s = &state[xa * lb * lc..(xa + 1) * lb * lc];
                for (ya, &av) in arow.iter().enumerate() {
                    if av == 0.0 {
                        continue;
                    }
                    for (o, &sv) in t1[ya * lb * lc..(ya + 1) * lb * lc].iter_mut().zip(s) {
                        *o += av * sv;
                    }
                }
            }
            // t2[ya, yb, xc] = sum_xb B[xb, k, yb] t1[ya, xb, xc]
            t2.iter_mut().for_each(|t| *t = 0.0);
            for ya in 0..ra {
                for xb in 0..lb {
                    let src = &t1[(ya * lb + xb) * lc..][..lc];
                    let brow = &cb.data()[(xb * n + k) * rb..][..rb];
                    for (yb, &bv) in brow.iter().enumerate() {
                        if bv == 0.0 {
                            continue;
                        }
                        let dst = &mut t2[(ya * rb + yb) * lc..][..lc];
                        for (o, &s) in dst.iter_mut().zip(src) {
                            *o += bv * s;
                        }
                    }
                }
            }
            // next[ya, yb, yc] += sum_xc C[xc, k, yc] t2[ya, yb, xc]
            for yab in 0..ra * rb {
                let src = &t2[yab * lc..(yab + 1) * lc];
                let dst = &mut next[yab * rc..(yab + 1) * rc];
                for (xc, &s) in src.iter().enumerate() {
                    if s == 0.0 {
                        continue;
                    }
                    let crow = &cc.data()[(xc * n + k) * rc..][..rc];
                    for (o, &cv) in dst.iter_mut().zip(crow) {
                        *o += s * cv;
                    }
                }
            }
        }
        state = next;
        la = ra;
        lb = rb;
        lc = rc;
    }
    Ok(state[0])
}

#[cfg(test)]
mod tests {
    use super::super::testutil::random_tt;
    use super::super::{tt_rank1, tt_to_dense, IndexTuple};
    use super::*;
    use crate::error::Error;

    fn max_dev(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn add_zero_is_identity() {
        let a = random_tt(&[3, 4, 5], &[2, 3], 1);
        let s = tt_add(&a, &TtTensor::zeros(&[3, 4, 5])).unwrap();
        let (da, ds) = (tt_to_dense(&a).unwrap(), tt_to_dense(&s).unwrap());
        assert!(max_dev(da.values(), ds.values()) == 0.0);
    }

    #[test]
    fn add_rank_bookkeeping() {
        let a = random_tt(&[3, 4, 5, 2], &[2, 3, 2], 2);
        let b = random_tt(&[3, 4, 5, 2], &[2, 3, 2], 3);
        let s = tt_add(&a, &b).unwrap();
        assert_eq!(s.interior_ranks(), vec![4, 6, 4]);
        let (da, db, ds) = (tt_to_dense(&a).unwrap(), tt_to_dense(&b).unwrap(), tt_to_dense(&s).unwrap());
        let sum: Vec<f64> = da.values().iter().zip(db.values()).map(|(x, y)| x + y).collect();
        assert!(max_dev(&sum, ds.values()) < 1e-13);
    }

    #[test]
    fn add_order_one() {
        let a = tt_rank1(&[vec![1.0, 2.0]]).unwrap();
        let s = tt_add(&a, &a).unwrap();
        assert_eq!(s.eval(&[1]), 4.0);
    }

    #[test]
    fn shape_mismatch_errors() {
        let a = TtTensor::ones(&[2, 3]);
        let b = TtTensor::ones(&[3, 2]);
        assert!(matches!(tt_add(&a, &b), Err(Error::Shape(_))));
        assert!(matches!(tt_hadamard(&a, &b), Err(Error::Shape(_))));
        assert!(matches!(tt_inner(&a, &b), Err(Error::Shape(_))));
    }

    #[test]
    fn scale_cases() {
        let a = random_tt(&[3, 2, 4, 2], &[2, 2, 3], 4);
        let da = tt_to_dense(&a).unwrap();
        assert!(tt_to_dense(&tt_scale(0.0, &a)).unwrap().values().iter().all(|&v| v == 0.0));
        assert_eq!(tt_to_dense(&tt_scale(1.0, &a)).unwrap().values(), da.values());
        let s = tt_scale(-2.5, &a);
        assert_eq!(s.ranks(), a.ranks());
        let expect: Vec<f64> = da.values().iter().map(|v| -2.5 * v).collect();
        assert!(max_dev(&expect, tt_to_dense(&s).unwrap().values()) < 1e-14);
    }

    #[test]
    fn hadamard_cases() {
        let a = random_tt(&[3, 4, 2], &[2, 3], 5);
        let ones = TtTensor::ones(&[3, 4, 2]);
        let h = tt_hadamard(&a, &ones).unwrap();
        assert!(max_dev(tt_to_dense(&a).unwrap().values(), tt_to_dense(&h).unwrap().values()) < 1e-15);

        let r1 = tt_rank1(&[vec![1.0, 2.0], vec![3.0, -1.0]]).unwrap();
        let r2 = tt_rank1(&[vec![0.5, 4.0], vec![2.0, 2.0]]).unwrap();
        let h = tt_hadamard(&r1, &r2).unwrap();
        assert_eq!(h.interior_ranks(), vec![1]);
        assert_eq!(h.element(&IndexTuple(vec![2, 2])).unwrap(), -(2.0 * 4.0 * 2.0));

        let b = random_tt(&[3, 4, 2], &[3, 2], 6);
        let h = tt_hadamard(&a, &b).unwrap();
        assert_eq!(h.interior_ranks(), vec![6, 6]);
        let (da, db) = (tt_to_dense(&a).unwrap(), tt_to_dense(&b).unwrap());
        let prod: Vec<f64> = da.values().iter().zip(db.values()).map(|(x, y)| x * y).collect();
        assert!(max_dev(&prod, tt_to_dense(&h).unwrap().values()) <= 1e-12);
    }

    #[test]
    fn inner_cases() {
        let a = random_tt(&[3, 4, 2, 3], &[2, 3, 2], 7);
        assert_eq!(tt_inner(&a, &TtTensor::zeros(&[3, 4, 2, 3])).unwrap(), 0.0);

        let (x, y, u, v) = (vec![1.0, -2.0, 0.5], vec![3.0, 1.0], vec![0.2, 0.4, 2.0], vec![-1.0, 5.0]);
        let p = tt_rank1(&[x.clone(), y.clone()]).unwrap();
        let q = tt_rank1(&[u.clone(), v.clone()]).unwrap();
        let dot = |s: &[f64], t: &[f64]| s.iter().zip(t).map(|(i, j)| i * j).sum::<f64>();
        assert!((tt_inner(&p, &q).unwrap() - dot(&x, &u) * dot(&y, &v)).abs() < 1e-14);

        let b = random_tt(&[3, 4, 2, 3], &[3, 1, 4], 8);
        let dense = dot(tt_to_dense(&a).unwrap().values(), tt_to_dense(&b).unwrap().values());
        let tt = tt_inner(&a, &b).unwrap();
        assert!((tt - dense).abs() <= 1e-12 * dense.abs().max(1.0));
    }

    #[test]
    fn norm_cases() {
        assert_eq!(tt_norm(&TtTensor::zeros(&[4, 4])), 0.0);
        let s = 0.5f64.sqrt();
        let unit = tt_rank1(&[vec![s, s], vec![0.0, 1.0], vec![0.6, 0.8]]).unwrap();
        assert!((tt_norm(&unit) - 1.0).abs() < 1e-15);
        let a = random_tt(&[5, 3, 4], &[3, 2], 9);
        let fro = tt_to_dense(&a).unwrap().values().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((tt_norm(&a) - fro).abs() <= 1e-12 * fro);
    }

    #[test]
    fn dot3_matches_hadamard_inner() {
        let a = random_tt(&[3, 4, 5], &[2, 2], 10);
        let b = random_tt(&[3, 4, 5], &[3, 2], 11);
        let c = random_tt(&[3, 4, 5], &[2, 4], 12);
        let direct = tt_inner(&a, &tt_hadamard(&b, &c).unwrap()).unwrap();
        let fused = tt_dot3(&a, &b, &c).unwrap();
        assert!((direct - fused).abs() <= 1e-12 * direct.abs().max(1.0));
    }
}
