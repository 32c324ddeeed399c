//! Dense tensors at test-oracle scale and conversions to and from TT.

use nalgebra::DMatrix;

use super::round::truncated_svd;
use super::{TtCore, TtTensor};
use crate::error::{Error, Result};

/// Largest element count for which densification is allowed.
pub const DENSE_LIMIT: usize = 10_000_000;

/// A dense tensor stored row-major (last index fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let count = checked_count(&shape)?;
        if values.len() != count {
            return Err(Error::shape(format!("shape {shape:?} needs {count} values, got {}", values.len())));
        }
        Ok(Self { shape, values })
    }

    /// Fill from a function of the 0-based multi-index.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let count = checked_count(&shape)?;
        let mut values = Vec::with_capacity(count);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..count {
            values.push(f(&idx));
            increment(&mut idx, &shape);
        }
        Ok(Self { shape, values })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.offset(idx)]
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn checked_count(shape: &[usize]) -> Result<usize> {
    let mut count: usize = 1;
    for &n in shape {
        count = count.checked_mul(n).ok_or(Error::Size(usize::MAX))?;
        if count > DENSE_LIMIT {
            return Err(Error::Size(shape.iter().product::<usize>()));
        }
    }
    Ok(count)
}

/// Advance a row-major multi-index by one position.
pub(crate) fn increment(idx: &mut [usize], shape: &[usize]) {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < shape[i] {
            return;
        }
        idx[i] = 0;
    }
}

/// Densify a TT tensor. Guarded by [`DENSE_LIMIT`].
pub fn tt_to_dense(a: &TtTensor) -> Result<DenseTensor> {
    let shape = a.mode_sizes();
    checked_count(&shape)?;
    // Contract left to right: acc is (prefix_count x r) row-major.
    let mut acc = vec![1.0];
    let mut rows = 1usize;
    for core in a.cores() {
        let (l, n, r) = (core.left(), core.size(), core.right());
        let mut next = vec![0.0; rows * n * r];
        for p in 0..rows {
            for x in 0..l {
                let v = acc[p * l + x];
                if v == 0.0 {
                    continue;
                }
                for k in 0..n {
                    let src = &core.data()[(x * n + k) * r..][..r];
                    let dst = &mut next[(p * n + k) * r..][..r];
                    for (o, &c) in dst.iter_mut().zip(src) {
                        *o += v * c;
                    }
                }
            }
        }
        acc = next;
        rows *= n;
    }
    DenseTensor::new(shape, acc)
}

/// Sequential-SVD (TT-SVD) decomposition of a dense tensor with relative
/// accuracy `eps`. `eps = 0` keeps every nonzero singular value.
pub fn tt_from_dense(t: &DenseTensor, eps: f64) -> Result<TtTensor> {
    let shape = t.shape().to_vec();
    let d = shape.len();
    let delta = if d > 1 { eps * t.norm() / ((d - 1) as f64).sqrt() } else { 0.0 };
    let mut cores = Vec::with_capacity(d);
    let mut rest = t.values().to_vec();
    let mut left = 1usize;
    for &n in shape.iter().take(d - 1) {
        let rows = left * n;
        let cols = rest.len() / rows;
        let m = DMatrix::from_row_slice(rows, cols, &rest);
        let (u, s, vt) = truncated_svd(m, |sv| rank_for_tolerance(sv, delta));
        let r = s.len();
        let mut data = vec![0.0; rows * r];
        for row in 0..rows {
            for c in 0..r {
                data[row * r + c] = u[(row, c)];
            }
        }
        cores.push(TtCore::new(left, n, r, data)?);
        rest = Vec::with_capacity(r * cols);
        for c in 0..r {
            for j in 0..cols {
                rest.push(s[c] * vt[(c, j)]);
            }
        }
        left = r;
    }
    cores.push(TtCore::new(left, shape[d - 1], 1, rest)?);
    TtTensor::from_cores(cores)
}

/// Smallest rank whose discarded tail has 2-norm at most `delta`, with
/// exactly-zero singular values always dropped.
pub(crate) fn rank_for_tolerance(s: &[f64], delta: f64) -> usize {
    let mut tail = 0.0;
    let mut r = s.len();
    while r > 1 {
        let next = tail + s[r - 1] * s[r - 1];
        if next.sqrt() > delta && s[r - 1] > 0.0 {
            break;
        }
        tail = next;
        r -= 1;
    }
    r.max(1)
}

#[cfg(test)]
mod tests {
    use super::super::testutil::random_tt;
    use super::super::{tt_rank1, TtTensor};
    use super::*;

    #[test]
    fn rank1_to_dense() {
        let t = tt_rank1(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(tt_to_dense(&t).unwrap().values(), &[3.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn exhaustive_element_check_5x6x7x8() {
        let t = random_tt(&[5, 6, 7, 8], &[2, 3, 4], 3);
        let dense = tt_to_dense(&t).unwrap();
        assert_eq!(dense.values().len(), 1680);
        let mut idx = vec![0; 4];
        for v in dense.values() {
            assert!((t.eval(&idx) - v).abs() < 1e-13);
            increment(&mut idx, &[5, 6, 7, 8]);
        }
    }

    #[test]
    fn dense_round_trip_exact() {
        let dense = DenseTensor::from_fn(vec![3, 4, 5], |k| (k[0] as f64 + 1.3).sin() * (k[1] as f64) - (k[2] * k[0]) as f64 * 0.1).unwrap();
        let tt = tt_from_dense(&dense, 0.0).unwrap();
        let back = tt_to_dense(&tt).unwrap();
        for (a, b) in dense.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn size_guard() {
        let big = TtTensor::ones(&[100; 3]);
        assert!(tt_to_dense(&big).is_ok());
        let huge = TtTensor::ones(&[100; 4]);
        assert!(matches!(tt_to_dense(&huge), Err(Error::Size(_))));
    }

    #[test]
    fn tolerance_rank_rule() {
        assert_eq!(rank_for_tolerance(&[3.0, 2.0, 1e-9], 1e-6), 2);
        assert_eq!(rank_for_tolerance(&[3.0, 2.0, 1.0], 0.0), 3);
        assert_eq!(rank_for_tolerance(&[3.0, 0.0, 0.0], 0.0), 1);
        assert_eq!(rank_for_tolerance(&[0.0, 0.0], 0.0), 1);
    }
}
