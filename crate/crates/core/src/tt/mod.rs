//! Tensor-train (TT) format.
//!
//! A d-th order tensor is stored as d third-order cores. Core `i` has shape
//! `r_{i-1} x K_i x r_i` with `r_0 = r_d = 1`, and element `k` is the matrix
//! product of the `k_i`-th slices of every core. Storage is
//! `sum_i r_{i-1} K_i r_i` scalars instead of `prod_i K_i`.
//!
//! Indices are 1-based at the public boundary ([`IndexTuple`]) and 0-based
//! everywhere inside this crate.

mod algebra;
mod cross;
mod dense;
mod io;
mod maxvol;
mod round;

pub use algebra::{tt_add, tt_dot3, tt_hadamard, tt_inner, tt_norm, tt_scale, tt_sub};
pub use cross::{tt_cross, tt_cross_with, CrossOptions, CrossReport};
pub use dense::{tt_from_dense, tt_to_dense, DenseTensor, DENSE_LIMIT};
pub use io::{read_tt, write_tt};
pub use maxvol::maxvol;
pub use round::{tt_round, ToleranceSpec};

use crate::error::{Error, Result};

/// One third-order core, laid out as `[left][mode][right]` in row-major order.
///
/// With this layout the left unfolding `(left*mode) x right` and the right
/// unfolding `left x (mode*right)` are both plain row-major views of `data`.
#[derive(Clone, Debug, PartialEq)]
pub struct TtCore {
    left: usize,
    size: usize,
    right: usize,
    data: Vec<f64>,
}

impl TtCore {
    pub fn new(left: usize, size: usize, right: usize, data: Vec<f64>) -> Result<Self> {
        if left == 0 || size == 0 || right == 0 {
            return Err(Error::arg("core dimensions must be positive"));
        }
        if data.len() != left * size * right {
            return Err(Error::shape(format!(
                "core {left}x{size}x{right} needs {} values, got {}",
                left * size * right,
                data.len()
            )));
        }
        Ok(Self { left, size, right, data })
    }

    pub fn zeros(left: usize, size: usize, right: usize) -> Self {
        Self { left, size, right, data: vec![0.0; left * size * right] }
    }

    /// Rank-1 core holding a single vector.
    pub fn from_vector(v: &[f64]) -> Self {
        Self { left: 1, size: v.len(), right: 1, data: v.to_vec() }
    }

    #[inline]
    pub fn left(&self) -> usize {
        self.left
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn right(&self) -> usize {
        self.right
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, a: usize, k: usize, b: usize) -> f64 {
        self.data[(a * self.size + k) * self.right + b]
    }

    /// The `k`-th slice as a row-major `left x right` matrix.
    pub fn slice(&self, k: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.left * self.right);
        for a in 0..self.left {
            let base = (a * self.size + k) * self.right;
            out.extend_from_slice(&self.data[base..base + self.right]);
        }
        out
    }

    /// Contract the mode index against `weights`: returns the `left x right`
    /// matrix `sum_k weights[k] * slice(k)`.
    pub fn contract_mode(&self, weights: &[f64]) -> Vec<f64> {
        debug_assert_eq!(weights.len(), self.size);
        let mut out = vec![0.0; self.left * self.right];
        for a in 0..self.left {
            let row = &mut out[a * self.right..(a + 1) * self.right];
            for (k, &w) in weights.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let base = (a * self.size + k) * self.right;
                for (o, &x) in row.iter_mut().zip(&self.data[base..base + self.right]) {
                    *o += w * x;
                }
            }
        }
        out
    }
}

/// A tensor in TT format. Values are immutable once built; every operation
/// returns a new tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct TtTensor {
    cores: Vec<TtCore>,
}

impl TtTensor {
    /// Assemble a tensor from cores, checking that adjacent ranks chain and the
    /// boundary ranks are 1.
    pub fn from_cores(cores: Vec<TtCore>) -> Result<Self> {
        if cores.is_empty() {
            return Err(Error::arg("a TT tensor needs at least one core"));
        }
        if cores[0].left != 1 || cores[cores.len() - 1].right != 1 {
            return Err(Error::shape("boundary ranks must be 1"));
        }
        for (i, pair) in cores.windows(2).enumerate() {
            if pair[0].right != pair[1].left {
                return Err(Error::shape(format!(
                    "core {i} right rank {} does not match core {} left rank {}",
                    pair[0].right,
                    i + 1,
                    pair[1].left
                )));
            }
        }
        Ok(Self { cores })
    }

    pub(crate) fn from_cores_unchecked(cores: Vec<TtCore>) -> Self {
        debug_assert!(Self::from_cores(cores.clone()).is_ok());
        Self { cores }
    }

    /// Rank-1 all-zero tensor of the given shape.
    pub fn zeros(mode_sizes: &[usize]) -> Self {
        Self { cores: mode_sizes.iter().map(|&n| TtCore::zeros(1, n, 1)).collect() }
    }

    /// Rank-1 tensor with every element equal to one.
    pub fn ones(mode_sizes: &[usize]) -> Self {
        let vectors: Vec<Vec<f64>> = mode_sizes.iter().map(|&n| vec![1.0; n]).collect();
        Self { cores: vectors.iter().map(|v| TtCore::from_vector(v)).collect() }
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    pub fn mode_sizes(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.size).collect()
    }

    /// Full rank vector `(r_0, ..., r_d)` including the unit boundary ranks.
    pub fn ranks(&self) -> Vec<usize> {
        let mut r = Vec::with_capacity(self.cores.len() + 1);
        r.push(1);
        r.extend(self.cores.iter().map(|c| c.right));
        r
    }

    /// Interior ranks `(r_1, ..., r_{d-1})`.
    pub fn interior_ranks(&self) -> Vec<usize> {
        self.cores[..self.cores.len() - 1].iter().map(|c| c.right).collect()
    }

    pub fn max_rank(&self) -> usize {
        self.interior_ranks().into_iter().max().unwrap_or(1)
    }

    /// Number of stored scalars, `sum_i r_{i-1} K_i r_i`.
    pub fn param_count(&self) -> usize {
        self.cores.iter().map(|c| c.data.len()).sum()
    }

    pub fn cores(&self) -> &[TtCore] {
        &self.cores
    }

    pub fn core(&self, i: usize) -> &TtCore {
        &self.cores[i]
    }

    pub(crate) fn cores_mut(&mut self) -> &mut [TtCore] {
        &mut self.cores
    }

    pub fn into_cores(self) -> Vec<TtCore> {
        self.cores
    }

    /// Element at a 1-based index tuple.
    pub fn element(&self, k: &IndexTuple) -> Result<f64> {
        let idx = k.to_zero_based(&self.mode_sizes())?;
        Ok(self.eval(&idx))
    }

    /// Element at a 0-based index without bounds checks beyond debug asserts.
    pub fn eval(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.cores.len());
        let mut row = vec![1.0];
        let mut next = Vec::new();
        for (core, &k) in self.cores.iter().zip(idx) {
            next.clear();
            next.resize(core.right, 0.0);
            for (a, &v) in row.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                let base = (a * core.size + k) * core.right;
                for (o, &x) in next.iter_mut().zip(&core.data[base..base + core.right]) {
                    *o += v * x;
                }
            }
            std::mem::swap(&mut row, &mut next);
        }
        row[0]
    }

    /// Contract every mode against a weight vector, i.e. the inner product with
    /// the rank-1 tensor `w_1 o w_2 o ... o w_d`.
    pub fn contract_rank1(&self, weights: &[Vec<f64>]) -> f64 {
        debug_assert_eq!(weights.len(), self.cores.len());
        let mut row = vec![1.0];
        for (core, w) in self.cores.iter().zip(weights) {
            let m = core.contract_mode(w);
            row = vec_mat(&row, &m, core.right);
        }
        row[0]
    }

    pub(crate) fn check_same_shape(&self, other: &TtTensor, op: &str) -> Result<()> {
        if self.mode_sizes() != other.mode_sizes() {
            return Err(Error::shape(format!(
                "{op}: mode sizes {:?} vs {:?}",
                self.mode_sizes(),
                other.mode_sizes()
            )));
        }
        Ok(())
    }
}

/// Row vector times row-major matrix with `cols` columns.
pub(crate) fn vec_mat(v: &[f64], m: &[f64], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for (a, &x) in v.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (o, &y) in out.iter_mut().zip(&m[a * cols..(a + 1) * cols]) {
            *o += x * y;
        }
    }
    out
}

/// Build the rank-1 tensor `v_1 o v_2 o ... o v_d`.
pub fn tt_rank1(vectors: &[Vec<f64>]) -> Result<TtTensor> {
    if vectors.is_empty() {
        return Err(Error::arg("tt_rank1 needs at least one vector"));
    }
    if let Some(i) = vectors.iter().position(|v| v.is_empty()) {
        return Err(Error::arg(format!("vector {i} is empty")));
    }
    Ok(TtTensor { cores: vectors.iter().map(|v| TtCore::from_vector(v)).collect() })
}

/// Element of the rank-1 tensor at a 1-based multi-index.
pub fn tt_element(t: &TtTensor, k: &IndexTuple) -> Result<f64> {
    t.element(k)
}

/// A 1-based multi-index `(k_1, ..., k_d)` with `1 <= k_i <= K_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexTuple(pub Vec<usize>);

impl IndexTuple {
    pub fn new(k: Vec<usize>) -> Self {
        Self(k)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn to_zero_based(&self, mode_sizes: &[usize]) -> Result<Vec<usize>> {
        if self.0.len() != mode_sizes.len() {
            return Err(Error::Bounds(format!(
                "index has {} entries, tensor has order {}",
                self.0.len(),
                mode_sizes.len()
            )));
        }
        self.0
            .iter()
            .zip(mode_sizes)
            .enumerate()
            .map(|(i, (&k, &n))| {
                if k == 0 || k > n {
                    Err(Error::Bounds(format!("k_{} = {k} not in 1..={n}", i + 1)))
                } else {
                    Ok(k - 1)
                }
            })
            .collect()
    }

    pub fn from_zero_based(idx: &[usize]) -> Self {
        Self(idx.iter().map(|&i| i + 1).collect())
    }
}

impl From<Vec<usize>> for IndexTuple {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}


#[cfg(test)]
mod tests {
    use super::testutil::random_tt;
    use super::*;

    #[test]
    fn all_ones_rank1_element_is_one() {
        let t = TtTensor::ones(&[3, 4, 2]);
        assert_eq!(t.element(&IndexTuple(vec![2, 4, 1])).unwrap(), 1.0);
    }

    #[test]
    fn rank1_outer_product_element() {
        let t = tt_rank1(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(tt_element(&t, &IndexTuple(vec![2, 1])).unwrap(), 6.0);
    }

    #[test]
    fn rank1_single_nonzero_entry() {
        let t = tt_rank1(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        for i in 1..=2 {
            for j in 1..=2 {
                let v = t.element(&IndexTuple(vec![i, j])).unwrap();
                assert_eq!(v, if (i, j) == (1, 2) { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn rank1_matches_scalar_products() {
        let vs = vec![vec![0.3, -1.2, 2.0], vec![1.5, 0.25], vec![-0.7, 0.1, 0.9, 4.0]];
        let t = tt_rank1(&vs).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                for k in 0..4 {
                    assert_eq!(t.eval(&[i, j, k]), vs[0][i] * vs[1][j] * vs[2][k]);
                }
            }
        }
    }

    #[test]
    fn rank1_rejects_empty_input() {
        assert!(matches!(tt_rank1(&[]), Err(Error::Argument(_))));
        assert!(matches!(tt_rank1(&[vec![1.0], vec![]]), Err(Error::Argument(_))));
    }

    #[test]
    fn element_out_of_bounds() {
        let t = TtTensor::ones(&[2, 2]);
        assert!(matches!(t.element(&IndexTuple(vec![3, 1])), Err(Error::Bounds(_))));
        assert!(matches!(t.element(&IndexTuple(vec![0, 1])), Err(Error::Bounds(_))));
        assert!(matches!(t.element(&IndexTuple(vec![1])), Err(Error::Bounds(_))));
    }

    #[test]
    fn element_matches_chained_slices_on_5x6x7x8() {
        let t = random_tt(&[5, 6, 7, 8], &[2, 3, 4], 11);
        assert_eq!(t.ranks(), vec![1, 2, 3, 4, 1]);
        // (2,3,1,4) in 1-based terms, chained by explicit slice products.
        let idx = [1usize, 2, 0, 3];
        let mut row = vec![1.0];
        for (core, &k) in t.cores().iter().zip(&idx) {
            row = vec_mat(&row, &core.slice(k), core.right());
        }
        let v = t.element(&IndexTuple(vec![2, 3, 1, 4])).unwrap();
        assert!((v - row[0]).abs() < 1e-14);
        let dense = tt_to_dense(&t).unwrap();
        assert!((dense.get(&idx) - v).abs() < 1e-13);
    }

    #[test]
    fn storage_count_of_rank1() {
        for d in [5, 6, 7] {
            assert_eq!(TtTensor::ones(&vec![10; d]).param_count(), 10 * d);
        }
        let t = random_tt(&[5, 6, 7, 8], &[2, 3, 4], 1);
        assert_eq!(t.param_count(), 5 * 2 + 2 * 6 * 3 + 3 * 7 * 4 + 4 * 8);
    }

    #[test]
    fn rank_chaining_is_validated() {
        let a = TtCore::zeros(1, 2, 3);
        let b = TtCore::zeros(2, 2, 1);
        assert!(matches!(TtTensor::from_cores(vec![a, b]), Err(Error::Shape(_))));
        let c = TtCore::zeros(2, 2, 1);
        assert!(TtTensor::from_cores(vec![c]).is_err());
    }
}
