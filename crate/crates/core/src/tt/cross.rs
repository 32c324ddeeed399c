//! Rank-adaptive TT-cross approximation from a black-box element oracle.
//!
//! Alternating half-sweeps build interpolating TT cores from fibers of the
//! target. Each half-sweep enriches every interface with `kick` random
//! indices (doubled, up to 8x, whenever the error fails to halve within two
//! half-sweeps), orthogonalizes the fiber matrix, and picks the next nested pivot
//! set with [`maxvol`](super::maxvol). After each half-sweep the relative RMS
//! error on a fixed held-out sample decides whether to stop.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::maxvol::{interp_matrix, maxvol};
use super::round::truncated_svd;
use super::{TtCore, TtTensor};
use crate::error::{Error, Result};

/// Parallelize oracle batches at least this large.
const PAR_THRESHOLD: usize = 2048;

/// Upper bound on the adaptive enrichment, as a multiple of `kick`.
const MAX_KICK_GROWTH: usize = 8;

#[derive(Clone, Debug)]
pub struct CrossOptions {
    /// Target relative RMS error on the held-out sample.
    pub eps: f64,
    pub max_rank: usize,
    /// Half-sweep budget.
    pub max_sweeps: usize,
    /// Number of held-out indices used by the error estimate.
    pub holdout: usize,
    pub seed: u64,
    /// Random enrichment indices added per interface and half-sweep.
    pub kick: usize,
    /// Optional 1-based starting pivots, e.g. grid points near known modes.
    pub init_pivots: Vec<Vec<usize>>,
    /// Singular values below this fraction of the largest are treated as zero
    /// when sizing a fiber basis.
    pub rank_tol: f64,
}

impl Default for CrossOptions {
    fn default() -> Self {
        Self {
            eps: 1e-2,
            max_rank: 64,
            max_sweeps: 40,
            holdout: 1000,
            seed: 0,
            kick: 1,
            init_pivots: Vec::new(),
            rank_tol: 1e-12,
        }
    }
}

impl CrossOptions {
    pub fn with_eps(eps: f64) -> Self {
        Self { eps, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct CrossReport {
    pub tensor: TtTensor,
    /// Oracle evaluations spent on fibers.
    pub oracle_calls: usize,
    /// Oracle evaluations spent on the held-out error sample.
    pub holdout_calls: usize,
    pub sweeps: usize,
    pub error_estimate: f64,
}

impl CrossReport {
    pub fn total_calls(&self) -> usize {
        self.oracle_calls + self.holdout_calls
    }
}

/// TT-cross with default options and accuracy `eps`. The oracle receives a
/// 1-based multi-index.
pub fn tt_cross<F>(f: F, mode_sizes: &[usize], eps: f64) -> Result<TtTensor>
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    tt_cross_with(f, mode_sizes, &CrossOptions::with_eps(eps)).map(|r| r.tensor)
}

pub fn tt_cross_with<F>(f: F, mode_sizes: &[usize], opts: &CrossOptions) -> Result<CrossReport>
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    if mode_sizes.is_empty() || mode_sizes.contains(&0) {
        return Err(Error::arg(format!("invalid mode sizes {mode_sizes:?}")));
    }
    if !(opts.eps > 0.0) {
        return Err(Error::arg(format!("cross accuracy must be positive, got {}", opts.eps)));
    }
    if opts.max_rank == 0 || opts.max_sweeps == 0 {
        return Err(Error::arg("cross needs max_rank >= 1 and max_sweeps >= 1"));
    }
    for p in &opts.init_pivots {
        if p.len() != mode_sizes.len() || p.iter().zip(mode_sizes).any(|(&k, &n)| k == 0 || k > n) {
            return Err(Error::Bounds(format!("initial pivot {p:?} outside {mode_sizes:?}")));
        }
    }
    Cross::new(&f, mode_sizes, opts).run()
}

struct Cross<'a, F> {
    f: &'a F,
    n: Vec<usize>,
    opts: &'a CrossOptions,
    rng: ChaCha8Rng,
    /// left[k]: pivots over modes 0..k (0-based); left[0] = [[]].
    left: Vec<Vec<Vec<usize>>>,
    /// right[k]: pivots over modes k..d; right[d] = [[]].
    right: Vec<Vec<Vec<usize>>>,
    cores: Vec<TtCore>,
    calls: usize,
    /// Current enrichment per interface; grows while the error stalls.
    kick: usize,
}

impl<'a, F> Cross<'a, F>
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    fn new(f: &'a F, n: &[usize], opts: &'a CrossOptions) -> Self {
        let d = n.len();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let starts: Vec<Vec<usize>> = if opts.init_pivots.is_empty() {
            vec![n.iter().map(|&m| rng.random_range(0..m)).collect()]
        } else {
            opts.init_pivots.iter().map(|p| p.iter().map(|&k| k - 1).collect()).collect()
        };
        let mut right = vec![Vec::new(); d + 1];
        right[d] = vec![Vec::new()];
        for (k, set) in right.iter_mut().enumerate().take(d).skip(1) {
            for s in &starts {
                let suffix = s[k..].to_vec();
                if !set.contains(&suffix) {
                    set.push(suffix);
                }
            }
            set.truncate(opts.max_rank);
        }
        let mut left = vec![Vec::new(); d + 1];
        left[0] = vec![Vec::new()];
        Self { f, n: n.to_vec(), opts, rng, left, right, cores: Vec::new(), calls: 0, kick: opts.kick }
    }

    fn run(mut self) -> Result<CrossReport> {
        let d = self.n.len();
        if d == 1 {
            let n0 = self.n[0];
            let vals = self.eval_block(&[Vec::new()], n0, &[Vec::new()]);
            let tensor = TtTensor::from_cores(vec![TtCore::new(1, n0, 1, vals)?])?;
            return Ok(CrossReport { tensor, oracle_calls: n0, holdout_calls: 0, sweeps: 1, error_estimate: 0.0 });
        }
        let (holdout, holdout_vals) = self.holdout_sample();
        let mut err = f64::INFINITY;
        let mut history = [f64::INFINITY; 2];
        for sweep in 0..self.opts.max_sweeps {
            if sweep % 2 == 0 {
                self.sweep_left_to_right()?;
            } else {
                self.sweep_right_to_left()?;
            }
            let tensor = TtTensor::from_cores(self.cores.clone())?;
            err = relative_rms(&tensor, &holdout, &holdout_vals);
            if err <= self.opts.eps {
                return Ok(CrossReport {
                    tensor,
                    oracle_calls: self.calls,
                    holdout_calls: holdout.len(),
                    sweeps: sweep + 1,
                    error_estimate: err,
                });
            }
            // Same direction two half-sweeps ago must be beaten by 2x.
            if err > 0.5 * history[0] {
                self.kick = (2 * self.kick).min(MAX_KICK_GROWTH * self.opts.kick.max(1));
            }
            history = [history[1], err];
        }
        Err(Error::Convergence { what: "TT-cross".into(), estimate: err })
    }

    fn holdout_sample(&mut self) -> (Vec<Vec<usize>>, Vec<f64>) {
        let idx: Vec<Vec<usize>> = (0..self.opts.holdout)
            .map(|_| self.n.iter().map(|&m| self.rng.random_range(0..m)).collect())
            .collect();
        let f = self.f;
        let eval = |k: &Vec<usize>| {
            let one: Vec<usize> = k.iter().map(|&i| i + 1).collect();
            f(&one)
        };
        let vals = if idx.len() >= PAR_THRESHOLD {
            idx.par_iter().map(eval).collect()
        } else {
            idx.iter().map(eval).collect()
        };
        (idx, vals)
    }

    /// Evaluate f(prefix, i, suffix) for every prefix in `rows`, mode value i
    /// in 0..n, and suffix in `cols`. Output is row-major over
    /// ((prefix, i), suffix).
    fn eval_block(&mut self, rows: &[Vec<usize>], n: usize, cols: &[Vec<usize>]) -> Vec<f64> {
        let ncols = cols.len();
        let total = rows.len() * n * ncols;
        self.calls += total;
        let mut out = vec![0.0; total];
        let f = self.f;
        let fill = |(row, chunk): (usize, &mut [f64])| {
            let (p, i) = (row / n, row % n);
            let mut buf: Vec<usize> = rows[p].iter().map(|&x| x + 1).collect();
            buf.push(i + 1);
            let head = buf.len();
            for (o, s) in chunk.iter_mut().zip(cols) {
                buf.truncate(head);
                buf.extend(s.iter().map(|&x| x + 1));
                *o = f(&buf);
            }
        };
        if total >= PAR_THRESHOLD {
            out.par_chunks_mut(ncols).enumerate().for_each(fill);
        } else {
            out.chunks_mut(ncols).enumerate().for_each(fill);
        }
        out
    }

    fn random_suffix(&mut self, from: usize) -> Vec<usize> {
        self.n[from..].iter().map(|&m| self.rng.random_range(0..m)).collect()
    }

    fn random_prefix(&mut self, to: usize) -> Vec<usize> {
        self.n[..to].iter().map(|&m| self.rng.random_range(0..m)).collect()
    }

    /// Orthonormal basis of the column space of `m` (rows x cols), sized by
    /// the numerical rank and the rank cap, plus maxvol pivots and the
    /// interpolation matrix `U U[piv]^{-1}`.
    fn skeleton(&self, m: DMatrix<f64>) -> (Vec<usize>, DMatrix<f64>) {
        let rows = m.nrows();
        let cap = self.opts.max_rank.min(rows);
        let tol = self.opts.rank_tol;
        let (u, _, _) = truncated_svd(m, |s| {
            let floor = s[0] * tol;
            s.iter().filter(|&&x| x > floor).count().clamp(1, cap)
        });
        let piv = maxvol(&u);
        let w = interp_matrix(&u, &piv).unwrap_or_else(|| {
            // Singular pivot block: fall back to the orthonormal basis itself.
            u.clone()
        });
        (piv, w)
    }

    fn sweep_left_to_right(&mut self) -> Result<()> {
        let d = self.n.len();
        let mut cores = Vec::with_capacity(d);
        for k in 0..d - 1 {
            let n = self.n[k];
            let mut cols = self.right[k + 1].clone();
            for _ in 0..self.kick {
                let extra = self.random_suffix(k + 1);
                if !cols.contains(&extra) {
                    cols.push(extra);
                }
            }
            let rows = self.left[k].clone();
            let vals = self.eval_block(&rows, n, &cols);
            let m = DMatrix::from_row_slice(rows.len() * n, cols.len(), &vals);
            let (piv, w) = self.skeleton(m);
            let r = piv.len();
            self.left[k + 1] = piv
                .iter()
                .map(|&p| {
                    let mut idx = rows[p / n].clone();
                    idx.push(p % n);
                    idx
                })
                .collect();
            cores.push(TtCore::new(rows.len(), n, r, super::round::row_major(&w))?);
        }
        let rows = self.left[d - 1].clone();
        let n = self.n[d - 1];
        let vals = self.eval_block(&rows, n, &[Vec::new()]);
        cores.push(TtCore::new(rows.len(), n, 1, vals)?);
        self.cores = cores;
        Ok(())
    }

    fn sweep_right_to_left(&mut self) -> Result<()> {
        let d = self.n.len();
        let mut cores = vec![TtCore::zeros(1, 1, 1); d];
        for k in (1..d).rev() {
            let n = self.n[k];
            let mut rows = self.left[k].clone();
            for _ in 0..self.kick {
                let extra = self.random_prefix(k);
                if !rows.contains(&extra) {
                    rows.push(extra);
                }
            }
            let cols = self.right[k + 1].clone();
            // Row-major over ((prefix, i), suffix); regroup as prefix x (i, suffix).
            let vals = self.eval_block(&rows, n, &cols);
            let wide = DMatrix::from_row_slice(rows.len(), n * cols.len(), &vals);
            let (piv, w) = self.skeleton(wide.transpose());
            let r = piv.len();
            let nc = cols.len();
            self.right[k] = piv
                .iter()
                .map(|&p| {
                    let mut idx = vec![p / nc];
                    idx.extend_from_slice(&cols[p % nc]);
                    idx
                })
                .collect();
            // Core k is w^T laid out as (r, n, |cols|).
            let wt = w.transpose();
            cores[k] = TtCore::new(r, n, nc, super::round::row_major(&wt))?;
        }
        let cols = self.right[1].clone();
        let n = self.n[0];
        let vals = self.eval_block(&[Vec::new()], n, &cols);
        cores[0] = TtCore::new(1, n, cols.len(), vals)?;
        self.cores = cores;
        Ok(())
    }
}

fn relative_rms(t: &TtTensor, idx: &[Vec<usize>], vals: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (k, &v) in idx.iter().zip(vals) {
        let e = t.eval(k) - v;
        num += e * e;
        den += v * v;
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::super::{tt_to_dense, DenseTensor};
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn separable_target_is_rank_one() {
        let a: Vec<f64> = (0..7).map(|i| 1.0 + i as f64 * 0.3).collect();
        let b: Vec<f64> = (0..5).map(|i| (i as f64).cos() + 2.0).collect();
        let c: Vec<f64> = (0..6).map(|i| 0.5 - i as f64 * 0.1).collect();
        let calls = AtomicUsize::new(0);
        let f = |k: &[usize]| {
            calls.fetch_add(1, Ordering::Relaxed);
            a[k[0] - 1] * b[k[1] - 1] * c[k[2] - 1]
        };
        let rep = tt_cross_with(f, &[7, 5, 6], &CrossOptions::with_eps(1e-10)).unwrap();
        assert_eq!(rep.tensor.interior_ranks(), vec![1, 1]);
        assert_eq!(calls.load(Ordering::Relaxed), rep.total_calls());
        let dense = tt_to_dense(&rep.tensor).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..7 {
            for j in 0..5 {
                for l in 0..6 {
                    let exact = a[i] * b[j] * c[l];
                    worst = worst.max(((dense.get(&[i, j, l]) - exact) / exact).abs());
                }
            }
        }
        assert!(worst <= 1e-10, "{worst}");
    }

    #[test]
    fn low_rank_sum_of_separable_terms() {
        // f = sin(x+y+z) has TT-rank 2.
        let f = |k: &[usize]| ((k[0] + k[1] + k[2] + k[3]) as f64 * 0.37).sin();
        let rep = tt_cross_with(f, &[8, 8, 8, 8], &CrossOptions::with_eps(1e-9)).unwrap();
        assert!(rep.tensor.max_rank() <= 3, "ranks {:?}", rep.tensor.interior_ranks());
        let dense = DenseTensor::from_fn(vec![8; 4], |k| f(&k.iter().map(|i| i + 1).collect::<Vec<_>>())).unwrap();
        let approx = tt_to_dense(&rep.tensor).unwrap();
        let err: f64 = dense.values().iter().zip(approx.values()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        assert!(err / dense.norm() < 1e-8);
        assert!(rep.oracle_calls < 8usize.pow(4));
    }

    #[test]
    fn order_one_evaluates_everything() {
        let rep = tt_cross_with(|k: &[usize]| k[0] as f64, &[5], &CrossOptions::default()).unwrap();
        assert_eq!(rep.tensor.eval(&[3]), 4.0);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        // Random-looking full-rank target with a rank cap of 1.
        let f = |k: &[usize]| (((k[0] * 7919 + k[1] * 104729 + k[2] * 1299709) % 1000) as f64) / 1000.0 - 0.5;
        let opts = CrossOptions { eps: 1e-6, max_rank: 1, max_sweeps: 3, ..CrossOptions::default() };
        match tt_cross_with(f, &[10, 10, 10], &opts) {
            Err(Error::Convergence { estimate, .. }) => assert!(estimate > 1e-6),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let f = |_: &[usize]| 1.0;
        assert!(tt_cross(f, &[3, 0], 1e-2).is_err());
        assert!(tt_cross(f, &[3, 3], 0.0).is_err());
        let opts = CrossOptions { init_pivots: vec![vec![4, 1]], ..CrossOptions::default() };
        assert!(tt_cross_with(f, &[3, 3], &opts).is_err());
    }
}
