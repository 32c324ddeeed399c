use std::io::Write;
use std::sync::Arc;
use web_time::Instant;

use crate::distributions::ReferenceDistribution;
use crate::ergodic::{DenseEngine, ErgodicConfig, ErgodicState};
use crate::error::{Error, Result};
use crate::fourier::{grad_phi_tensor, BasisConfig, CoeffOptions, CoefficientSet};
use crate::stats::median;

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub k: usize,
    /// Timed steps per repetition.
    pub steps: usize,
    pub warmup: usize,
    pub repetitions: usize,
    /// Run the dense loop for `d` up to this value.
    pub dense_max_d: usize,
    pub ergodic: ErgodicConfig,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            k: 5,
            steps: 1000,
            warmup: 50,
            repetitions: 3,
            dense_max_d: 5,
            ergodic: ErgodicConfig { metric_every: 0, ..ErgodicConfig::default() },
        }
    }
}

/// Timings and storage for one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct TimingRow {
    pub d: usize,
    pub k: usize,
    pub precompute_seconds: f64,
    /// Median over repetitions of the mean step time.
    pub step_seconds: f64,
    pub dense_step_seconds: Option<f64>,
    pub w_hat_params: usize,
    pub lambda_params: usize,
    pub grad_phi_params: usize,
    /// Storage of the running average at the end of the run.
    pub w_params: usize,
    pub dense_params: f64,
}

impl TimingRow {
    pub fn write_table<W: Write>(rows: &[TimingRow], mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# d,K,precompute[s],tt_step[s],dense_step[s],w_hat_params,lambda_params,grad_phi_params,w_params,dense_params"
        )?;
        for r in rows {
            let dense = r.dense_step_seconds.map_or("nan".into(), |v| format!("{v:.3e}"));
            writeln!(
                w,
                "{},{},{:.4},{:.3e},{},{},{},{},{},{:.0}",
                r.d,
                r.k,
                r.precompute_seconds,
                r.step_seconds,
                dense,
                r.w_hat_params,
                r.lambda_params,
                r.grad_phi_params,
                r.w_params,
                r.dense_params
            )?;
        }
        Ok(())
    }
}

/// Per-step cost of the TT loop (and the dense loop for small `d`) for each
/// dimension, starting from the domain center. Single-threaded.
pub fn bench_timing(
    d_list: &[usize],
    make_dist: impl Fn(usize) -> Result<ReferenceDistribution>,
    opts: &BenchOptions,
) -> Result<Vec<TimingRow>> {
    if opts.repetitions == 0 || opts.steps == 0 {
        return Err(Error::arg("repetitions and steps must be positive"));
    }
    let mut rows = Vec::with_capacity(d_list.len());
    for &d in d_list {
        if d < 2 {
            return Err(Error::arg("bench dimensions start at 2"));
        }
        let dist = make_dist(d)?;
        let cfg = BasisConfig::new(d, opts.k, 1.0)?;
        let t0 = Instant::now();
        let coeffs = Arc::new(CoefficientSet::compute(&dist, &cfg, &CoeffOptions::default())?);
        let precompute_seconds = t0.elapsed().as_secs_f64();
        let x0 = vec![0.5; d];

        let mut per_rep = Vec::with_capacity(opts.repetitions);
        let mut w_params = 0;
        for rep in 0..opts.repetitions {
            let ecfg = ErgodicConfig { seed: opts.ergodic.seed + rep as u64, ..opts.ergodic.clone() };
            let mut s = ErgodicState::init(ecfg, coeffs.clone(), &x0)?;
            for _ in 0..opts.warmup {
                s.step()?;
            }
            let t = Instant::now();
            for _ in 0..opts.steps {
                s.step()?;
            }
            per_rep.push(t.elapsed().as_secs_f64() / opts.steps as f64);
            w_params = s.w().param_count();
        }

        let dense_step_seconds = if d <= opts.dense_max_d {
            let mut per = Vec::with_capacity(opts.repetitions);
            for rep in 0..opts.repetitions {
                let ecfg = ErgodicConfig { seed: opts.ergodic.seed + rep as u64, ..opts.ergodic.clone() };
                let mut e = DenseEngine::from_coefficients(ecfg, &coeffs, &x0)?;
                for _ in 0..opts.warmup {
                    e.step();
                }
                let t = Instant::now();
                for _ in 0..opts.steps {
                    e.step();
                }
                per.push(t.elapsed().as_secs_f64() / opts.steps as f64);
            }
            Some(median(&per))
        } else {
            None
        };

        rows.push(TimingRow {
            d,
            k: opts.k,
            precompute_seconds,
            step_seconds: median(&per_rep),
            dense_step_seconds,
            w_hat_params: coeffs.w_hat.param_count(),
            lambda_params: coeffs.lambda.param_count(),
            grad_phi_params: grad_phi_tensor(&x0, 0, &cfg)?.param_count(),
            w_params,
            dense_params: (opts.k as f64).powi(d as i32),
        });
    }
    Ok(rows)
}
