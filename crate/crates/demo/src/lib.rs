//! Browser bindings: a 2D explorer over a user-placed Gaussian mixture and a
//! storage table comparing TT and dense coefficient tensors.

use std::sync::Arc;

use ergodic_tt::distributions::{Gmm, ReferenceDistribution};
use ergodic_tt::ergodic::{ErgodicConfig, ErgodicState};
use ergodic_tt::fourier::{BasisConfig, CoeffOptions, CoefficientSet};
use wasm_bindgen::prelude::*;

/// Point-mass explorer on the unit square.
#[wasm_bindgen]
pub struct Explorer {
    state: ErgodicState,
    dist: ReferenceDistribution,
}

#[wasm_bindgen]
impl Explorer {
    /// `means` holds `x0 y0 x1 y1 ...`; every component gets variance `var`
    /// and equal weight.
    #[wasm_bindgen(constructor)]
    pub fn new(means: &[f64], var: f64, k: usize, seed: u64) -> Result<Explorer, JsError> {
        Self::build(means, var, k, seed).map_err(|e| JsError::new(&e))
    }

    /// Advance `steps` steps of 0.01 s; returns the visited points as `x y` pairs.
    pub fn advance(&mut self, steps: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * steps);
        for _ in 0..steps {
            if self.state.step().is_err() {
                break;
            }
            out.extend_from_slice(self.state.x());
        }
        out
    }

    pub fn time(&self) -> f64 {
        self.state.t()
    }

    /// Ergodic metric of the trajectory so far.
    pub fn metric(&self) -> f64 {
        self.state.ergodic_metric()
    }

    /// Target density on a `bins x bins` grid, row-major with `y` rows, scaled
    /// to a maximum of 1.
    pub fn density(&self, bins: usize) -> Vec<f64> {
        let h = 1.0 / bins.max(1) as f64;
        let mut v: Vec<f64> = (0..bins * bins)
            .map(|c| self.dist.pdf(&[((c % bins) as f64 + 0.5) * h, ((c / bins) as f64 + 0.5) * h]))
            .collect();
        let top = v.iter().cloned().fold(0.0, f64::max);
        if top > 0.0 {
            v.iter_mut().for_each(|x| *x /= top);
        }
        v
    }

    pub fn w_hat_ranks(&self) -> Vec<usize> {
        self.state.coeffs().w_hat.ranks()
    }
}

impl Explorer {
    /// Fallible constructor usable off the browser.
    pub fn build(means: &[f64], var: f64, k: usize, seed: u64) -> Result<Explorer, String> {
        if means.is_empty() || !means.len().is_multiple_of(2) {
            return Err("means must hold at least one x y pair".into());
        }
        let pts: Vec<Vec<f64>> = means.chunks(2).map(<[f64]>::to_vec).collect();
        let n = pts.len();
        let gmm = Gmm::isotropic(vec![1.0 / n as f64; n], pts, var).map_err(|e| e.to_string())?;
        let dist = ReferenceDistribution::Gmm(gmm);
        let basis = BasisConfig::new(2, k, 1.0).map_err(|e| e.to_string())?;
        let opts = CoeffOptions { seed, ..CoeffOptions::default() };
        let coeffs = CoefficientSet::compute(&dist, &basis, &opts).map_err(|e| e.to_string())?;
        let cfg = ErgodicConfig { seed, ..ErgodicConfig::default() };
        let state = ErgodicState::init(cfg, Arc::new(coeffs), &[0.5, 0.5]).map_err(|e| e.to_string())?;
        Ok(Explorer { state, dist })
    }
}

/// Tab-separated rows `d, TT parameters of Ŵ, dense entries K^d` for an
/// isotropic Gaussian at the domain center.
#[wasm_bindgen]
pub fn storage_table(max_d: usize, k: usize, var: f64) -> String {
    let mut out = String::from("d\ttt_params\tdense_entries\n");
    for d in 1..=max_d {
        let row = ReferenceDistribution::iso_gaussian(vec![0.5; d], var)
            .and_then(|dist| CoefficientSet::compute(&dist, &BasisConfig::new(d, k, 1.0)?, &CoeffOptions::default()));
        match row {
            Ok(c) => out += &format!("{d}\t{}\t{:e}\n", c.w_hat.param_count(), (k as f64).powi(d as i32)),
            Err(e) => out += &format!("{d}\terror: {e}\t\n"),
        }
    }
    out
}
