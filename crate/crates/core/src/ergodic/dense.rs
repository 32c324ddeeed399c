//! Brute-force ergodic control over all `K^d` coefficients, the reference
//! the TT engine is checked against.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{random_direction, ErgodicConfig};
use crate::error::{Error, Result};
use crate::fourier::{basis_grad_into, basis_into, BasisConfig, CoefficientSet};
use crate::tt::{tt_to_dense, DENSE_LIMIT};

pub struct DenseEngine {
    cfg: ErgodicConfig,
    basis: BasisConfig,
    lambda: Vec<f64>,
    w_hat: Vec<f64>,
    w: Vec<f64>,
    t: f64,
    steps: usize,
    x: Vec<f64>,
    u: Vec<f64>,
    rng: ChaCha8Rng,
    // Scratch buffers.
    phi: Vec<f64>,
    grad: Vec<f64>,
}

impl DenseEngine {
    /// Densify a coefficient set. Same command sequence as the TT engine when
    /// no truncation occurs there.
    pub fn from_coefficients(cfg: ErgodicConfig, coeffs: &CoefficientSet, x0: &[f64]) -> Result<Self> {
        let lambda = tt_to_dense(&coeffs.lambda)?.into_values();
        let w_hat = tt_to_dense(&coeffs.w_hat)?.into_values();
        Self::from_values(cfg, coeffs.config, lambda, w_hat, x0)
    }

    /// Row-major `K^d` arrays of weights and target coefficients.
    pub fn from_values(
        cfg: ErgodicConfig,
        basis: BasisConfig,
        lambda: Vec<f64>,
        w_hat: Vec<f64>,
        x0: &[f64],
    ) -> Result<Self> {
        cfg.validate()?;
        let size = basis
            .k
            .checked_pow(basis.d as u32)
            .filter(|&s| s <= DENSE_LIMIT)
            .ok_or(Error::Size(usize::MAX))?;
        if lambda.len() != size || w_hat.len() != size {
            return Err(Error::shape(format!("dense coefficients need {size} values")));
        }
        if !basis.contains(x0) {
            return Err(Error::Domain(format!("{x0:?} outside the domain")));
        }
        let mut s = Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            basis,
            lambda,
            w_hat,
            w: vec![0.0; size],
            t: 0.0,
            steps: 0,
            x: x0.to_vec(),
            u: vec![0.0; basis.d],
            phi: vec![0.0; size],
            grad: vec![0.0; size],
        };
        let b = s.compute_b();
        s.u = s.command(&b);
        Ok(s)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    /// Outer product of per-dimension vectors into `out`, last index fastest.
    fn outer(vs: &[Vec<f64>], out: &mut [f64]) {
        out[0] = 1.0;
        let mut len = 1;
        for v in vs {
            let k = v.len();
            for p in (0..len).rev() {
                let base = out[p];
                for (j, &vj) in v.iter().enumerate() {
                    out[p * k + j] = base * vj;
                }
            }
            len *= k;
        }
    }

    fn basis_vectors(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let (k, l) = (self.basis.k, self.basis.l);
        let mut phi = vec![vec![0.0; k]; self.basis.d];
        let mut dphi = vec![vec![0.0; k]; self.basis.d];
        for i in 0..self.basis.d {
            basis_into(self.x[i], l, &mut phi[i]);
            basis_grad_into(self.x[i], l, &mut dphi[i]);
        }
        (phi, dphi)
    }

    pub fn compute_b(&mut self) -> Vec<f64> {
        let (phi, dphi) = self.basis_vectors();
        let mut b = vec![0.0; self.basis.d];
        for i in 0..self.basis.d {
            let mut vs = phi.clone();
            vs[i] = dphi[i].clone();
            Self::outer(&vs, &mut self.grad);
            b[i] = (0..self.w.len())
                .map(|k| self.lambda[k] * (self.w[k] - self.w_hat[k]) * self.grad[k])
                .sum();
        }
        b
    }

    pub fn ergodic_metric(&self) -> f64 {
        (0..self.w.len()).map(|k| self.lambda[k] * (self.w[k] - self.w_hat[k]).powi(2)).sum()
    }

    fn command(&mut self, b: &[f64]) -> Vec<f64> {
        let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nb > self.cfg.b_epsilon {
            b.iter().map(|v| -self.cfg.u_max * v / nb).collect()
        } else {
            random_direction(&mut self.rng, b.len()).into_iter().map(|v| self.cfg.u_max * v).collect()
        }
    }

    /// Same update order and metric schedule as the TT engine: move,
    /// average, steer. Returns `b` and the metric when it is due.
    pub fn step(&mut self) -> (Vec<f64>, Option<f64>) {
        let dt = self.cfg.dt;
        for (x, u) in self.x.iter_mut().zip(&self.u) {
            *x = (*x + u * dt).clamp(0.0, self.basis.l);
        }
        let (phi, _) = self.basis_vectors();
        Self::outer(&phi, &mut self.phi);
        if self.t == 0.0 {
            self.w.copy_from_slice(&self.phi);
        } else {
            let total = self.t + dt;
            let (a, c) = (self.t / total, dt / total);
            for (w, p) in self.w.iter_mut().zip(&self.phi) {
                *w = a * *w + c * p;
            }
        }
        self.t += dt;
        self.steps += 1;
        let b = self.compute_b();
        self.u = self.command(&b);
        let every = self.cfg.metric_every;
        let xi = (every > 0 && self.steps.is_multiple_of(every)).then(|| self.ergodic_metric());
        (b, xi)
    }
}
