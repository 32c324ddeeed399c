//! Online ergodic control with the trajectory statistics held in TT form.
//!
//! Each step moves a first-order point mass at constant speed along the
//! steering vector `b_i = sum_k Λ_k (W_k - Ŵ_k) dPhi_k/dx_i`, then folds the new
//! position into the running average `W` of the basis tensor `Phi(x)`.

mod dense;

pub use dense::DenseEngine;

use std::io::Write;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fourier::{basis_grad_into, basis_into, grad_phi_tensor, BasisConfig, CoefficientSet};
use crate::tt::{
    tt_add, tt_dot3, tt_hadamard, tt_inner, tt_rank1, tt_round, tt_scale, tt_sub, ToleranceSpec, TtCore, TtTensor,
};

#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicConfig {
    pub u_max: f64,
    pub dt: f64,
    /// Interior rank cap of `W`; `None` means `d * max_rank(Ŵ)`.
    pub w_rank_cap: Option<usize>,
    /// Below this `|b|` the command is a random unit direction.
    pub b_epsilon: f64,
    pub seed: u64,
    /// Evaluate the ergodic metric every this many steps; 0 never.
    pub metric_every: usize,
}

impl Default for ErgodicConfig {
    fn default() -> Self {
        Self { u_max: 0.1, dt: 0.01, w_rank_cap: None, b_epsilon: 1e-12, seed: 0, metric_every: 1 }
    }
}

impl ErgodicConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.u_max > 0.0) || !(self.dt > 0.0) {
            return Err(Error::arg(format!("u_max and dt must be positive (u_max={}, dt={})", self.u_max, self.dt)));
        }
        if self.w_rank_cap == Some(0) {
            return Err(Error::arg("w_rank_cap must be at least 1"));
        }
        if !(self.b_epsilon >= 0.0) {
            return Err(Error::arg("b_epsilon must be nonnegative"));
        }
        Ok(())
    }

    /// The rank cap applied for a given coefficient set.
    pub fn resolved_cap(&self, coeffs: &CoefficientSet) -> usize {
        self.w_rank_cap.unwrap_or(coeffs.config.d * coeffs.w_hat.max_rank())
    }
}

/// One control update.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlOutput {
    pub u: Vec<f64>,
    pub b: Vec<f64>,
    /// `None` on steps where the metric is skipped.
    pub xi: Option<f64>,
}

pub struct ErgodicState {
    cfg: ErgodicConfig,
    coeffs: Arc<CoefficientSet>,
    cap: usize,
    t: f64,
    x: Vec<f64>,
    u: Vec<f64>,
    w: TtTensor,
    steps: usize,
    rng: ChaCha8Rng,
    metric_history: Vec<(f64, f64)>,
    phi: Vec<Vec<f64>>,
    dphi: Vec<Vec<f64>>,
}

impl ErgodicState {
    /// Start at `x0` with `W = 0`. The first command comes from `b` at `x0`.
    pub fn init(cfg: ErgodicConfig, coeffs: Arc<CoefficientSet>, x0: &[f64]) -> Result<Self> {
        cfg.validate()?;
        let basis = coeffs.config;
        check_inside(x0, &basis)?;
        let cap = cfg.resolved_cap(&coeffs);
        let (d, k) = (basis.d, basis.k);
        let mut s = Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            cap,
            t: 0.0,
            x: x0.to_vec(),
            u: vec![0.0; d],
            w: TtTensor::zeros(&basis.mode_sizes()),
            steps: 0,
            metric_history: Vec::new(),
            phi: vec![vec![0.0; k]; d],
            dphi: vec![vec![0.0; k]; d],
            coeffs,
        };
        s.refresh_basis();
        let b = s.compute_b();
        s.u = s.command(&b);
        let xi0 = s.ergodic_metric();
        s.metric_history.push((0.0, xi0));
        Ok(s)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Command that the next step will apply.
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn w(&self) -> &TtTensor {
        &self.w
    }

    pub fn coeffs(&self) -> &CoefficientSet {
        &self.coeffs
    }

    pub fn config(&self) -> &ErgodicConfig {
        &self.cfg
    }

    pub fn rank_cap(&self) -> usize {
        self.cap
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn metric_history(&self) -> &[(f64, f64)] {
        &self.metric_history
    }

    fn refresh_basis(&mut self) {
        let l = self.coeffs.config.l;
        for ((p, g), &xi) in self.phi.iter_mut().zip(self.dphi.iter_mut()).zip(&self.x) {
            basis_into(xi, l, p);
            basis_grad_into(xi, l, g);
        }
    }

    /// `W <- round((t W + dt Phi(x)) / (t + dt))` at the current position.
    /// The clock is not advanced.
    pub fn update_w(&mut self, dt: f64) -> Result<()> {
        let total = self.t + dt;
        if !(total > 0.0) {
            return Err(Error::arg("t + dt must be positive"));
        }
        let phi = tt_rank1(&self.phi)?;
        if self.t == 0.0 {
            self.w = phi;
            return Ok(());
        }
        let blended = tt_add(&tt_scale(self.t / total, &self.w), &tt_scale(dt / total, &phi))?;
        self.w = tt_round(&blended, ToleranceSpec::MaxRank(self.cap))?;
        Ok(())
    }

    /// Steering vector at the current state.
    pub fn compute_b(&self) -> Vec<f64> {
        let lam = &self.coeffs.lambda;
        let from_w = weighted_gradients(lam, &self.w, &self.phi, &self.dphi);
        let from_target = weighted_gradients(lam, &self.coeffs.w_hat, &self.phi, &self.dphi);
        from_w.iter().zip(&from_target).map(|(a, b)| a - b).collect()
    }

    /// Steering vector by explicit TT operations: `E = Λ ⊙ (W - Ŵ)` and
    /// `b_i = <E, dPhi/dx_i>`. Slower than [`compute_b`](Self::compute_b).
    pub fn compute_b_reference(&self) -> Result<Vec<f64>> {
        let e = tt_hadamard(&self.coeffs.lambda, &tt_sub(&self.w, &self.coeffs.w_hat)?)?;
        (0..self.x.len())
            .map(|i| tt_inner(&e, &grad_phi_tensor(&self.x, i, &self.coeffs.config)?))
            .collect()
    }

    /// `xi = sum_k Λ_k (W_k - Ŵ_k)^2`.
    pub fn ergodic_metric(&self) -> f64 {
        let e = tt_sub(&self.w, &self.coeffs.w_hat).expect("shapes fixed at init");
        tt_dot3(&self.coeffs.lambda, &e, &e).expect("shapes fixed at init").max(0.0)
    }

    fn command(&mut self, b: &[f64]) -> Vec<f64> {
        let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nb > self.cfg.b_epsilon {
            b.iter().map(|v| -self.cfg.u_max * v / nb).collect()
        } else {
            random_direction(&mut self.rng, b.len()).into_iter().map(|v| self.cfg.u_max * v).collect()
        }
    }

    /// Advance one time step.
    pub fn step(&mut self) -> Result<ControlOutput> {
        let dt = self.cfg.dt;
        let l = self.coeffs.config.l;
        for (x, u) in self.x.iter_mut().zip(&self.u) {
            *x = (*x + u * dt).clamp(0.0, l);
        }
        self.refresh_basis();
        self.update_w(dt)?;
        self.t += dt;
        self.steps += 1;
        let b = self.compute_b();
        self.u = self.command(&b);
        let xi = if self.cfg.metric_every > 0 && self.steps.is_multiple_of(self.cfg.metric_every) {
            let v = self.ergodic_metric();
            self.metric_history.push((self.t, v));
            Some(v)
        } else {
            None
        };
        Ok(ControlOutput { u: self.u.clone(), b, xi })
    }

    /// Move to `x0` while keeping `W` and the clock, then recompute the
    /// command for the new position.
    pub fn relocate(&mut self, x0: &[f64]) -> Result<()> {
        check_inside(x0, &self.coeffs.config)?;
        self.x.copy_from_slice(x0);
        self.refresh_basis();
        let b = self.compute_b();
        self.u = self.command(&b);
        Ok(())
    }
}

pub fn init(cfg: ErgodicConfig, coeffs: Arc<CoefficientSet>, x0: &[f64]) -> Result<ErgodicState> {
    ErgodicState::init(cfg, coeffs, x0)
}

fn check_inside(x: &[f64], basis: &BasisConfig) -> Result<()> {
    if !basis.contains(x) {
        return Err(Error::Domain(format!("{x:?} is not in [0, {}]^{}", basis.l, basis.d)));
    }
    Ok(())
}

/// Uniform direction on the unit sphere.
pub(crate) fn random_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| Distribution::<f64>::sample(&StandardNormal, rng)).collect();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|a| a / n).collect();
        }
    }
}

/// For every dimension `i`, `sum_k L_k X_k dPhi_k/dx_i` where `Phi` is the
/// rank-1 tensor of `phi`, with `dphi[i]` substituted in slot `i`. Computed
/// from left and right partial contractions without forming `L ⊙ X`.
fn weighted_gradients(lam: &TtTensor, x: &TtTensor, phi: &[Vec<f64>], dphi: &[Vec<f64>]) -> Vec<f64> {
    let d = phi.len();
    // right[j] has shape r_lam(j) x r_x(j) over modes j..d.
    let mut right: Vec<Vec<f64>> = vec![Vec::new(); d + 1];
    right[d] = vec![1.0];
    for j in (1..d).rev() {
        right[j] = transfer_right(lam.core(j), x.core(j), &right[j + 1], &phi[j]);
    }
    let mut out = Vec::with_capacity(d);
    let mut left = vec![1.0];
    for i in 0..d {
        let g = transfer_left(lam.core(i), x.core(i), &left, &dphi[i]);
        out.push(g.iter().zip(&right[i + 1]).map(|(a, b)| a * b).sum());
        if i + 1 < d {
            left = transfer_left(lam.core(i), x.core(i), &left, &phi[i]);
        }
    }
    out
}


/// `sum_k w_k L_k^T m X_k` with `m` of shape `lam.left x x.left`.
fn transfer_left(lc: &TtCore, xc: &TtCore, m: &[f64], w: &[f64]) -> Vec<f64> {
    let (la, ra, lx, rx, n) = (lc.left(), lc.right(), xc.left(), xc.right(), lc.size());
    let mut out = vec![0.0; ra * rx];
    let mut tmp = vec![0.0; la * rx];
    for (k, &wk) in w.iter().enumerate().take(n) {
        if wk == 0.0 {
            continue;
        }
        // tmp = m X_k
        tmp.iter_mut().for_each(|v| *v = 0.0);
        for a in 0..la {
            let row = &mut tmp[a * rx..(a + 1) * rx];
            for al in 0..lx {
                let mv = m[a * lx + al];
                if mv == 0.0 {
                    continue;
                }
                let xrow = &xc.data()[(al * n + k) * rx..][..rx];
                for (o, &xv) in row.iter_mut().zip(xrow) {
                    *o += mv * xv;
                }
            }
        }
        // out += w_k L_k^T tmp
        for a in 0..la {
            let lrow = &lc.data()[(a * n + k) * ra..][..ra];
            let trow = &tmp[a * rx..(a + 1) * rx];
            for (b, &lv) in lrow.iter().enumerate() {
                let s = wk * lv;
                if s == 0.0 {
                    continue;
                }
                for (o, &tv) in out[b * rx..(b + 1) * rx].iter_mut().zip(trow) {
                    *o += s * tv;
                }
            }
        }
    }
    out
}

/// `sum_k w_k L_k m X_k^T` with `m` of shape `lam.right x x.right`.
fn transfer_right(lc: &TtCore, xc: &TtCore, m: &[f64], w: &[f64]) -> Vec<f64> {
    let (la, ra, lx, rx, n) = (lc.left(), lc.right(), xc.left(), xc.right(), lc.size());
    let mut out = vec![0.0; la * lx];
    let mut tmp = vec![0.0; ra * lx];
    for (k, &wk) in w.iter().enumerate().take(n) {
        if wk == 0.0 {
            continue;
        }
        // tmp[b][al] = sum_be m[b][be] X[al, k, be]
        for b in 0..ra {
            let mrow = &m[b * rx..(b + 1) * rx];
            for al in 0..lx {
                let xrow = &xc.data()[(al * n + k) * rx..][..rx];
                tmp[b * lx + al] = mrow.iter().zip(xrow).map(|(p, q)| p * q).sum();
            }
        }
        for a in 0..la {
            let lrow = &lc.data()[(a * n + k) * ra..][..ra];
            let orow = &mut out[a * lx..(a + 1) * lx];
            for (b, &lv) in lrow.iter().enumerate() {
                let s = wk * lv;
                if s == 0.0 {
                    continue;
                }
                for (o, &tv) in orow.iter_mut().zip(&tmp[b * lx..(b + 1) * lx]) {
                    *o += s * tv;
                }
            }
        }
    }
    out
}

/// One recorded step.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub xi: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Rows `t, x_1..x_d, u_1..u_d, xi` after a `#` header naming the columns.
    pub fn write_delimited<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let d = self.samples.first().map_or(0, |s| s.x.len());
        let mut head = vec!["t[s]".to_string()];
        head.extend((1..=d).map(|i| format!("x{i}")));
        head.extend((1..=d).map(|i| format!("u{i}")));
        head.push("xi".into());
        writeln!(w, "# {}", head.join(","))?;
        for s in &self.samples {
            let mut row = vec![format!("{}", s.t)];
            row.extend(s.x.iter().map(|v| format!("{v}")));
            row.extend(s.u.iter().map(|v| format!("{v}")));
            row.push(s.xi.map_or("nan".into(), |v| format!("{v}")));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Metric history as `t=<time> xi=<value>` lines.
pub fn write_metric_history<W: Write>(history: &[(f64, f64)], mut w: W) -> std::io::Result<()> {
    writeln!(w, "# ergodic metric history: t in seconds, xi dimensionless")?;
    for (t, xi) in history {
        writeln!(w, "t={t} xi={xi}")?;
    }
    Ok(())
}

/// Run until `t >= t_final`, recording every step.
pub fn run(cfg: ErgodicConfig, coeffs: Arc<CoefficientSet>, x0: &[f64], t_final: f64) -> Result<(Trajectory, ErgodicState)> {
    if !(t_final > 0.0) {
        return Err(Error::arg("run time must be positive"));
    }
    let mut state = ErgodicState::init(cfg, coeffs, x0)?;
    let steps = steps_for(t_final, state.cfg.dt);
    let mut traj = Trajectory { samples: Vec::with_capacity(steps) };
    for _ in 0..steps {
        let out = state.step()?;
        traj.samples.push(TrajectorySample { t: state.t, x: state.x.clone(), u: out.u, xi: out.xi });
    }
    Ok((traj, state))
}

/// Number of steps of size `dt` needed to reach `t_final`.
pub fn steps_for(t_final: f64, dt: f64) -> usize {
    ((t_final / dt) - 1e-9).ceil().max(1.0) as usize
}
