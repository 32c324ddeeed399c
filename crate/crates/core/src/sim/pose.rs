//! 6D pose exploration: position plus orientation in the tangent space of an
//! anchor quaternion, mapped affinely into the ergodic domain.

use std::sync::Arc;
use web_time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distributions::{DomainMap, Gmm};
use crate::ergodic::{ErgodicConfig, ErgodicState};
use crate::error::{Error, Result};
use crate::fourier::CoefficientSet;
use crate::manifold::{pose_decode, pose_encode, qexp, qmean, Pose, UnitQuaternion};

/// Steps per window when measuring the sustained step rate.
pub const RATE_WINDOW: usize = 1000;

/// Reference density for pose exploration, living in `[0, L]^6`.
#[derive(Clone, Debug)]
pub struct PoseModel {
    pub anchor: UnitQuaternion,
    pub map: DomainMap,
    pub gmm: Gmm,
}

impl PoseModel {
    /// `task` is a GMM over `[p, Log_anchor(q)]`. The domain box covers every
    /// component out to `n_sigma` marginal standard deviations.
    pub fn from_task_gmm(task: &Gmm, anchor: UnitQuaternion, n_sigma: f64, l: f64) -> Result<Self> {
        check_dim(task.dim())?;
        let mut lo = vec![f64::INFINITY; 6];
        let mut hi = vec![f64::NEG_INFINITY; 6];
        for c in 0..task.n_components() {
            let cov = task.covariance(c);
            for i in 0..6 {
                let s = n_sigma * cov[i * 6 + i].sqrt();
                lo[i] = lo[i].min(task.means()[c][i] - s);
                hi[i] = hi[i].max(task.means()[c][i] + s);
            }
        }
        let map = DomainMap::new(lo, hi, l)?;
        let gmm = map.forward_gmm(task)?;
        Ok(Self { anchor, map, gmm })
    }

    /// From demonstrations: the anchor is their Riemannian mean, the box is
    /// their bounding box padded by `margin`, and the density is an
    /// equal-weight mixture of `m` isotropic components of variance `var`
    /// (in domain units) on farthest-point-selected demonstrations.
    pub fn from_poses(poses: &[Pose], m: usize, var: f64, margin: f64, l: f64) -> Result<Self> {
        if poses.is_empty() || m == 0 {
            return Err(Error::arg("pose model needs at least one pose and one component"));
        }
        let qs: Vec<UnitQuaternion> = poses.iter().map(|p| p.q).collect();
        let anchor = qmean(&qs, 1e-12, 200)?.mean;
        let task: Vec<Vec<f64>> = poses.iter().map(|p| pose_encode(&p.p, &p.q, &anchor).to_vec()).collect();
        let map = DomainMap::fit(&task, margin, l)?;
        let pts: Vec<Vec<f64>> = task.iter().map(|y| map.forward(y)).collect();
        let means = farthest_points(&pts, m.min(pts.len()));
        let n = means.len();
        let gmm = Gmm::isotropic(vec![1.0 / n as f64; n], means, var)?;
        Ok(Self { anchor, map, gmm })
    }

    /// Domain coordinates of a pose.
    pub fn encode(&self, pose: &Pose) -> Vec<f64> {
        self.map.forward(&pose_encode(&pose.p, &pose.q, &self.anchor))
    }

    pub fn decode(&self, x: &[f64]) -> Result<Pose> {
        let (p, q) = pose_decode(&self.map.inverse(x), &self.anchor)?;
        Ok(Pose { p, q })
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d != 6 {
        return Err(Error::shape(format!("pose densities are 6D, got {d}")));
    }
    Ok(())
}

/// Greedy max-min selection starting from the first point.
fn farthest_points(pts: &[Vec<f64>], m: usize) -> Vec<Vec<f64>> {
    let d2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    let mut chosen = vec![pts[0].clone()];
    let mut near: Vec<f64> = pts.iter().map(|p| d2(p, &pts[0])).collect();
    while chosen.len() < m {
        let (i, _) = near.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let c = pts[i].clone();
        for (n, p) in near.iter_mut().zip(pts) {
            *n = n.min(d2(p, &c));
        }
        chosen.push(c);
    }
    chosen
}

/// Seeded task-space pose mixture: positions within a 0.2 m cube, orientations
/// within 0.3 rad of a random anchor, full covariances.
pub fn synthetic_pose_gmm(m: usize, seed: u64) -> Result<(Gmm, UnitQuaternion)> {
    if m == 0 {
        return Err(Error::arg("need at least one component"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let anchor = qexp(&a);
    let mut means = Vec::with_capacity(m);
    let mut covs = Vec::with_capacity(m);
    for _ in 0..m {
        let mut mu: Vec<f64> = (0..3).map(|_| rng.random_range(0.4..0.6)).collect();
        mu.extend((0..3).map(|_| rng.random_range(-0.3..0.3)));
        means.push(mu);
        // S (I + c B B^T) S with per-block scales of 3 cm and 0.08 rad and
        // mild correlation.
        let scale = [0.03, 0.03, 0.03, 0.08, 0.08, 0.08];
        let b: Vec<f64> = (0..36).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut cov = vec![0.0; 36];
        for i in 0..6 {
            for j in 0..6 {
                let bb: f64 = (0..6).map(|k| b[i * 6 + k] * b[j * 6 + k]).sum();
                let id = if i == j { 1.0 } else { 0.0 };
                cov[i * 6 + j] = scale[i] * scale[j] * (id + 0.05 * bb);
            }
        }
        covs.push(cov);
    }
    Ok((Gmm::new(vec![1.0 / m as f64; m], means, covs)?, anchor))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseSample {
    pub t: f64,
    pub pose: Pose,
}

#[derive(Clone, Debug)]
pub struct PoseRun {
    /// Every `keep_every`-th decoded pose.
    pub samples: Vec<PoseSample>,
    pub steps: usize,
    /// Largest `| |q| - 1 |` over every step.
    pub max_norm_error: f64,
    /// Steps per second over the whole run, decode included.
    pub mean_rate: f64,
    /// Slowest rate over consecutive windows of [`RATE_WINDOW`] steps.
    pub min_window_rate: f64,
}

/// Run the engine for `steps` steps from the task-space pose `start` and decode
/// the state into a pose after every step.
pub fn explore_poses(
    model: &PoseModel,
    coeffs: Arc<CoefficientSet>,
    cfg: ErgodicConfig,
    start: &Pose,
    steps: usize,
    keep_every: usize,
) -> Result<PoseRun> {
    check_dim(coeffs.config.d)?;
    let l = coeffs.config.l;
    let x0: Vec<f64> = model.encode(start).into_iter().map(|v| v.clamp(0.0, l)).collect();
    let mut s = ErgodicState::init(cfg, coeffs, &x0)?;
    let keep = keep_every.max(1);
    let mut samples = Vec::with_capacity(steps / keep + 1);
    let mut max_err: f64 = 0.0;
    let mut min_rate = f64::INFINITY;
    let t_all = Instant::now();
    let mut t_win = Instant::now();
    for i in 1..=steps {
        s.step()?;
        let pose = model.decode(s.x())?;
        max_err = max_err.max((pose.q.norm() - 1.0).abs());
        if i % keep == 0 {
            samples.push(PoseSample { t: s.t(), pose });
        }
        if i % RATE_WINDOW == 0 {
            min_rate = min_rate.min(RATE_WINDOW as f64 / t_win.elapsed().as_secs_f64());
            t_win = Instant::now();
        }
    }
    let mean_rate = steps as f64 / t_all.elapsed().as_secs_f64();
    if !min_rate.is_finite() {
        min_rate = mean_rate;
    }
    Ok(PoseRun { samples, steps, max_norm_error: max_err, mean_rate, min_window_rate: min_rate })
}
