//! Target-reach trials, the re-initialization experiment and loop timing.

mod bench;
pub mod paths;
pub mod pose;

pub use bench::{bench_timing, BenchOptions, TimingRow};

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distributions::{Gmm, ReferenceDistribution};
use crate::ergodic::{ErgodicConfig, ErgodicState};
use crate::error::{Error, Result};
use crate::fourier::{BasisConfig, CoeffOptions, CoefficientSet};
use crate::stats;
use paths::{dist, Polyline};

/// Ball of radius `r` with volume `frac · L^d`.
pub fn radius_for_fraction(d: usize, l: f64, frac: f64) -> f64 {
    let unit_ball = std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_half_plus_one(d);
    (frac * l.powi(d as i32) / unit_ball).powf(1.0 / d as f64)
}

/// `Γ(d/2 + 1)` by the recurrence down to `Γ(1)` or `Γ(1/2)`.
fn gamma_half_plus_one(d: usize) -> f64 {
    let mut g = 1.0;
    let mut z = d as f64 / 2.0;
    while z > 0.25 {
        g *= z;
        z -= 1.0;
    }
    if d % 2 == 1 {
        g *= std::f64::consts::PI.sqrt();
    }
    g
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetRegion {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl TargetRegion {
    /// Center clamped into `[r, L - r]` so the ball lies inside the domain.
    pub fn new(center: Vec<f64>, radius: f64, l: f64) -> Result<Self> {
        if !(radius > 0.0) || 2.0 * radius > l {
            return Err(Error::arg(format!("target radius {radius} does not fit in [0, {l}]")));
        }
        let center = center.into_iter().map(|c| c.clamp(radius, l - radius)).collect();
        Ok(Self { center, radius })
    }

    /// Ball occupying `frac` of the domain volume.
    pub fn with_fraction(center: Vec<f64>, l: f64, frac: f64) -> Result<Self> {
        let r = radius_for_fraction(center.len(), l, frac);
        Self::new(center, r, l)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        dist(x, &self.center) <= self.radius
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    Ergodic,
    Sampling,
    Spiral,
    GmmSpiral,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Ergodic, Strategy::Sampling, Strategy::Spiral, Strategy::GmmSpiral];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Ergodic => "ergodic",
            Strategy::Sampling => "sampling",
            Strategy::Spiral => "spiral",
            Strategy::GmmSpiral => "gmm_spiral",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::arg(format!("unknown strategy {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct TrialSpec {
    pub strategy: Strategy,
    pub distribution: ReferenceDistribution,
    pub target: TargetRegion,
    pub x0: Vec<f64>,
    pub time_limit: f64,
    pub u_max: f64,
    pub dt: f64,
    pub l: f64,
    pub seed: u64,
    /// Basis size per dimension for the ergodic strategy.
    pub k: usize,
    /// Precomputed coefficients; computed from `distribution` when absent.
    pub coeffs: Option<Arc<CoefficientSet>>,
    pub coeff_opts: CoeffOptions,
    /// Rank cap of the ergodic running average; `None` for the default.
    pub w_rank_cap: Option<usize>,
    /// Keep at most this many trajectory points.
    pub record: usize,
}

impl TrialSpec {
    pub fn new(strategy: Strategy, distribution: ReferenceDistribution, target: TargetRegion, x0: Vec<f64>) -> Self {
        Self {
            strategy,
            distribution,
            target,
            x0,
            time_limit: 1000.0,
            u_max: 0.1,
            dt: 0.01,
            l: 1.0,
            seed: 0,
            k: 10,
            coeffs: None,
            coeff_opts: CoeffOptions::default(),
            w_rank_cap: None,
            record: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        let d = self.distribution.dim();
        if self.x0.len() != d || self.target.center.len() != d {
            return Err(Error::shape("x0, target and distribution dimensions differ"));
        }
        if !(self.time_limit > 0.0) || !(self.u_max > 0.0) || !(self.dt > 0.0) || !(self.l > 0.0) {
            return Err(Error::arg("time_limit, u_max, dt and L must be positive"));
        }
        if self.x0.iter().any(|&v| !(0.0..=self.l).contains(&v)) {
            return Err(Error::Domain(format!("x0 {:?} outside the domain", self.x0)));
        }
        Ok(())
    }

    fn coefficients(&self) -> Result<Arc<CoefficientSet>> {
        if let Some(c) = &self.coeffs {
            return Ok(c.clone());
        }
        let cfg = BasisConfig::new(self.distribution.dim(), self.k, self.l)?;
        Ok(Arc::new(CoefficientSet::compute(&self.distribution, &cfg, &self.coeff_opts)?))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub success: bool,
    pub time_to_reach: Option<f64>,
    pub path_length: f64,
    pub trajectory: Vec<Vec<f64>>,
}

/// A motion rule producing the next position from the current one.
trait Mover {
    fn advance(&mut self, x: &[f64]) -> Result<Vec<f64>>;

    /// Put the agent back at `x0` for a new attempt.
    fn restart(&mut self, x0: &[f64]) -> Result<()>;
}

struct ErgodicMover {
    state: ErgodicState,
}

impl Mover for ErgodicMover {
    fn advance(&mut self, _x: &[f64]) -> Result<Vec<f64>> {
        self.state.step()?;
        Ok(self.state.x().to_vec())
    }

    fn restart(&mut self, x0: &[f64]) -> Result<()> {
        self.state.relocate(x0)
    }
}

/// Pursues independent samples of the reference, one after another.
struct SamplingMover {
    dist: ReferenceDistribution,
    rng: ChaCha8Rng,
    goal: Vec<f64>,
    step: f64,
    l: f64,
}

impl SamplingMover {
    fn draw(&mut self) {
        let l = self.l;
        self.goal = self.dist.sample(&mut self.rng).into_iter().map(|v| v.clamp(0.0, l)).collect();
    }
}

impl Mover for SamplingMover {
    fn advance(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        let gap = dist(x, &self.goal);
        if gap <= self.step {
            let next = self.goal.clone();
            self.draw();
            return Ok(next);
        }
        let f = self.step / gap;
        Ok(x.iter().zip(&self.goal).map(|(a, b)| a + f * (b - a)).collect())
    }

    fn restart(&mut self, _x0: &[f64]) -> Result<()> {
        self.draw();
        Ok(())
    }
}

/// Walks a fixed pattern at constant speed, starting with a straight
/// transit from the start point, and loops it when it ends.
struct PathMover {
    pattern: Polyline,
    path: Polyline,
    s: f64,
    step: f64,
}

impl PathMover {
    fn new(pattern: Polyline, x0: &[f64], step: f64) -> Result<Self> {
        let mut path = Polyline::new(vec![x0.to_vec()])?;
        path.extend(&pattern);
        Ok(Self { pattern, path, s: 0.0, step })
    }
}

impl Mover for PathMover {
    fn advance(&mut self, _x: &[f64]) -> Result<Vec<f64>> {
        self.s += self.step;
        if self.s > self.path.length() {
            let end = self.path.at(self.path.length());
            let over = self.s - self.path.length();
            let mut again = Polyline::new(vec![end])?;
            again.extend(&self.pattern);
            self.path = again;
            self.s = over.min(self.path.length());
        }
        Ok(self.path.at(self.s))
    }

    fn restart(&mut self, x0: &[f64]) -> Result<()> {
        *self = PathMover::new(self.pattern.clone(), x0, self.step)?;
        Ok(())
    }
}

/// Sweep extent of the GMM spiral in standard deviations.
pub const GMM_SPIRAL_SIGMAS: f64 = 2.0;

fn make_mover(spec: &TrialSpec) -> Result<Box<dyn Mover>> {
    let d = spec.distribution.dim();
    let step = spec.u_max * spec.dt;
    let gap = 2.0 * spec.target.radius;
    Ok(match spec.strategy {
        Strategy::Ergodic => {
            let cfg = ErgodicConfig {
                u_max: spec.u_max,
                dt: spec.dt,
                seed: spec.seed,
                w_rank_cap: spec.w_rank_cap,
                metric_every: 0,
                ..ErgodicConfig::default()
            };
            Box::new(ErgodicMover { state: ErgodicState::init(cfg, spec.coefficients()?, &spec.x0)? })
        }
        Strategy::Sampling => {
            let mut m = SamplingMover {
                dist: spec.distribution.clone(),
                rng: ChaCha8Rng::seed_from_u64(spec.seed),
                goal: Vec::new(),
                step,
                l: spec.l,
            };
            m.draw();
            Box::new(m)
        }
        Strategy::Spiral => {
            let pattern = match d {
                2 => paths::spiral_2d(spec.l, gap)?,
                3 => paths::spiral_3d(spec.l, gap, spec.x0[2])?,
                _ => return Err(Error::UnsupportedDimension(d)),
            };
            Box::new(PathMover::new(pattern, &spec.x0, step)?)
        }
        Strategy::GmmSpiral => {
            let ReferenceDistribution::Gmm(g) = &spec.distribution else {
                return Err(Error::arg("gmm_spiral needs a GMM reference"));
            };
            let pattern = paths::gmm_spiral(g, spec.l, gap, GMM_SPIRAL_SIGMAS)?;
            Box::new(PathMover::new(pattern, &spec.x0, step)?)
        }
    })
}

/// Simulate until the target is hit or time runs out. Motion is clamped to
/// the domain and never exceeds `u_max · dt` per step.
pub fn run_trial(spec: &TrialSpec) -> Result<TrialResult> {
    spec.validate()?;
    let mut mover = make_mover(spec)?;
    let mut res = TrialResult { success: false, time_to_reach: None, path_length: 0.0, trajectory: Vec::new() };
    attempt(spec, mover.as_mut(), &mut res)?;
    Ok(res)
}

/// One attempt from `spec.x0`; fills `res` and returns the elapsed time.
fn attempt(spec: &TrialSpec, mover: &mut dyn Mover, res: &mut TrialResult) -> Result<Option<f64>> {
    let mut x = spec.x0.clone();
    if res.trajectory.len() < spec.record {
        res.trajectory.push(x.clone());
    }
    if spec.target.contains(&x) {
        res.success = true;
        res.time_to_reach = Some(0.0);
        return Ok(Some(0.0));
    }
    let steps = crate::ergodic::steps_for(spec.time_limit, spec.dt);
    let step = spec.u_max * spec.dt;
    for i in 1..=steps {
        let mut next = mover.advance(&x)?;
        for v in &mut next {
            *v = v.clamp(0.0, spec.l);
        }
        let moved = dist(&x, &next);
        // Pattern interpolation can exceed the step by rounding only.
        debug_assert!(moved <= step + 1e-12, "moved {moved} > {step}");
        res.path_length += moved;
        x = next;
        if res.trajectory.len() < spec.record {
            res.trajectory.push(x.clone());
        }
        if spec.target.contains(&x) {
            let t = i as f64 * spec.dt;
            res.success = true;
            res.time_to_reach = Some(t);
            return Ok(Some(t));
        }
    }
    res.success = false;
    res.time_to_reach = None;
    Ok(None)
}

/// `(attempt c, T_c / c)` after each hit.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CumulativeSeries {
    pub entries: Vec<(usize, f64)>,
    /// Set when an attempt ran out of time; the series stops there.
    pub timed_out: bool,
    /// Straight-line time from `x0` to the target center at `u_max`.
    pub direct_time: f64,
}

impl CumulativeSeries {
    pub fn final_value(&self) -> Option<f64> {
        self.entries.last().map(|e| e.1)
    }

    /// Least-squares slope of the series from attempt `from` on.
    pub fn slope_from(&self, from: usize) -> Option<f64> {
        let tail: Vec<&(usize, f64)> = self.entries.iter().filter(|e| e.0 >= from).collect();
        if tail.len() < 2 {
            return None;
        }
        let x: Vec<f64> = tail.iter().map(|e| e.0 as f64).collect();
        let y: Vec<f64> = tail.iter().map(|e| e.1).collect();
        Some(stats::slope(&x, &y))
    }
}

/// Repeated attempts from `spec.x0`. After each hit the agent is put back at
/// `x0`; the ergodic strategy keeps its coefficient history and clock.
pub fn cumulative_average_experiment(spec: &TrialSpec, n_attempts: usize) -> Result<CumulativeSeries> {
    if n_attempts == 0 {
        return Err(Error::arg("n_attempts must be at least 1"));
    }
    spec.validate()?;
    let mut mover = make_mover(spec)?;
    let mut series = CumulativeSeries {
        direct_time: dist(&spec.x0, &spec.target.center) / spec.u_max,
        ..Default::default()
    };
    let mut total = 0.0;
    for c in 1..=n_attempts {
        if c > 1 {
            mover.restart(&spec.x0)?;
        }
        let mut res = TrialResult { success: false, time_to_reach: None, path_length: 0.0, trajectory: Vec::new() };
        match attempt(spec, mover.as_mut(), &mut res)? {
            Some(t) => {
                total += t;
                series.entries.push((c, total / c as f64));
            }
            None => {
                series.timed_out = true;
                break;
            }
        }
    }
    Ok(series)
}

/// Reference GMMs for the target-reach suite: six equal isotropic
/// components of variance 0.01 with centers at least 3σ from the walls.
pub fn suite_gmms(d: usize, count: usize, seed: u64) -> Result<Vec<Gmm>> {
    let var = 0.01;
    let margin = 3.0 * f64::sqrt(var);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let means = (0..6).map(|_| (0..d).map(|_| rng.random_range(margin..1.0 - margin)).collect()).collect();
            Gmm::isotropic(vec![1.0 / 6.0; 6], means, var)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub d: usize,
    pub n_gmms: usize,
    pub n_trials: usize,
    pub seed: u64,
    pub k: usize,
    pub volume_fraction: f64,
    pub time_limit: f64,
    pub strategies: Vec<Strategy>,
    pub coeff_opts: CoeffOptions,
    pub w_rank_cap: Option<usize>,
}

impl SuiteOptions {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            n_gmms: 10,
            n_trials: 10,
            seed: 0,
            k: 10,
            volume_fraction: 0.005,
            time_limit: 1000.0,
            strategies: Strategy::ALL.to_vec(),
            coeff_opts: CoeffOptions::default(),
            w_rank_cap: None,
        }
    }

    /// Start point: the domain center, at the floor in 3D.
    pub fn x0(&self) -> Vec<f64> {
        let mut x0 = vec![0.5; self.d];
        if self.d == 3 {
            x0[2] = 0.0;
        }
        x0
    }
}

/// One row per trial.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteRow {
    pub strategy: Strategy,
    pub gmm: usize,
    pub trial: usize,
    pub target: Vec<f64>,
    pub success: bool,
    pub time: Option<f64>,
    pub path_length: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrategySummary {
    pub strategy: Strategy,
    pub trials: usize,
    pub successes: usize,
    /// Over successful trials.
    pub mean_time: f64,
    pub std_time: f64,
    /// Failures counted at the time limit.
    pub mean_time_penalized: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
    pub summaries: Vec<StrategySummary>,
}

impl SuiteReport {
    pub fn summary(&self, s: Strategy) -> Option<&StrategySummary> {
        self.summaries.iter().find(|v| v.strategy == s)
    }

    pub fn write_rows<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# strategy,gmm,trial,target,success,time[s],path_length")?;
        for r in &self.rows {
            let target: Vec<String> = r.target.iter().map(|v| format!("{v:.6}")).collect();
            let time = r.time.map_or("nan".into(), |t| format!("{t:.2}"));
            writeln!(
                w,
                "{},{},{},{},{},{},{:.4}",
                r.strategy,
                r.gmm,
                r.trial,
                target.join(" "),
                r.success as u8,
                time,
                r.path_length
            )?;
        }
        Ok(())
    }

    pub fn write_summary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# strategy,trials,successes,success_rate,mean_time[s],std_time[s],mean_time_penalized[s]")?;
        for s in &self.summaries {
            writeln!(
                w,
                "{},{},{},{:.3},{:.3},{:.3},{:.3}",
                s.strategy,
                s.trials,
                s.successes,
                s.successes as f64 / s.trials.max(1) as f64,
                s.mean_time,
                s.std_time,
                s.mean_time_penalized
            )?;
        }
        Ok(())
    }
}

/// Every strategy on the same GMMs and targets; trials run on the rayon pool.
pub fn run_suite(opts: &SuiteOptions) -> Result<SuiteReport> {
    let gmms = suite_gmms(opts.d, opts.n_gmms, opts.seed)?;
    let radius = radius_for_fraction(opts.d, 1.0, opts.volume_fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x007a_26e7);
    let mut jobs = Vec::new();
    for (gi, g) in gmms.iter().enumerate() {
        let dist = ReferenceDistribution::Gmm(g.clone());
        let cfg = BasisConfig::new(opts.d, opts.k, 1.0)?;
        let coeffs = Arc::new(CoefficientSet::compute(&dist, &cfg, &opts.coeff_opts)?);
        for ti in 0..opts.n_trials {
            let target = TargetRegion::new(g.sample(&mut rng), radius, 1.0)?;
            let seed = rng.random();
            for &s in &opts.strategies {
                let mut spec = TrialSpec::new(s, dist.clone(), target.clone(), opts.x0());
                spec.seed = seed;
                spec.k = opts.k;
                spec.time_limit = opts.time_limit;
                spec.coeffs = Some(coeffs.clone());
                spec.coeff_opts = opts.coeff_opts.clone();
                spec.w_rank_cap = opts.w_rank_cap;
                jobs.push((gi, ti, spec));
            }
        }
    }
    let rows = jobs
        .par_iter()
        .map(|(gi, ti, spec)| {
            let r = run_trial(spec)?;
            Ok(SuiteRow {
                strategy: spec.strategy,
                gmm: *gi,
                trial: *ti,
                target: spec.target.center.clone(),
                success: r.success,
                time: r.time_to_reach,
                path_length: r.path_length,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summaries = opts
        .strategies
        .iter()
        .map(|&s| {
            let mine: Vec<&SuiteRow> = rows.iter().filter(|r| r.strategy == s).collect();
            let times: Vec<f64> = mine.iter().filter_map(|r| r.time).collect();
            let penalized: Vec<f64> = mine.iter().map(|r| r.time.unwrap_or(opts.time_limit)).collect();
            StrategySummary {
                strategy: s,
                trials: mine.len(),
                successes: times.len(),
                mean_time: if times.is_empty() { f64::NAN } else { stats::mean(&times) },
                std_time: if times.len() < 2 { 0.0 } else { stats::std_dev(&times) },
                mean_time_penalized: stats::mean(&penalized),
            }
        })
        .collect();
    Ok(SuiteReport { rows, summaries })
}

#[cfg(test)]
mod tests;
