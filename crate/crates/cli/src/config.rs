//! Run configuration: one TOML file, every field optional, flags win.

use std::path::{Path, PathBuf};

use ergodic_tt::distributions::{Gmm, ReferenceDistribution};
use ergodic_tt::ergodic::ErgodicConfig;
use ergodic_tt::fourier::{BasisConfig, CoeffOptions};
use ergodic_tt::sim::Strategy;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub basis: BasisSection,
    pub distribution: DistributionSection,
    pub coeffs: CoeffSection,
    pub ergodic: ErgodicSection,
    pub explore: ExploreSection,
    pub compare: CompareSection,
    pub bench: BenchSection,
    pub pose: PoseSection,
    /// Present in manifests only.
    pub run: Option<RunMeta>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisSection {
    pub d: usize,
    pub k: usize,
    pub l: f64,
    /// Quadrature nodes per dimension; 0 picks the default for `k`.
    pub n: usize,
}

impl Default for BasisSection {
    fn default() -> Self {
        Self { d: 2, k: 10, l: 1.0, n: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistributionSection {
    /// `gaussian`, `uniform` or `gmm`.
    pub kind: String,
    /// Gaussian mean; defaults to the domain center.
    pub mean: Option<Vec<f64>>,
    pub var: f64,
    /// GMM text file; relative paths resolve against the config file.
    pub file: Option<PathBuf>,
    /// Inline GMM components, used when `file` is absent.
    pub components: Vec<ComponentSpec>,
}

impl Default for DistributionSection {
    fn default() -> Self {
        Self { kind: "gaussian".into(), mean: None, var: 0.015, file: None, components: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Isotropic variance, or
    pub var: Option<f64>,
    /// a full row-major covariance.
    pub cov: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoeffSection {
    pub cross_eps: f64,
    /// 0 disables the post-rounding of the coefficient tensor.
    pub round_eps: f64,
    pub lambda_rank: usize,
    pub max_rank: usize,
}

impl Default for CoeffSection {
    fn default() -> Self {
        let o = CoeffOptions::default();
        Self { cross_eps: o.cross_eps, round_eps: o.round_eps.unwrap_or(0.0), lambda_rank: o.lambda_rank, max_rank: o.max_rank }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErgodicSection {
    pub u_max: f64,
    pub dt: f64,
    /// 0 means `d` times the largest rank of the target coefficients.
    pub w_rank_cap: usize,
    pub b_epsilon: f64,
    pub metric_every: usize,
}

impl Default for ErgodicSection {
    fn default() -> Self {
        let e = ErgodicConfig::default();
        Self { u_max: e.u_max, dt: e.dt, w_rank_cap: 0, b_epsilon: e.b_epsilon, metric_every: e.metric_every }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploreSection {
    pub t_final: f64,
    /// Start state; defaults to the domain center.
    pub x0: Option<Vec<f64>>,
    /// Occupancy grid resolution for every coordinate pair; 0 skips it.
    pub histogram_bins: usize,
}

impl Default for ExploreSection {
    fn default() -> Self {
        Self { t_final: 100.0, x0: None, histogram_bins: 30 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    pub d: usize,
    pub n_gmms: usize,
    pub n_trials: usize,
    pub k: usize,
    pub volume_fraction: f64,
    pub time_limit: f64,
    pub strategies: Vec<String>,
    /// Attempts in the re-initialization experiment; 0 skips it.
    pub cumulative_attempts: usize,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            d: 2,
            n_gmms: 10,
            n_trials: 10,
            k: 10,
            volume_fraction: 0.005,
            time_limit: 1000.0,
            strategies: Strategy::ALL.iter().map(|s| s.name().to_string()).collect(),
            cumulative_attempts: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub d_list: Vec<usize>,
    pub k: usize,
    pub var: f64,
    pub steps: usize,
    pub warmup: usize,
    pub repetitions: usize,
    pub dense_max_d: usize,
}

impl Default for BenchSection {
    fn default() -> Self {
        Self { d_list: (2..=10).collect(), k: 5, var: 0.015, steps: 1000, warmup: 50, repetitions: 3, dense_max_d: 5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoseSection {
    /// Demonstration file (`px py pz qw qx qy qz` rows). Without it a seeded
    /// synthetic pose mixture is used.
    pub poses: Option<PathBuf>,
    pub components: usize,
    /// Component variance in domain units for mixtures built from poses.
    pub var: f64,
    /// Bounding-box padding, as a fraction of the data extent.
    pub margin: f64,
    /// Box half-width in standard deviations for the synthetic mixture.
    pub n_sigma: f64,
    pub k: usize,
    pub steps: usize,
    pub w_rank_cap: usize,
    pub keep_every: usize,
}

impl Default for PoseSection {
    fn default() -> Self {
        Self { poses: None, components: 8, var: 5e-3, margin: 0.1, n_sigma: 3.0, k: 10, steps: 10_000, w_rank_cap: 30, keep_every: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunMeta {
    pub tool_version: String,
    pub subcommand: String,
    pub config_path: Option<PathBuf>,
    pub seed: u64,
    pub out: PathBuf,
    pub cache: PathBuf,
}

/// Command-line values that override the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub cache: Option<PathBuf>,
}

impl Config {
    /// Read `path` (or start from defaults), apply overrides, and make every
    /// file reference absolute so the resolved config can be replayed from
    /// anywhere.
    pub fn load(path: Option<&Path>, ov: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
                toml::from_str::<Config>(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => Config::default(),
        };
        let base = path.and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default();
        let absolute = |p: &Path| -> PathBuf {
            let joined = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
            std::path::absolute(&joined).unwrap_or(joined)
        };
        cfg.distribution.file = cfg.distribution.file.as_deref().map(absolute);
        cfg.pose.poses = cfg.pose.poses.as_deref().map(absolute);
        if let Some(s) = ov.seed {
            cfg.seed = s;
        }
        if let Some(o) = &ov.out {
            cfg.out = Some(o.clone());
        }
        if let Some(c) = &ov.cache {
            cfg.cache = Some(c.clone());
        }
        cfg.run = None;
        Ok(cfg)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache.clone().unwrap_or_else(|| self.out_dir().join("cache"))
    }

    pub fn basis(&self) -> Result<BasisConfig, CliError> {
        let b = &self.basis;
        let r = if b.n == 0 { BasisConfig::new(b.d, b.k, b.l) } else { BasisConfig::with_n(b.d, b.k, b.l, b.n) };
        r.map_err(CliError::from)
    }

    pub fn coeff_options(&self) -> CoeffOptions {
        let c = &self.coeffs;
        CoeffOptions {
            cross_eps: c.cross_eps,
            round_eps: (c.round_eps > 0.0).then_some(c.round_eps),
            lambda_rank: c.lambda_rank,
            max_rank: c.max_rank,
            seed: self.seed,
        }
    }

    pub fn ergodic_config(&self) -> ErgodicConfig {
        let e = &self.ergodic;
        ErgodicConfig {
            u_max: e.u_max,
            dt: e.dt,
            w_rank_cap: (e.w_rank_cap > 0).then_some(e.w_rank_cap),
            b_epsilon: e.b_epsilon,
            seed: self.seed,
            metric_every: e.metric_every,
        }
    }

    pub fn distribution(&self) -> Result<ReferenceDistribution, CliError> {
        let d = self.basis.d;
        let s = &self.distribution;
        let dist = match s.kind.as_str() {
            "uniform" => ReferenceDistribution::uniform(d, self.basis.l),
            "gaussian" => {
                let mean = s.mean.clone().unwrap_or_else(|| vec![0.5 * self.basis.l; d]);
                ReferenceDistribution::iso_gaussian(mean, s.var)?
            }
            "gmm" => ReferenceDistribution::Gmm(self.gmm()?),
            other => return Err(CliError::Config(format!("unknown distribution kind `{other}`"))),
        };
        if dist.dim() != d {
            return Err(CliError::Config(format!("distribution has dimension {}, basis.d is {d}", dist.dim())));
        }
        Ok(dist)
    }

    fn gmm(&self) -> Result<Gmm, CliError> {
        let s = &self.distribution;
        if let Some(f) = &s.file {
            return Ok(Gmm::from_file(f)?);
        }
        if s.components.is_empty() {
            return Err(CliError::Config("gmm distribution needs `file` or `components`".into()));
        }
        let d = s.components[0].mean.len();
        let mut covs = Vec::with_capacity(s.components.len());
        for (i, c) in s.components.iter().enumerate() {
            covs.push(match (&c.cov, c.var) {
                (Some(cov), None) => cov.clone(),
                (None, Some(v)) => (0..d * d).map(|ij| if ij / d == ij % d { v } else { 0.0 }).collect(),
                _ => return Err(CliError::Config(format!("component {i}: give exactly one of `var` and `cov`"))),
            });
        }
        let weights = s.components.iter().map(|c| c.weight).collect();
        let means = s.components.iter().map(|c| c.mean.clone()).collect();
        Ok(Gmm::new(weights, means, covs)?)
    }

    pub fn strategies(&self) -> Result<Vec<Strategy>, CliError> {
        self.compare
            .strategies
            .iter()
            .map(|s| s.parse::<Strategy>().map_err(|_| CliError::Config(format!("unknown strategy `{s}`"))))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = Config::default();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(toml::from_str::<Config>(&text).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Config>("sed = 3").is_err());
        assert!(toml::from_str::<Config>("[basis]\nD = 3").is_err());
    }

    #[test]
    fn inline_components_build_a_gmm() {
        let text = r#"
            [basis]
            d = 2
            [distribution]
            kind = "gmm"
            [[distribution.components]]
            weight = 0.5
            mean = [0.3, 0.3]
            var = 0.01
            [[distribution.components]]
            weight = 0.5
            mean = [0.7, 0.6]
            cov = [0.01, 0.002, 0.002, 0.02]
        "#;
        let c: Config = toml::from_str(text).unwrap();
        match c.distribution().unwrap() {
            ReferenceDistribution::Gmm(g) => {
                assert_eq!(g.n_components(), 2);
                assert_eq!(g.covariance(0), &[0.01, 0.0, 0.0, 0.01]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_a_config_error() {
        let c: Config = toml::from_str("[basis]\nd = 3\n[distribution]\nmean = [0.5, 0.5]").unwrap();
        assert!(matches!(c.distribution(), Err(CliError::Config(_))));
    }

    #[test]
    fn overrides_win() {
        let ov = Overrides { seed: Some(9), out: Some("x".into()), cache: None };
        let c = Config::load(None, &ov).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.out_dir(), PathBuf::from("x"));
        assert_eq!(c.cache_dir(), PathBuf::from("x/cache"));
    }
}
