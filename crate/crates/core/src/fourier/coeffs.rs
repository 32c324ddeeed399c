use std::io::{Read, Write};
use std::path::Path;
use web_time::Instant;

use super::{basis_into, quadrature_rule, BasisConfig, QuadratureRule};
use crate::distributions::ReferenceDistribution;
use crate::error::{Error, Result};
use crate::tt::{
    read_tt, tt_cross_with, tt_round, write_tt, CrossOptions, CrossReport, ToleranceSpec, TtCore, TtTensor,
};

/// `(1 + |k|^2)^{-(d+1)/2}` for a 1-based multi-index.
pub fn lambda_value(k: &[usize]) -> f64 {
    let s: f64 = k.iter().map(|&v| (v * v) as f64).sum();
    (1.0 + s).powf(-0.5 * (k.len() as f64 + 1.0))
}

/// Λ by cross approximation, rounded to rank 2.
pub fn lambda_tensor(cfg: &BasisConfig) -> Result<TtTensor> {
    lambda_tensor_with(cfg, 2)
}

pub fn lambda_tensor_with(cfg: &BasisConfig, rank: usize) -> Result<TtTensor> {
    cfg.validate()?;
    let opts = CrossOptions { eps: 1e-6, ..CrossOptions::default() };
    let full = tt_cross_with(lambda_value, &cfg.mode_sizes(), &opts)?.tensor;
    tt_round(&full, ToleranceSpec::MaxRank(rank))
}

/// Density on the `N^d` quadrature grid by TT-cross with accuracy `eps`.
pub fn discretize_pdf(p: &ReferenceDistribution, cfg: &BasisConfig, eps: f64) -> Result<TtTensor> {
    let opts = CrossOptions { eps, ..CrossOptions::default() };
    discretize_pdf_with(p, cfg, &opts).map(|r| r.tensor)
}

/// Like [`discretize_pdf`] with explicit cross options. Density modes are
/// added to `opts.init_pivots` as their nearest grid points.
pub fn discretize_pdf_with(p: &ReferenceDistribution, cfg: &BasisConfig, opts: &CrossOptions) -> Result<CrossReport> {
    cfg.validate()?;
    if p.dim() != cfg.d {
        return Err(Error::shape(format!("density has dimension {}, basis has {}", p.dim(), cfg.d)));
    }
    let rule = quadrature_rule(cfg.n, cfg.l)?;
    let mut opts = opts.clone();
    for m in p.modes() {
        let piv: Vec<usize> = m.iter().map(|&v| nearest(&rule.nodes, v) + 1).collect();
        if !opts.init_pivots.contains(&piv) {
            opts.init_pivots.push(piv);
        }
    }
    let nodes = &rule.nodes;
    let d = cfg.d;
    let f = |k: &[usize]| {
        let mut buf = [0.0f64; 32];
        if d <= 32 {
            for (b, &i) in buf.iter_mut().zip(k) {
                *b = nodes[i - 1];
            }
            p.pdf(&buf[..d])
        } else {
            p.pdf(&k.iter().map(|&i| nodes[i - 1]).collect::<Vec<_>>())
        }
    };
    tt_cross_with(f, &vec![cfg.n; d], &opts)
}

fn nearest(nodes: &[f64], v: f64) -> usize {
    let mut best = 0;
    for (i, x) in nodes.iter().enumerate() {
        if (x - v).abs() < (nodes[best] - v).abs() {
            best = i;
        }
    }
    best
}

/// Fourier coefficients from a density sampled on the quadrature grid: each
/// core is contracted against `alpha_j phi_k(x_j)` over its grid index.
/// Ranks are those of `p_tt`.
pub fn fourier_coeffs(p_tt: &TtTensor, rule: &QuadratureRule, cfg: &BasisConfig) -> Result<TtTensor> {
    let n = rule.nodes.len();
    if p_tt.order() != cfg.d || p_tt.mode_sizes().iter().any(|&m| m != n) {
        return Err(Error::shape(format!(
            "density tensor {:?} does not match d = {} with {n} nodes",
            p_tt.mode_sizes(),
            cfg.d
        )));
    }
    let kk = cfg.k;
    // B[j][k] = alpha_j phi_k(x_j)
    let mut b = vec![0.0; n * kk];
    for (j, (&x, &a)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        basis_into(x, cfg.l, &mut b[j * kk..(j + 1) * kk]);
        for v in &mut b[j * kk..(j + 1) * kk] {
            *v *= a;
        }
    }
    let cores = p_tt
        .cores()
        .iter()
        .map(|c| {
            let (l, r) = (c.left(), c.right());
            let mut data = vec![0.0; l * kk * r];
            for a in 0..l {
                for j in 0..n {
                    let src = &c.data()[(a * n + j) * r..][..r];
                    for k in 0..kk {
                        let w = b[j * kk + k];
                        let dst = &mut data[(a * kk + k) * r..][..r];
                        for (o, &s) in dst.iter_mut().zip(src) {
                            *o += w * s;
                        }
                    }
                }
            }
            TtCore::new(l, kk, r, data)
        })
        .collect::<Result<Vec<_>>>()?;
    TtTensor::from_cores(cores)
}

/// Knobs of the coefficient pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffOptions {
    /// Cross accuracy for the sampled density.
    pub cross_eps: f64,
    /// Post-rounding accuracy of the coefficient tensor; `None` skips it.
    pub round_eps: Option<f64>,
    pub lambda_rank: usize,
    pub max_rank: usize,
    pub seed: u64,
}

impl Default for CoeffOptions {
    fn default() -> Self {
        Self { cross_eps: 1e-2, round_eps: Some(1e-2), lambda_rank: 2, max_rank: 64, seed: 0 }
    }
}

/// Timings and sizes from one preprocessing run.
#[derive(Clone, Debug, Default)]
pub struct PrecomputeStats {
    pub density_seconds: f64,
    pub coeff_seconds: f64,
    pub lambda_seconds: f64,
    pub oracle_calls: usize,
    pub density_ranks: Vec<usize>,
    pub cross_error: f64,
}

impl PrecomputeStats {
    pub fn total_seconds(&self) -> f64 {
        self.density_seconds + self.coeff_seconds + self.lambda_seconds
    }
}

/// Target coefficients `w_hat` and weights `lambda` for one density.
#[derive(Clone, Debug)]
pub struct CoefficientSet {
    pub w_hat: TtTensor,
    pub lambda: TtTensor,
    pub config: BasisConfig,
}

const CACHE_MAGIC: &[u8; 8] = b"ETTCOEF1";

impl CoefficientSet {
    pub fn new(w_hat: TtTensor, lambda: TtTensor, config: BasisConfig) -> Result<Self> {
        let sizes = config.mode_sizes();
        if w_hat.mode_sizes() != sizes || lambda.mode_sizes() != sizes {
            return Err(Error::shape("coefficient tensors do not match the basis config"));
        }
        Ok(Self { w_hat, lambda, config })
    }

    pub fn compute(dist: &ReferenceDistribution, cfg: &BasisConfig, opts: &CoeffOptions) -> Result<Self> {
        Self::compute_with_stats(dist, cfg, opts).map(|(s, _)| s)
    }

    pub fn compute_with_stats(
        dist: &ReferenceDistribution,
        cfg: &BasisConfig,
        opts: &CoeffOptions,
    ) -> Result<(Self, PrecomputeStats)> {
        let mut stats = PrecomputeStats::default();
        let t0 = Instant::now();
        let cross = CrossOptions { eps: opts.cross_eps, max_rank: opts.max_rank, seed: opts.seed, ..CrossOptions::default() };
        let rep = discretize_pdf_with(dist, cfg, &cross)?;
        stats.density_seconds = t0.elapsed().as_secs_f64();
        stats.oracle_calls = rep.total_calls();
        stats.density_ranks = rep.tensor.ranks();
        stats.cross_error = rep.error_estimate;

        let t1 = Instant::now();
        let rule = quadrature_rule(cfg.n, cfg.l)?;
        let mut w_hat = fourier_coeffs(&rep.tensor, &rule, cfg)?;
        if let Some(eps) = opts.round_eps {
            w_hat = tt_round(&w_hat, ToleranceSpec::Accuracy(eps))?;
        }
        stats.coeff_seconds = t1.elapsed().as_secs_f64();

        let t2 = Instant::now();
        let lambda = lambda_tensor_with(cfg, opts.lambda_rank)?;
        stats.lambda_seconds = t2.elapsed().as_secs_f64();
        Ok((Self { w_hat, lambda, config: *cfg }, stats))
    }

    /// Stable hash of everything that determines the coefficients.
    pub fn fingerprint(dist: &ReferenceDistribution, cfg: &BasisConfig, opts: &CoeffOptions) -> u64 {
        let text = format!(
            "{}|{} {} {:e} {}|{:e} {:?} {} {} {}",
            dist.describe(),
            cfg.d,
            cfg.k,
            cfg.l,
            cfg.n,
            opts.cross_eps,
            opts.round_eps,
            opts.lambda_rank,
            opts.max_rank,
            opts.seed
        );
        fnv1a(text.as_bytes())
    }

    pub fn write_cache<W: Write>(&self, fingerprint: u64, mut w: W) -> Result<()> {
        w.write_all(CACHE_MAGIC)?;
        for v in [self.config.d as u64, self.config.k as u64] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.config.l.to_le_bytes())?;
        w.write_all(&(self.config.n as u64).to_le_bytes())?;
        w.write_all(&fingerprint.to_le_bytes())?;
        write_tt(&self.w_hat, &mut w)?;
        write_tt(&self.lambda, &mut w)?;
        Ok(())
    }

    /// Returns the set and the fingerprint stored with it.
    pub fn read_cache<R: Read>(mut r: R) -> Result<(Self, u64)> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Parse { line: 0, msg: "not a coefficient cache file".into() });
        }
        let mut b = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut b)?;
            Ok(b)
        };
        let d = u64::from_le_bytes(next(&mut r)?) as usize;
        let k = u64::from_le_bytes(next(&mut r)?) as usize;
        let l = f64::from_le_bytes(next(&mut r)?);
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let fp = u64::from_le_bytes(next(&mut r)?);
        let config = BasisConfig::with_n(d, k, l, n)?;
        let w_hat = read_tt(&mut r)?;
        let lambda = read_tt(&mut r)?;
        Ok((Self::new(w_hat, lambda, config)?, fp))
    }

    pub fn save(&self, path: impl AsRef<Path>, fingerprint: u64) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_cache(fingerprint, f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, u64)> {
        Self::read_cache(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::super::{fourier_coeffs_oracle, phi_tensor};
    use super::*;
    use crate::distributions::Gmm;
    use crate::tt::{tt_inner, tt_to_dense, DenseTensor, IndexTuple};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gaussian(d: usize) -> ReferenceDistribution {
        ReferenceDistribution::iso_gaussian(vec![0.5; d], 0.015).unwrap()
    }

    fn two_component(d: usize) -> ReferenceDistribution {
        let a: Vec<f64> = (0..d).map(|i| 0.35 + 0.05 * i as f64).collect();
        let b: Vec<f64> = (0..d).map(|i| 0.65 - 0.03 * i as f64).collect();
        ReferenceDistribution::Gmm(Gmm::isotropic(vec![0.5, 0.5], vec![a, b], 0.01).unwrap())
    }

    fn dense_lambda(d: usize, k: usize) -> DenseTensor {
        DenseTensor::from_fn(vec![k; d], |i| lambda_value(&i.iter().map(|v| v + 1).collect::<Vec<_>>())).unwrap()
    }

    fn rel_err(a: &DenseTensor, b: &DenseTensor) -> f64 {
        let num: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).powi(2)).sum();
        num.sqrt() / b.norm()
    }

    #[test]
    fn lambda_formula() {
        assert!((lambda_value(&[1, 1]) - 3f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn lambda_is_positive_and_small() {
        let cfg = BasisConfig::new(5, 10, 1.0).unwrap();
        let lam = lambda_tensor(&cfg).unwrap();
        assert!(lam.param_count() <= 160);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let k: Vec<usize> = (0..5).map(|_| rng.random_range(0..10)).collect();
            assert!(lam.eval(&k) > 0.0);
        }
    }

    #[test]
    fn lambda_d3_k6_error() {
        // Rank 2 leaves about 1.9e-2 here; rank 3 is enough for 1e-2.
        let cfg = BasisConfig::new(3, 6, 1.0).unwrap();
        let dense = dense_lambda(3, 6);
        let r2 = rel_err(&tt_to_dense(&lambda_tensor(&cfg).unwrap()).unwrap(), &dense);
        assert!(r2 < 3e-2, "{r2}");
        let r3 = rel_err(&tt_to_dense(&lambda_tensor_with(&cfg, 3).unwrap()).unwrap(), &dense);
        assert!(r3 < 1e-2, "{r3}");
    }

    #[test]
    fn lambda_is_permutation_symmetric() {
        let cfg = BasisConfig::new(4, 6, 1.0).unwrap();
        let lam = lambda_tensor_with(&cfg, 4).unwrap();
        let top = lambda_value(&[1; 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let k: Vec<usize> = (0..4).map(|_| rng.random_range(0..6)).collect();
            let mut p = k.clone();
            p.rotate_left(rng.random_range(1..4));
            p.swap(0, rng.random_range(0..4));
            let (a, b) = (lam.eval(&k), lam.eval(&p));
            assert!((a - b).abs() <= 1e-4 * top, "{k:?} {p:?}: {a} {b}");
        }
    }

    #[test]
    fn uniform_density_is_rank_one_constant() {
        let cfg = BasisConfig::new(3, 4, 1.0).unwrap();
        let p = discretize_pdf(&ReferenceDistribution::uniform(3, 1.0), &cfg, 1e-12).unwrap();
        assert_eq!(p.interior_ranks(), vec![1, 1]);
        let dense = tt_to_dense(&p).unwrap();
        assert!(dense.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn uniform_coefficients_are_unit_vector() {
        let cfg = BasisConfig::new(3, 5, 1.0).unwrap();
        let set = CoefficientSet::compute(&ReferenceDistribution::uniform(3, 1.0), &cfg, &CoeffOptions::default()).unwrap();
        let dense = tt_to_dense(&set.w_hat).unwrap();
        for (i, v) in dense.values().iter().enumerate() {
            let e = if i == 0 { 1.0 } else { 0.0 };
            assert!((v - e).abs() < 1e-12);
        }
        assert_eq!(set.w_hat.param_count(), 15);
    }

    #[test]
    fn gaussian_d5_density_ranks_and_mass() {
        let cfg = BasisConfig::with_n(5, 10, 1.0, 10).unwrap();
        let p = discretize_pdf(&gaussian(5), &cfg, 1e-2).unwrap();
        assert!(p.max_rank() <= 5);
        let rule = quadrature_rule(10, 1.0).unwrap();
        let w = crate::tt::tt_rank1(&vec![rule.weights.clone(); 5]).unwrap();
        let mass = tt_inner(&p, &w).unwrap();
        assert!((mass - 1.0).abs() < 1e-2, "{mass}");
    }

    #[test]
    fn coefficient_ranks_follow_density() {
        let cfg = BasisConfig::new(3, 5, 1.0).unwrap();
        let p = discretize_pdf(&two_component(3), &cfg, 1e-6).unwrap();
        let rule = quadrature_rule(cfg.n, cfg.l).unwrap();
        assert_eq!(fourier_coeffs(&p, &rule, &cfg).unwrap().ranks(), p.ranks());
        let wrong = quadrature_rule(cfg.n + 1, cfg.l).unwrap();
        assert!(fourier_coeffs(&p, &wrong, &cfg).is_err());
    }

    #[test]
    fn coefficients_match_oracle_d2() {
        let cfg = BasisConfig::new(2, 5, 1.0).unwrap();
        for dist in [gaussian(2), two_component(2), ReferenceDistribution::uniform(2, 1.0)] {
            let rule = quadrature_rule(cfg.n, cfg.l).unwrap();
            let w = fourier_coeffs(&discretize_pdf(&dist, &cfg, 1e-8).unwrap(), &rule, &cfg).unwrap();
            let oracle = fourier_coeffs_oracle(&dist, &cfg).unwrap();
            let dense = tt_to_dense(&w).unwrap();
            for (a, b) in dense.values().iter().zip(oracle.values()) {
                assert!((a - b).abs() < 1e-3, "{} {a} vs {b}", dist.describe());
            }
        }
    }

    #[test]
    fn coefficients_cannot_see_reflections() {
        // cos(2 pi k x / L) is even about L/2, so a density and its mirror
        // image in any coordinate share every coefficient.
        let cfg = BasisConfig::new(2, 6, 1.0).unwrap();
        let g = Gmm::isotropic(vec![1.0], vec![vec![0.3, 0.4]], 0.01).unwrap();
        let m = Gmm::isotropic(vec![1.0], vec![vec![0.7, 0.4]], 0.01).unwrap();
        let a = fourier_coeffs_oracle(&ReferenceDistribution::Gmm(g), &cfg).unwrap();
        let b = fourier_coeffs_oracle(&ReferenceDistribution::Gmm(m), &cfg).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn coefficient_equals_projection_of_phi() {
        // w_k = <P, phi_k> under the quadrature, i.e. <P_tt, alpha (x) Phi(x_j)>.
        let cfg = BasisConfig::new(2, 4, 1.0).unwrap();
        let dist = gaussian(2);
        let rule = quadrature_rule(cfg.n, cfg.l).unwrap();
        let p = discretize_pdf(&dist, &cfg, 1e-10).unwrap();
        let w = fourier_coeffs(&p, &rule, &cfg).unwrap();
        let mut brute = [0.0; 16];
        for (i, (&x, &a)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            for (j, (&y, &b)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                let phi = tt_to_dense(&phi_tensor(&[x, y], &cfg).unwrap()).unwrap();
                let pv = p.eval(&[i, j]);
                for (o, v) in brute.iter_mut().zip(phi.values()) {
                    *o += a * b * pv * v;
                }
            }
        }
        for k in 0..16 {
            let v = w.element(&IndexTuple(vec![k / 4 + 1, k % 4 + 1])).unwrap();
            assert!((v - brute[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn cache_round_trip() {
        let cfg = BasisConfig::new(2, 5, 1.0).unwrap();
        let dist = gaussian(2);
        let opts = CoeffOptions::default();
        let set = CoefficientSet::compute(&dist, &cfg, &opts).unwrap();
        let fp = CoefficientSet::fingerprint(&dist, &cfg, &opts);
        let mut buf = Vec::new();
        set.write_cache(fp, &mut buf).unwrap();
        let (back, fp2) = CoefficientSet::read_cache(buf.as_slice()).unwrap();
        assert_eq!(fp, fp2);
        assert_eq!(back.w_hat, set.w_hat);
        assert_eq!(back.lambda, set.lambda);
        assert_eq!(back.config, set.config);
        let other = CoeffOptions { seed: 1, ..opts };
        assert_ne!(fp, CoefficientSet::fingerprint(&dist, &cfg, &other));
        assert!(CoefficientSet::read_cache(&b"garbage!"[..]).is_err());
    }
}
