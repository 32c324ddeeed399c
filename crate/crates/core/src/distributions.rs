//! Reference densities on the exploration domain, sampling, and the affine
//! map between task coordinates and `[0, L]^d`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Smallest admissible Cholesky pivot `L_ii^2`.
const PIVOT_TOL: f64 = 1e-10;
const WEIGHT_TOL: f64 = 1e-9;

/// Gaussian mixture with full covariances.
#[derive(Clone, Debug, PartialEq)]
pub struct Gmm {
    dim: usize,
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    covs: Vec<Vec<f64>>,
    /// Lower Cholesky factors, row-major.
    chol: Vec<Vec<f64>>,
    /// `ln w_m - d/2 ln 2pi - sum_i ln L_ii` per component.
    log_coef: Vec<f64>,
}

impl Gmm {
    /// Covariances are `d x d` row-major.
    pub fn new(weights: Vec<f64>, means: Vec<Vec<f64>>, covs: Vec<Vec<f64>>) -> Result<Self> {
        let m = weights.len();
        if m == 0 {
            return Err(Error::arg("a GMM needs at least one component"));
        }
        if means.len() != m || covs.len() != m {
            return Err(Error::shape(format!(
                "{m} weights, {} means, {} covariances",
                means.len(),
                covs.len()
            )));
        }
        let dim = means[0].len();
        if dim == 0 {
            return Err(Error::arg("GMM dimension must be positive"));
        }
        for (c, w) in weights.iter().enumerate() {
            if !(*w > 0.0) || !w.is_finite() {
                return Err(Error::Validation { component: c, msg: format!("weight {w} is not positive") });
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Validation { component: 0, msg: format!("weights sum to {total}, not 1") });
        }
        let mut chol = Vec::with_capacity(m);
        let mut log_coef = Vec::with_capacity(m);
        for c in 0..m {
            if means[c].len() != dim || means[c].iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation { component: c, msg: format!("mean must be {dim} finite values") });
            }
            let l = cholesky(&covs[c], dim).map_err(|msg| Error::Validation { component: c, msg })?;
            let log_det_half: f64 = (0..dim).map(|i| l[i * dim + i].ln()).sum();
            log_coef.push(
                weights[c].ln() - 0.5 * dim as f64 * (2.0 * std::f64::consts::PI).ln() - log_det_half,
            );
            chol.push(l);
        }
        Ok(Self { dim, weights, means, covs, chol, log_coef })
    }

    /// Mixture of spherical components sharing one variance.
    pub fn isotropic(weights: Vec<f64>, means: Vec<Vec<f64>>, var: f64) -> Result<Self> {
        let d = means.first().map_or(0, Vec::len);
        let cov = diag(d, var);
        let covs = vec![cov; means.len()];
        Self::new(weights, means, covs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    /// Row-major covariance of component `c`.
    pub fn covariance(&self, c: usize) -> &[f64] {
        &self.covs[c]
    }

    pub fn covariance_matrix(&self, c: usize) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.covs[c])
    }

    /// Marginal over the listed coordinates, in that order.
    pub fn marginal(&self, dims: &[usize]) -> Result<Gmm> {
        if dims.is_empty() || dims.iter().any(|&i| i >= self.dim) {
            return Err(Error::arg(format!("marginal coordinates {dims:?} out of range for d = {}", self.dim)));
        }
        let d = self.dim;
        let means = self.means.iter().map(|m| dims.iter().map(|&i| m[i]).collect()).collect();
        let covs = self
            .covs
            .iter()
            .map(|c| dims.iter().flat_map(|&i| dims.iter().map(move |&j| c[i * d + j])).collect())
            .collect();
        Gmm::new(self.weights.clone(), means, covs)
    }

    pub fn mixture_mean(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (w, mu) in self.weights.iter().zip(&self.means) {
            for (o, m) in out.iter_mut().zip(mu) {
                *o += w * m;
            }
        }
        out
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let d = self.dim;
        let mut z = [0.0f64; 16];
        let mut heap;
        let z: &mut [f64] = if d <= 16 {
            &mut z[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        let mut total = 0.0;
        for c in 0..self.weights.len() {
            // Solve L z = x - mu by forward substitution.
            let l = &self.chol[c];
            let mu = &self.means[c];
            let mut q = 0.0;
            for i in 0..d {
                let mut s = x[i] - mu[i];
                for j in 0..i {
                    s -= l[i * d + j] * z[j];
                }
                z[i] = s / l[i * d + i];
                q += z[i] * z[i];
            }
            total += (self.log_coef[c] - 0.5 * q).exp();
        }
        total
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut c = self.weights.len() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                c = i;
                break;
            }
        }
        let d = self.dim;
        let e: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let l = &self.chol[c];
        (0..d)
            .map(|i| self.means[c][i] + (0..=i).map(|j| l[i * d + j] * e[j]).sum::<f64>())
            .collect()
    }

    /// Parse the text format:
    ///
    /// ```text
    /// gmm <M> <d>
    /// w <weight>
    /// mu <d values>
    /// cov <d*d values, row-major>
    /// ```
    ///
    /// repeated for each component. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hl, header) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty GMM file".into() })?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 3 || head[0] != "gmm" {
            return Err(Error::Parse { line: hl, msg: "expected `gmm <M> <d>`".into() });
        }
        let m: usize = parse_num(head[1], hl)?;
        let d: usize = parse_num(head[2], hl)?;
        let mut weights = Vec::with_capacity(m);
        let mut means = Vec::with_capacity(m);
        let mut covs = Vec::with_capacity(m);
        for _ in 0..m {
            weights.push(expect_line(&mut lines, "w", 1)?[0]);
            means.push(expect_line(&mut lines, "mu", d)?);
            covs.push(expect_line(&mut lines, "cov", d * d)?);
        }
        if let Some((line, _)) = lines.next() {
            return Err(Error::Parse { line, msg: format!("trailing content after {m} components") });
        }
        Self::new(weights, means, covs)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("gmm {} {}\n", self.n_components(), self.dim);
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
        for c in 0..self.n_components() {
            let _ = writeln!(s, "w {:e}", self.weights[c]);
            let _ = writeln!(s, "mu {}", join(&self.means[c]));
            let _ = writeln!(s, "cov {}", join(&self.covs[c]));
        }
        s
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("cannot parse `{tok}`") })
}

fn expect_line<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    key: &str,
    count: usize,
) -> Result<Vec<f64>> {
    let (line, text) = lines.next().ok_or(Error::Parse { line: 0, msg: format!("missing `{key}` line") })?;
    let mut toks = text.split_whitespace();
    if toks.next() != Some(key) {
        return Err(Error::Parse { line, msg: format!("expected `{key}`") });
    }
    let vals = toks.map(|t| parse_num::<f64>(t, line)).collect::<Result<Vec<_>>>()?;
    if vals.len() != count {
        return Err(Error::Parse { line, msg: format!("`{key}` needs {count} values, got {}", vals.len()) });
    }
    Ok(vals)
}

fn diag(d: usize, v: f64) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = v;
    }
    m
}

/// Lower Cholesky factor of a symmetric row-major matrix.
fn cholesky(a: &[f64], d: usize) -> std::result::Result<Vec<f64>, String> {
    if a.len() != d * d {
        return Err(format!("covariance must have {} entries, got {}", d * d, a.len()));
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for i in 0..d {
        for j in 0..i {
            if (a[i * d + j] - a[j * d + i]).abs() > 1e-12 * scale {
                return Err(format!("covariance not symmetric at ({i}, {j})"));
            }
        }
    }
    let mut l = vec![0.0; d * d];
    for j in 0..d {
        let mut s = a[j * d + j];
        for k in 0..j {
            s -= l[j * d + k] * l[j * d + k];
        }
        if !(s > PIVOT_TOL) {
            return Err(format!("covariance not positive definite (pivot {s:e} at {j})"));
        }
        let ljj = s.sqrt();
        l[j * d + j] = ljj;
        for i in j + 1..d {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            l[i * d + j] = s / ljj;
        }
    }
    Ok(l)
}

/// A density on `[0, L]^d`.
#[derive(Clone, Debug)]
pub enum ReferenceDistribution {
    Uniform { dim: usize, l: f64 },
    IsoGaussian { mean: Vec<f64>, var: f64 },
    Gmm(Gmm),
}

impl ReferenceDistribution {
    pub fn uniform(dim: usize, l: f64) -> Self {
        Self::Uniform { dim, l }
    }

    pub fn iso_gaussian(mean: Vec<f64>, var: f64) -> Result<Self> {
        if mean.is_empty() || !(var > 0.0) {
            return Err(Error::arg("isotropic Gaussian needs a mean and positive variance"));
        }
        Ok(Self::IsoGaussian { mean, var })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Uniform { dim, .. } => *dim,
            Self::IsoGaussian { mean, .. } => mean.len(),
            Self::Gmm(g) => g.dim(),
        }
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        match self {
            Self::Uniform { dim, l } => {
                if x.iter().all(|&v| (0.0..=*l).contains(&v)) {
                    l.powi(-(*dim as i32))
                } else {
                    0.0
                }
            }
            Self::IsoGaussian { mean, var } => {
                let q: f64 = x.iter().zip(mean).map(|(a, b)| (a - b) * (a - b)).sum();
                (-0.5 * q / var).exp() / (2.0 * std::f64::consts::PI * var).powf(0.5 * mean.len() as f64)
            }
            Self::Gmm(g) => g.pdf(x),
        }
    }

    /// Draw one point. Gaussian samples may fall outside the domain.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Self::Uniform { dim, l } => (0..*dim).map(|_| rng.random::<f64>() * l).collect(),
            Self::IsoGaussian { mean, var } => {
                let s = var.sqrt();
                mean.iter().map(|m| m + s * Distribution::<f64>::sample(&StandardNormal, rng)).collect()
            }
            Self::Gmm(g) => g.sample(rng),
        }
    }

    /// High-density points: component means, or nothing for the uniform.
    pub fn modes(&self) -> Vec<Vec<f64>> {
        match self {
            Self::Uniform { .. } => Vec::new(),
            Self::IsoGaussian { mean, .. } => vec![mean.clone()],
            Self::Gmm(g) => g.means().to_vec(),
        }
    }

    /// Short stable description used in cache fingerprints and manifests.
    pub fn describe(&self) -> String {
        match self {
            Self::Uniform { dim, l } => format!("uniform {dim} {l:e}"),
            Self::IsoGaussian { mean, var } => {
                format!("iso {var:e} {}", mean.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" "))
            }
            Self::Gmm(g) => g.to_text(),
        }
    }
}

/// Affine bijection between a task-space box and `[0, L]^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainMap {
    lower: Vec<f64>,
    upper: Vec<f64>,
    l: f64,
}

impl DomainMap {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, l: f64) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::shape("domain bounds must have equal positive length"));
        }
        if lower.iter().zip(&upper).any(|(a, b)| !(b > a)) {
            return Err(Error::arg("upper bound must exceed lower bound in every coordinate"));
        }
        if !(l > 0.0) {
            return Err(Error::arg("edge length must be positive"));
        }
        Ok(Self { lower, upper, l })
    }

    /// Bounding box of `points` padded by `margin` times its extent on each side.
    pub fn fit(points: &[Vec<f64>], margin: f64, l: f64) -> Result<Self> {
        let d = points.first().map_or(0, Vec::len);
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in points {
            for i in 0..d {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        for i in 0..d {
            let span = (hi[i] - lo[i]).max(1e-6);
            lo[i] -= margin * span;
            hi[i] += margin * span;
        }
        Self::new(lo, hi, l)
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn forward(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (a, b))| self.l * (v - a) / (b - a))
            .collect()
    }

    pub fn inverse(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (a, b))| a + v / self.l * (b - a))
            .collect()
    }

    /// Per-axis scale `L / (upper - lower)`; a covariance maps as `S C S`.
    pub fn scales(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(a, b)| self.l / (b - a)).collect()
    }

    /// Push a task-space GMM into the ergodic domain.
    pub fn forward_gmm(&self, g: &Gmm) -> Result<Gmm> {
        let s = self.scales();
        let d = g.dim();
        let means = g.means().iter().map(|m| self.forward(m)).collect();
        let covs = (0..g.n_components())
            .map(|c| {
                let cov = g.covariance(c);
                (0..d * d).map(|ij| cov[ij] * s[ij / d] * s[ij % d]).collect()
            })
            .collect();
        Gmm::new(g.weights().to_vec(), means, covs)
    }
}

pub fn pdf(dist: &ReferenceDistribution, x: &[f64]) -> f64 {
    dist.pdf(x)
}

pub fn sample<R: Rng + ?Sized>(dist: &ReferenceDistribution, rng: &mut R) -> Vec<f64> {
    dist.sample(rng)
}

pub fn map_forward(m: &DomainMap, y: &[f64]) -> Vec<f64> {
    m.forward(y)
}

pub fn map_inverse(m: &DomainMap, x: &[f64]) -> Vec<f64> {
    m.inverse(x)
}

pub fn gmm_from_file(path: impl AsRef<Path>) -> Result<Gmm> {
    Gmm::from_file(path)
}

/// Multivariate normal density through nalgebra, used as an independent check.
#[cfg(test)]
fn normal_pdf_direct(x: &[f64], mu: &[f64], cov: &DMatrix<f64>) -> f64 {
    let d = x.len();
    let diff = nalgebra::DVector::from_iterator(d, x.iter().zip(mu).map(|(a, b)| a - b));
    let inv = cov.clone().try_inverse().unwrap();
    let q = (diff.transpose() * inv * &diff)[(0, 0)];
    (-0.5 * q).exp() / ((2.0 * std::f64::consts::PI).powi(d as i32) * cov.determinant()).sqrt()
}
