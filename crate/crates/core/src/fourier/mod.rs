//! Cosine basis on `[0, L]^d`, Gauss-Legendre quadrature, the frequency
//! weights Λ, and Fourier coefficients of a density computed in TT form.

mod coeffs;
mod oracle;

pub use coeffs::{
    discretize_pdf, discretize_pdf_with, fourier_coeffs, lambda_tensor, lambda_tensor_with, lambda_value,
    CoeffOptions, CoefficientSet, PrecomputeStats,
};
pub use oracle::{fourier_coeffs_oracle, fourier_coeffs_oracle_tol, integrate_adaptive};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tt::{tt_rank1, TtTensor};

/// Basis and quadrature parameters shared by every tensor of one problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisConfig {
    pub d: usize,
    /// Basis functions per dimension.
    pub k: usize,
    /// Domain edge length.
    pub l: f64,
    /// Quadrature nodes per dimension.
    pub n: usize,
}

impl BasisConfig {
    /// Config with the default quadrature degree for `k`.
    pub fn new(d: usize, k: usize, l: f64) -> Result<Self> {
        Self::with_n(d, k, l, default_quadrature_degree(k))
    }

    pub fn with_n(d: usize, k: usize, l: f64, n: usize) -> Result<Self> {
        let cfg = Self { d, k, l, n };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.k == 0 || self.n == 0 {
            return Err(Error::arg(format!("d, K and N must be positive (d={}, K={}, N={})", self.d, self.k, self.n)));
        }
        if !(self.l > 0.0) || !self.l.is_finite() {
            return Err(Error::arg(format!("domain length must be positive, got {}", self.l)));
        }
        Ok(())
    }

    pub fn mode_sizes(&self) -> Vec<usize> {
        vec![self.k; self.d]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.d && x.iter().all(|&v| (0.0..=self.l).contains(&v))
    }
}

/// `max(10, 6K)`. Products of two basis functions oscillate up to
/// `2(K - 1)` times across the domain; with `6K` nodes the discrete Gram
/// matrix is the identity to about 1e-14.
pub fn default_quadrature_degree(k: usize) -> usize {
    (6 * k).max(10)
}

/// Gauss-Legendre nodes and weights on `[0, L]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn quadrature_rule(n: usize, l: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::arg("quadrature needs at least one node"));
    }
    if !(l > 0.0) {
        return Err(Error::arg(format!("domain length must be positive, got {l}")));
    }
    let (t, w) = gauss_legendre(n);
    Ok(QuadratureRule {
        nodes: t.iter().map(|&s| 0.5 * l * (s + 1.0)).collect(),
        weights: w.iter().map(|&v| 0.5 * l * v).collect(),
    })
}

/// Nodes (ascending) and weights on `[-1, 1]` by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

/// `1 / h_k` with `h_1 = sqrt(L)`, `h_k = sqrt(L/2)`.
#[inline]
fn norm_factor(k0: usize, l: f64) -> f64 {
    if k0 == 0 {
        1.0 / l.sqrt()
    } else {
        (2.0 / l).sqrt()
    }
}

/// Fill `out[k]` with `phi_{k+1}(x)` without domain checks.
#[inline]
pub(crate) fn basis_into(x: f64, l: f64, out: &mut [f64]) {
    let w = 2.0 * PI * x / l;
    for (k0, o) in out.iter_mut().enumerate() {
        *o = norm_factor(k0, l) * (k0 as f64 * w).cos();
    }
}

#[inline]
pub(crate) fn basis_grad_into(x: f64, l: f64, out: &mut [f64]) {
    let w = 2.0 * PI * x / l;
    for (k0, o) in out.iter_mut().enumerate() {
        let f = 2.0 * PI * k0 as f64 / l;
        *o = -f * norm_factor(k0, l) * (k0 as f64 * w).sin();
    }
}

fn check_point(x: f64, cfg: &BasisConfig) -> Result<()> {
    if !(0.0..=cfg.l).contains(&x) {
        return Err(Error::Domain(format!("{x} not in [0, {}]", cfg.l)));
    }
    Ok(())
}

/// Normalized cosines `phi_k(x) = cos(2 pi (k-1) x / L) / h_k`, `k = 1..K`.
pub fn basis_eval(x: f64, cfg: &BasisConfig) -> Result<Vec<f64>> {
    check_point(x, cfg)?;
    let mut out = vec![0.0; cfg.k];
    basis_into(x, cfg.l, &mut out);
    Ok(out)
}

pub fn basis_grad(x: f64, cfg: &BasisConfig) -> Result<Vec<f64>> {
    check_point(x, cfg)?;
    let mut out = vec![0.0; cfg.k];
    basis_grad_into(x, cfg.l, &mut out);
    Ok(out)
}

fn check_state(x: &[f64], cfg: &BasisConfig) -> Result<()> {
    if x.len() != cfg.d {
        return Err(Error::shape(format!("state has {} coordinates, expected {}", x.len(), cfg.d)));
    }
    x.iter().try_for_each(|&v| check_point(v, cfg))
}

/// Rank-1 tensor `Phi(x)` with elements `prod_i phi_{k_i}(x_i)`.
pub fn phi_tensor(x: &[f64], cfg: &BasisConfig) -> Result<TtTensor> {
    check_state(x, cfg)?;
    let vs: Vec<Vec<f64>> = x.iter().map(|&v| basis_eval(v, cfg)).collect::<Result<_>>()?;
    tt_rank1(&vs)
}

/// Rank-1 tensor `dPhi(x)/dx_i`; `i` is 0-based.
pub fn grad_phi_tensor(x: &[f64], i: usize, cfg: &BasisConfig) -> Result<TtTensor> {
    check_state(x, cfg)?;
    if i >= cfg.d {
        return Err(Error::arg(format!("gradient dimension {i} out of range for d = {}", cfg.d)));
    }
    let vs: Vec<Vec<f64>> = x
        .iter()
        .enumerate()
        .map(|(j, &v)| if j == i { basis_grad(v, cfg) } else { basis_eval(v, cfg) })
        .collect::<Result<_>>()?;
    tt_rank1(&vs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tt::{tt_to_dense, IndexTuple};
    use proptest::prelude::*;

    fn cfg(d: usize, k: usize) -> BasisConfig {
        BasisConfig::new(d, k, 1.0).unwrap()
    }

    #[test]
    fn basis_at_origin_and_center() {
        let c = cfg(1, 3);
        let v = basis_eval(0.0, &c).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15 && (v[1] - 2f64.sqrt()).abs() < 1e-15 && (v[2] - 2f64.sqrt()).abs() < 1e-15);
        let v = basis_eval(0.5, &c).unwrap();
        assert!((v[1] + 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(basis_eval(1.1, &c), Err(Error::Domain(_))));
        assert!(basis_grad(-0.1, &c).is_err());
    }

    #[test]
    fn orthonormal_under_adequate_quadrature() {
        let c = cfg(1, 5);
        let rule = quadrature_rule(c.n, c.l).unwrap();
        let gram = |a: usize, b: usize| -> f64 {
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&x, &w)| {
                    let v = basis_eval(x, &c).unwrap();
                    w * v[a] * v[b]
                })
                .sum()
        };
        for a in 0..5 {
            for b in 0..5 {
                let e = if a == b { 1.0 } else { 0.0 };
                assert!((gram(a, b) - e).abs() < 1e-10, "({a},{b}) {}", gram(a, b));
            }
        }
    }

    #[test]
    fn ten_nodes_do_not_resolve_five_cosines() {
        // phi_5^2 oscillates eight times; a 10-point rule is far off.
        let c = BasisConfig::with_n(1, 5, 1.0, 10).unwrap();
        let rule = quadrature_rule(c.n, c.l).unwrap();
        let g55: f64 = rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| w * basis_eval(x, &c).unwrap()[4].powi(2)).sum();
        assert!((g55 - 1.0).abs() > 0.1);
    }

    #[test]
    fn gradient_vanishes_at_walls() {
        let c = cfg(1, 6);
        for x in [0.0, 1.0] {
            assert!(basis_grad(x, &c).unwrap().iter().all(|g| g.abs() < 1e-12));
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let c = cfg(1, 6);
        let h = 1e-6;
        let g = basis_grad(0.3, &c).unwrap();
        let (p, m) = (basis_eval(0.3 + h, &c).unwrap(), basis_eval(0.3 - h, &c).unwrap());
        for k in 0..6 {
            assert!((g[k] - (p[k] - m[k]) / (2.0 * h)).abs() < 1e-6);
        }
    }

    #[test]
    fn quadrature_small_cases() {
        let r = quadrature_rule(1, 1.0).unwrap();
        assert!((r.nodes[0] - 0.5).abs() < 1e-15 && (r.weights[0] - 1.0).abs() < 1e-15);
        let r = quadrature_rule(10, 1.0).unwrap();
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(r.nodes[0] > 0.0 && r.nodes[9] < 1.0);
        let r = quadrature_rule(2, 1.0).unwrap();
        let cube: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(3)).sum();
        assert!((cube - 0.25).abs() < 1e-14);
        assert!(quadrature_rule(0, 1.0).is_err());
    }

    #[test]
    fn quadrature_exact_to_degree_2n_minus_1() {
        for n in [3, 7, 16, 40] {
            let r = quadrature_rule(n, 2.0).unwrap();
            let p = 2 * n - 1;
            let q: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(p as i32)).sum();
            let exact = 2f64.powi(p as i32 + 1) / (p + 1) as f64;
            assert!((q - exact).abs() < 1e-12 * exact, "n={n}");
        }
    }

    #[test]
    fn grad_phi_tensor_structure() {
        let c = cfg(2, 4);
        let x = [0.2, 0.7];
        let g = grad_phi_tensor(&x, 1, &c).unwrap();
        let (p, dp) = (basis_eval(0.2, &c).unwrap(), basis_grad(0.7, &c).unwrap());
        assert_eq!(g.element(&IndexTuple(vec![3, 2])).unwrap(), p[2] * dp[1]);
        assert!(grad_phi_tensor(&x, 2, &c).is_err());
        let c5 = BasisConfig::new(5, 10, 1.0).unwrap();
        assert_eq!(grad_phi_tensor(&[0.5; 5], 0, &c5).unwrap().param_count(), 50);
    }

    #[test]
    fn grad_phi_tensor_dense_d3() {
        let c = cfg(3, 4);
        let x = [0.15, 0.6, 0.93];
        let g = tt_to_dense(&grad_phi_tensor(&x, 2, &c).unwrap()).unwrap();
        let v: Vec<Vec<f64>> = (0..2).map(|i| basis_eval(x[i], &c).unwrap()).collect();
        let dz = basis_grad(x[2], &c).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                for e in 0..4 {
                    assert_eq!(g.get(&[a, b, e]), v[0][a] * v[1][b] * dz[e]);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn grad_phi_matches_finite_differences(x0 in 0.01f64..0.99, x1 in 0.01f64..0.99, x2 in 0.01f64..0.99, i in 0usize..3) {
            let c = cfg(3, 5);
            let x = [x0, x1, x2];
            let h = 1e-6;
            let (mut xp, mut xm) = (x, x);
            xp[i] += h;
            xm[i] -= h;
            let g = tt_to_dense(&grad_phi_tensor(&x, i, &c).unwrap()).unwrap();
            let p = tt_to_dense(&phi_tensor(&xp, &c).unwrap()).unwrap();
            let m = tt_to_dense(&phi_tensor(&xm, &c).unwrap()).unwrap();
            for ((gv, pv), mv) in g.values().iter().zip(p.values()).zip(m.values()) {
                prop_assert!((gv - (pv - mv) / (2.0 * h)).abs() < 1e-5);
            }
        }
    }
}
