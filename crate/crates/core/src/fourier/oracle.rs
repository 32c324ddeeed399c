//! Brute-force Fourier coefficients by nested adaptive Gauss-Kronrod
//! quadrature, one coefficient at a time. Test oracle only.

use super::{basis_into, BasisConfig};
use crate::distributions::ReferenceDistribution;
use crate::error::{Error, Result};
use crate::tt::DenseTensor;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the odd Kronrod nodes 1, 3, 5 and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 40;

/// Adaptive 15-point Gauss-Kronrod integral of `f` over `[a, b]` with
/// absolute tolerance `tol`.
pub fn integrate_adaptive(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    recurse(f, a, b, tol, 0)
}

fn recurse(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (k, g) = gk15(f, a, b);
    if (k - g).abs() <= tol.max(50.0 * f64::EPSILON * k.abs()) || depth >= MAX_DEPTH {
        return k;
    }
    let m = 0.5 * (a + b);
    recurse(f, a, m, 0.5 * tol, depth + 1) + recurse(f, m, b, 0.5 * tol, depth + 1)
}

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let (fl, fr) = (f(c - h * XGK[i]), f(c + h * XGK[i]));
        k += WGK[i] * (fl + fr);
        if i % 2 == 1 {
            g += WG[i / 2] * (fl + fr);
        }
    }
    (k * h, g * h)
}

/// Dense coefficients `w_k = int P(x) Phi_k(x) dx` for `d <= 3` with
/// absolute tolerance 1e-9 per nested integral.
pub fn fourier_coeffs_oracle(p: &ReferenceDistribution, cfg: &BasisConfig) -> Result<DenseTensor> {
    fourier_coeffs_oracle_tol(p, cfg, 1e-9)
}

pub fn fourier_coeffs_oracle_tol(p: &ReferenceDistribution, cfg: &BasisConfig, tol: f64) -> Result<DenseTensor> {
    cfg.validate()?;
    if cfg.d > 3 {
        return Err(Error::Size(cfg.k.pow(cfg.d as u32)));
    }
    if p.dim() != cfg.d {
        return Err(Error::shape(format!("density has dimension {}, basis has {}", p.dim(), cfg.d)));
    }
    DenseTensor::from_fn(cfg.mode_sizes(), |k| {
        let mut x = vec![0.0; cfg.d];
        nested(p, cfg, k, &mut x, 0, tol)
    })
}

fn nested(p: &ReferenceDistribution, cfg: &BasisConfig, k: &[usize], x: &mut Vec<f64>, level: usize, tol: f64) -> f64 {
    let mut phi = vec![0.0; cfg.k];
    let mut f = |t: f64| {
        x[level] = t;
        basis_into(t, cfg.l, &mut phi);
        let w = phi[k[level]];
        if level + 1 == cfg.d {
            w * p.pdf(x)
        } else {
            w * nested(p, cfg, k, x, level + 1, tol)
        }
    };
    integrate_adaptive(&mut f, 0.0, cfg.l, tol)
}
