//! Unit quaternions, their tangent charts, and the 6D pose encoding.
//!
//! Log and Exp use the half-angle convention `q = [cos|v|, sin|v| v/|v|]`,
//! so a rotation by `θ` has tangent norm `θ/2`. Log canonicalizes to
//! `qs >= 0`, which makes `q` and `-q` share one tangent vector.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitQuaternion {
    pub qs: f64,
    pub qv: [f64; 3],
}

/// Below this vector norm Log returns zero.
const AXIS_EPS: f64 = 1e-12;

impl UnitQuaternion {
    pub const IDENTITY: Self = Self { qs: 1.0, qv: [0.0; 3] };

    /// Normalizes `(qs, qv)`. Fails on a zero quaternion or non-finite input.
    pub fn new(qs: f64, qv: [f64; 3]) -> Result<Self> {
        let n = (qs * qs + norm3(&qv).powi(2)).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Domain(format!("cannot normalize quaternion ({qs}, {qv:?})")));
        }
        Ok(Self { qs: qs / n, qv: qv.map(|v| v / n) })
    }

    pub fn norm(&self) -> f64 {
        (self.qs * self.qs + norm3(&self.qv).powi(2)).sqrt()
    }

    pub fn conj(&self) -> Self {
        Self { qs: self.qs, qv: self.qv.map(|v| -v) }
    }

    pub fn neg(&self) -> Self {
        Self { qs: -self.qs, qv: self.qv.map(|v| -v) }
    }

    /// Hamilton product `self * o`.
    pub fn mul(&self, o: &Self) -> Self {
        let (a, u) = (self.qs, self.qv);
        let (b, v) = (o.qs, o.qv);
        let c = cross(&u, &v);
        Self {
            qs: a * b - dot3(&u, &v),
            qv: [a * v[0] + b * u[0] + c[0], a * v[1] + b * u[1] + c[1], a * v[2] + b * u[2] + c[2]],
        }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.qs, self.qv[0], self.qv[1], self.qv[2]]
    }
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Tangent vector at the identity.
pub fn qlog(q: &UnitQuaternion) -> [f64; 3] {
    let q = if q.qs < 0.0 { q.neg() } else { *q };
    let n = norm3(&q.qv);
    if n < AXIS_EPS {
        return [0.0; 3];
    }
    // atan2 keeps full precision near qs = 1, where acos does not.
    let angle = n.atan2(q.qs);
    q.qv.map(|v| angle * v / n)
}

pub fn qexp(v: &[f64; 3]) -> UnitQuaternion {
    let n = norm3(v);
    if n == 0.0 {
        return UnitQuaternion::IDENTITY;
    }
    let s = n.sin() / n;
    UnitQuaternion { qs: n.cos(), qv: v.map(|x| s * x) }
}

/// `Log(conj(g) * q)`.
pub fn qlog_at(g: &UnitQuaternion, q: &UnitQuaternion) -> [f64; 3] {
    qlog(&g.conj().mul(q))
}

/// `g * Exp(v)`.
pub fn qexp_at(g: &UnitQuaternion, v: &[f64; 3]) -> UnitQuaternion {
    g.mul(&qexp(v))
}

/// Geodesic distance in the tangent chart.
pub fn qdist(a: &UnitQuaternion, b: &UnitQuaternion) -> f64 {
    norm3(&qlog_at(a, b))
}

/// Result of [`qmean`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuaternionMean {
    pub mean: UnitQuaternion,
    pub iterations: usize,
    /// Norm of the tangent-space average at `mean`.
    pub residual: f64,
}

/// Riemannian mean by iterated tangent averaging, started at the first
/// element. Points at the cut locus of the iterate (distance `π/2` in this
/// chart) are rejected.
pub fn qmean(qs: &[UnitQuaternion], tol: f64, max_iter: usize) -> Result<QuaternionMean> {
    let first = qs.first().ok_or_else(|| Error::arg("qmean of an empty list"))?;
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::arg("qmean needs tol > 0 and max_iter >= 1"));
    }
    let cut = std::f64::consts::FRAC_PI_2 - 1e-6;
    let mut mu = *first;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let mut avg = [0.0; 3];
        for q in qs {
            let v = qlog_at(&mu, q);
            if norm3(&v) > cut {
                return Err(Error::Domain(format!("{q:?} lies on the cut locus of the running mean")));
            }
            for (a, b) in avg.iter_mut().zip(v) {
                *a += b / qs.len() as f64;
            }
        }
        residual = norm3(&avg);
        if residual <= tol {
            return Ok(QuaternionMean { mean: mu, iterations: it, residual });
        }
        mu = renormalize(qexp_at(&mu, &avg));
    }
    Err(Error::Convergence { what: "quaternion mean".into(), estimate: residual })
}

fn renormalize(q: UnitQuaternion) -> UnitQuaternion {
    UnitQuaternion::new(q.qs, q.qv).unwrap_or(q)
}

/// `[p, Log_anchor(q)]`.
pub fn pose_encode(p: &[f64; 3], q: &UnitQuaternion, anchor: &UnitQuaternion) -> [f64; 6] {
    let v = qlog_at(anchor, q);
    [p[0], p[1], p[2], v[0], v[1], v[2]]
}

pub fn pose_decode(x: &[f64], anchor: &UnitQuaternion) -> Result<([f64; 3], UnitQuaternion)> {
    if x.len() != 6 {
        return Err(Error::shape(format!("a pose vector has 6 entries, got {}", x.len())));
    }
    let v = [x[3], x[4], x[5]];
    Ok(([x[0], x[1], x[2]], renormalize(qexp_at(anchor, &v))))
}

/// Position and orientation read from a pose file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub p: [f64; 3],
    pub q: UnitQuaternion,
}

/// Rows `px py pz qw qx qy qz`; `#` starts a comment. Quaternions whose norm
/// is off by more than 1e-3 are rejected, the rest are normalized.
pub fn parse_poses(text: &str) -> Result<Vec<Pose>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let vals = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| err(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != 7 {
            return Err(err(format!("expected 7 values, found {}", vals.len())));
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(err("non-finite value".into()));
        }
        let raw_q = [vals[3], vals[4], vals[5], vals[6]];
        let n = raw_q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (n - 1.0).abs() > 1e-3 {
            return Err(err(format!("quaternion norm {n} is not 1")));
        }
        let q = UnitQuaternion::new(raw_q[0], [raw_q[1], raw_q[2], raw_q[3]])?;
        out.push(Pose { p: [vals[0], vals[1], vals[2]], q });
    }
    if out.is_empty() {
        return Err(Error::Parse { line: 0, msg: "no poses".into() });
    }
    Ok(out)
}

pub fn load_poses(path: impl AsRef<Path>) -> Result<Vec<Pose>> {
    parse_poses(&std::fs::read_to_string(path)?)
}

/// Anchor for a pose set: the Riemannian mean of its orientations.
pub fn pose_anchor(poses: &[Pose]) -> Result<UnitQuaternion> {
    let qs: Vec<UnitQuaternion> = poses.iter().map(|p| p.q).collect();
    Ok(qmean(&qs, 1e-9, 100)?.mean)
}
