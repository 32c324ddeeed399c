//! Deterministic sweep patterns as polylines followed at constant speed.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::SymmetricEigen;

use crate::distributions::Gmm;
use crate::error::{Error, Result};

/// Angular resolution of spiral polylines.
const QUARTER_STEPS: usize = 16;

/// Point sequence walked by arclength.
#[derive(Clone, Debug)]
pub struct Polyline {
    points: Vec<Vec<f64>>,
    /// Cumulative arclength at each point.
    arc: Vec<f64>,
}

impl Polyline {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::arg("a polyline needs at least one point"));
        }
        let mut arc = Vec::with_capacity(points.len());
        arc.push(0.0);
        for w in points.windows(2) {
            let last = *arc.last().unwrap();
            arc.push(last + dist(&w[0], &w[1]));
        }
        Ok(Self { points, arc })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        *self.arc.last().unwrap()
    }

    /// Point at arclength `s`, clamped to the ends.
    pub fn at(&self, s: f64) -> Vec<f64> {
        if s <= 0.0 {
            return self.points[0].clone();
        }
        if s >= self.length() {
            return self.points.last().unwrap().clone();
        }
        let i = self.arc.partition_point(|&a| a <= s) - 1;
        let seg = self.arc[i + 1] - self.arc[i];
        let f = if seg > 0.0 { (s - self.arc[i]) / seg } else { 0.0 };
        self.points[i].iter().zip(&self.points[i + 1]).map(|(a, b)| a + f * (b - a)).collect()
    }

    /// Append `other`, joined by a straight segment.
    pub fn extend(&mut self, other: &Polyline) {
        for p in &other.points {
            let last = *self.arc.last().unwrap();
            let step = dist(self.points.last().unwrap(), p);
            self.arc.push(last + step);
            self.points.push(p.clone());
        }
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Archimedean spiral `r = c θ` with ring gap `gap`, so `c = gap / 2π`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spiral {
    pub center: [f64; 2],
    pub gap: f64,
}

impl Spiral {
    pub fn pitch(&self) -> f64 {
        self.gap / TAU
    }

    pub fn radius_at(&self, theta: f64) -> f64 {
        self.pitch() * theta
    }

    pub fn point(&self, theta: f64) -> [f64; 2] {
        let r = self.radius_at(theta);
        [self.center[0] + r * theta.cos(), self.center[1] + r * theta.sin()]
    }

    /// Angles from 0 until the radius reaches `r_max`, on a grid that
    /// contains every multiple of `π/2`.
    fn thetas(&self, r_max: f64) -> Vec<f64> {
        let end = r_max / self.pitch();
        let quarters = (end / FRAC_PI_2).ceil() as usize;
        (0..=quarters * QUARTER_STEPS).map(|i| i as f64 * FRAC_PI_2 / QUARTER_STEPS as f64).collect()
    }
}

fn clamp_point(p: &mut [f64], l: f64) {
    for v in p {
        *v = v.clamp(0.0, l);
    }
}

/// Planar spiral from the domain center out to the corners, clamped to the
/// box.
pub fn spiral_2d(l: f64, gap: f64) -> Result<Polyline> {
    check_gap(gap)?;
    let s = Spiral { center: [0.5 * l, 0.5 * l], gap };
    let r_max = l * std::f64::consts::FRAC_1_SQRT_2;
    let pts = s
        .thetas(r_max)
        .into_iter()
        .map(|t| {
            let mut p = s.point(t).to_vec();
            clamp_point(&mut p, l);
            p
        })
        .collect();
    Polyline::new(pts)
}

/// Cylindrical extension: the planar spiral is traced outward then inward on
/// alternate passes while the height moves linearly by `gap` per pass, from
/// `z0` up to `l` and back down.
pub fn spiral_3d(l: f64, gap: f64, z0: f64) -> Result<Polyline> {
    check_gap(gap)?;
    let plane = spiral_2d(l, gap)?;
    let n = plane.points().len();
    let mut pts = Vec::new();
    let mut z = z0.clamp(0.0, l);
    let mut dir = 1.0;
    let mut pass = 0usize;
    // Up and down once, bounded by the number of layers in each direction.
    let layers = (l / gap).ceil() as usize + 1;
    while pass < 2 * layers {
        let z_end = (z + dir * gap).clamp(0.0, l);
        for j in 0..n {
            let i = if pass.is_multiple_of(2) { j } else { n - 1 - j };
            let f = j as f64 / (n - 1).max(1) as f64;
            let p = &plane.points()[i];
            pts.push(vec![p[0], p[1], z + f * (z_end - z)]);
        }
        z = z_end;
        if z >= l || z <= 0.0 {
            dir = -dir;
        }
        pass += 1;
    }
    Polyline::new(pts)
}

fn check_gap(gap: f64) -> Result<()> {
    if !(gap > 0.0) {
        return Err(Error::arg(format!("spiral gap must be positive, got {gap}")));
    }
    Ok(())
}

/// Principal axes of a component: columns scaled by the standard deviation.
fn principal_axes(g: &Gmm, c: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let d = g.dim();
    let eig = SymmetricEigen::new(g.covariance_matrix(c));
    let sig: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
    let axes = (0..d).map(|j| eig.eigenvectors.column(j).iter().copied().collect()).collect();
    (axes, sig)
}

fn map_local(mean: &[f64], axes: &[Vec<f64>], sig: &[f64], y: &[f64]) -> Vec<f64> {
    let mut p = mean.to_vec();
    for ((a, s), yv) in axes.iter().zip(sig).zip(y) {
        for (pi, ai) in p.iter_mut().zip(a) {
            *pi += ai * s * yv;
        }
    }
    p
}

/// Planar spiral in standardized coordinates out to radius `extent`,
/// finishing with one full circle at `extent`.
fn unit_spiral(extent: f64, gap: f64) -> Vec<[f64; 2]> {
    if extent <= 0.0 {
        return vec![[0.0, 0.0]];
    }
    let s = Spiral { center: [0.0, 0.0], gap };
    let mut pts: Vec<[f64; 2]> = s.thetas(extent).into_iter().map(|t| s.point(t)).collect();
    pts.retain(|p| (p[0] * p[0] + p[1] * p[1]).sqrt() < extent);
    let steps = 4 * QUARTER_STEPS;
    let start = pts.last().map_or(0.0, |p| p[1].atan2(p[0]));
    let start = (start / FRAC_PI_2).ceil() * FRAC_PI_2;
    pts.extend((0..=steps).map(|i| {
        let t = start + TAU * i as f64 / steps as f64;
        [extent * t.cos(), extent * t.sin()]
    }));
    pts
}

/// Spiral sweep of every component out to `n_sigma` standard deviations,
/// heaviest component first. 3D components are swept as a stack of planar
/// spirals along their third principal axis; the middle slice and both
/// poles reach `n_sigma` along each axis.
pub fn gmm_spiral(g: &Gmm, l: f64, gap: f64, n_sigma: f64) -> Result<Polyline> {
    check_gap(gap)?;
    let d = g.dim();
    if !(2..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let mut order: Vec<usize> = (0..g.n_components()).collect();
    order.sort_by(|&a, &b| g.weights()[b].total_cmp(&g.weights()[a]));
    let mut pts = Vec::new();
    for c in order {
        let (axes, sig) = principal_axes(g, c);
        let mean = &g.means()[c];
        let s_max = sig.iter().cloned().fold(0.0, f64::max);
        // Gap in standardized units so the widest axis gets the physical gap.
        let unit_gap = if s_max > 0.0 { gap / s_max } else { n_sigma };
        if d == 2 {
            for p in unit_spiral(n_sigma, unit_gap) {
                pts.push(map_local(mean, &axes, &sig, &p));
            }
        } else {
            let m = ((2.0 * n_sigma / unit_gap).ceil() as usize).max(1);
            // Even interval count so z = 0 is a slice.
            let m = m + m % 2;
            for i in 0..=m {
                let z = -n_sigma + 2.0 * n_sigma * i as f64 / m as f64;
                let z = if 2 * i == m { 0.0 } else { z };
                let r = (n_sigma * n_sigma - z * z).max(0.0).sqrt();
                let mut slice = unit_spiral(r, unit_gap);
                if i % 2 == 1 {
                    slice.reverse();
                }
                for p in slice {
                    pts.push(map_local(mean, &axes, &sig, &[p[0], p[1], z]));
                }
            }
        }
    }
    for p in &mut pts {
        clamp_point(p, l);
    }
    Polyline::new(pts)
}

/// Largest standardized excursion along each principal axis of component
/// `c` over the given points (unclamped points give exactly `n_sigma`).
pub fn sweep_extent(g: &Gmm, c: usize, points: &[Vec<f64>]) -> Vec<f64> {
    let (axes, sig) = principal_axes(g, c);
    let mean = &g.means()[c];
    (0..g.dim())
        .map(|j| {
            points
                .iter()
                .map(|p| {
                    let proj: f64 = p.iter().zip(mean).zip(&axes[j]).map(|((a, m), e)| (a - m) * e).sum();
                    (proj / sig[j]).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect()
}
