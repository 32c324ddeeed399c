//! Small descriptive statistics shared by tests, the simulator and the CLI.

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn std_dev(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

pub fn median(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Pearson correlation; zero when either input is constant.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

/// Fraction of `points` in each cell of a `bins x bins` grid over `[0, l]^2`
/// spanned by coordinates `i` and `j`; row index follows `i`. Points on the
/// upper edge fall in the last cell.
pub fn occupancy_2d(points: &[Vec<f64>], i: usize, j: usize, bins: usize, l: f64) -> Vec<f64> {
    let mut h = vec![0.0; bins * bins];
    if points.is_empty() || bins == 0 {
        return h;
    }
    let cell = |v: f64| ((v / l * bins as f64).floor().max(0.0) as usize).min(bins - 1);
    for p in points {
        h[cell(p[i]) * bins + cell(p[j])] += 1.0;
    }
    let n = points.len() as f64;
    h.iter_mut().for_each(|v| *v /= n);
    h
}

/// Cell centers of the grid used by [`occupancy_2d`], in the same order.
pub fn grid_centers(bins: usize, l: f64) -> Vec<[f64; 2]> {
    let h = l / bins as f64;
    (0..bins * bins).map(|c| [(c / bins) as f64 * h + 0.5 * h, (c % bins) as f64 * h + 0.5 * h]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
        assert!((std_dev(&[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-15);
        assert!((correlation(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.5]) - 0.9986).abs() < 1e-3);
        assert!((slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn occupancy_cells() {
        let pts = vec![vec![0.1, 0.9], vec![1.0, 0.0], vec![0.1, 0.95], vec![0.5, 0.5]];
        let h = occupancy_2d(&pts, 0, 1, 2, 1.0);
        assert_eq!(h, vec![0.0, 0.5, 0.25, 0.25]);
        let swapped = occupancy_2d(&pts, 1, 0, 2, 1.0);
        assert_eq!(swapped, vec![0.0, 0.25, 0.5, 0.25]);
        let c = grid_centers(2, 1.0);
        assert_eq!(c[1], [0.25, 0.75]);
        assert_eq!(c[2], [0.75, 0.25]);
    }
}
