//! Quasi-maximal-volume row selection for tall matrices.

use nalgebra::DMatrix;

/// Growth factor a swap must beat before it is accepted.
const SWAP_TOL: f64 = 1.0 + 1e-2;
const MAX_SWAPS: usize = 200;

/// Pick `r` rows of the `n x r` matrix `a` (n >= r, full column rank) whose
/// square submatrix has locally maximal |det|.
///
/// Rows are seeded by a column-pivoted QR of `a^T` and then improved by greedy
/// row swaps until no entry of `a * a[rows]^{-1}` exceeds `1 + 1e-2` in
/// magnitude.
pub fn maxvol(a: &DMatrix<f64>) -> Vec<usize> {
    let (n, r) = a.shape();
    assert!(n >= r && r > 0, "maxvol needs a tall matrix, got {n}x{r}");
    let mut rows = pivoted_rows(a);
    if n == r {
        return rows;
    }
    let Some(mut b) = interp_matrix(a, &rows) else {
        return rows;
    };
    for _ in 0..MAX_SWAPS {
        let (mut bi, mut bj, mut best) = (0, 0, 0.0);
        for j in 0..r {
            for i in 0..n {
                let v = b[(i, j)].abs();
                if v > best {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if best <= SWAP_TOL {
            break;
        }
        // Replace pivot row j by row i and update B with a rank-1 correction:
        // B <- B - B[:, j] (B[i, :] - e_j^T) / B[i, j].
        let pivot = b[(bi, bj)];
        let col: Vec<f64> = (0..n).map(|t| b[(t, bj)]).collect();
        let mut row: Vec<f64> = (0..r).map(|t| b[(bi, t)]).collect();
        row[bj] -= 1.0;
        for t in 0..n {
            let f = col[t] / pivot;
            if f == 0.0 {
                continue;
            }
            for (s, &rv) in row.iter().enumerate() {
                b[(t, s)] -= f * rv;
            }
        }
        rows[bj] = bi;
    }
    rows
}

/// Greedy pivot rows via Gram-Schmidt with column pivoting on `a^T`: at each
/// step take the row with the largest residual norm.
fn pivoted_rows(a: &DMatrix<f64>) -> Vec<usize> {
    let (n, r) = a.shape();
    let mut res: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).iter().copied().collect()).collect();
    let mut taken = vec![false; n];
    let mut rows = Vec::with_capacity(r);
    for _ in 0..r {
        let (mut best, mut arg) = (-1.0, 0);
        for (i, v) in res.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let nrm: f64 = v.iter().map(|x| x * x).sum();
            if nrm > best {
                best = nrm;
                arg = i;
            }
        }
        taken[arg] = true;
        rows.push(arg);
        let nrm = best.sqrt();
        if nrm == 0.0 {
            continue;
        }
        let q: Vec<f64> = res[arg].iter().map(|x| x / nrm).collect();
        for (i, v) in res.iter_mut().enumerate() {
            if taken[i] {
                continue;
            }
            let proj: f64 = v.iter().zip(&q).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(&q) {
                *x -= proj * y;
            }
        }
    }
    rows
}

/// `a * a[rows]^{-1}`, or `None` if the pivot block is singular.
pub(crate) fn interp_matrix(a: &DMatrix<f64>, rows: &[usize]) -> Option<DMatrix<f64>> {
    let sub = a.select_rows(rows);
    // X sub = A  <=>  sub^T X^T = A^T
    let lu = sub.transpose().lu();
    let xt = lu.solve(&a.transpose())?;
    if xt.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(xt.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, r: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, r, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn square_matrix_selects_all_rows() {
        let a = random(4, 4, 1);
        let mut rows = maxvol(&a);
        rows.sort();
        assert_eq!(rows, vec![0, 1, 2, 3]);
    }

    #[test]
    fn interpolation_coefficients_are_bounded() {
        for seed in 0..10 {
            let a = random(50, 5, seed);
            let rows = maxvol(&a);
            let mut uniq = rows.clone();
            uniq.sort();
            uniq.dedup();
            assert_eq!(uniq.len(), 5);
            let b = interp_matrix(&a, &rows).unwrap();
            assert!(b.iter().all(|v| v.abs() <= SWAP_TOL + 1e-9));
        }
    }

    #[test]
    fn finds_the_dominant_row() {
        let mut a = random(30, 1, 3);
        a[(17, 0)] = 100.0;
        assert_eq!(maxvol(&a), vec![17]);
    }

    #[test]
    fn volume_beats_random_choice() {
        let a = random(40, 4, 9);
        let rows = maxvol(&a);
        let vol = a.select_rows(&rows).determinant().abs();
        let naive = a.select_rows(&[0, 1, 2, 3]).determinant().abs();
        assert!(vol >= naive);
    }
}
