//! Gaussian elimination over Q.

use num_rational::BigRational;
use num_traits::{One, Zero};

/// Reduced row echelon form and pivot columns.
pub fn rref(rows: &[Vec<BigRational>]) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let mut a: Vec<Vec<BigRational>> = rows.to_vec();
    let n_rows = a.len();
    let n_cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n_cols {
        if r == n_rows {
            break;
        }
        let Some(p) = (r..n_rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = BigRational::one() / &a[r][c];
        for v in a[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..n_rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in c..n_cols {
                    let d = &f * &a[r][j];
                    a[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(rows: &[Vec<BigRational>]) -> usize {
    rref(rows).1.len()
}

/// Basis of `{x : rows · x = 0}` for `n_cols` unknowns.
pub fn nullspace(rows: &[Vec<BigRational>], n_cols: usize) -> Vec<Vec<BigRational>> {
    let (r, pivots) = rref(rows);
    let free: Vec<usize> = (0..n_cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![BigRational::zero(); n_cols];
            x[f] = BigRational::one();
            for (i, &p) in pivots.iter().enumerate() {
                x[p] = -&r[i][f];
            }
            x
        })
        .collect()
}

/// One solution `X` of `A·X = B` (columns of `B` solved jointly), if consistent.
pub fn solve(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n_rows = a.len();
    if n_rows == 0 {
        return None;
    }
    let n = a[0].len();
    let k = b.first().map_or(0, Vec::len);
    let aug: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(ar, br)| ar.iter().chain(br.iter()).cloned().collect())
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.iter().any(|&p| p >= n) {
        return None;
    }
    let mut x = vec![vec![BigRational::zero(); k]; n];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = r[i][n..].to_vec();
    }
    Some(x)
}

pub fn inverse(a: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = a.len();
    let id: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigRational::one() } else { BigRational::zero() })
                .collect()
        })
        .collect();
    if rank(a) != n {
        return None;
    }
    solve(a, &id)
}
