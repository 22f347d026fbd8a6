use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::matrix::IntegerMatrix;

/// `U · A · V = D` with `U`, `V` unimodular and `D` diagonal, `d_1 | d_2 | …`, `d_i ≥ 0`.
///
/// The inverses of `U` and `V` are tracked alongside so lattice bases can be
/// read off without a second inversion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnfDecomposition {
    pub u: IntegerMatrix,
    pub d: IntegerMatrix,
    pub v: IntegerMatrix,
    #[serde(skip)]
    pub u_inv: IntegerMatrix,
    #[serde(skip)]
    pub v_inv: IntegerMatrix,
}

impl SnfDecomposition {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols()))
            .map(|i| self.d.get(i, i).clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }

    /// Nonzero invariant factors.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        self.diagonal().into_iter().filter(|d| !d.is_zero()).collect()
    }

    /// Exact check of every structural invariant against the input.
    pub fn verify(&self, a: &IntegerMatrix) -> bool {
        let Ok(ua) = self.u.mul(a) else { return false };
        let Ok(uav) = ua.mul(&self.v) else { return false };
        let diag = self.diagonal();
        let chain = diag.windows(2).all(|w| {
            if w[0].is_zero() {
                w[1].is_zero()
            } else {
                w[1].is_multiple_of(&w[0])
            }
        });
        uav == self.d
            && self.d.is_diagonal()
            && diag.iter().all(|x| !x.is_negative())
            && chain
            && self.u.is_unimodular()
            && self.v.is_unimodular()
            && self.u.mul(&self.u_inv).is_ok_and(|m| m.is_identity())
            && self.v.mul(&self.v_inv).is_ok_and(|m| m.is_identity())
    }
}

struct Reducer {
    a: IntegerMatrix,
    u: IntegerMatrix,
    u_inv: IntegerMatrix,
    v: IntegerMatrix,
    v_inv: IntegerMatrix,
}

impl Reducer {
    // Row operations act on A and U; the inverse operation acts on U⁻¹ from the right.
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap_rows(i, j);
        self.u.swap_rows(i, j);
        self.u_inv.swap_cols(i, j);
    }

    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        self.a.add_row_multiple(dst, src, q);
        self.u.add_row_multiple(dst, src, q);
        self.u_inv.add_col_multiple(src, dst, &-q);
    }

    fn negate_row(&mut self, i: usize) {
        self.a.negate_row(i);
        self.u.negate_row(i);
        self.u_inv.negate_col(i);
    }

    // Column operations act on A and V; the inverse acts on V⁻¹ from the left.
    fn swap_cols(&mut self, i: usize, j: usize) {
        self.a.swap_cols(i, j);
        self.v.swap_cols(i, j);
        self.v_inv.swap_rows(i, j);
    }

    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        self.a.add_col_multiple(dst, src, q);
        self.v.add_col_multiple(dst, src, q);
        self.v_inv.add_row_multiple(src, dst, &-q);
    }

    fn smallest_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, BigInt)> = None;
        for i in t..self.a.rows() {
            for j in t..self.a.cols() {
                let v = self.a.get(i, j);
                if v.is_zero() {
                    continue;
                }
                let m = v.abs();
                if best.as_ref().is_none_or(|(_, _, b)| m < *b) {
                    best = Some((i, j, m));
                }
            }
        }
        best.map(|(i, j, _)| (i, j))
    }

    /// Clear row and column `t` and enforce divisibility of the trailing block.
    fn reduce_at(&mut self, t: usize) -> bool {
        loop {
            let Some((pi, pj)) = self.smallest_pivot(t) else {
                return false;
            };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            let p = self.a.get(t, t).clone();
            let mut dirty = false;
            for i in t + 1..self.a.rows() {
                let x = self.a.get(i, t).clone();
                if x.is_zero() {
                    continue;
                }
                let q = x.div_floor(&p);
                self.add_row(i, t, &-q);
                dirty |= !self.a.get(i, t).is_zero();
            }
            for j in t + 1..self.a.cols() {
                let x = self.a.get(t, j).clone();
                if x.is_zero() {
                    continue;
                }
                let q = x.div_floor(&p);
                self.add_col(j, t, &-q);
                dirty |= !self.a.get(t, j).is_zero();
            }
            if dirty {
                continue;
            }
            let offender = (t + 1..self.a.rows()).find(|&i| {
                (t + 1..self.a.cols()).any(|j| !self.a.get(i, j).is_multiple_of(&p))
            });
            match offender {
                Some(i) => self.add_row(t, i, &BigInt::from(1)),
                None => {
                    if p.is_negative() {
                        self.negate_row(t);
                    }
                    return true;
                }
            }
        }
    }
}

/// Smith normal form with smallest-magnitude pivoting.
pub fn smith_normal_form(a: &IntegerMatrix) -> SnfDecomposition {
    let (r, c) = (a.rows(), a.cols());
    let mut red = Reducer {
        a: a.clone(),
        u: IntegerMatrix::identity(r),
        u_inv: IntegerMatrix::identity(r),
        v: IntegerMatrix::identity(c),
        v_inv: IntegerMatrix::identity(c),
    };
    for t in 0..r.min(c) {
        if !red.reduce_at(t) {
            break;
        }
    }
    SnfDecomposition {
        u: red.u,
        d: red.a,
        v: red.v,
        u_inv: red.u_inv,
        v_inv: red.v_inv,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn diag(a: &IntegerMatrix) -> Vec<i64> {
        smith_normal_form(a)
            .diagonal()
            .iter()
            .map(|d| i64::try_from(d).unwrap())
            .collect()
    }

    #[test]
    fn documented_examples() {
        assert_eq!(diag(&IntegerMatrix::identity(2)), vec![1, 1]);
        assert_eq!(diag(&IntegerMatrix::from_i64(&[&[2, 4], &[6, 8]])), vec![2, 4]);
        assert_eq!(diag(&IntegerMatrix::from_i64(&[&[0, 1], &[1, 0]])), vec![1, 1]);
        assert_eq!(diag(&IntegerMatrix::zeros(2, 3)), vec![0, 0]);
        assert_eq!(diag(&IntegerMatrix::from_i64(&[&[2, 0], &[0, 3]])), vec![1, 6]);
    }

    #[test]
    fn rectangular_inputs() {
        for m in [
            IntegerMatrix::from_i64(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]),
            IntegerMatrix::from_i64(&[&[3, 6, 9]]),
            IntegerMatrix::from_i64(&[&[4], &[6], &[0]]),
        ] {
            let s = smith_normal_form(&m);
            assert!(s.verify(&m), "{m}");
        }
        let s = smith_normal_form(&IntegerMatrix::from_i64(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]));
        let d: Vec<i64> = s.diagonal().iter().map(|d| i64::try_from(d).unwrap()).collect();
        assert_eq!(d, vec![2, 6, 12]);
    }

    proptest! {
        #[test]
        fn decomposition_invariants(
            rows in 1usize..=5,
            cols in 1usize..=5,
            seed in proptest::collection::vec(-9i64..=9, 25),
        ) {
            let data: Vec<Vec<i64>> = (0..rows).map(|i| seed[i * 5..i * 5 + cols].to_vec()).collect();
            let a = IntegerMatrix::from_rows(&data).unwrap();
            let s = smith_normal_form(&a);
            prop_assert!(s.verify(&a));
            if a.is_square() {
                let prod = s.diagonal().iter().fold(BigInt::from(1), |acc, d| acc * d);
                prop_assert_eq!(prod.abs(), a.det().unwrap().abs());
            }
        }
    }
}
