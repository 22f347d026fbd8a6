//! Integer lattices, closed subgroups of T^n, and their character annihilators.
//!
//! A closed subgroup `G ⊆ T^n` is stored through its annihilator
//! `Λ = {k ∈ Z^n : k·x ∈ Z for all x ∈ G}`. The identity component of `G`
//! is the subtorus dual to the saturation of `Λ`, and the component group
//! has order equal to the product of the invariant factors of `Λ`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::matrix::{serialize_bigint_rows, serialize_bigint_vec, IntegerMatrix};
use super::snf::smith_normal_form;

/// Integer basis (as rows) of `{k ∈ Z^r : k · M = 0}`.
pub fn left_kernel(m: &IntegerMatrix) -> Vec<Vec<BigInt>> {
    let s = smith_normal_form(m);
    let rank = s.rank();
    (rank..m.rows()).map(|i| s.u.row(i).to_vec()).collect()
}

/// Primitive basis (as columns) of the saturation of the column lattice of `M`.
pub fn saturated_column_basis(m: &IntegerMatrix) -> Vec<Vec<BigInt>> {
    let s = smith_normal_form(m);
    (0..s.rank()).map(|j| s.u_inv.column(j)).collect()
}

/// Integer basis of `{k ∈ Z^n : k · C = 0}` for a rational matrix `C` (n × m).
pub fn rational_left_kernel(c: &[Vec<BigRational>], n: usize) -> Vec<Vec<BigInt>> {
    let m = c.first().map_or(0, Vec::len);
    if m == 0 {
        return unit_rows(n);
    }
    // Clear denominators column by column; the kernel is unchanged.
    let mut ints = IntegerMatrix::zeros(n, m);
    for j in 0..m {
        let l = (0..n).fold(BigInt::one(), |acc, i| acc.lcm(c[i][j].denom()));
        for i in 0..n {
            let v = (&c[i][j] * BigRational::from_integer(l.clone())).to_integer();
            ints.set(i, j, v);
        }
    }
    left_kernel(&ints)
}

fn unit_rows(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

/// One integer solution `z` of `L · z = w` (`L` integer, `w` rational), if any.
pub fn solve_integer(l: &IntegerMatrix, w: &[BigRational]) -> Option<Vec<BigInt>> {
    let s = smith_normal_form(l);
    // L z = w  ⇔  D (V⁻¹ z) = U w.
    let uw: Vec<BigRational> = (0..l.rows())
        .map(|i| {
            s.u.row(i)
                .iter()
                .zip(w)
                .map(|(u, x)| BigRational::from_integer(u.clone()) * x)
                .fold(BigRational::zero(), |a, b| a + b)
        })
        .collect();
    let diag = s.diagonal();
    let mut y = vec![BigInt::zero(); l.cols()];
    for (i, rhs) in uw.iter().enumerate() {
        let d = diag.get(i).cloned().unwrap_or_default();
        if d.is_zero() {
            if !rhs.is_zero() {
                return None;
            }
        } else {
            let q = rhs / BigRational::from_integer(d);
            if !q.is_integer() {
                return None;
            }
            y[i] = q.to_integer();
        }
    }
    Some(
        (0..l.cols())
            .map(|i| {
                s.v.row(i)
                    .iter()
                    .zip(&y)
                    .map(|(a, b)| a * b)
                    .fold(BigInt::zero(), |a, b| a + b)
            })
            .collect(),
    )
}

/// Closed subgroup of `T^n` given by its character annihilator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subgroup {
    pub ambient_dim: usize,
    /// Basis rows of the annihilator lattice `Λ`.
    #[serde(serialize_with = "serialize_bigint_rows")]
    pub annihilator: Vec<Vec<BigInt>>,
    /// Primitive lattice basis (rows) whose real span mod `Z^n` is the identity component.
    #[serde(serialize_with = "serialize_bigint_rows")]
    pub torus_basis: Vec<Vec<BigInt>>,
    /// Invariant factors > 1 of the component group.
    #[serde(serialize_with = "serialize_bigint_vec")]
    pub torsion: Vec<BigInt>,
}

impl Subgroup {
    pub fn from_annihilator(ambient_dim: usize, rows: Vec<Vec<BigInt>>) -> Self {
        let rows: Vec<Vec<BigInt>> = rows
            .into_iter()
            .filter(|r| r.iter().any(|v| !v.is_zero()))
            .collect();
        if rows.is_empty() {
            return Self::full(ambient_dim);
        }
        let lam = IntegerMatrix::from_rows(&rows).expect("rectangular annihilator");
        let s = smith_normal_form(&lam);
        let r = s.rank();
        // Λ = U⁻¹ D V⁻¹: the first r rows of V⁻¹ span sat(Λ); its kernel is spanned
        // by the last n − r columns of V.
        let torus_basis = (r..ambient_dim).map(|j| s.v.column(j)).collect();
        let torsion = s
            .invariant_factors()
            .into_iter()
            .filter(|d| !d.is_one())
            .collect();
        let annihilator = (0..r)
            .map(|i| {
                // Rebuild an independent basis of Λ itself: rows d_i · (V⁻¹)_i.
                let d = s.d.get(i, i);
                s.v_inv.row(i).iter().map(|v| v * d).collect()
            })
            .collect();
        Self {
            ambient_dim,
            annihilator,
            torus_basis,
            torsion,
        }
    }

    /// The closed subgroup generated by the real span of integer vectors.
    pub fn from_span(ambient_dim: usize, columns: &[Vec<BigInt>]) -> Self {
        if columns.is_empty() {
            return Self::trivial(ambient_dim);
        }
        let mut m = IntegerMatrix::zeros(ambient_dim, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        Self::from_annihilator(ambient_dim, left_kernel(&m))
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            annihilator: Vec::new(),
            torus_basis: unit_rows(ambient_dim),
            torsion: Vec::new(),
        }
    }

    pub fn trivial(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            annihilator: unit_rows(ambient_dim),
            torus_basis: Vec::new(),
            torsion: Vec::new(),
        }
    }

    pub fn torus_dim(&self) -> usize {
        self.torus_basis.len()
    }

    /// Number of connected components.
    pub fn component_count(&self) -> BigInt {
        self.torsion.iter().fold(BigInt::one(), |a, b| a * b)
    }

    pub fn is_full(&self) -> bool {
        self.annihilator.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.torus_dim() == 0 && self.torsion.is_empty()
    }

    /// A nonzero character annihilating both groups, or `None` if they generate `T^n`.
    pub fn common_character(&self, other: &Subgroup) -> Option<Vec<BigInt>> {
        if self.annihilator.is_empty() || other.annihilator.is_empty() {
            return None;
        }
        // y1·Λ1 − y2·Λ2 = 0 has a nonzero solution iff Λ1 ∩ Λ2 ≠ {0}.
        let n = self.ambient_dim;
        let r1 = self.annihilator.len();
        let rows: Vec<Vec<BigInt>> = self
            .annihilator
            .iter()
            .cloned()
            .chain(other.annihilator.iter().map(|r| r.iter().map(|v| -v).collect()))
            .collect();
        let stacked = IntegerMatrix::from_rows(&rows).expect("rectangular");
        let kernel = left_kernel(&stacked);
        let y = kernel.into_iter().next()?;
        let k: Vec<BigInt> = (0..n)
            .map(|j| {
                (0..r1)
                    .map(|i| &y[i] * &self.annihilator[i][j])
                    .fold(BigInt::zero(), |a, b| a + b)
            })
            .collect();
        Some(primitive_within(k, self, other))
    }

    /// True when the character `k` is trivial on the group.
    pub fn annihilated_by(&self, k: &[BigInt]) -> bool {
        if self.annihilator.is_empty() {
            return k.iter().all(Zero::is_zero);
        }
        let lam = IntegerMatrix::from_rows(&self.annihilator).expect("rectangular").transpose();
        let w: Vec<BigRational> = k.iter().map(|v| BigRational::from_integer(v.clone())).collect();
        solve_integer(&lam, &w).is_some()
    }

    pub fn describe(&self) -> String {
        let mut s = match self.torus_dim() {
            0 => "finite".to_string(),
            d if d == self.ambient_dim => format!("full torus T^{d}"),
            d => format!("{d}-dimensional subtorus"),
        };
        if !self.torsion.is_empty() {
            let t: Vec<String> = self.torsion.iter().map(ToString::to_string).collect();
            s.push_str(&format!(" with component group of invariant factors [{}]", t.join(", ")));
        }
        s
    }
}

/// Divide `k` by the largest integer keeping it in both annihilators.
fn primitive_within(k: Vec<BigInt>, a: &Subgroup, b: &Subgroup) -> Vec<BigInt> {
    let g = k.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() || g.is_one() {
        return k;
    }
    let mut divisors: Vec<BigInt> = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= g {
        if g.is_multiple_of(&d) {
            divisors.push(d.clone());
            divisors.push(&g / &d);
        }
        d += 1;
    }
    divisors.sort();
    divisors.dedup();
    for d in divisors.iter().rev() {
        let cand: Vec<BigInt> = k.iter().map(|v| v / d).collect();
        if a.annihilated_by(&cand) && b.annihilated_by(&cand) {
            return cand;
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn kernels() {
        let m = IntegerMatrix::from_i64(&[&[1, 2], &[2, 4], &[0, 0]]);
        let k = left_kernel(&m);
        assert_eq!(k.len(), 2);
        let km = IntegerMatrix::from_rows(&k).unwrap().mul(&m).unwrap();
        assert!(km.is_zero());
    }

    #[test]
    fn saturation_of_column_lattice() {
        let m = IntegerMatrix::from_i64(&[&[0, 0], &[1, 0]]);
        let basis = saturated_column_basis(&m);
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0].iter().map(|v| v.clone() * &basis[0][1]).collect::<Vec<_>>(), b(&[0, 1]));
        let m = IntegerMatrix::from_i64(&[&[2], &[4]]);
        let basis = saturated_column_basis(&m);
        assert!(basis[0] == b(&[1, 2]) || basis[0] == b(&[-1, -2]));
    }

    #[test]
    fn subgroups_from_annihilators() {
        // a = (1/2, 0): Λ = 2Z × Z gives the cyclic group of order 2.
        let g = Subgroup::from_annihilator(2, vec![b(&[2, 0]), b(&[0, 1])]);
        assert_eq!(g.torus_dim(), 0);
        assert_eq!(g.torsion, b(&[2]));
        assert!(g.annihilated_by(&b(&[4, 7])));
        assert!(!g.annihilated_by(&b(&[1, 0])));
        // Λ = {(0, k)}: the first-axis circle.
        let g = Subgroup::from_annihilator(2, vec![b(&[0, 1])]);
        assert_eq!(g.torus_dim(), 1);
        assert!(g.torus_basis[0] == b(&[1, 0]) || g.torus_basis[0] == b(&[-1, 0]));
    }

    #[test]
    fn generation_certificates() {
        let horiz = Subgroup::from_span(2, &[b(&[1, 0])]);
        let vert = Subgroup::from_span(2, &[b(&[0, 1])]);
        assert!(horiz.common_character(&vert).is_none());
        let k = horiz.common_character(&horiz).unwrap();
        assert!(k == b(&[0, 1]) || k == b(&[0, -1]));
        assert!(Subgroup::full(2).common_character(&horiz).is_none());
        let finite = Subgroup::from_annihilator(2, vec![b(&[2, 0]), b(&[0, 1])]);
        let k = finite.common_character(&horiz).unwrap();
        assert!(k == b(&[0, 1]) || k == b(&[0, -1]));
    }

    #[test]
    fn integer_systems() {
        let l = IntegerMatrix::from_i64(&[&[2, 0], &[0, 3]]);
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(solve_integer(&l, &[q(4, 1), q(9, 1)]).unwrap(), b(&[2, 3]));
        assert!(solve_integer(&l, &[q(1, 1), q(0, 1)]).is_none());
        assert!(solve_integer(&l, &[q(1, 2), q(0, 1)]).is_none());
    }
}
