//! Exact minimality decisions for affine maps `T(x) = a + τx` on `T^n`.
//!
//! With `β = τ − I`, a unipotent `τ` (nilpotent `β`) gives a totally minimal
//! `T` exactly when the closure of `{na}` and the closure of `β(T^n)` generate
//! the torus, i.e. when no nonzero character `k` has `k·β = 0` and `k·a ∈ Z`.
//! Any other `τ` admits a nontrivial factor torus on which `T` has a fixed point.

pub mod lattice;
pub mod matrix;
pub mod rational;
pub mod snf;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{ExactScalar, ExactVector};
use lattice::{rational_left_kernel, saturated_column_basis, solve_integer, Subgroup};
pub use matrix::IntegerMatrix;
pub use snf::{smith_normal_form, SnfDecomposition};

/// Least `k ≤ n` with `B^k = 0`, or `None` when `B` is not nilpotent.
pub fn nilpotency_index(b: &IntegerMatrix) -> Option<u32> {
    if !b.is_square() {
        return None;
    }
    let mut p = b.clone();
    for k in 1..=b.rows().max(1) as u32 {
        if p.is_zero() {
            return Some(k);
        }
        p = p.mul(b).ok()?;
    }
    None
}

/// Closure of `B(T^n)`: the subtorus over the saturated column lattice of `B`.
pub fn image_subtorus(b: &IntegerMatrix) -> Subgroup {
    Subgroup::from_span(b.rows(), &saturated_column_basis(b))
}

/// The subtorus where the chain `β(T^n) ⊇ β²(T^n) ⊇ …` stabilizes.
pub fn stable_image(b: &IntegerMatrix) -> Subgroup {
    let n = b.rows();
    let p = b.pow(n as u32).unwrap_or_else(|_| IntegerMatrix::zeros(n, n));
    image_subtorus(&p)
}

/// Closure of `{na : n ∈ Z}` through its annihilator `{k : k·a ∈ Z}`.
pub fn translation_closure(a: &ExactVector) -> Subgroup {
    let n = a.dim();
    let m = a.basis().len();
    let symbolic: Vec<Vec<BigRational>> = a
        .entries()
        .iter()
        .map(|e| e.symbolic_part().to_vec())
        .collect();
    let kernel = if m == 0 {
        rational_left_kernel(&[], n)
    } else {
        rational_left_kernel(&symbolic, n)
    };
    if kernel.is_empty() {
        return Subgroup::full(n);
    }
    // Within the symbolic kernel, keep combinations whose rational part is integral.
    let w: Vec<BigRational> = kernel
        .iter()
        .map(|k| dot_int_rat(k, a.entries().iter().map(ExactScalar::rational_part)))
        .collect();
    let den = w
        .iter()
        .fold(BigInt::one(), |acc, q| num_integer::Integer::lcm(&acc, q.denom()));
    let mut col = IntegerMatrix::zeros(w.len() + 1, 1);
    for (i, q) in w.iter().enumerate() {
        col.set(i, 0, (q * BigRational::from_integer(den.clone())).to_integer());
    }
    col.set(w.len(), 0, den);
    let rows: Vec<Vec<BigInt>> = lattice::left_kernel(&col)
        .into_iter()
        .map(|yt| {
            (0..n)
                .map(|j| {
                    (0..kernel.len())
                        .map(|i| &yt[i] * &kernel[i][j])
                        .fold(BigInt::zero(), |x, y| x + y)
                })
                .collect()
        })
        .collect();
    Subgroup::from_annihilator(n, rows)
}

/// `Ok(())` when the groups generate `T^n`, otherwise a common annihilating character.
pub fn generation_check(g1: &Subgroup, g2: &Subgroup) -> std::result::Result<(), Vec<BigInt>> {
    match g1.common_character(g2) {
        None => Ok(()),
        Some(k) => Err(k),
    }
}

/// A translation `b` with `(τ − I)b ≡ −a (mod Z^n)`, so that `x ↦ x + b`
/// conjugates `T` to the automorphism `τ`.
pub fn conjugate_to_automorphism(tau: &IntegerMatrix, a: &ExactVector) -> Option<ExactVector> {
    let n = tau.rows();
    let beta = tau.minus_identity();
    let beta_q = beta.to_rational_rows();
    let m = a.basis().len();
    let coeff = |j: usize| -> Vec<BigRational> { a.entries().iter().map(|e| e.coeffs()[j].clone()).collect() };

    let mut columns: Vec<Vec<BigRational>> = Vec::with_capacity(m + 1);
    // Rational part: β b_0 = −a_0 + z for some integer z.
    let a0 = coeff(0);
    let characters = lattice::left_kernel(&beta);
    let z = if characters.is_empty() {
        vec![BigInt::zero(); n]
    } else {
        let l = IntegerMatrix::from_rows(&characters).ok()?;
        let w: Vec<BigRational> = characters.iter().map(|k| dot_int_rat(k, a0.iter())).collect();
        solve_integer(&l, &w)?
    };
    let rhs0: Vec<Vec<BigRational>> = a0
        .iter()
        .zip(&z)
        .map(|(q, zi)| vec![BigRational::from_integer(zi.clone()) - q])
        .collect();
    columns.push(rational::solve(&beta_q, &rhs0)?.into_iter().map(|r| r[0].clone()).collect());
    // Symbolic parts must match exactly.
    for j in 1..=m {
        let rhs: Vec<Vec<BigRational>> = coeff(j).into_iter().map(|q| vec![-q]).collect();
        columns.push(rational::solve(&beta_q, &rhs)?.into_iter().map(|r| r[0].clone()).collect());
    }
    let entries = (0..n)
        .map(|i| ExactScalar::from_coeffs(columns.iter().map(|c| c[i].clone()).collect()))
        .collect();
    let b = ExactVector::new(a.basis().clone(), entries).ok()?.reduce_mod_one();
    affine_image(tau, a, &b).sub(&b).is_lattice().then_some(b)
}

fn dot_int_rat<'a>(k: &[BigInt], v: impl Iterator<Item = &'a BigRational>) -> BigRational {
    k.iter()
        .zip(v)
        .map(|(ki, q)| BigRational::from_integer(ki.clone()) * q)
        .fold(BigRational::zero(), |a, b| a + b)
}

/// `M · v` for an integer matrix acting on an exact vector.
pub fn apply_matrix(m: &IntegerMatrix, v: &ExactVector) -> ExactVector {
    let len = v.basis().len();
    let entries = (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .zip(v.entries())
                .fold(ExactScalar::zero(len), |acc, (c, e)| {
                    acc.add(&e.scale(&BigRational::from_integer(c.clone())))
                })
        })
        .collect();
    ExactVector::new(v.basis().clone(), entries).expect("same basis")
}

fn apply_rational_matrix(m: &[Vec<BigRational>], v: &ExactVector) -> ExactVector {
    let len = v.basis().len();
    let entries = m
        .iter()
        .map(|row| {
            row.iter()
                .zip(v.entries())
                .fold(ExactScalar::zero(len), |acc, (c, e)| acc.add(&e.scale(c)))
        })
        .collect();
    ExactVector::new(v.basis().clone(), entries).expect("same basis")
}

/// `a + τx` computed exactly.
pub fn affine_image(tau: &IntegerMatrix, a: &ExactVector, x: &ExactVector) -> ExactVector {
    apply_matrix(tau, x).add(a)
}

/// Verdict classes of the decider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    TotallyMinimal,
    /// Minimal but some power is not; cannot occur for affine maps of a connected torus.
    Minimal,
    NotMinimal,
    /// Pseudo-minimality would force the trivial group; never emitted for `n ≥ 1`.
    TrivialGroupRequired,
}

/// Machine-checkable reason attached to a verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `β` is nilpotent and `closure{na}` together with `closure β(T^n)` generate `T^n`.
    Generation {
        nilpotency_index: u32,
        translation_closure: Subgroup,
        image_closure: Subgroup,
    },
    /// `T(p) = p`.
    FixedPoint { point: ExactVector },
    /// `k ≠ 0`, `k·β = 0`, `k·a ∈ Z`: the character `x ↦ k·x` is `T`-invariant.
    InvariantCharacter {
        #[serde(serialize_with = "matrix::serialize_bigint_vec")]
        k: Vec<BigInt>,
        k_dot_a: String,
    },
    /// `βb ≡ −a`: `T` is conjugate by translation to `τ`, which fixes 0.
    Conjugator { b: ExactVector },
    /// `K·τ = τ'·K` with `τ' − I` invertible; `y` is a fixed point of the
    /// induced affine map on the factor torus `T^d`, `d = rank K > 0`.
    FactorFixedPoint {
        characters: IntegerMatrix,
        factor_matrix: IntegerMatrix,
        factor_fixed_point: ExactVector,
        stable_subtorus: Subgroup,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalityVerdict {
    pub verdict: Verdict,
    pub certificate: Certificate,
    /// The trusted independence declaration this verdict rests on.
    pub assumption: String,
}

/// Validated input `T(x) = a + τx`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineProblem {
    tau: IntegerMatrix,
    a: ExactVector,
}

impl AffineProblem {
    pub fn new(tau: IntegerMatrix, a: ExactVector) -> Result<Self> {
        if !tau.is_square() || tau.rows() == 0 {
            return Err(Error::InvalidInput("τ must be a nonempty square matrix".into()));
        }
        if a.dim() != tau.rows() {
            return Err(Error::DimensionMismatch {
                expected: tau.rows(),
                actual: a.dim(),
            });
        }
        let det = tau.det()?;
        if !det.abs().is_one() {
            return Err(Error::NotUnimodular(det.to_string()));
        }
        Ok(Self { tau, a })
    }

    pub fn tau(&self) -> &IntegerMatrix {
        &self.tau
    }

    pub fn a(&self) -> &ExactVector {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.tau.rows()
    }

    pub fn decide(&self) -> MinimalityVerdict {
        decide_affine_minimality(self)
    }
}

pub fn decide_affine_minimality(p: &AffineProblem) -> MinimalityVerdict {
    let assumption = p.a.basis().assumption();
    let not_minimal = |certificate| MinimalityVerdict {
        verdict: Verdict::NotMinimal,
        certificate,
        assumption: assumption.clone(),
    };
    if p.a.is_lattice() {
        return not_minimal(Certificate::FixedPoint {
            point: ExactVector::zeros(p.a.basis().clone(), p.dim()),
        });
    }
    let beta = p.tau.minus_identity();
    if let Some(index) = nilpotency_index(&beta) {
        let closure = translation_closure(&p.a);
        let image = image_subtorus(&beta);
        return match generation_check(&closure, &image) {
            Ok(()) => MinimalityVerdict {
                verdict: Verdict::TotallyMinimal,
                certificate: Certificate::Generation {
                    nilpotency_index: index,
                    translation_closure: closure,
                    image_closure: image,
                },
                assumption,
            },
            Err(k) => {
                let ka = dot_exact(&k, &p.a);
                not_minimal(Certificate::InvariantCharacter {
                    k,
                    k_dot_a: ka.display(p.a.basis()).to_string(),
                })
            }
        };
    }
    if let Some(b) = conjugate_to_automorphism(&p.tau, &p.a) {
        return not_minimal(Certificate::Conjugator { b });
    }
    not_minimal(factor_certificate(p, &beta))
}

fn dot_exact(k: &[BigInt], a: &ExactVector) -> ExactScalar {
    k.iter()
        .zip(a.entries())
        .fold(ExactScalar::zero(a.basis().len()), |acc, (ki, e)| {
            acc.add(&e.scale(&BigRational::from_integer(ki.clone())))
        })
}

fn factor_certificate(p: &AffineProblem, beta: &IntegerMatrix) -> Certificate {
    let n = p.dim();
    let stable = beta.pow(n as u32).expect("square");
    // Characters vanishing on ker β^n: the saturated row lattice of β^n.
    let rows = saturated_column_basis(&stable.transpose());
    let k = IntegerMatrix::from_rows(&rows).expect("rectangular");
    let d = k.rows();
    let k_tau = k.mul(&p.tau).expect("shape");
    // Solve τ'·K = K·τ, i.e. Kᵀ·τ'ᵀ = (Kτ)ᵀ.
    let sol = rational::solve(
        &k.transpose().to_rational_rows(),
        &k_tau.transpose().to_rational_rows(),
    )
    .expect("row lattice of β^n is τ-invariant");
    let tau_f: Vec<Vec<BigInt>> = (0..d)
        .map(|i| (0..d).map(|j| sol[j][i].to_integer()).collect())
        .collect();
    let factor_matrix = IntegerMatrix::from_rows(&tau_f).expect("square");
    let beta_f = factor_matrix.minus_identity().to_rational_rows();
    let inv = rational::inverse(&beta_f).expect("no eigenvalue 1 on the stable part");
    let ka = apply_matrix(&k, &p.a);
    let factor_fixed_point = apply_rational_matrix(&inv, &ka).neg();
    Certificate::FactorFixedPoint {
        characters: k,
        factor_matrix,
        factor_fixed_point,
        stable_subtorus: stable_image(beta),
    }
}

/// Re-check a verdict's certificate against the problem with exact arithmetic.
pub fn verify_certificate(p: &AffineProblem, v: &MinimalityVerdict) -> bool {
    let beta = p.tau.minus_identity();
    match (&v.verdict, &v.certificate) {
        (
            Verdict::TotallyMinimal,
            Certificate::Generation {
                nilpotency_index,
                translation_closure: closure,
                image_closure: image,
            },
        ) => {
            let k = *nilpotency_index;
            beta.pow(k).is_ok_and(|m| m.is_zero())
                && (k == 1 || beta.pow(k - 1).is_ok_and(|m| !m.is_zero()))
                && closure.common_character(image).is_none()
        }
        (Verdict::NotMinimal, Certificate::FixedPoint { point }) => {
            affine_image(&p.tau, &p.a, point).sub(point).is_lattice()
        }
        (Verdict::NotMinimal, Certificate::InvariantCharacter { k, .. }) => {
            let row = IntegerMatrix::from_rows(&[k.clone()]).expect("row");
            k.iter().any(|v| !v.is_zero())
                && row.mul(&beta).is_ok_and(|m| m.is_zero())
                && dot_exact(k, &p.a).is_integer()
        }
        (Verdict::NotMinimal, Certificate::Conjugator { b }) => {
            affine_image(&p.tau, &p.a, b).sub(b).is_lattice()
        }
        (
            Verdict::NotMinimal,
            Certificate::FactorFixedPoint {
                characters,
                factor_matrix,
                factor_fixed_point,
                ..
            },
        ) => {
            let d = characters.rows();
            d > 0
                && saturated_column_basis(&characters.transpose()).len() == d
                && characters.mul(&p.tau).ok() == factor_matrix.mul(characters).ok()
                && {
                    let ka = apply_matrix(characters, &p.a);
                    affine_image(factor_matrix, &ka, factor_fixed_point)
                        .sub(factor_fixed_point)
                        .is_lattice()
                }
        }
        _ => false,
    }
}

/// Float evaluation of `T` for simulation.
pub fn apply_affine_f64(tau: &IntegerMatrix, a: &[f64], x: &[f64]) -> Vec<f64> {
    tau.mul_vec_f64(x).iter().zip(a).map(|(u, v)| u + v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::SymbolBasis;
    use std::sync::Arc;

    fn basis() -> Arc<SymbolBasis> {
        SymbolBasis::from_exprs(&[
            ("t1", "sqrt(2)-1"),
            ("t2", "sqrt(3)-1"),
            ("t3", "sqrt(5)-2"),
        ])
        .unwrap()
    }

    fn problem(tau: &[&[i64]], a: &[&str]) -> AffineProblem {
        let a = ExactVector::parse(basis(), a).unwrap();
        AffineProblem::new(IntegerMatrix::from_i64(tau), a).unwrap()
    }

    #[test]
    fn nilpotency() {
        assert_eq!(nilpotency_index(&IntegerMatrix::zeros(2, 2)), Some(1));
        assert_eq!(nilpotency_index(&IntegerMatrix::from_i64(&[&[0, 1], &[0, 0]])), Some(2));
        assert_eq!(nilpotency_index(&IntegerMatrix::from_i64(&[&[1, 1], &[1, 0]])), None);
        let n3 = IntegerMatrix::from_i64(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0]]);
        assert_eq!(nilpotency_index(&n3), Some(3));
    }

    #[test]
    fn image_subtori() {
        let g = image_subtorus(&IntegerMatrix::from_i64(&[&[0, 0], &[1, 0]]));
        assert_eq!(g.torus_dim(), 1);
        assert!(g.annihilated_by(&[1.into(), 0.into()]));
        assert!(!g.annihilated_by(&[0.into(), 1.into()]));
        assert!(image_subtorus(&IntegerMatrix::zeros(2, 2)).is_trivial());
        assert!(image_subtorus(&IntegerMatrix::from_i64(&[&[2, 1], &[1, 1]])).is_full());
    }

    #[test]
    fn closures() {
        let b = basis();
        let g = translation_closure(&ExactVector::parse(b.clone(), &["@t1", "0"]).unwrap());
        assert_eq!(g.torus_dim(), 1);
        assert!(g.annihilated_by(&[0.into(), 1.into()]));
        let g = translation_closure(&ExactVector::parse(b.clone(), &["1/2", "0"]).unwrap());
        assert_eq!(g.torus_dim(), 0);
        assert_eq!(g.component_count(), 2.into());
        let g = translation_closure(&ExactVector::parse(b.clone(), &["0", "0"]).unwrap());
        assert!(g.is_trivial());
        let g = translation_closure(&ExactVector::parse(b.clone(), &["@t1", "@t2"]).unwrap());
        assert!(g.is_full());
        let g = translation_closure(&ExactVector::parse(b.clone(), &["1/3", "1/7"]).unwrap());
        assert_eq!(g.component_count(), 21.into());
        let g = translation_closure(&ExactVector::parse(b, &["@t1", "2*@t1 + 1/2"]).unwrap());
        assert_eq!(g.torus_dim(), 1);
        assert_eq!(g.component_count(), 2.into());
    }

    #[test]
    fn conjugators() {
        let b = basis();
        let cat = IntegerMatrix::from_i64(&[&[2, 1], &[1, 1]]);
        let a = ExactVector::parse(b.clone(), &["1/2", "0"]).unwrap();
        let c = conjugate_to_automorphism(&cat, &a).unwrap();
        assert!(affine_image(&cat, &a, &c).sub(&c).is_lattice());
        // b = −β⁻¹(1/2, 0) = −(0, 1/2) ≡ (0, 1/2).
        assert_eq!(c.to_strings(), vec!["0", "1/2"]);
        let a = ExactVector::parse(b.clone(), &["@t1", "0"]).unwrap();
        assert!(conjugate_to_automorphism(&IntegerMatrix::identity(2), &a).is_none());
        let zero = ExactVector::parse(b, &["0", "0"]).unwrap();
        assert!(conjugate_to_automorphism(&cat, &zero).unwrap().is_zero());
    }

    #[test]
    fn decider_examples() {
        let v = problem(&[&[1, 0], &[0, 1]], &["@t1", "@t2"]).decide();
        assert_eq!(v.verdict, Verdict::TotallyMinimal);
        let v = problem(&[&[1, 0], &[1, 1]], &["@t1", "0"]).decide();
        assert_eq!(v.verdict, Verdict::TotallyMinimal);
        let v = problem(&[&[2, 1], &[1, 1]], &["@t1", "@t2"]).decide();
        assert_eq!(v.verdict, Verdict::NotMinimal);
        assert!(matches!(v.certificate, Certificate::Conjugator { .. }));
        let v = problem(&[&[1, 0], &[0, 1]], &["1/2", "1/3"]).decide();
        assert_eq!(v.verdict, Verdict::NotMinimal);
        assert!(matches!(v.certificate, Certificate::InvariantCharacter { .. }));
        let v = problem(&[&[2, 1], &[1, 1]], &["0", "0"]).decide();
        assert!(matches!(v.certificate, Certificate::FixedPoint { .. }));
    }

    #[test]
    fn factor_certificate_when_no_conjugator() {
        // cat ⊕ identity with an irrational third coordinate: no global conjugator.
        let p = problem(
            &[&[2, 1, 0], &[1, 1, 0], &[0, 0, 1]],
            &["0", "0", "@t1"],
        );
        assert!(conjugate_to_automorphism(p.tau(), p.a()).is_none());
        let v = p.decide();
        assert_eq!(v.verdict, Verdict::NotMinimal);
        assert!(matches!(v.certificate, Certificate::FactorFixedPoint { .. }));
        assert!(verify_certificate(&p, &v));
    }

    #[test]
    fn certificates_verify() {
        for (tau, a) in [
            (&[&[1i64, 0][..], &[0, 1]][..], ["@t1", "2*@t1"]),
            (&[&[1, 0], &[1, 1]], ["0", "@t1"]),
            (&[&[1, 0], &[1, 1]], ["@t1", "1/3"]),
            (&[&[0, 1], &[-1, 0]], ["@t1", "@t2"]),
            (&[&[1, 1], &[0, 1]], ["0", "@t1"]),
        ] {
            let p = problem(tau, &a);
            let v = p.decide();
            assert!(verify_certificate(&p, &v), "{:?}", v);
        }
        let p = problem(&[&[1, 0], &[0, 1]], &["@t1", "@t2"]);
        let mut v = p.decide();
        v.verdict = Verdict::NotMinimal;
        assert!(!verify_certificate(&p, &v));
    }

    #[test]
    fn rejects_non_unimodular() {
        let a = ExactVector::parse(basis(), &["0", "0"]).unwrap();
        let err = AffineProblem::new(IntegerMatrix::from_i64(&[&[2, 0], &[0, 1]]), a).unwrap_err();
        assert!(matches!(err, Error::NotUnimodular(_)));
    }
}
