use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pmlab::affine::{nilpotency_index, AffineProblem, Certificate, IntegerMatrix};
use pmlab::exact::{ExactScalar, ExactVector, SymbolBasis};
use pmlab::flow::{BumpProfile, SlowedLinearField};
use pmlab::sets::{preimage_intersection_chain, Dichotomy, Domain, PointMap, RasterMap, RasterSet};
use pmlab::systems::{Direction, State, SystemDescriptor};
use pmlab::torus::{torus_distance, TorusPoint};

fn pt(v: Vec<f64>) -> TorusPoint {
    TorusPoint::new(v).unwrap()
}

fn det2(m: &[[i64; 2]; 2]) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn to_matrix(rows: &[Vec<i64>]) -> IntegerMatrix {
    let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
    IntegerMatrix::from_i64(&refs)
}

fn big(rows: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect()
}

fn mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    (0..a.len())
        .map(|i| (0..b[0].len()).map(|j| (0..b.len()).map(|k| &a[i][k] * &b[k][j]).sum()).collect())
        .collect()
}

/// Unimodular matrix as a product of elementary shears and a sign flip.
fn unimodular(n: usize, ops: &[(usize, usize, i64)], flip: bool) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for &(i, j, c) in ops {
        let (i, j) = (i % n, j % n);
        if i != j {
            for col in 0..n {
                m[i][col] += c * m[j][col];
            }
        }
    }
    if flip {
        m[0].iter_mut().for_each(|v| *v = -*v);
    }
    m
}

#[test]
fn metric_axioms_on_sampled_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let n = rng.random_range(1..=4usize);
        let mut draw = || pt((0..n).map(|_| rng.random::<f64>()).collect());
        let (x, y, z) = (draw(), draw(), draw());
        let d = |a: &TorusPoint, b: &TorusPoint| torus_distance(a, b).unwrap();
        assert!(d(&x, &x).abs() < 1e-12);
        assert!((d(&x, &y) - d(&y, &x)).abs() < 1e-12);
        assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
        assert!(d(&x, &y) <= (n as f64).sqrt() / 2.0 + 1e-12);
    }
}

#[test]
fn product_flow_field_has_no_zeros_on_a_sample() {
    // The circle factor moves at a fixed positive speed everywhere.
    let b = SymbolBasis::from_exprs(&[("t", "sqrt(2)")]).unwrap();
    let c = pmlab::constructions::build_product_pm_flow(
        ExactVector::parse(b.clone(), &["1", "@t"]).unwrap(),
        vec![TorusPoint::origin(2)],
        0.1,
        BigRational::new(1.into(), 20.into()),
        ExactScalar::rational(BigRational::one(), b.len()),
        BumpProfile::ExpBump,
        Default::default(),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..2000 {
        let x: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 0.2 - 0.1).map(|v| v.rem_euclid(1.0)).collect();
        let y = c.system.apply(&State::Torus(pt(x.clone()))).unwrap();
        assert!(torus_distance(y.torus().unwrap(), &pt(x)).unwrap() > 1e-3);
    }
}

proptest! {
    #[test]
    fn automorphisms_need_unit_determinant(e in proptest::array::uniform4(-4i64..=4)) {
        let m = [[e[0], e[1]], [e[2], e[3]]];
        let sys = SystemDescriptor::automorphism(IntegerMatrix::from_i64(&[&m[0], &m[1]]));
        prop_assert_eq!(sys.is_ok(), det2(&m).abs() == 1);
    }

    #[test]
    fn exact_apply_and_inverse_round_trip(
        ops in proptest::collection::vec((0usize..3, 0usize..3, -2i64..=2), 0..6),
        flip in any::<bool>(),
        num in proptest::collection::vec(-20i64..=20, 3),
        den in proptest::collection::vec(1i64..=12, 3),
        xn in proptest::collection::vec(0i64..12, 3),
    ) {
        let m = unimodular(3, &ops, flip);
        let b = SymbolBasis::empty();
        let a = ExactVector::from_rationals(b.clone(), &[(num[0], den[0]), (num[1], den[1]), (num[2], den[2])]);
        let sys = SystemDescriptor::affine(to_matrix(&m), a).unwrap();
        let x = ExactVector::from_rationals(b, &[(xn[0], 12), (xn[1], 12), (xn[2], 12)]);
        let y = sys.apply_exact(&x, Direction::Forward).unwrap();
        let back = sys.apply_exact(&y, Direction::Backward).unwrap();
        prop_assert_eq!(back, x.reduce_mod_one());
    }

    #[test]
    fn products_act_componentwise(x in proptest::collection::vec(0.0f64..1.0, 4)) {
        let b = SymbolBasis::from_exprs(&[("t", "sqrt(2)")]).unwrap();
        let f = SystemDescriptor::translation(ExactVector::parse(b, &["@t", "1/3"]).unwrap()).unwrap();
        let g = SystemDescriptor::automorphism(IntegerMatrix::from_i64(&[&[2, 1], &[1, 1]])).unwrap();
        let fg = SystemDescriptor::product(f.clone(), g.clone()).unwrap();
        let whole = fg.apply(&State::Torus(pt(x.clone()))).unwrap();
        let left = f.apply(&State::Torus(pt(x[..2].to_vec()))).unwrap();
        let right = g.apply(&State::Torus(pt(x[2..].to_vec()))).unwrap();
        let joined = [left.torus().unwrap().coords(), right.torus().unwrap().coords()].concat();
        prop_assert_eq!(whole.torus().unwrap().coords(), &joined[..]);
    }

    #[test]
    fn speed_is_constant_outside_the_bumps(x in proptest::collection::vec(0.0f64..1.0, 2)) {
        let b = SymbolBasis::from_exprs(&[("t", "sqrt(2)")]).unwrap();
        let gamma = ExactVector::parse(b, &["1", "@t"]).unwrap();
        let field = SlowedLinearField::new(gamma, vec![pt(vec![0.3, 0.6])], 0.1, BumpProfile::ExpBump).unwrap();
        let d = torus_distance(&pt(x.clone()), &pt(vec![0.3, 0.6])).unwrap();
        prop_assume!(d > 0.1);
        let v = field.eval(&pt(x)).unwrap();
        prop_assert!((v.norm() - 3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn nilpotency_index_is_exact(entries in proptest::collection::vec(-3i64..=3, 6)) {
        // Strictly lower triangular 4x4 matrices are nilpotent.
        let mut m = vec![vec![0i64; 4]; 4];
        let mut it = entries.iter();
        for i in 0..4 {
            for j in 0..i {
                m[i][j] = *it.next().unwrap();
            }
        }
        let k = nilpotency_index(&to_matrix(&m)).expect("nilpotent");
        let b = big(&m);
        let mut power: Vec<Vec<BigInt>> = (0..4).map(|i| (0..4).map(|j| BigInt::from(i64::from(i == j))).collect()).collect();
        for _ in 0..k - 1 {
            power = mul(&power, &b);
        }
        let zero = |p: &Vec<Vec<BigInt>>| p.iter().flatten().all(Zero::is_zero);
        prop_assert!(k == 0 || !zero(&power));
        prop_assert!(zero(&mul(&power, &b)));
    }

    #[test]
    fn certificates_are_sound(
        which in 0usize..4,
        num in proptest::collection::vec(-6i64..=6, 2),
        den in proptest::collection::vec(1i64..=6, 2),
        symbolic in any::<bool>(),
    ) {
        let taus = [vec![vec![1, 0], vec![0, 1]], vec![vec![1, 0], vec![1, 1]], vec![vec![2, 1], vec![1, 1]], vec![vec![0, -1], vec![1, 0]]];
        let tau = &taus[which];
        let basis = SymbolBasis::from_exprs(&[("t", "sqrt(2)")]).unwrap();
        let mut entries: Vec<String> = (0..2).map(|i| format!("{}/{}", num[i], den[i])).collect();
        if symbolic {
            entries[1] = format!("{} + @t", entries[1]);
        }
        let a = ExactVector::parse(basis.clone(), &entries).unwrap();
        let v = AffineProblem::new(to_matrix(tau), a.clone()).unwrap().decide();
        let beta: Vec<Vec<i64>> = (0..2).map(|i| (0..2).map(|j| tau[i][j] - i64::from(i == j)).collect()).collect();
        match &v.certificate {
            Certificate::InvariantCharacter { k, .. } => {
                prop_assert!(k.iter().any(|c| !c.is_zero()));
                for j in 0..2 {
                    let col: BigInt = (0..2).map(|i| &k[i] * BigInt::from(beta[i][j])).sum();
                    prop_assert!(col.is_zero());
                }
                let mut dot = ExactScalar::zero(basis.len());
                for (ki, ai) in k.iter().zip(a.entries()) {
                    dot = dot.add(&ai.scale(&BigRational::from_integer(ki.clone())));
                }
                prop_assert!(dot.is_integer());
            }
            Certificate::Conjugator { b } => {
                // (τ − I) b + a ≡ 0 mod 1.
                let mut ok = true;
                for i in 0..2 {
                    let mut s = a.entries()[i].clone();
                    for j in 0..2 {
                        s = s.add(&b.entries()[j].scale(&BigRational::from_integer(beta[i][j].into())));
                    }
                    ok &= s.is_integer();
                }
                prop_assert!(ok);
            }
            Certificate::FixedPoint { point } => {
                let image = SystemDescriptor::affine(to_matrix(tau), a.clone()).unwrap().apply_exact(point, Direction::Forward).unwrap();
                prop_assert_eq!(image.reduce_mod_one(), point.reduce_mod_one());
            }
            _ => {}
        }
    }

    #[test]
    fn e_chain_is_monotone_and_case2_is_backward_invariant(
        mult in 2i64..=4,
        lo in 0.0f64..0.9,
        len in 0.02f64..0.1,
        rotation in any::<bool>(),
    ) {
        let res = 256;
        let map = if rotation {
            let b = SymbolBasis::from_exprs(&[("g", "(sqrt(5)-1)/2")]).unwrap();
            PointMap::System(SystemDescriptor::translation(ExactVector::parse(b, &["@g"]).unwrap()).unwrap())
        } else {
            PointMap::Endomorphism(IntegerMatrix::from_i64(&[&[mult]]))
        };
        let f = RasterMap::new(map, Domain::Torus, res, 4).unwrap();
        let k = RasterSet::from_box(Domain::Torus, res, &[lo], &[lo + len]).unwrap();
        let u = k.complement();
        let u_bar = u.closure();
        let mut e = f.full_set();
        for _ in 0..40 {
            let next = f.preimage(&u_bar.intersection(&e).unwrap()).unwrap();
            prop_assert!(next.is_subset(&e).unwrap());
            e = next;
        }
        if let Dichotomy::Case2 { v, preimage_contained, .. } = preimage_intersection_chain(&f, &u, &f.empty_set(), 500).unwrap() {
            prop_assert!(preimage_contained);
            prop_assert!(f.preimage(&v).unwrap().is_subset(&v).unwrap());
        }
    }
}
