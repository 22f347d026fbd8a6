//! Exact verdicts against long orbits: minimal cases fill a coarse grid,
//! non-minimal cases stall along the certified obstruction.

use pmlab::affine::{AffineProblem, Certificate, IntegerMatrix, Verdict};
use pmlab::exact::{ExactVector, SymbolBasis};
use pmlab::orbit::coverage_experiment;
use pmlab::systems::{Direction, State, SystemDescriptor};
use pmlab::torus::TorusPoint;

const SYMBOLS: [(&str, &str); 2] = [("a", "sqrt(2)-1"), ("b", "sqrt(3)-1")];

fn problem(tau: &[&[i64]], a: &[&str]) -> (AffineProblem, SystemDescriptor, ExactVector) {
    let basis = SymbolBasis::from_exprs(&SYMBOLS).unwrap();
    let a = ExactVector::parse(basis, a).unwrap();
    let m = IntegerMatrix::from_i64(tau);
    (
        AffineProblem::new(m.clone(), a.clone()).unwrap(),
        SystemDescriptor::affine(m, a.clone()).unwrap(),
        a,
    )
}

fn generic_seed(dim: usize) -> State {
    let base = [0.137_215_9, 0.618_033_9, 0.414_213_5];
    State::Torus(TorusPoint::new(base[..dim].to_vec()).unwrap())
}

#[test]
fn totally_minimal_cases_fill_the_grid() {
    let cases: [(&[&[i64]], &[&str]); 4] = [
        (&[&[1, 0], &[0, 1]], &["@a", "@b"]),
        (&[&[1, 0], &[1, 1]], &["@a", "1/3"]),
        (&[&[1, 0], &[1, 1]], &["@a", "0"]),
        (&[&[1, 0], &[2, 1]], &["1/2 + @b", "@a"]),
    ];
    for (tau, a) in cases {
        let (p, sys, _) = problem(tau, a);
        assert_eq!(p.decide().verdict, Verdict::TotallyMinimal, "{tau:?} {a:?}");
        let run = coverage_experiment(&sys, &generic_seed(2), 10_000_000, 32, Direction::Forward).unwrap();
        assert!(run.grid.fraction() >= 0.999, "{tau:?} {a:?}: {}", run.grid.fraction());
    }
}

#[test]
fn non_minimal_cases_stall() {
    let cases: [(&[&[i64]], &[&str]); 6] = [
        (&[&[1, 0], &[0, 1]], &["1/2", "1/3"]),
        (&[&[1, 0], &[0, 1]], &["@a", "1/3"]),
        (&[&[1, 0], &[0, 1]], &["@a", "2*@a"]),
        (&[&[1, 0], &[1, 1]], &["1/2", "@b"]),
        (&[&[2, 1], &[1, 1]], &["1/2", "1/3"]),
        (&[&[0, -1], &[1, 0]], &["@a", "@b"]),
    ];
    for (tau, a) in cases {
        let (p, sys, _) = problem(tau, a);
        let v = p.decide();
        assert_eq!(v.verdict, Verdict::NotMinimal, "{tau:?} {a:?}");
        match &v.certificate {
            Certificate::InvariantCharacter { .. } => {
                let run = coverage_experiment(&sys, &generic_seed(2), 1_000_000, 32, Direction::Forward).unwrap();
                assert!(run.grid.fraction() < 0.5, "{tau:?} {a:?}: {}", run.grid.fraction());
            }
            Certificate::FixedPoint { point } | Certificate::Conjugator { b: point } => {
                // Hyperbolic cases amplify rounding, so the witness orbit runs exactly.
                let start = point.reduce_mod_one();
                let mut x = start.clone();
                for _ in 0..200 {
                    x = sys.apply_exact(&x, Direction::Forward).unwrap();
                    assert_eq!(x, start, "{tau:?} {a:?}");
                }
            }
            other => panic!("unexpected certificate {other:?}"),
        }
    }
}

#[test]
fn rational_translations_have_the_predicted_period() {
    for (p, q) in [(1i64, 3i64), (2, 5), (3, 7)] {
        let basis = SymbolBasis::empty();
        let a = ExactVector::from_rationals(basis, &[(p, q), (1, 2)]);
        let sys = SystemDescriptor::translation(a).unwrap();
        let mut x = ExactVector::from_rationals(SymbolBasis::empty(), &[(0, 1), (0, 1)]);
        let start = x.clone();
        let mut period = 0;
        loop {
            x = sys.apply_exact(&x, Direction::Forward).unwrap();
            period += 1;
            if x == start {
                break;
            }
        }
        let lcm = num_integer::lcm(q, 2);
        assert_eq!(period, lcm);
    }
}
