use num_rational::BigRational;
use pmlab::constructions::{build_slowed_system, special_orbit_seeds, Construction};
use pmlab::exact::{ExactVector, SymbolBasis};
use pmlab::flow::{BumpProfile, IntegratorConfig};
use pmlab::orbit::{classify_orbit, coverage_experiment, omega_limit_approx, Classification, ClassifyTolerances};
use pmlab::systems::{Direction, State};
use pmlab::torus::TorusPoint;

const BUDGET: u64 = 1_000_000;

fn slowed() -> Construction {
    let b = SymbolBasis::from_exprs(&[("theta", "sqrt(2)")]).unwrap();
    build_slowed_system(
        ExactVector::parse(b, &["1", "@theta"]).unwrap(),
        vec![TorusPoint::origin(2)],
        0.1,
        BigRational::new(1.into(), 20.into()),
        BumpProfile::ExpBump,
        IntegratorConfig::default(),
    )
    .unwrap()
}

fn seeds(c: &Construction) -> (TorusPoint, TorusPoint) {
    let (f, _) = c.system.field().unwrap();
    special_orbit_seeds(f, &TorusPoint::origin(2), 0.05).unwrap()
}

#[test]
fn center_is_fixed() {
    let c = slowed();
    let r = classify_orbit(&c.system, &State::Torus(TorusPoint::origin(2)), 100, 32, &ClassifyTolerances::default())
        .unwrap();
    assert_eq!(r.classification, Classification::Periodic { period: 1 });
}

#[test]
fn seed_in_converges_forward() {
    let c = slowed();
    let (seed_in, _) = seeds(&c);
    let x = State::Torus(seed_in);
    let r = classify_orbit(&c.system, &x, BUDGET, 32, &ClassifyTolerances::default()).unwrap();
    let origin = Classification::AsymptoticToFixedPoint { target: vec![0.0, 0.0] };
    assert_eq!(r.forward.classification, origin);
    assert!(r.forward.final_fraction < 0.2);
    assert!(r.in_script_w);
    let tail = omega_limit_approx(&c.system, &x, BUDGET / 2, 1000, 32).unwrap();
    // The center sits on the corner shared by four cells.
    assert!(tail.occupied_cells() <= 4);
}

#[test]
fn seed_out_converges_backward() {
    let c = slowed();
    let (_, seed_out) = seeds(&c);
    let run = coverage_experiment(&c.system, &State::Torus(seed_out.clone()), BUDGET, 32, Direction::Backward).unwrap();
    assert!(run.grid.fraction() < 0.2);
    let r = classify_orbit(&c.system, &State::Torus(seed_out), BUDGET, 32, &ClassifyTolerances::default()).unwrap();
    let origin = Classification::AsymptoticToFixedPoint { target: vec![0.0, 0.0] };
    assert_eq!(r.backward.classification, origin);
}

#[test]
fn near_miss_is_not_asymptotic() {
    // Offset 3e-3 across the stable line: the orbit crawls past the center
    // but does not converge to it.
    let c = slowed();
    let (seed_in, _) = seeds(&c);
    let g = 3f64.sqrt();
    let (nx, ny) = (-2f64.sqrt() / g, 1.0 / g);
    let p = seed_in.coords();
    let x = TorusPoint::new(vec![p[0] + 3e-3 * nx, p[1] + 3e-3 * ny]).unwrap();
    let r = classify_orbit(&c.system, &State::Torus(x), BUDGET, 32, &ClassifyTolerances::default()).unwrap();
    assert!(!matches!(r.forward.classification, Classification::AsymptoticToFixedPoint { .. }));
}
