//! Empirical orbit analysis: coverage curves, classification, limit sets.

mod limits;
mod stability;

pub use limits::{
    limit_set_approx, omega_limit_approx, power_minimality_scan, residue_limit_sets, PowerScan,
    ResidueLimitProfile,
};
pub use stability::{equicontinuity_modulus, product_pm_probe, EquicontinuityReport, ProductProbeReport};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::systems::{Direction, PowerStepper, State, Stepper, SymbolicPoint, SystemDescriptor, SystemKind};
use crate::torus::{distance_slices, minimal_lift, CoverageGrid, TorusPoint};

/// Generator seed used for generic seeds unless one is configured.
pub const DEFAULT_SEED: u64 = 0x5EED_0F_7021;

/// Most curve points kept per run; later points are thinned by occupancy gain.
const CURVE_POINTS: u64 = 4096;

/// `count` uniform random points of `T^dim`.
pub fn generic_seeds(dim: usize, count: usize, seed: u64) -> Vec<TorusPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| TorusPoint::new((0..dim).map(|_| rng.random::<f64>()).collect()).expect("unit interval"))
        .collect()
}

/// Maps `f` over `items` on a pool of `workers` threads (`None`: one per core),
/// keeping input order. One worker runs serially on the caller's thread.
pub fn fan_out<T, R, F>(items: Vec<T>, workers: Option<usize>, f: F) -> Result<Vec<R>>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    if workers == Some(1) {
        return Ok(items.into_iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    Ok(pool.install(|| items.into_par_iter().map(f).collect()))
}

/// Iterates a system on one state, exposing the coordinates that enter grids.
pub(crate) enum Walker {
    Torus {
        stepper: Box<dyn Stepper>,
        x: Vec<f64>,
    },
    Symbolic {
        point: SymbolicPoint,
        shift: i64,
        alphabet: u8,
        embedded: [f64; 1],
    },
}

impl Walker {
    /// Walker for `f^power` in the given direction.
    pub(crate) fn new(sys: &SystemDescriptor, x0: &State, dir: Direction, power: u32) -> Result<Self> {
        sys.check_state(x0)?;
        Ok(match x0 {
            State::Torus(p) => {
                let stepper = sys.stepper(dir)?;
                let stepper: Box<dyn Stepper> = if power > 1 {
                    Box::new(PowerStepper::new(stepper, power))
                } else {
                    stepper
                };
                Walker::Torus {
                    stepper,
                    x: p.coords().to_vec(),
                }
            }
            State::Symbolic(p) => {
                let SystemKind::Subshift(sub) = sys.kind() else {
                    return Err(Error::StateSpace("symbolic state for a torus system".into()));
                };
                let alphabet = sub.alphabet();
                Walker::Symbolic {
                    embedded: [p.embed(alphabet)],
                    point: p.clone(),
                    shift: dir.sign() as i64 * power.max(1) as i64,
                    alphabet,
                }
            }
        })
    }

    pub(crate) fn grid_dim(&self) -> usize {
        match self {
            Walker::Torus { x, .. } => x.len(),
            Walker::Symbolic { .. } => 1,
        }
    }

    pub(crate) fn coords(&self) -> &[f64] {
        match self {
            Walker::Torus { x, .. } => x,
            Walker::Symbolic { embedded, .. } => embedded,
        }
    }

    pub(crate) fn advance(&mut self) -> Result<()> {
        match self {
            Walker::Torus { stepper, x } => stepper.step(x),
            Walker::Symbolic {
                point,
                shift,
                alphabet,
                embedded,
            } => {
                *point = point.shift_by(*shift);
                embedded[0] = point.embed(*alphabet);
                Ok(())
            }
        }
    }

    /// Distance to a reference state of the same kind; symbolic points use
    /// exact equality (0 or 1).
    fn distance_to(&self, reference: &Reference) -> f64 {
        match (self, reference) {
            (Walker::Torus { x, .. }, Reference::Torus(r)) => distance_slices(x, r),
            (Walker::Symbolic { point, .. }, Reference::Symbolic(r)) => {
                if point == r {
                    0.0
                } else {
                    1.0
                }
            }
            _ => f64::INFINITY,
        }
    }

    fn snapshot(&self) -> Reference {
        match self {
            Walker::Torus { x, .. } => Reference::Torus(x.clone()),
            Walker::Symbolic { point, .. } => Reference::Symbolic(point.clone()),
        }
    }
}

enum Reference {
    Torus(Vec<f64>),
    Symbolic(SymbolicPoint),
}

pub(crate) fn check_resolution(resolution: u32) -> Result<()> {
    if resolution == 0 || !resolution.is_power_of_two() {
        return invalid(format!("resolution {resolution} is not a power of two"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub step: u64,
    pub fraction: f64,
}

/// Coverage fraction as a function of the step count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageCurve {
    pub direction: Direction,
    pub resolution: u32,
    pub points: Vec<CurvePoint>,
    pub steps_requested: u64,
    pub steps_completed: u64,
    /// Set when the run ended early because the grid filled up.
    pub completed_grid: bool,
    /// Reason the run was cut short by an integration failure.
    pub truncated: Option<String>,
}

impl CoverageCurve {
    pub fn final_fraction(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.fraction)
    }

    pub fn is_monotone(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[0].step < w[1].step && w[0].fraction <= w[1].fraction)
    }

    /// `step,fraction` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,fraction\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.step, p.fraction));
        }
        out
    }
}

struct CurveRecorder {
    points: Vec<CurvePoint>,
    last_occupied: u64,
    min_gain: u64,
}

impl CurveRecorder {
    fn new(grid: &CoverageGrid) -> Self {
        Self {
            points: vec![CurvePoint {
                step: 0,
                fraction: grid.fraction(),
            }],
            last_occupied: grid.occupied_cells(),
            min_gain: (grid.total_cells() / CURVE_POINTS).max(1),
        }
    }

    fn observe(&mut self, step: u64, grid: &CoverageGrid) {
        let occ = grid.occupied_cells();
        if occ >= self.last_occupied + self.min_gain || (occ > self.last_occupied && grid.is_complete()) {
            self.points.push(CurvePoint {
                step,
                fraction: grid.fraction(),
            });
            self.last_occupied = occ;
        }
    }

    fn finish(mut self, step: u64, grid: &CoverageGrid) -> Vec<CurvePoint> {
        if self.points.last().is_some_and(|p| p.step < step) {
            self.points.push(CurvePoint {
                step,
                fraction: grid.fraction(),
            });
        }
        self.points
    }
}

#[derive(Debug, Clone)]
pub struct CoverageRun {
    pub curve: CoverageCurve,
    pub grid: CoverageGrid,
    pub final_state: Vec<f64>,
}

/// Iterates `steps` times from `x0`, recording occupancy of the resolution grid.
pub fn coverage_experiment(
    sys: &SystemDescriptor,
    x0: &State,
    steps: u64,
    resolution: u32,
    direction: Direction,
) -> Result<CoverageRun> {
    coverage_with_power(sys, x0, steps, resolution, direction, 1)
}

pub(crate) fn coverage_with_power(
    sys: &SystemDescriptor,
    x0: &State,
    steps: u64,
    resolution: u32,
    direction: Direction,
    power: u32,
) -> Result<CoverageRun> {
    if steps == 0 {
        return invalid("steps must be at least 1");
    }
    check_resolution(resolution)?;
    let mut walker = Walker::new(sys, x0, direction, power)?;
    let mut grid = CoverageGrid::new(walker.grid_dim(), resolution)?;
    grid.record_slice(walker.coords());
    let mut rec = CurveRecorder::new(&grid);
    let mut done = 0;
    let mut truncated = None;
    while done < steps && !grid.is_complete() {
        match walker.advance() {
            Ok(()) => {}
            Err(e @ Error::Stalled { .. }) => {
                truncated = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
        done += 1;
        grid.record_slice(walker.coords());
        rec.observe(done, &grid);
    }
    let curve = CoverageCurve {
        direction,
        resolution,
        points: rec.finish(done, &grid),
        steps_requested: steps,
        steps_completed: done,
        completed_grid: grid.is_complete(),
        truncated,
    };
    Ok(CoverageRun {
        curve,
        grid,
        final_state: walker.coords().to_vec(),
    })
}

/// Thresholds used by [`classify_orbit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyTolerances {
    pub periodic_tol: f64,
    pub confirmations: u32,
    pub asymptotic_tol: f64,
    pub field_zero_tol: f64,
    /// Trailing share of the budget used for stall and convergence checks.
    pub stall_window: f64,
    /// Coverage fraction counted as a complete grid.
    pub dense_threshold: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        Self {
            periodic_tol: 1e-9,
            confirmations: 3,
            asymptotic_tol: 1e-6,
            field_zero_tol: 1e-12,
            stall_window: 0.1,
            dense_threshold: 1.0,
        }
    }
}

impl ClassifyTolerances {
    pub fn validate(&self) -> Result<()> {
        let ok = self.periodic_tol > 0.0
            && self.confirmations >= 1
            && self.asymptotic_tol > 0.0
            && self.field_zero_tol > 0.0
            && self.stall_window > 0.0
            && self.stall_window <= 1.0
            && self.dense_threshold > 0.0
            && self.dense_threshold <= 1.0;
        if !ok {
            return invalid(format!("tolerances out of range: {self:?}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    EmpiricallyDense,
    Periodic { period: u64 },
    AsymptoticToFixedPoint { target: Vec<f64> },
    NonDenseOther,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSummary {
    pub classification: Classification,
    pub final_fraction: f64,
    pub steps_completed: u64,
    pub stalled: bool,
    pub truncated: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub classification: Classification,
    pub forward: DirectionSummary,
    pub backward: DirectionSummary,
    pub forward_coverage_curve: CoverageCurve,
    pub backward_coverage_curve: CoverageCurve,
    /// The α-limit grid is not complete.
    pub in_script_a: bool,
    /// The ω-limit grid is not complete.
    pub in_script_w: bool,
    pub budget: u64,
    pub resolution: u32,
    pub tolerances: ClassifyTolerances,
}

/// A fixed point known from the construction.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownFixedPoint {
    pub point: Vec<f64>,
    /// Field norm (flows) or one-step displacement (maps) at the point.
    pub residual: f64,
    /// Unit direction of the straight flow lines through the point, for
    /// fields of the form `Φ(x)·γ`.
    pub flow_line: Option<Vec<f64>>,
}

pub fn known_fixed_points(sys: &SystemDescriptor) -> Result<Vec<KnownFixedPoint>> {
    Ok(match sys.kind() {
        SystemKind::TimeSMap(m) => {
            let f = m.field();
            let dir: Vec<f64> = f.gamma_f64().iter().map(|g| g / f.speed()).collect();
            f.centers()
                .iter()
                .map(|c| {
                    Ok(KnownFixedPoint {
                        point: c.coords().to_vec(),
                        residual: f.eval(c)?.norm(),
                        flow_line: Some(dir.clone()),
                    })
                })
                .collect::<Result<_>>()?
        }
        SystemKind::Automorphism { .. } => {
            let o = vec![0.0; sys.dim()];
            let mut x = o.clone();
            sys.stepper(Direction::Forward)?.step(&mut x)?;
            vec![KnownFixedPoint {
                residual: distance_slices(&o, &x),
                point: o,
                flow_line: None,
            }]
        }
        SystemKind::Product(l, r) => {
            let (lp, rp) = (known_fixed_points(l)?, known_fixed_points(r)?);
            let mut out = Vec::new();
            for a in &lp {
                for b in &rp {
                    let mut point = a.point.clone();
                    point.extend_from_slice(&b.point);
                    out.push(KnownFixedPoint {
                        point,
                        residual: a.residual.hypot(b.residual),
                        flow_line: None,
                    });
                }
            }
            out
        }
        _ => Vec::new(),
    })
}

/// Offset of `x` from the flow line through `p`, and whether `x` sits on the
/// side from which the flow in direction `dir` moves toward `p`.
fn flow_line_offset(x: &[f64], p: &[f64], line: &[f64], dir: Direction) -> (f64, bool) {
    let lift = minimal_lift(p, x);
    let along: f64 = lift.iter().zip(line).map(|(a, b)| a * b).sum();
    let perp = lift
        .iter()
        .zip(line)
        .map(|(a, b)| (a - along * b).powi(2))
        .sum::<f64>()
        .sqrt();
    (perp, along * dir.sign() < 0.0)
}

struct DirectionScan {
    curve: CoverageCurve,
    grid: CoverageGrid,
    period: Option<u64>,
    asymptotic: Option<Vec<f64>>,
    stalled: bool,
}

fn scan_direction(
    sys: &SystemDescriptor,
    x0: &State,
    dir: Direction,
    budget: u64,
    resolution: u32,
    tol: &ClassifyTolerances,
    fixed: &[KnownFixedPoint],
) -> Result<DirectionScan> {
    let mut walker = Walker::new(sys, x0, dir, 1)?;
    let start = walker.snapshot();
    let mut grid = CoverageGrid::new(walker.grid_dim(), resolution)?;
    grid.record_slice(walker.coords());
    let mut rec = CurveRecorder::new(&grid);
    let window_start = budget - ((budget as f64 * tol.stall_window).ceil() as u64).clamp(1, budget);
    let dense_cells = (tol.dense_threshold * grid.total_cells() as f64).ceil() as u64;
    let mut last_new = 0;
    let mut candidate: Option<u64> = None;
    let mut confirmed = 0;
    let mut period = None;
    // Trailing distances to the nearest known fixed point.
    let mut trail: Vec<(usize, f64)> = Vec::new();
    let mut done = 0;
    let mut truncated = None;
    while done < budget {
        match walker.advance() {
            Ok(()) => {}
            Err(e @ Error::Stalled { .. }) => {
                truncated = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
        done += 1;
        if grid.record_slice(walker.coords()) {
            last_new = done;
        }
        rec.observe(done, &grid);
        if walker.distance_to(&start) < tol.periodic_tol {
            match candidate {
                None => {
                    candidate = Some(done);
                    confirmed = 1;
                }
                Some(p) if done == p * (confirmed as u64 + 1) => confirmed += 1,
                Some(_) => {}
            }
            if confirmed >= tol.confirmations {
                period = candidate;
                break;
            }
        } else if let Some(p) = candidate {
            if done == p * (confirmed as u64 + 1) {
                candidate = None;
                confirmed = 0;
            }
        }
        if grid.occupied_cells() >= dense_cells {
            break;
        }
        if done > window_start && !fixed.is_empty() {
            let x = walker.coords();
            let nearest = fixed
                .iter()
                .enumerate()
                .map(|(i, p)| (i, distance_slices(x, &p.point)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty");
            trail.push(nearest);
        }
    }
    let ran_full = done == budget;
    let asymptotic = if period.is_none() && ran_full {
        asymptotic_target(&trail, walker.coords(), dir, tol, fixed)
    } else {
        None
    };
    let curve = CoverageCurve {
        direction: dir,
        resolution,
        points: rec.finish(done, &grid),
        steps_requested: budget,
        steps_completed: done,
        completed_grid: grid.is_complete(),
        truncated,
    };
    Ok(DirectionScan {
        stalled: ran_full && last_new <= window_start,
        curve,
        grid,
        period,
        asymptotic,
    })
}

/// Convergence over the trailing window: same target throughout, distance
/// nonincreasing with a net decrease, at a point where the field vanishes, and
/// either the distance is below tolerance or the current point lies on the
/// approaching side of a straight flow line through the target.
fn asymptotic_target(
    trail: &[(usize, f64)],
    x: &[f64],
    dir: Direction,
    tol: &ClassifyTolerances,
    fixed: &[KnownFixedPoint],
) -> Option<Vec<f64>> {
    let (first, last) = (trail.first()?, trail.last()?);
    let target = &fixed[first.0];
    let steady = trail.iter().all(|(i, _)| *i == first.0);
    let monotone = trail.windows(2).all(|w| w[1].1 <= w[0].1);
    let on_line = target.flow_line.as_ref().is_some_and(|line| {
        let (perp, approaching) = flow_line_offset(x, &target.point, line, dir);
        perp < tol.asymptotic_tol && approaching
    });
    let close = last.1 < tol.asymptotic_tol || on_line;
    let zero = target.residual < tol.field_zero_tol;
    (steady && monotone && last.1 < first.1 && close && zero).then(|| target.point.clone())
}

fn direction_class(scan: &DirectionScan, tol: &ClassifyTolerances) -> Classification {
    if let Some(period) = scan.period {
        Classification::Periodic { period }
    } else if scan.grid.fraction() >= tol.dense_threshold {
        Classification::EmpiricallyDense
    } else if let Some(target) = &scan.asymptotic {
        Classification::AsymptoticToFixedPoint { target: target.clone() }
    } else if scan.stalled {
        Classification::NonDenseOther
    } else {
        Classification::Inconclusive
    }
}

/// Runs both directions for up to `budget` steps and classifies the orbit.
pub fn classify_orbit(
    sys: &SystemDescriptor,
    x0: &State,
    budget: u64,
    resolution: u32,
    tol: &ClassifyTolerances,
) -> Result<OrbitReport> {
    if budget == 0 {
        return invalid("budget must be at least 1");
    }
    check_resolution(resolution)?;
    tol.validate()?;
    let fixed = known_fixed_points(sys)?;
    let fwd = scan_direction(sys, x0, Direction::Forward, budget, resolution, tol, &fixed)?;
    let bwd = scan_direction(sys, x0, Direction::Backward, budget, resolution, tol, &fixed)?;
    let (cf, cb) = (direction_class(&fwd, tol), direction_class(&bwd, tol));
    use Classification::*;
    let classification = match (&cf, &cb) {
        (EmpiricallyDense, EmpiricallyDense) => EmpiricallyDense,
        (Periodic { .. }, _) => cf.clone(),
        (_, Periodic { .. }) => cb.clone(),
        (AsymptoticToFixedPoint { .. }, _) => cf.clone(),
        (_, AsymptoticToFixedPoint { .. }) => cb.clone(),
        (NonDenseOther, _) | (_, NonDenseOther) => NonDenseOther,
        _ => Inconclusive,
    };
    let summary = |scan: &DirectionScan, c: Classification| DirectionSummary {
        classification: c,
        final_fraction: scan.grid.fraction(),
        steps_completed: scan.curve.steps_completed,
        stalled: scan.stalled,
        truncated: scan.curve.truncated.clone(),
    };
    Ok(OrbitReport {
        classification,
        in_script_a: bwd.grid.fraction() < tol.dense_threshold,
        in_script_w: fwd.grid.fraction() < tol.dense_threshold,
        forward: summary(&fwd, cf),
        backward: summary(&bwd, cb),
        forward_coverage_curve: fwd.curve,
        backward_coverage_curve: bwd.curve,
        budget,
        resolution,
        tolerances: *tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::IntegerMatrix;
    use crate::exact::{ExactVector, SymbolBasis};
    use crate::systems::SubshiftDescriptor;
    use proptest::prelude::*;

    fn translation(entries: &[&str]) -> SystemDescriptor {
        let b = SymbolBasis::from_exprs(&[("t1", "sqrt(2)-1"), ("t2", "sqrt(3)-1")]).unwrap();
        SystemDescriptor::translation(ExactVector::parse(b, entries).unwrap()).unwrap()
    }

    fn origin(n: usize) -> State {
        State::Torus(TorusPoint::origin(n))
    }

    #[test]
    fn rational_rotation_is_periodic() {
        let sys = translation(&["1/3", "1/7"]);
        let run = coverage_experiment(&sys, &origin(2), 5000, 32, Direction::Forward).unwrap();
        assert!(run.grid.occupied_cells() <= 21);
        assert!(run.curve.is_monotone());
        let r = classify_orbit(&sys, &origin(2), 5000, 32, &ClassifyTolerances::default()).unwrap();
        assert_eq!(r.classification, Classification::Periodic { period: 21 });
        assert!(r.in_script_a && r.in_script_w);
    }

    #[test]
    fn irrational_rotation_is_dense() {
        let sys = translation(&["@t1", "@t2"]);
        let r = classify_orbit(&sys, &origin(2), 1_000_000, 32, &ClassifyTolerances::default()).unwrap();
        assert_eq!(r.classification, Classification::EmpiricallyDense);
        assert!(!r.in_script_a && !r.in_script_w);
        assert_eq!(r.forward_coverage_curve.final_fraction(), 1.0);
    }

    #[test]
    fn irrational_rotation_on_a_circle_stalls_in_a_subtorus() {
        // a = (θ, 0): the orbit lives on a circle, so the grid stalls at 1/32.
        let sys = translation(&["@t1", "0"]);
        let r = classify_orbit(&sys, &origin(2), 20_000, 32, &ClassifyTolerances::default()).unwrap();
        assert_eq!(r.classification, Classification::NonDenseOther);
        assert_eq!(r.forward.final_fraction, 1.0 / 32.0);
    }

    #[test]
    fn cat_map_fixed_point_and_period() {
        let cat = SystemDescriptor::automorphism(IntegerMatrix::from_i64(&[&[2, 1], &[1, 1]])).unwrap();
        let r = classify_orbit(&cat, &origin(2), 100, 32, &ClassifyTolerances::default()).unwrap();
        assert_eq!(r.classification, Classification::Periodic { period: 1 });
        // (1/2, 0) → (0, 1/2) → (1/2, 1/2) → (1/2, 0).
        let x = State::Torus(TorusPoint::new(vec![0.5, 0.0]).unwrap());
        let r = classify_orbit(&cat, &x, 100, 32, &ClassifyTolerances::default()).unwrap();
        assert_eq!(r.classification, Classification::Periodic { period: 3 });
    }

    #[test]
    fn subshift_coverage_via_embedding() {
        let sys = SystemDescriptor::subshift(SubshiftDescriptor::full(2).unwrap());
        let x = State::Symbolic(SymbolicPoint::periodic(vec![0, 1, 1]).unwrap());
        let r = classify_orbit(&sys, &x, 100, 32, &ClassifyTolerances::default()).unwrap();
        assert_eq!(r.classification, Classification::Periodic { period: 3 });
        let run = coverage_experiment(&sys, &x, 10, 32, Direction::Forward).unwrap();
        assert!(run.grid.occupied_cells() <= 3);
    }

    #[test]
    fn rejects_bad_inputs() {
        let sys = translation(&["1/3", "1/7"]);
        assert!(coverage_experiment(&sys, &origin(2), 10, 30, Direction::Forward).is_err());
        assert!(coverage_experiment(&sys, &origin(2), 0, 32, Direction::Forward).is_err());
        assert!(coverage_experiment(&sys, &origin(3), 10, 32, Direction::Forward).is_err());
    }

    #[test]
    fn fan_out_keeps_order() {
        let serial = fan_out((0..50).collect(), Some(1), |i: u64| i * i).unwrap();
        let parallel = fan_out((0..50).collect(), Some(4), |i: u64| i * i).unwrap();
        assert_eq!(serial, parallel);
        assert_eq!(generic_seeds(2, 3, 7), generic_seeds(2, 3, 7));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn curves_are_monotone(p in 1u32..12, q in 1u32..12, steps in 1u64..400) {
            let sys = translation(&[&format!("1/{p}"), &format!("@t1 + 1/{q}")]);
            let run = coverage_experiment(&sys, &origin(2), steps, 16, Direction::Backward).unwrap();
            prop_assert!(run.curve.is_monotone());
            prop_assert_eq!(run.curve.final_fraction(), run.grid.fraction());
        }
    }
}
