use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_resolution, coverage_experiment, generic_seeds};
use crate::error::{invalid, Result};
use crate::systems::{Direction, State, Stepper, SystemDescriptor};
use crate::torus::{distance_slices, minimal_lift, wrap_scalar, TorusPoint};

/// Candidates `δ_j = ε·2^{−j}` for `j = 0..=DELTA_HALVINGS`.
const DELTA_HALVINGS: i32 = 20;

/// Mean separation rate below which no expansion is reported.
pub const EXPANSION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquicontinuityReport {
    pub epsilon: f64,
    pub horizon: u32,
    pub pairs: usize,
    /// Largest tested `δ` keeping every sampled pair `ε`-close; 0 when none did.
    pub delta: f64,
    pub mean_rate: f64,
    pub max_rate: f64,
    pub verdict: String,
}

fn random_pair(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> (Vec<f64>, Vec<f64>) {
    let x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let mut u: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    let r = radius * rng.random_range(f64::EPSILON..=1.0);
    u.iter_mut().for_each(|v| *v *= r / norm);
    let y = x.iter().zip(&u).map(|(a, b)| wrap_scalar(a + b)).collect();
    (x, y)
}

/// Whether the pair stays within `eps` for `horizon` steps each way.
fn stays_close(
    fwd: &mut dyn Stepper,
    bwd: &mut dyn Stepper,
    x: &[f64],
    y: &[f64],
    horizon: u32,
    eps: f64,
) -> Result<bool> {
    let steppers: [&mut dyn Stepper; 2] = [fwd, bwd];
    for stepper in steppers {
        let (mut a, mut b) = (x.to_vec(), y.to_vec());
        for _ in 0..horizon {
            stepper.step(&mut a)?;
            stepper.step(&mut b)?;
            if distance_slices(&a, &b) > eps * (1.0 + 1e-9) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Mean `ln(d_{k+1}/d_0)` per step with renormalization to `d_0` after each step.
fn separation_rate(stepper: &mut dyn Stepper, x: &[f64], d0: f64, dir: &[f64], horizon: u32) -> Result<f64> {
    let mut a = x.to_vec();
    let mut b: Vec<f64> = a.iter().zip(dir).map(|(p, v)| wrap_scalar(p + d0 * v)).collect();
    let mut sum = 0.0;
    for _ in 0..horizon {
        stepper.step(&mut a)?;
        stepper.step(&mut b)?;
        let lift = minimal_lift(&a, &b);
        let d = lift.iter().map(|v| v * v).sum::<f64>().sqrt();
        if d == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        sum += (d / d0).ln();
        for ((bi, ai), li) in b.iter_mut().zip(&a).zip(&lift) {
            *bi = wrap_scalar(ai + li * d0 / d);
        }
    }
    Ok(sum / horizon as f64)
}

/// Sampled equicontinuity modulus `δ(ε)` and separation rates of a torus system.
pub fn equicontinuity_modulus(
    sys: &SystemDescriptor,
    eps: f64,
    horizon: u32,
    pairs: usize,
    seed: u64,
) -> Result<EquicontinuityReport> {
    if !(eps > 0.0 && eps <= 0.5) {
        return invalid(format!("ε = {eps} must lie in (0, 1/2]"));
    }
    if horizon == 0 || pairs == 0 {
        return invalid("horizon and pair count must be positive");
    }
    if sys.is_symbolic() {
        return invalid("equicontinuity sampling needs a torus system");
    }
    let dim = sys.dim();
    let mut fwd = sys.stepper(Direction::Forward)?;
    let mut bwd = sys.stepper(Direction::Backward)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut delta = 0.0;
    'candidates: for j in 0..=DELTA_HALVINGS {
        let d = eps * 2f64.powi(-j);
        for _ in 0..pairs {
            let (x, y) = random_pair(&mut rng, dim, d);
            if !stays_close(fwd.as_mut(), bwd.as_mut(), &x, &y, horizon, eps)? {
                continue 'candidates;
            }
        }
        delta = d;
        break;
    }
    let d0 = eps.min(1e-3);
    let mut rates = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let mut u: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        u.iter_mut().for_each(|v| *v /= norm);
        rates.push(separation_rate(fwd.as_mut(), &x, d0, &u, horizon)?);
    }
    let mean_rate = rates.iter().sum::<f64>() / rates.len() as f64;
    let max_rate = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let verdict = if mean_rate.abs() < EXPANSION_TOL {
        "no expansion detected"
    } else if mean_rate > 0.0 {
        "expansion detected"
    } else {
        "contraction detected"
    };
    Ok(EquicontinuityReport {
        epsilon: eps,
        horizon,
        pairs,
        delta,
        mean_rate,
        max_rate,
        verdict: verdict.into(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductProbeReport {
    pub factor_dim: usize,
    pub resolution: u32,
    pub steps: u64,
    pub fractions: Vec<f64>,
    pub max_fraction: f64,
    /// No product orbit covered the grid.
    pub stalls_below_one: bool,
}

/// Coverage of `f × f` from generic product seeds.
pub fn product_pm_probe(
    f: &SystemDescriptor,
    steps: u64,
    resolution: u32,
    seeds: usize,
    seed: u64,
) -> Result<ProductProbeReport> {
    check_resolution(resolution)?;
    if f.is_symbolic() {
        return invalid("the product probe needs a torus system");
    }
    let square = SystemDescriptor::product(f.clone(), f.clone())?;
    let mut fractions = Vec::with_capacity(seeds);
    for p in generic_seeds(square.dim(), seeds.max(1), seed) {
        let x = State::Torus(TorusPoint::new(p.into_coords())?);
        let run = coverage_experiment(&square, &x, steps, resolution, Direction::Forward)?;
        fractions.push(run.grid.fraction());
    }
    let max_fraction = fractions.iter().copied().fold(0.0, f64::max);
    Ok(ProductProbeReport {
        factor_dim: f.dim(),
        resolution,
        steps,
        stalls_below_one: max_fraction < 1.0,
        fractions,
        max_fraction,
    })
}
