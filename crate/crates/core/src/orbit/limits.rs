use serde::{Deserialize, Serialize};

use super::{check_resolution, coverage_with_power, CoverageCurve, Walker};
use crate::error::{invalid, Error, Result};
use crate::systems::{Direction, State, SystemDescriptor};
use crate::torus::{CoverageGrid, CoverageSummary};

/// Occupancy of the orbit segment `[burn_in, burn_in + window]` in direction `dir`.
pub fn limit_set_approx(
    sys: &SystemDescriptor,
    x0: &State,
    burn_in: u64,
    window: u64,
    resolution: u32,
    dir: Direction,
) -> Result<CoverageGrid> {
    check_resolution(resolution)?;
    let mut walker = Walker::new(sys, x0, dir, 1)?;
    for _ in 0..burn_in {
        walker.advance()?;
    }
    let mut grid = CoverageGrid::new(walker.grid_dim(), resolution)?;
    grid.record_slice(walker.coords());
    for _ in 0..window {
        walker.advance()?;
        grid.record_slice(walker.coords());
    }
    Ok(grid)
}

/// Tail occupancy approximating `ω(x0)`.
pub fn omega_limit_approx(
    sys: &SystemDescriptor,
    x0: &State,
    burn_in: u64,
    window: u64,
    resolution: u32,
) -> Result<CoverageGrid> {
    limit_set_approx(sys, x0, burn_in, window, resolution, Direction::Forward)
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Per-class occupancy for iterates with index `≡ i (mod p)`, split by sign.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidueLimitProfile {
    pub p: u32,
    pub steps: u64,
    /// Class `i` collects `f^n(x)` for `n ≥ 0`, `n ≡ i`.
    pub forward: Vec<CoverageSummary>,
    /// Class `i` collects `f^{−n}(x)` for `n ≥ 1`, `−n ≡ i`.
    pub backward: Vec<CoverageSummary>,
    pub forward_union_matches: bool,
    pub backward_union_matches: bool,
    #[serde(skip)]
    pub forward_grids: Vec<CoverageGrid>,
    #[serde(skip)]
    pub backward_grids: Vec<CoverageGrid>,
}

pub fn residue_limit_sets(
    sys: &SystemDescriptor,
    x0: &State,
    p: u32,
    steps: u64,
    resolution: u32,
) -> Result<ResidueLimitProfile> {
    if !is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    check_resolution(resolution)?;
    let mut sides = Vec::new();
    for dir in [Direction::Forward, Direction::Backward] {
        let mut walker = Walker::new(sys, x0, dir, 1)?;
        let dim = walker.grid_dim();
        let mut classes = (0..p)
            .map(|_| CoverageGrid::new(dim, resolution))
            .collect::<Result<Vec<_>>>()?;
        let mut full = CoverageGrid::new(dim, resolution)?;
        if dir == Direction::Forward {
            classes[0].record_slice(walker.coords());
            full.record_slice(walker.coords());
        }
        for n in 1..=steps {
            walker.advance()?;
            let index = dir.sign() as i64 * n as i64;
            let class = index.rem_euclid(p as i64) as usize;
            classes[class].record_slice(walker.coords());
            full.record_slice(walker.coords());
        }
        let mut union = CoverageGrid::new(dim, resolution)?;
        for g in &classes {
            union.merge(g)?;
        }
        let matches = union.same_occupancy(&full);
        sides.push((classes, matches));
    }
    let (bwd, bm) = sides.pop().expect("two sides");
    let (fwd, fm) = sides.pop().expect("two sides");
    Ok(ResidueLimitProfile {
        p,
        steps,
        forward: fwd.iter().map(CoverageGrid::summary).collect(),
        backward: bwd.iter().map(CoverageGrid::summary).collect(),
        forward_union_matches: fm,
        backward_union_matches: bm,
        forward_grids: fwd,
        backward_grids: bwd,
    })
}

/// Forward coverage of `f^p` from `x0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerScan {
    pub p: u32,
    pub fraction: f64,
    pub complete: bool,
    pub curve: CoverageCurve,
}

pub fn power_minimality_scan(
    sys: &SystemDescriptor,
    x0: &State,
    primes: &[u32],
    steps: u64,
    resolution: u32,
) -> Result<Vec<PowerScan>> {
    primes
        .iter()
        .map(|&p| {
            if !is_prime(p) {
                return Err(Error::InvalidInput(format!("{p} is not prime")));
            }
            let run = coverage_with_power(sys, x0, steps, resolution, Direction::Forward, p)?;
            Ok(PowerScan {
                p,
                fraction: run.grid.fraction(),
                complete: run.grid.is_complete(),
                curve: run.curve,
            })
        })
        .collect()
}
