//! Geometry of the flat n-torus `R^n / Z^n`.
//!
//! Points are stored as coordinates in the half-open unit cube `[0,1)^n`.
//! The quotient metric is the Euclidean length of the shortest lift of
//! `x - y`; a max-norm variant is available for grid reasoning.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Reduce a single real number into `[0, 1)`.
///
/// Exact integers (including `1.0`) map to `0.0`.
#[inline]
pub fn wrap_scalar(v: f64) -> f64 {
    let r = v - v.floor();
    // `v - floor(v)` can round up to 1.0 for tiny negative inputs.
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Signed minimal representative of `v` modulo 1, in `[-1/2, 1/2)`.
#[inline]
pub fn centered_residue(v: f64) -> f64 {
    let r = wrap_scalar(v);
    if r >= 0.5 {
        r - 1.0
    } else {
        r
    }
}

/// A point on `T^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    /// Build a point from coordinates that must already lie in `[0,1)`.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return invalid("torus dimension must be at least 1");
        }
        if let Some(c) = coords.iter().find(|c| !(0.0..1.0).contains(*c)) {
            return invalid(format!("coordinate {c} outside [0,1)"));
        }
        Ok(Self { coords })
    }

    pub fn origin(dim: usize) -> Self {
        Self {
            coords: vec![0.0; dim.max(1)],
        }
    }

    /// Wrap without validation; callers guarantee finite input.
    pub(crate) fn from_wrapped(mut coords: Vec<f64>) -> Self {
        for c in coords.iter_mut() {
            *c = wrap_scalar(*c);
        }
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Concatenate two points into a point on the product torus.
    pub fn concat(&self, other: &TorusPoint) -> TorusPoint {
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        TorusPoint { coords }
    }

    /// Translate by a displacement and wrap.
    pub fn translate(&self, d: &Displacement) -> Result<TorusPoint> {
        check_dims(self.dim(), d.dim())?;
        Ok(TorusPoint::from_wrapped(
            self.coords
                .iter()
                .zip(d.components())
                .map(|(x, v)| x + v)
                .collect(),
        ))
    }
}

impl TryFrom<Vec<f64>> for TorusPoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        TorusPoint::new(v)
    }
}

impl From<TorusPoint> for Vec<f64> {
    fn from(p: TorusPoint) -> Self {
        p.coords
    }
}

/// A tangent vector (unbounded components).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Displacement {
    components: Vec<f64>,
}

impl Displacement {
    pub fn new(components: Vec<f64>) -> Self {
        Self { components }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            components: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Choice of quotient metric on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TorusMetric {
    #[default]
    Euclidean,
    Max,
}

/// Quotient map `R^n -> T^n`.
pub fn wrap(v: &[f64]) -> Result<TorusPoint> {
    if v.is_empty() {
        return invalid("cannot wrap an empty vector");
    }
    if let Some(c) = v.iter().find(|c| !c.is_finite()) {
        return invalid(format!("non-finite component {c}"));
    }
    Ok(TorusPoint::from_wrapped(v.to_vec()))
}

fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        Err(Error::DimensionMismatch { expected, actual })
    } else {
        Ok(())
    }
}

/// Minimal lift of `y - x` per axis, each component in `[-1/2, 1/2)`.
pub fn minimal_lift(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(y)
        .map(|(a, b)| centered_residue(b - a))
        .collect()
}

/// Euclidean quotient distance on raw coordinate slices.
#[inline]
pub fn distance_slices(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = wrap_scalar(a - b);
            let d = d.min(1.0 - d);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

pub fn torus_distance(x: &TorusPoint, y: &TorusPoint) -> Result<f64> {
    torus_distance_with(x, y, TorusMetric::Euclidean)
}

pub fn torus_distance_with(x: &TorusPoint, y: &TorusPoint, metric: TorusMetric) -> Result<f64> {
    check_dims(x.dim(), y.dim())?;
    Ok(match metric {
        TorusMetric::Euclidean => distance_slices(x.coords(), y.coords()),
        TorusMetric::Max => x
            .coords()
            .iter()
            .zip(y.coords())
            .map(|(a, b)| {
                let d = wrap_scalar(a - b);
                d.min(1.0 - d)
            })
            .fold(0.0, f64::max),
    })
}

/// Snap distance to a cell boundary, in cell widths.
pub const BOUNDARY_SNAP: f64 = 1e-9;

/// Upper bound on the number of cells a grid may hold (bitset of 128 MiB).
pub const MAX_GRID_CELLS: u64 = 1 << 30;

/// Occupancy record of the boxes `prod [k_i/m, (k_i+1)/m)` visited by an orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageGrid {
    dim: usize,
    resolution: u32,
    cells: u64,
    bits: Vec<u64>,
    occupied: u64,
    visit_count: u64,
}

/// Serialized summary of a grid as it appears in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub resolution: u32,
    pub visited_cell_count: u64,
    pub fraction: f64,
}

impl CoverageGrid {
    pub fn new(dim: usize, resolution: u32) -> Result<Self> {
        if dim == 0 {
            return invalid("grid dimension must be at least 1");
        }
        if resolution == 0 {
            return invalid("grid resolution must be positive");
        }
        let cells = (resolution as u64)
            .checked_pow(dim as u32)
            .filter(|c| *c <= MAX_GRID_CELLS)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "grid {resolution}^{dim} exceeds {MAX_GRID_CELLS} cells"
                ))
            })?;
        Ok(Self {
            dim,
            resolution,
            cells,
            bits: vec![0; cells.div_ceil(64) as usize],
            occupied: 0,
            visit_count: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn total_cells(&self) -> u64 {
        self.cells
    }

    pub fn occupied_cells(&self) -> u64 {
        self.occupied
    }

    pub fn visit_count(&self) -> u64 {
        self.visit_count
    }

    pub fn fraction(&self) -> f64 {
        self.occupied as f64 / self.cells as f64
    }

    pub fn is_complete(&self) -> bool {
        self.occupied == self.cells
    }

    /// Per-axis cell coordinates of a point with coordinates in `[0,1)`.
    pub fn cell_of(&self, x: &[f64]) -> Vec<u32> {
        x.iter().map(|&c| self.axis_cell(c)).collect()
    }

    #[inline]
    fn axis_cell(&self, c: f64) -> u32 {
        // Coordinates within BOUNDARY_SNAP cell widths of a cell boundary
        // belong to the cell starting there, so rounding drift on exact
        // boundary points (such as 1 − 2^{−53} for 0) keeps one cell.
        let t = c * self.resolution as f64;
        let near = t.round();
        let k = if (t - near).abs() < BOUNDARY_SNAP { near } else { t.floor() };
        if k < 0.0 || k >= self.resolution as f64 {
            0
        } else {
            k as u32
        }
    }

    /// Linear index of a point's cell (axis 0 varies fastest).
    #[inline]
    pub fn index_of(&self, x: &[f64]) -> u64 {
        let m = self.resolution as u64;
        let mut idx = 0u64;
        for &c in x.iter().rev() {
            idx = idx * m + self.axis_cell(c) as u64;
        }
        idx
    }

    /// Record a raw coordinate slice; returns `true` when the cell is new.
    #[inline]
    pub fn record_slice(&mut self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dim);
        let idx = self.index_of(x);
        self.visit_count += 1;
        self.mark(idx)
    }

    pub fn record(&mut self, x: &TorusPoint) -> Result<bool> {
        check_dims(self.dim, x.dim())?;
        Ok(self.record_slice(x.coords()))
    }

    /// Mark a cell by linear index; returns `true` when newly occupied.
    pub fn mark(&mut self, idx: u64) -> bool {
        let (w, b) = ((idx / 64) as usize, idx % 64);
        let mask = 1u64 << b;
        if self.bits[w] & mask == 0 {
            self.bits[w] |= mask;
            self.occupied += 1;
            true
        } else {
            false
        }
    }

    pub fn contains_index(&self, idx: u64) -> bool {
        idx < self.cells && self.bits[(idx / 64) as usize] & (1u64 << (idx % 64)) != 0
    }

    pub fn contains_cell(&self, cell: &[u32]) -> bool {
        let m = self.resolution as u64;
        let idx = cell.iter().rev().fold(0u64, |acc, &k| acc * m + k as u64);
        self.contains_index(idx)
    }

    /// Iterate linear indices of occupied cells in increasing order.
    pub fn occupied_indices(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            (0..64u64)
                .filter(move |b| word & (1u64 << b) != 0)
                .map(move |b| w as u64 * 64 + b)
        })
    }

    /// Per-axis coordinates of a linear index.
    pub fn cell_coords(&self, mut idx: u64) -> Vec<u32> {
        let m = self.resolution as u64;
        (0..self.dim)
            .map(|_| {
                let k = (idx % m) as u32;
                idx /= m;
                k
            })
            .collect()
    }

    /// Occupancy union with another grid of the same shape.
    pub fn merge(&mut self, other: &CoverageGrid) -> Result<()> {
        if self.dim != other.dim || self.resolution != other.resolution {
            return invalid("cannot merge grids of different shape");
        }
        let mut occupied = 0u64;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
            occupied += a.count_ones() as u64;
        }
        self.occupied = occupied;
        self.visit_count += other.visit_count;
        Ok(())
    }

    pub fn same_occupancy(&self, other: &CoverageGrid) -> bool {
        self.dim == other.dim && self.resolution == other.resolution && self.bits == other.bits
    }

    pub fn summary(&self) -> CoverageSummary {
        CoverageSummary {
            resolution: self.resolution,
            visited_cell_count: self.occupied,
            fraction: self.fraction(),
        }
    }
}
