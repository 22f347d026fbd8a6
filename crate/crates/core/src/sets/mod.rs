//! Rasterized sets and outer-approximated set maps.

mod chains;
mod rle;

pub use chains::{birkhoff_chain, decreasing_chain_check, preimage_intersection_chain, BirkhoffRun, Dichotomy};
pub use rle::{read_rle, write_rle, RLE_MAGIC};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::IntegerMatrix;
use crate::error::{invalid, Error, Result};
use crate::systems::{Direction, SystemDescriptor};

/// Ambient space of a raster: the torus `T^n` (wrapping) or the cube `[lo, hi]^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Torus,
    Cube { lo: f64, hi: f64 },
}

impl Domain {
    fn bounds(self) -> (f64, f64) {
        match self {
            Domain::Torus => (0.0, 1.0),
            Domain::Cube { lo, hi } => (lo, hi),
        }
    }

    fn wraps(self) -> bool {
        matches!(self, Domain::Torus)
    }
}

/// A union of grid cells over a domain; axis 0 varies fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterSet {
    domain: DomainKey,
    dim: usize,
    resolution: u32,
    bits: Vec<u64>,
}

/// `Domain` with bitwise float comparison so rasters can be `Eq`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct DomainKey(Option<(u64, u64)>);

impl From<Domain> for DomainKey {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Torus => DomainKey(None),
            Domain::Cube { lo, hi } => DomainKey(Some((lo.to_bits(), hi.to_bits()))),
        }
    }
}

impl From<DomainKey> for Domain {
    fn from(d: DomainKey) -> Self {
        match d.0 {
            None => Domain::Torus,
            Some((lo, hi)) => Domain::Cube {
                lo: f64::from_bits(lo),
                hi: f64::from_bits(hi),
            },
        }
    }
}

/// Largest raster accepted (cells).
pub const MAX_RASTER_CELLS: usize = 1 << 26;

impl RasterSet {
    pub fn empty(domain: Domain, dim: usize, resolution: u32) -> Result<Self> {
        if dim == 0 || resolution == 0 {
            return invalid("raster dimension and resolution must be positive");
        }
        if let Domain::Cube { lo, hi } = domain {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return invalid(format!("cube bounds [{lo}, {hi}] are invalid"));
            }
        }
        let cells = (resolution as usize)
            .checked_pow(dim as u32)
            .filter(|c| *c <= MAX_RASTER_CELLS)
            .ok_or_else(|| Error::InvalidInput(format!("raster {resolution}^{dim} is too large")))?;
        Ok(Self {
            domain: domain.into(),
            dim,
            resolution,
            bits: vec![0; cells.div_ceil(64)],
        })
    }

    pub fn full(domain: Domain, dim: usize, resolution: u32) -> Result<Self> {
        let mut s = Self::empty(domain, dim, resolution)?;
        for c in 0..s.cell_count() {
            s.insert(c);
        }
        Ok(s)
    }

    /// Cells whose center satisfies `pred`.
    pub fn from_centers(domain: Domain, dim: usize, resolution: u32, pred: impl Fn(&[f64]) -> bool) -> Result<Self> {
        let mut s = Self::empty(domain, dim, resolution)?;
        for c in 0..s.cell_count() {
            if pred(&s.cell_center(c)) {
                s.insert(c);
            }
        }
        Ok(s)
    }

    /// Cells whose closed box meets the closed box `[lo_i, hi_i]`.
    pub fn from_box(domain: Domain, resolution: u32, lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                actual: hi.len(),
            });
        }
        let mut s = Self::empty(domain, lo.len(), resolution)?;
        let (dlo, _) = domain.bounds();
        let w = s.cell_width();
        for c in 0..s.cell_count() {
            let k = s.cell_coords(c);
            let meets = k.iter().enumerate().all(|(i, &ki)| {
                let a = dlo + ki as f64 * w;
                a <= hi[i] && lo[i] <= a + w
            });
            if meets {
                s.insert(c);
            }
        }
        Ok(s)
    }

    /// Cells whose closed box contains `p`.
    pub fn point(domain: Domain, resolution: u32, p: &[f64]) -> Result<Self> {
        Self::from_box(domain, resolution, p, p)
    }

    pub fn domain(&self) -> Domain {
        self.domain.into()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn cell_count(&self) -> usize {
        (self.resolution as usize).pow(self.dim as u32)
    }

    pub fn cell_width(&self) -> f64 {
        let (lo, hi) = self.domain().bounds();
        (hi - lo) / self.resolution as f64
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.bits[cell / 64] >> (cell % 64) & 1 == 1
    }

    pub fn insert(&mut self, cell: usize) {
        self.bits[cell / 64] |= 1 << (cell % 64);
    }

    pub fn remove(&mut self, cell: usize) {
        self.bits[cell / 64] &= !(1 << (cell % 64));
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|w| *w == 0)
    }

    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(i, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| i * 64 + b)
        })
    }

    pub fn cell_coords(&self, mut cell: usize) -> Vec<u32> {
        let m = self.resolution as usize;
        (0..self.dim)
            .map(|_| {
                let k = cell % m;
                cell /= m;
                k as u32
            })
            .collect()
    }

    pub fn cell_index(&self, coords: &[u32]) -> usize {
        coords
            .iter()
            .rev()
            .fold(0, |acc, &k| acc * self.resolution as usize + k as usize)
    }

    pub fn cell_center(&self, cell: usize) -> Vec<f64> {
        let (lo, _) = self.domain().bounds();
        let w = self.cell_width();
        self.cell_coords(cell)
            .iter()
            .map(|&k| lo + (k as f64 + 0.5) * w)
            .collect()
    }

    /// Cell containing `x`, or `None` outside a cube domain.
    pub fn cell_of(&self, x: &[f64]) -> Option<usize> {
        let (lo, hi) = self.domain().bounds();
        let m = self.resolution as i64;
        let mut coords = Vec::with_capacity(self.dim);
        for &v in x {
            let t = ((v - lo) / (hi - lo) * m as f64).floor() as i64;
            let k = if self.domain().wraps() {
                t.rem_euclid(m)
            } else if (0..m).contains(&t) {
                t
            } else if v == hi {
                m - 1
            } else {
                return None;
            };
            coords.push(k as u32);
        }
        Some(self.cell_index(&coords))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.resolution != other.resolution || self.domain != other.domain {
            return invalid("rasters differ in domain, dimension or resolution");
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.bits.iter_mut().zip(&other.bits) {
            *a = f(*a, *b);
        }
        out.clear_padding();
        Ok(out)
    }

    fn clear_padding(&mut self) {
        let n = self.cell_count();
        if n % 64 != 0 {
            let last = self.bits.len() - 1;
            self.bits[last] &= (1u64 << (n % 64)) - 1;
        }
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> Self {
        let mut out = self.clone();
        out.bits.iter_mut().for_each(|w| *w = !*w);
        out.clear_padding();
        out
    }

    pub fn is_subset(&self, other: &Self) -> Result<bool> {
        self.check_compatible(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0))
    }

    /// Neighbors of a cell: facewise (`diagonal = false`) or all `3^n − 1`.
    pub fn neighbors(&self, cell: usize, diagonal: bool) -> Vec<usize> {
        let k = self.cell_coords(cell);
        let m = self.resolution as i64;
        let wraps = self.domain().wraps();
        let mut out = Vec::new();
        let offsets: Vec<Vec<i64>> = if diagonal {
            (0..3usize.pow(self.dim as u32))
                .map(|mut t| {
                    (0..self.dim)
                        .map(|_| {
                            let d = (t % 3) as i64 - 1;
                            t /= 3;
                            d
                        })
                        .collect()
                })
                .filter(|o: &Vec<i64>| o.iter().any(|d| *d != 0))
                .collect()
        } else {
            (0..self.dim)
                .flat_map(|i| {
                    [-1i64, 1].into_iter().map(move |d| {
                        let mut o = vec![0; self.dim];
                        o[i] = d;
                        o
                    })
                })
                .collect()
        };
        'offsets: for o in offsets {
            let mut c = Vec::with_capacity(self.dim);
            for (ki, di) in k.iter().zip(&o) {
                let t = *ki as i64 + di;
                let t = if wraps {
                    t.rem_euclid(m)
                } else if (0..m).contains(&t) {
                    t
                } else {
                    continue 'offsets;
                };
                c.push(t as u32);
            }
            let idx = self.cell_index(&c);
            if idx != cell && !out.contains(&idx) {
                out.push(idx);
            }
        }
        out
    }

    /// One-cell dilation over all neighbors.
    pub fn dilate(&self) -> Self {
        let mut out = self.clone();
        for c in self.cells() {
            for n in self.neighbors(c, true) {
                out.insert(n);
            }
        }
        out
    }

    /// Raster closure: the one-cell dilation.
    pub fn closure(&self) -> Self {
        self.dilate()
    }

    /// Facewise-connected component of `self` reachable from the cells of `seed`
    /// that lie in `self`.
    pub fn component_of(&self, seed: &Self) -> Result<Self> {
        self.check_compatible(seed)?;
        let mut out = Self::empty(self.domain(), self.dim, self.resolution)?;
        let mut stack: Vec<usize> = seed.cells().filter(|&c| self.contains(c)).collect();
        for &c in &stack {
            out.insert(c);
        }
        while let Some(c) = stack.pop() {
            for n in self.neighbors(c, false) {
                if self.contains(n) && !out.contains(n) {
                    out.insert(n);
                    stack.push(n);
                }
            }
        }
        Ok(out)
    }

    pub fn is_connected(&self) -> bool {
        match self.cells().next() {
            None => true,
            Some(c) => {
                let mut seed = self.clone();
                seed.bits.iter_mut().for_each(|w| *w = 0);
                seed.insert(c);
                self.component_of(&seed).map(|comp| comp.len() == self.len()).unwrap_or(false)
            }
        }
    }
}

/// The point map driving a raster map.
#[derive(Debug, Clone)]
pub enum PointMap {
    /// One forward step of a torus system.
    System(SystemDescriptor),
    /// `x ↦ Mx mod 1` for any integer matrix (not necessarily invertible).
    Endomorphism(IntegerMatrix),
    /// `x ↦ Mx` on a cube domain; images outside the cube are dropped.
    Linear(Vec<Vec<f64>>),
}

impl PointMap {
    fn dim(&self) -> usize {
        match self {
            PointMap::System(s) => s.dim(),
            PointMap::Endomorphism(m) => m.rows(),
            PointMap::Linear(m) => m.len(),
        }
    }
}

/// Outer approximation of a point map on a raster: each cell maps to the cells
/// of `s^n` sampled subpoints, dilated by one cell.
#[derive(Debug, Clone)]
pub struct RasterMap {
    map: PointMap,
    domain: Domain,
    dim: usize,
    resolution: u32,
    samples: u32,
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl RasterMap {
    pub fn new(map: PointMap, domain: Domain, resolution: u32, samples: u32) -> Result<Self> {
        if samples == 0 {
            return invalid("samples per axis must be positive");
        }
        let dim = map.dim();
        match (&map, domain) {
            (PointMap::Linear(m), Domain::Cube { .. }) => {
                if m.iter().any(|r| r.len() != dim) {
                    return invalid("linear map must be square");
                }
            }
            (PointMap::Linear(_), Domain::Torus) => return invalid("linear maps need a cube domain"),
            (PointMap::System(s), Domain::Torus) if !s.is_symbolic() => {}
            (PointMap::Endomorphism(m), Domain::Torus) if m.is_square() => {}
            _ => return invalid("point map does not match the domain"),
        }
        let probe = RasterSet::empty(domain, dim, resolution)?;
        let cells = probe.cell_count();
        let images: Vec<Vec<u32>> = (0..cells)
            .into_par_iter()
            .map(|c| cell_image(&map, &probe, c, samples))
            .collect::<Result<_>>()?;
        let mut offsets = Vec::with_capacity(cells + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for img in images {
            targets.extend(img);
            offsets.push(targets.len());
        }
        Ok(Self {
            map,
            domain,
            dim,
            resolution,
            samples,
            offsets,
            targets,
        })
    }

    pub fn point_map(&self) -> &PointMap {
        &self.map
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn samples(&self) -> u32 {
        self.samples
    }

    pub fn empty_set(&self) -> RasterSet {
        RasterSet::empty(self.domain, self.dim, self.resolution).expect("validated at construction")
    }

    pub fn full_set(&self) -> RasterSet {
        self.empty_set().complement()
    }

    /// Raster image of one cell.
    pub fn cell_image(&self, cell: usize) -> &[u32] {
        &self.targets[self.offsets[cell]..self.offsets[cell + 1]]
    }

    fn check(&self, s: &RasterSet) -> Result<()> {
        s.check_compatible(&self.empty_set())
    }

    pub fn image(&self, s: &RasterSet) -> Result<RasterSet> {
        self.check(s)?;
        let mut out = self.empty_set();
        for c in s.cells() {
            for &t in self.cell_image(c) {
                out.insert(t as usize);
            }
        }
        Ok(out)
    }

    /// Cells whose raster image meets `s`.
    pub fn preimage(&self, s: &RasterSet) -> Result<RasterSet> {
        self.check(s)?;
        let mut out = self.empty_set();
        for c in 0..out.cell_count() {
            if self.cell_image(c).iter().any(|&t| s.contains(t as usize)) {
                out.insert(c);
            }
        }
        Ok(out)
    }
}

fn apply_point(map: &PointMap, x: &[f64]) -> Result<Vec<f64>> {
    Ok(match map {
        PointMap::System(s) => {
            let mut y = x.to_vec();
            s.stepper(Direction::Forward)?.step(&mut y)?;
            y
        }
        PointMap::Endomorphism(m) => m.mul_vec_f64(x).into_iter().map(crate::torus::wrap_scalar).collect(),
        PointMap::Linear(m) => m
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect(),
    })
}

fn cell_image(map: &PointMap, raster: &RasterSet, cell: usize, samples: u32) -> Result<Vec<u32>> {
    let (lo, _) = raster.domain().bounds();
    let w = raster.cell_width();
    let k = raster.cell_coords(cell);
    let dim = raster.dim();
    let mut hit = Vec::new();
    for t in 0..(samples as usize).pow(dim as u32) {
        let mut t = t;
        let x: Vec<f64> = k
            .iter()
            .map(|&ki| {
                let j = t % samples as usize;
                t /= samples as usize;
                lo + (ki as f64 + (j as f64 + 0.5) / samples as f64) * w
            })
            .collect();
        if let Some(c) = raster.cell_of(&apply_point(map, &x)?) {
            if !hit.contains(&c) {
                hit.push(c);
            }
        }
    }
    let mut out = hit.clone();
    for c in hit {
        for n in raster.neighbors(c, true) {
            if !out.contains(&n) {
                out.push(n);
            }
        }
    }
    out.sort_unstable();
    Ok(out.into_iter().map(|c| c as u32).collect())
}
