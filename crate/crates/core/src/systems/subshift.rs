//! Two-sided subshifts of finite type on eventually-periodic points.
//!
//! The metric is `d(x, y) = 2^{−min{|j| : x_j ≠ y_j}}`, so the local stable
//! set of radius `2^{−m}` is exactly the cylinder fixing every index `> −m`.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Alphabet `{0, …, k−1}` with an allowed-transition matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubshiftDescriptor {
    alphabet: u8,
    allowed: Vec<Vec<bool>>,
}

impl SubshiftDescriptor {
    pub fn new(allowed: Vec<Vec<bool>>) -> Result<Self> {
        let k = allowed.len();
        if k < 2 || k > u8::MAX as usize {
            return invalid(format!("alphabet size {k} outside 2..=255"));
        }
        if allowed.iter().any(|row| row.len() != k) {
            return invalid("transition matrix must be square");
        }
        if (0..k).any(|a| !allowed[a].iter().any(|&b| b)) {
            return invalid("every symbol needs an allowed successor");
        }
        Ok(Self {
            alphabet: k as u8,
            allowed,
        })
    }

    pub fn full(k: u8) -> Result<Self> {
        Self::new(vec![vec![true; k as usize]; k as usize])
    }

    /// Binary shift forbidding the word `11`.
    pub fn golden_mean() -> Self {
        Self::new(vec![vec![true, true], vec![true, false]]).expect("valid matrix")
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn allowed(&self, a: u8, b: u8) -> bool {
        self.allowed
            .get(a as usize)
            .and_then(|r| r.get(b as usize))
            .copied()
            .unwrap_or(false)
    }

    pub fn transitions(&self) -> &[Vec<bool>] {
        &self.allowed
    }

    /// True when every symbol is in range and every adjacent pair is allowed.
    pub fn admits(&self, x: &SymbolicPoint) -> bool {
        let k = self.alphabet;
        let in_range = x.left.iter().chain(&x.core).chain(&x.right).all(|&s| s < k);
        if !in_range {
            return false;
        }
        let cyclic_ok = |w: &[u8]| (0..w.len()).all(|i| self.allowed(w[i], w[(i + 1) % w.len()]));
        let mut seam: Vec<u8> = Vec::with_capacity(x.core.len() + 2);
        seam.push(*x.left.last().expect("nonempty"));
        seam.extend(&x.core);
        seam.push(x.right[0]);
        cyclic_ok(&x.left)
            && cyclic_ok(&x.right)
            && seam.windows(2).all(|w| self.allowed(w[0], w[1]))
    }
}

/// Bi-infinite eventually-periodic sequence `… L L L core R R R …`.
///
/// `x_i = core[i − origin]` on the core, `left[(i − origin) mod |left|]` before
/// it and `right[(i − origin − |core|) mod |right|]` after it. Constructors
/// canonicalize: primitive periods, maximal periodic tails.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolicPoint {
    left: Vec<u8>,
    core: Vec<u8>,
    right: Vec<u8>,
    origin: i64,
}

fn primitive_root(w: &[u8]) -> Vec<u8> {
    let n = w.len();
    for p in 1..=n {
        if n % p == 0 && (0..n).all(|i| w[i] == w[i % p]) {
            return w[..p].to_vec();
        }
    }
    w.to_vec()
}

impl SymbolicPoint {
    pub fn new(left: Vec<u8>, core: Vec<u8>, right: Vec<u8>, origin: i64) -> Result<Self> {
        if left.is_empty() || right.is_empty() {
            return invalid("periodic words must be nonempty");
        }
        let mut p = Self {
            left: primitive_root(&left),
            core,
            right: primitive_root(&right),
            origin,
        };
        p.canonicalize();
        Ok(p)
    }

    /// The periodic point `… w w w …` with `w[0]` at index 0.
    pub fn periodic(word: Vec<u8>) -> Result<Self> {
        Self::new(word.clone(), Vec::new(), word, 0)
    }

    /// Point equal to `w` on `[start, start + |w|)` and to the given tails elsewhere.
    pub fn with_window(left: u8, window: Vec<u8>, right: u8, start: i64) -> Result<Self> {
        Self::new(vec![left], window, vec![right], start)
    }

    fn canonicalize(&mut self) {
        while !self.core.is_empty() && self.core[0] == self.left[0] {
            self.core.remove(0);
            self.origin += 1;
            self.left.rotate_left(1);
        }
        while let Some(&last) = self.core.last() {
            if last != *self.right.last().expect("nonempty") {
                break;
            }
            self.core.pop();
            self.right.rotate_right(1);
        }
        if self.core.is_empty() {
            let bound = self.left.len().lcm(&self.right.len());
            let mut steps = 0;
            while self.left != self.right && self.right[0] == self.left[0] && steps <= bound {
                self.origin += 1;
                self.left.rotate_left(1);
                self.right.rotate_left(1);
                steps += 1;
            }
            if self.left == self.right {
                self.origin = self.origin.rem_euclid(self.left.len() as i64);
            }
        }
    }

    pub fn left(&self) -> &[u8] {
        &self.left
    }

    pub fn core(&self) -> &[u8] {
        &self.core
    }

    pub fn right(&self) -> &[u8] {
        &self.right
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn symbol_at(&self, i: i64) -> u8 {
        let len = self.core.len() as i64;
        if i < self.origin {
            self.left[(i - self.origin).rem_euclid(self.left.len() as i64) as usize]
        } else if i < self.origin + len {
            self.core[(i - self.origin) as usize]
        } else {
            self.right[(i - self.origin - len).rem_euclid(self.right.len() as i64) as usize]
        }
    }

    /// `σ^n`, with `(σx)_i = x_{i+1}`.
    pub fn shift_by(&self, n: i64) -> Self {
        let mut p = Self {
            left: self.left.clone(),
            core: self.core.clone(),
            right: self.right.clone(),
            origin: self.origin - n,
        };
        p.canonicalize();
        p
    }

    pub fn shift(&self) -> Self {
        self.shift_by(1)
    }

    pub fn unshift(&self) -> Self {
        self.shift_by(-1)
    }

    /// Index bound beyond which both points are in their periodic tails, with
    /// the joint left and right periods.
    fn joint_bound(&self, other: &Self) -> (i64, i64, i64) {
        let reach = |p: &Self| p.origin.abs() + p.core.len() as i64;
        let lp = self.left.len().lcm(&other.left.len()) as i64;
        let rp = self.right.len().lcm(&other.right.len()) as i64;
        (reach(self).max(reach(other)) + 1, lp, rp)
    }

    /// `min{|j| : x_j ≠ y_j}`, or `None` when equal.
    pub fn first_disagreement(&self, other: &Self) -> Option<i64> {
        if self == other {
            return None;
        }
        let (b, lp, rp) = self.joint_bound(other);
        (0..=b + lp.max(rp)).find(|&j| {
            self.symbol_at(j) != other.symbol_at(j) || self.symbol_at(-j) != other.symbol_at(-j)
        })
    }

    /// Agreement on every index of `[from, to]` (each end optionally unbounded).
    pub fn agrees_on(&self, other: &Self, from: Option<i64>, to: Option<i64>) -> bool {
        let (b, lp, rp) = self.joint_bound(other);
        // Beyond ±b the pattern of disagreements is periodic, so one joint
        // period past the bound settles any unbounded end.
        let lo0 = from.unwrap_or(i64::MIN / 4);
        let hi0 = to.unwrap_or(i64::MAX / 4);
        let hi = hi0.min(lo0.max(b) + rp);
        let lo = lo0.max(hi.min(-b) - lp);
        (lo..=hi).all(|i| self.symbol_at(i) == other.symbol_at(i))
    }

    /// Interleave `x_0, x_{−1}, x_1, x_{−2}, …` as base-`k` digits of a number in `[0, 1)`.
    pub fn embed(&self, alphabet: u8) -> f64 {
        let k = alphabet.max(2) as f64;
        let digits = (52.0 / k.log2()).floor() as i64;
        let mut v = 0.0;
        let mut scale = 1.0 / k;
        for t in 0..digits {
            let i = if t % 2 == 0 { t / 2 } else { -(t + 1) / 2 };
            v += self.symbol_at(i) as f64 * scale;
            scale /= k;
        }
        v.min(1.0 - f64::EPSILON)
    }
}

impl fmt::Display for SymbolicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = |v: &[u8]| v.iter().map(|s| s.to_string()).collect::<String>();
        write!(
            f,
            "({})^∞ [{}]@{} ({})^∞",
            w(&self.left),
            w(&self.core),
            self.origin,
            w(&self.right)
        )
    }
}

/// `d(x, y) = 2^{−min{|j| : x_j ≠ y_j}}`, and 0 for equal points.
pub fn shift_distance(x: &SymbolicPoint, y: &SymbolicPoint) -> f64 {
    match x.first_disagreement(y) {
        None => 0.0,
        Some(j) => 2f64.powi(-(j as i32)),
    }
}

/// Points agreeing with `center` on the index range `[from, to]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CylinderSet {
    pub center: SymbolicPoint,
    pub from: Option<i64>,
    pub to: Option<i64>,
}

impl CylinderSet {
    pub fn contains(&self, y: &SymbolicPoint) -> bool {
        self.center.agrees_on(y, self.from, self.to)
    }
}

/// `W^s_{2^{−m}}(x)`: every index `i > −m` is fixed.
pub fn local_stable_set(sub: &SubshiftDescriptor, x: &SymbolicPoint, m: u32) -> Result<CylinderSet> {
    if !sub.admits(x) {
        return invalid(format!("point {x} is not in the subshift"));
    }
    Ok(CylinderSet {
        center: x.clone(),
        from: Some(1 - m as i64),
        to: None,
    })
}

/// `W^u_{2^{−m}}(x)`: every index `i < m` is fixed.
pub fn local_unstable_set(
    sub: &SubshiftDescriptor,
    x: &SymbolicPoint,
    m: u32,
) -> Result<CylinderSet> {
    if !sub.admits(x) {
        return invalid(format!("point {x} is not in the subshift"));
    }
    Ok(CylinderSet {
        center: x.clone(),
        from: None,
        to: Some(m as i64 - 1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationRecord {
    pub x: String,
    pub y: String,
    /// First `n` (ordered by `|n|`, forward first) with `d(σ^n x, σ^n y) > e`.
    pub separated_at: Option<i64>,
    pub counterexample_candidate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansivityReport {
    pub e: f64,
    pub horizon: u32,
    pub pairs: Vec<SeparationRecord>,
    pub counterexample_candidates: usize,
}

pub fn expansivity_check(
    sub: &SubshiftDescriptor,
    e: f64,
    horizon: u32,
    witnesses: &[(SymbolicPoint, SymbolicPoint)],
) -> Result<ExpansivityReport> {
    if !(e > 0.0 && e < 1.0) {
        return invalid("expansivity constant must lie in (0, 1)");
    }
    let mut pairs = Vec::with_capacity(witnesses.len());
    for (x, y) in witnesses {
        if x == y {
            return invalid("witness pairs must be distinct");
        }
        if !sub.admits(x) || !sub.admits(y) {
            return invalid("witness outside the subshift");
        }
        let separated_at = (0..=horizon as i64)
            .flat_map(|n| if n == 0 { vec![0] } else { vec![n, -n] })
            .find(|&n| shift_distance(&x.shift_by(n), &y.shift_by(n)) > e);
        pairs.push(SeparationRecord {
            x: x.to_string(),
            y: y.to_string(),
            separated_at,
            counterexample_candidate: separated_at.is_none(),
        });
    }
    let counterexample_candidates = pairs.iter().filter(|p| p.counterexample_candidate).count();
    Ok(ExpansivityReport {
        e,
        horizon,
        pairs,
        counterexample_candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        let a = SymbolicPoint::new(vec![0, 0], vec![0, 1], vec![1, 1], 5).unwrap();
        let b = SymbolicPoint::new(vec![0], vec![], vec![1], 6).unwrap();
        assert_eq!(a, b);
        let p = SymbolicPoint::periodic(vec![0, 1]).unwrap();
        assert_eq!(p.shift_by(2), p);
        assert_ne!(p.shift(), p);
        let q = SymbolicPoint::new(vec![0, 1], vec![], vec![0, 1, 0, 1], 3).unwrap();
        assert_eq!(q, p.shift_by(-3));
        let seam = SymbolicPoint::new(vec![1, 0], vec![], vec![0, 1], 3).unwrap();
        assert_ne!(seam, p.shift_by(-3));
        assert_eq!(seam.symbol_at(2), 0);
        assert_eq!(seam.symbol_at(3), 0);
        for i in -10..10 {
            assert_eq!(a.symbol_at(i), if i < 6 { 0 } else { 1 });
        }
    }

    #[test]
    fn shift_round_trip() {
        let x = SymbolicPoint::new(vec![1, 0], vec![1, 1, 0], vec![0], -2).unwrap();
        assert_eq!(x.shift().unshift(), x);
        for i in -12..12 {
            assert_eq!(x.shift().symbol_at(i), x.symbol_at(i + 1));
        }
    }

    #[test]
    fn distances() {
        let x = SymbolicPoint::periodic(vec![0]).unwrap();
        let y = SymbolicPoint::with_window(0, vec![1], 0, -3).unwrap();
        assert_eq!(shift_distance(&x, &y), 0.125);
        assert_eq!(shift_distance(&x, &x), 0.0);
        let z = SymbolicPoint::with_window(0, vec![1], 0, 0).unwrap();
        assert_eq!(shift_distance(&x, &z), 1.0);
    }

    #[test]
    fn stable_cylinders() {
        let sub = SubshiftDescriptor::full(2).unwrap();
        let x = SymbolicPoint::periodic(vec![0]).unwrap();
        let w = local_stable_set(&sub, &x, 1).unwrap();
        assert!(w.contains(&SymbolicPoint::with_window(0, vec![1], 0, -1).unwrap()));
        assert!(!w.contains(&SymbolicPoint::with_window(0, vec![1], 0, 0).unwrap()));
        assert!(!w.contains(&SymbolicPoint::new(vec![0], vec![], vec![1], 40).unwrap()));
        let w3 = local_stable_set(&sub, &x, 3).unwrap();
        assert!(w3.contains(&SymbolicPoint::with_window(0, vec![1], 0, -4).unwrap()));
        assert!(!w3.contains(&SymbolicPoint::with_window(0, vec![1], 0, -2).unwrap()));
        let u = local_unstable_set(&sub, &x, 2).unwrap();
        assert!(u.contains(&SymbolicPoint::new(vec![0], vec![], vec![1], 2).unwrap()));
        assert!(!u.contains(&SymbolicPoint::new(vec![0], vec![], vec![1], 1).unwrap()));
    }

    #[test]
    fn golden_mean_admissibility() {
        let g = SubshiftDescriptor::golden_mean();
        assert!(g.admits(&SymbolicPoint::periodic(vec![0, 1]).unwrap()));
        assert!(!g.admits(&SymbolicPoint::periodic(vec![1]).unwrap()));
        assert!(!g.admits(&SymbolicPoint::with_window(0, vec![1, 1], 0, 0).unwrap()));
        assert!(local_stable_set(&g, &SymbolicPoint::periodic(vec![1]).unwrap(), 1).is_err());
    }

    #[test]
    fn expansivity() {
        let sub = SubshiftDescriptor::full(2).unwrap();
        let x = SymbolicPoint::periodic(vec![0]).unwrap();
        let y = SymbolicPoint::with_window(0, vec![1], 0, 7).unwrap();
        let r = expansivity_check(&sub, 0.5, 16, &[(x.clone(), y)]).unwrap();
        assert_eq!(r.pairs[0].separated_at, Some(7));
        assert_eq!(r.counterexample_candidates, 0);
        assert!(expansivity_check(&sub, 0.5, 16, &[(x.clone(), x)]).is_err());
    }

    #[test]
    fn embedding_interleaves() {
        let x = SymbolicPoint::with_window(0, vec![1], 0, 0).unwrap();
        assert_eq!(x.embed(2), 0.5);
        let y = SymbolicPoint::with_window(0, vec![1], 0, -1).unwrap();
        assert_eq!(y.embed(2), 0.25);
    }
}
