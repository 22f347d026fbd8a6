use serde::Serialize;

use super::{RasterMap, RasterSet};
use crate::error::{invalid, Result};

/// Outcome of the preimage-intersection dichotomy.
#[derive(Debug, Clone, PartialEq)]
pub enum Dichotomy {
    /// The stabilized `E = ⋂ f^{−k}(Ū)` is not contained in `U`.
    Case1 { e: RasterSet, n: usize },
    /// `E ⊆ U`; `V = ⋂_{k ≤ m} f^{−k}(U)` with the raster check of `f^{−1}(V) ⊆ V`.
    Case2 {
        v: RasterSet,
        m: usize,
        preimage_contained: bool,
    },
    /// No stabilization within the iteration cap.
    Inconclusive { last: RasterSet, n: usize },
}

impl Dichotomy {
    pub fn label(&self) -> &'static str {
        match self {
            Dichotomy::Case1 { .. } => "case1",
            Dichotomy::Case2 { .. } => "case2",
            Dichotomy::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Iterates `E_n = ⋂_{k=1..n} f^{−k}(Ū)` from `E_0` = whole space until two
/// consecutive rasters agree.
///
/// The chain is computed as `E_n = f^{−1}(Ū ∩ E_{n−1})`, the same set, so a
/// repeated raster is a fixed point of the recursion and the chain is stable
/// from then on. Applying raster preimages to intersections also keeps the
/// outer approximation tighter than intersecting iterated preimages.
pub fn preimage_intersection_chain(f: &RasterMap, u: &RasterSet, a: &RasterSet, n_max: usize) -> Result<Dichotomy> {
    if !a.is_subset(u)? {
        return invalid("A must be contained in U");
    }
    if !a.is_subset(&f.preimage(a)?)? {
        return invalid("A must be contained in its raster preimage");
    }
    let u_bar = u.closure();
    let mut e = f.full_set();
    for n in 1..=n_max {
        let next = f.preimage(&u_bar.intersection(&e)?)?;
        debug_assert!(next.is_subset(&e).unwrap_or(false));
        let stable = next == e;
        e = next;
        if stable {
            if !e.is_subset(u)? {
                return Ok(Dichotomy::Case1 { e, n });
            }
            let m = n;
            let mut v = f.full_set();
            for _ in 0..m {
                v = f.preimage(&u.intersection(&v)?)?;
            }
            let preimage_contained = f.preimage(&v)?.is_subset(&v)?;
            return Ok(Dichotomy::Case2 {
                v,
                m,
                preimage_contained,
            });
        }
    }
    Ok(Dichotomy::Inconclusive { last: e, n: n_max })
}

/// The domain chain `D_{n+1}` = component of `A` in `f(D_n) ∩ D_0`.
#[derive(Debug, Clone)]
pub struct BirkhoffRun {
    pub chain: Vec<RasterSet>,
    /// `⋂ closure(D_n)` over the computed chain.
    pub k: RasterSet,
    pub stabilized: bool,
    pub a_in_k: bool,
    pub k_in_image_k: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BirkhoffSummary {
    pub steps: usize,
    pub stabilized: bool,
    pub chain_sizes: Vec<usize>,
    pub k_cells: usize,
    pub a_in_k: bool,
    pub k_in_image_k: bool,
    pub decreasing: bool,
}

impl BirkhoffRun {
    pub fn summary(&self) -> BirkhoffSummary {
        BirkhoffSummary {
            steps: self.chain.len() - 1,
            stabilized: self.stabilized,
            chain_sizes: self.chain.iter().map(RasterSet::len).collect(),
            k_cells: self.k.len(),
            a_in_k: self.a_in_k,
            k_in_image_k: self.k_in_image_k,
            decreasing: decreasing_chain_check(self),
        }
    }
}

pub fn birkhoff_chain(f: &RasterMap, d0: &RasterSet, a: &RasterSet, n_max: usize) -> Result<BirkhoffRun> {
    if a.is_empty() || !a.is_connected() {
        return invalid("A must be nonempty and connected");
    }
    if !a.is_subset(d0)? {
        return invalid("A must be contained in D0");
    }
    if !d0.is_connected() {
        return invalid("D0 must be connected");
    }
    let mut chain = vec![d0.clone()];
    let mut k = d0.closure();
    let mut stabilized = false;
    for _ in 0..n_max {
        let last = chain.last().expect("nonempty");
        let next = f.image(last)?.intersection(d0)?.component_of(a)?;
        k = k.intersection(&next.closure())?;
        let same = &next == last;
        chain.push(next);
        if same {
            stabilized = true;
            break;
        }
    }
    let a_in_k = a.is_subset(&k)?;
    let k_in_image_k = k.is_subset(&f.image(&k)?)?;
    Ok(BirkhoffRun {
        chain,
        k,
        stabilized,
        a_in_k,
        k_in_image_k,
    })
}

/// Every set of the chain lies inside its predecessor.
pub fn decreasing_chain_check(run: &BirkhoffRun) -> bool {
    run.chain
        .windows(2)
        .all(|w| w[1].is_subset(&w[0]).unwrap_or(false))
}

#[cfg(test)]
mod tests {
    use super::super::{Domain, PointMap};
    use super::*;
    use crate::affine::IntegerMatrix;
    use crate::exact::{ExactVector, SymbolBasis};
    use crate::systems::SystemDescriptor;

    fn circle_k(res: u32, lo: f64, hi: f64) -> (RasterSet, RasterSet) {
        let k = RasterSet::from_box(Domain::Torus, res, &[lo], &[hi]).unwrap();
        let u = k.complement();
        let a = RasterSet::empty(Domain::Torus, 1, res).unwrap();
        (u, a)
    }

    #[test]
    fn identity_is_case1() {
        let f = RasterMap::new(PointMap::Endomorphism(IntegerMatrix::identity(1)), Domain::Torus, 64, 2).unwrap();
        let (u, a) = circle_k(64, 0.3, 0.6);
        match preimage_intersection_chain(&f, &u, &a, 50).unwrap() {
            Dichotomy::Case1 { e, .. } => assert!(!e.is_subset(&u).unwrap()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn irrational_rotation_is_case2() {
        let b = SymbolBasis::from_exprs(&[("t", "sqrt(2)-1")]).unwrap();
        let rot = SystemDescriptor::translation(ExactVector::parse(b, &["@t"]).unwrap()).unwrap();
        let f = RasterMap::new(PointMap::System(rot), Domain::Torus, 1 << 10, 4).unwrap();
        let (u, a) = circle_k(1 << 10, 0.2, 0.3);
        match preimage_intersection_chain(&f, &u, &a, 200).unwrap() {
            Dichotomy::Case2 { v, preimage_contained, .. } => {
                assert!(v.is_empty());
                assert!(preimage_contained);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_a_outside_u() {
        let f = RasterMap::new(PointMap::Endomorphism(IntegerMatrix::identity(1)), Domain::Torus, 16, 2).unwrap();
        let (u, _) = circle_k(16, 0.0, 0.2);
        let mut a = RasterSet::empty(Domain::Torus, 1, 16).unwrap();
        a.insert(1);
        assert!(preimage_intersection_chain(&f, &u, &a, 5).is_err());
    }

    #[test]
    fn identity_birkhoff() {
        let cube = Domain::Cube { lo: -1.0, hi: 1.0 };
        let f = RasterMap::new(PointMap::Linear(vec![vec![1.0, 0.0], vec![0.0, 1.0]]), cube, 16, 2).unwrap();
        let d0 = RasterSet::from_centers(cube, 2, 16, |x| x[0].abs() < 0.5 && x[1].abs() < 0.7).unwrap();
        let a = RasterSet::point(cube, 16, &[0.0, 0.0]).unwrap();
        let run = birkhoff_chain(&f, &d0, &a, 20).unwrap();
        assert!(run.stabilized && decreasing_chain_check(&run));
        assert_eq!(run.k, d0.closure());
        assert!(run.a_in_k && run.k_in_image_k);
    }
}
