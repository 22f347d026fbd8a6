//! Uniform descriptions of the maps under study and their evaluation.

pub mod subshift;

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::affine::{self, rational, IntegerMatrix};
use crate::error::{invalid, Error, Result};
use crate::exact::ExactVector;
use crate::flow::{Integrator, SlowedLinearField, TimeSMap};
use crate::torus::{wrap_scalar, TorusPoint};
pub use subshift::{SubshiftDescriptor, SymbolicPoint};

/// The kinds of discrete systems.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemKind {
    Translation { a: ExactVector },
    Automorphism { matrix: IntegerMatrix },
    Affine { matrix: IntegerMatrix, a: ExactVector },
    TimeSMap(TimeSMap),
    Product(Box<SystemDescriptor>, Box<SystemDescriptor>),
    Subshift(SubshiftDescriptor),
}

/// Immutable system description; cheap to clone and share across workers.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemDescriptor {
    kind: Arc<SystemKind>,
    dim: usize,
}

/// A state of some system.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Torus(TorusPoint),
    Symbolic(SymbolicPoint),
}

impl State {
    pub fn torus(&self) -> Option<&TorusPoint> {
        match self {
            State::Torus(p) => Some(p),
            State::Symbolic(_) => None,
        }
    }
}

fn check_unimodular(m: &IntegerMatrix) -> Result<()> {
    if !m.is_square() || m.rows() == 0 {
        return invalid("matrix must be nonempty and square");
    }
    let d = m.det()?;
    if d != BigInt::from(1) && d != BigInt::from(-1) {
        return Err(Error::NotUnimodular(d.to_string()));
    }
    Ok(())
}

/// Exact inverse of a unimodular integer matrix.
pub fn unimodular_inverse(m: &IntegerMatrix) -> Result<IntegerMatrix> {
    check_unimodular(m)?;
    let inv = rational::inverse(&m.to_rational_rows()).expect("unimodular");
    let rows: Vec<Vec<BigInt>> = inv
        .iter()
        .map(|r| r.iter().map(|q| q.to_integer()).collect())
        .collect();
    IntegerMatrix::from_rows(&rows)
}

impl SystemDescriptor {
    fn wrap_kind(kind: SystemKind, dim: usize) -> Self {
        Self {
            kind: Arc::new(kind),
            dim,
        }
    }

    pub fn translation(a: ExactVector) -> Result<Self> {
        if a.dim() == 0 {
            return invalid("translation vector must be nonempty");
        }
        let dim = a.dim();
        Ok(Self::wrap_kind(SystemKind::Translation { a }, dim))
    }

    pub fn automorphism(matrix: IntegerMatrix) -> Result<Self> {
        check_unimodular(&matrix)?;
        let dim = matrix.rows();
        Ok(Self::wrap_kind(SystemKind::Automorphism { matrix }, dim))
    }

    pub fn affine(matrix: IntegerMatrix, a: ExactVector) -> Result<Self> {
        check_unimodular(&matrix)?;
        if a.dim() != matrix.rows() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                actual: a.dim(),
            });
        }
        let dim = a.dim();
        Ok(Self::wrap_kind(SystemKind::Affine { matrix, a }, dim))
    }

    pub fn time_s(map: TimeSMap) -> Self {
        let dim = map.dim();
        Self::wrap_kind(SystemKind::TimeSMap(map), dim)
    }

    pub fn product(left: SystemDescriptor, right: SystemDescriptor) -> Result<Self> {
        if left.is_symbolic() || right.is_symbolic() {
            return invalid("products are supported for torus systems only");
        }
        let dim = left.dim + right.dim;
        Ok(Self::wrap_kind(
            SystemKind::Product(Box::new(left), Box::new(right)),
            dim,
        ))
    }

    pub fn subshift(sub: SubshiftDescriptor) -> Self {
        Self::wrap_kind(SystemKind::Subshift(sub), 1)
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    /// Torus dimension; 1 for subshifts (their embedding line).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(*self.kind, SystemKind::Subshift(_))
    }

    pub fn kind_name(&self) -> &'static str {
        match *self.kind {
            SystemKind::Translation { .. } => "translation",
            SystemKind::Automorphism { .. } => "automorphism",
            SystemKind::Affine { .. } => "affine",
            SystemKind::TimeSMap(_) => "time-s-map",
            SystemKind::Product(..) => "product",
            SystemKind::Subshift(_) => "subshift",
        }
    }

    /// The slowed field when this is a time-s map, or the first such factor of a product.
    pub fn field(&self) -> Option<(&SlowedLinearField, usize)> {
        match &*self.kind {
            SystemKind::TimeSMap(m) => Some((m.field(), 0)),
            SystemKind::Product(l, r) => l
                .field()
                .or_else(|| r.field().map(|(f, off)| (f, off + l.dim))),
            _ => None,
        }
    }

    /// Checks that `x` belongs to the state space.
    pub fn check_state(&self, x: &State) -> Result<()> {
        match (x, self.is_symbolic()) {
            (State::Torus(p), false) if p.dim() == self.dim => Ok(()),
            (State::Symbolic(p), true) => {
                if let SystemKind::Subshift(sub) = &*self.kind {
                    if !sub.admits(p) {
                        return Err(Error::StateSpace(format!("{p} is not in the subshift")));
                    }
                }
                Ok(())
            }
            (State::Torus(p), false) => Err(Error::StateSpace(format!(
                "state of dimension {} for a system on T^{}",
                p.dim(),
                self.dim
            ))),
            _ => Err(Error::StateSpace(format!(
                "state kind does not match a {} system",
                self.kind_name()
            ))),
        }
    }

    /// One forward step.
    pub fn apply(&self, x: &State) -> Result<State> {
        self.step_state(x, Direction::Forward)
    }

    /// One backward step.
    pub fn apply_inverse(&self, x: &State) -> Result<State> {
        self.step_state(x, Direction::Backward)
    }

    fn step_state(&self, x: &State, dir: Direction) -> Result<State> {
        self.check_state(x)?;
        match x {
            State::Symbolic(p) => Ok(State::Symbolic(match dir {
                Direction::Forward => p.shift(),
                Direction::Backward => p.unshift(),
            })),
            State::Torus(p) => {
                let mut s = self.stepper(dir)?;
                let mut v = p.coords().to_vec();
                s.step(&mut v)?;
                Ok(State::Torus(TorusPoint::from_wrapped(v)))
            }
        }
    }

    /// Exact step on states given as exact vectors (translations and affine kinds).
    pub fn apply_exact(&self, x: &ExactVector, dir: Direction) -> Result<ExactVector> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.dim(),
            });
        }
        let y = match (&*self.kind, dir) {
            (SystemKind::Translation { a }, Direction::Forward) => x.add(a),
            (SystemKind::Translation { a }, Direction::Backward) => x.sub(a),
            (SystemKind::Automorphism { matrix }, Direction::Forward) => affine::apply_matrix(matrix, x),
            (SystemKind::Automorphism { matrix }, Direction::Backward) => {
                affine::apply_matrix(&unimodular_inverse(matrix)?, x)
            }
            (SystemKind::Affine { matrix, a }, Direction::Forward) => affine::affine_image(matrix, a, x),
            (SystemKind::Affine { matrix, a }, Direction::Backward) => {
                affine::apply_matrix(&unimodular_inverse(matrix)?, &x.sub(a))
            }
            (SystemKind::Product(l, r), _) => {
                let (xl, xr) = split_exact(x, l.dim);
                l.apply_exact(&xl, dir)?.concat(&r.apply_exact(&xr, dir)?)?
            }
            _ => {
                return Err(Error::StateSpace(format!(
                    "exact evaluation is not available for a {} system",
                    self.kind_name()
                )))
            }
        };
        Ok(y.reduce_mod_one())
    }

    /// A reusable in-place stepper for float torus states.
    pub fn stepper(&self, dir: Direction) -> Result<Box<dyn Stepper>> {
        Ok(match &*self.kind {
            SystemKind::Translation { a } => {
                let sign = dir.sign();
                Box::new(TranslationStepper {
                    a: a.eval().into_iter().map(|v| wrap_scalar(sign * v)).collect(),
                })
            }
            SystemKind::Automorphism { matrix } => {
                Box::new(LinearStepper::new(matrix, vec![0.0; self.dim], dir)?)
            }
            SystemKind::Affine { matrix, a } => Box::new(LinearStepper::new(matrix, a.eval(), dir)?),
            SystemKind::TimeSMap(m) => Box::new(FlowStepper {
                field: m.field().clone(),
                integrator: Integrator::new(m.dim(), *m.config())?,
                t: dir.sign() * m.s_f64(),
            }),
            SystemKind::Product(l, r) => Box::new(ProductStepper {
                left: l.stepper(dir)?,
                right: r.stepper(dir)?,
                split: l.dim,
            }),
            SystemKind::Subshift(_) => {
                return Err(Error::StateSpace("subshifts have no torus stepper".into()))
            }
        })
    }
}

fn split_exact(x: &ExactVector, at: usize) -> (ExactVector, ExactVector) {
    let (l, r) = x.entries().split_at(at);
    (
        ExactVector::new(x.basis().clone(), l.to_vec()).expect("same basis"),
        ExactVector::new(x.basis().clone(), r.to_vec()).expect("same basis"),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn reverse(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// In-place evaluation of one step on wrapped coordinates.
pub trait Stepper: Send {
    fn step(&mut self, x: &mut [f64]) -> Result<()>;
}

struct TranslationStepper {
    a: Vec<f64>,
}

impl Stepper for TranslationStepper {
    #[inline]
    fn step(&mut self, x: &mut [f64]) -> Result<()> {
        for (xi, ai) in x.iter_mut().zip(&self.a) {
            let v = *xi + ai;
            *xi = if v >= 1.0 { v - 1.0 } else { v };
        }
        Ok(())
    }
}

struct LinearStepper {
    m: Vec<Vec<f64>>,
    a: Vec<f64>,
    tmp: Vec<f64>,
}

impl LinearStepper {
    fn new(matrix: &IntegerMatrix, a: Vec<f64>, dir: Direction) -> Result<Self> {
        let (m, a) = match dir {
            Direction::Forward => (matrix.clone(), a),
            Direction::Backward => {
                // x = τ⁻¹(y − a) = τ⁻¹y − τ⁻¹a.
                let inv = unimodular_inverse(matrix)?;
                let shift = inv.mul_vec_f64(&a).into_iter().map(|v| -v).collect();
                (inv, shift)
            }
        };
        if m.max_abs().to_f64().is_none_or(|v| v > 2f64.powi(40)) {
            return invalid("matrix entries too large for float simulation");
        }
        let n = m.rows();
        Ok(Self {
            m: m.to_f64_rows(),
            a: a.into_iter().map(wrap_scalar).collect(),
            tmp: vec![0.0; n],
        })
    }
}

impl Stepper for LinearStepper {
    fn step(&mut self, x: &mut [f64]) -> Result<()> {
        for (i, row) in self.m.iter().enumerate() {
            let mut acc = self.a[i];
            for (mij, xj) in row.iter().zip(x.iter()) {
                acc += mij * xj;
            }
            self.tmp[i] = wrap_scalar(acc);
        }
        x.copy_from_slice(&self.tmp);
        Ok(())
    }
}

struct FlowStepper {
    field: SlowedLinearField,
    integrator: Integrator,
    t: f64,
}

impl Stepper for FlowStepper {
    fn step(&mut self, x: &mut [f64]) -> Result<()> {
        let (elapsed, _, _, stalled) = self.integrator.advance(&self.field, x, self.t)?;
        if stalled {
            return Err(Error::Stalled {
                elapsed,
                requested: self.t,
            });
        }
        Ok(())
    }
}

struct ProductStepper {
    left: Box<dyn Stepper>,
    right: Box<dyn Stepper>,
    split: usize,
}

impl Stepper for ProductStepper {
    fn step(&mut self, x: &mut [f64]) -> Result<()> {
        let (l, r) = x.split_at_mut(self.split);
        self.left.step(l)?;
        self.right.step(r)
    }
}

/// Applies an inner stepper `p` times per step: the stepper of `f^p`.
pub struct PowerStepper {
    inner: Box<dyn Stepper>,
    p: u32,
}

impl PowerStepper {
    pub fn new(inner: Box<dyn Stepper>, p: u32) -> Self {
        Self { inner, p: p.max(1) }
    }
}

impl Stepper for PowerStepper {
    fn step(&mut self, x: &mut [f64]) -> Result<()> {
        for _ in 0..self.p {
            self.inner.step(x)?;
        }
        Ok(())
    }
}
