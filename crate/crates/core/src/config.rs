//! Strict-schema experiment configuration.
//!
//! Every table rejects unknown keys. Symbols used with `@name` in any
//! expression must be declared under `[symbols]`; the declaration order fixes
//! the basis order.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::affine::IntegerMatrix;
use crate::constructions::{
    build_product_pm_flow, build_slowed_system, build_translation_factor_product, Construction,
};
use crate::error::{Error, Result};
use crate::exact::{parse_scalar, ExactVector, SymbolBasis};
use crate::flow::{BumpProfile, IntegratorConfig};
use crate::orbit::{ClassifyTolerances, DEFAULT_SEED};
use crate::sets::{Domain, PointMap, RasterMap, RasterSet};
use crate::systems::{Direction, State, SubshiftDescriptor, SymbolicPoint, SystemDescriptor};
use crate::torus::TorusPoint;

/// Hard cap on any step count.
pub const MAX_STEPS: u64 = 1_000_000_000;

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Force one worker; reports differ only in their timestamp.
    #[serde(default)]
    pub deterministic: bool,
    /// Worker threads; absent means one per core.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Generator seed for generic seeds and sampled pairs.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Symbol name to numeric expression, e.g. `theta = "sqrt(2)"`.
    /// Kept in declaration order.
    #[serde(default)]
    pub symbols: Vec<SymbolSpec>,
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default)]
    pub sets: Option<SetsSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    pub name: String,
    pub expr: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    Translation {
        a: Vec<String>,
    },
    Automorphism {
        matrix: Vec<Vec<i64>>,
    },
    Affine {
        matrix: Vec<Vec<i64>>,
        a: Vec<String>,
    },
    Slowed(SlowedSpec),
    ProductFlow {
        #[serde(flatten)]
        base: SlowedSpec,
        circle_speed: String,
    },
    TranslationFactor {
        base: SlowedSpec,
        a: Vec<String>,
    },
    Subshift {
        /// Full shift on this many symbols when `transitions` is absent.
        #[serde(default)]
        alphabet: Option<u8>,
        /// 0/1 transition matrix.
        #[serde(default)]
        transitions: Option<Vec<Vec<u8>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlowedSpec {
    pub frequencies: Vec<String>,
    pub centers: Vec<Vec<f64>>,
    pub bump_radius: f64,
    /// Positive rational time, e.g. `"1/20"`.
    pub s: String,
    #[serde(default)]
    pub profile: BumpProfile,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolicPointSpec {
    pub left: Vec<u8>,
    #[serde(default)]
    pub core: Vec<u8>,
    pub right: Vec<u8>,
    #[serde(default)]
    pub origin: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSpec {
    /// Must match the subcommand when both are given.
    pub command: Option<String>,
    pub steps: u64,
    /// Record every `stride`-th state in orbit dumps.
    pub stride: u64,
    pub resolution: u32,
    /// Number of generic random seeds.
    pub seeds: usize,
    /// Explicit torus seeds.
    pub points: Vec<Vec<f64>>,
    /// Explicit symbolic seeds.
    pub symbolic_points: Vec<SymbolicPointSpec>,
    /// Add the construction's predicted fixed points and one-sided seeds.
    pub include_predicted: bool,
    pub direction: Direction,
    pub primes: Vec<u32>,
    pub tolerances: ClassifyTolerances,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            command: None,
            steps: 100_000,
            stride: 1,
            resolution: 32,
            seeds: 0,
            points: Vec::new(),
            symbolic_points: Vec::new(),
            include_predicted: false,
            direction: Direction::Forward,
            primes: vec![2, 3, 5],
            tolerances: ClassifyTolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Prefix for every file written.
    pub prefix: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("pmlab-out"),
            prefix: String::new(),
        }
    }
}

/// A raster region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RegionSpec {
    Empty,
    Full,
    /// Cells meeting the closed box.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Cells with center strictly inside the ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// Cells whose closed box contains the point.
    Point { at: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RasterMapSpec {
    /// The configured `[system]`.
    System,
    Endomorphism { matrix: Vec<Vec<i64>> },
    Linear { matrix: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetsSpec {
    pub domain: Domain,
    pub dim: usize,
    pub resolution: u32,
    #[serde(default = "default_samples")]
    pub samples: u32,
    pub map: RasterMapSpec,
    /// Dichotomy: the compact set `K`; `U` is its complement.
    #[serde(default)]
    pub k: Option<RegionSpec>,
    /// Dichotomy and Birkhoff chain: the set `A`.
    #[serde(default)]
    pub a: Option<RegionSpec>,
    /// Birkhoff chain: the domain `D0`.
    #[serde(default)]
    pub d0: Option<RegionSpec>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

fn default_samples() -> u32 {
    4
}

fn default_n_max() -> usize {
    1000
}

impl ExperimentConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(src).map_err(|e| cfg_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let a = &self.analysis;
        if a.steps == 0 || a.steps > MAX_STEPS {
            return Err(cfg_err(format!("steps = {} must lie in 1..={MAX_STEPS}", a.steps)));
        }
        if a.stride == 0 {
            return Err(cfg_err("stride must be positive"));
        }
        if a.resolution == 0 || !a.resolution.is_power_of_two() {
            return Err(cfg_err(format!("resolution {} is not a power of two", a.resolution)));
        }
        if self.workers == Some(0) {
            return Err(cfg_err("workers must be positive"));
        }
        a.tolerances.validate().map_err(|e| cfg_err(e.to_string()))?;
        if let Some(sets) = &self.sets {
            if sets.n_max == 0 || sets.n_max as u64 > MAX_STEPS {
                return Err(cfg_err("sets.n_max out of range"));
            }
        }
        let basis = self.basis()?;
        if let Some(sys) = &self.system {
            sys.check_symbols(&basis)?;
        }
        Ok(())
    }

    /// Symbol basis from the declarations.
    pub fn basis(&self) -> Result<Arc<SymbolBasis>> {
        let pairs: Vec<(&str, &str)> = self
            .symbols
            .iter()
            .map(|s| (s.name.as_str(), s.expr.as_str()))
            .collect();
        SymbolBasis::from_exprs(&pairs).map_err(|e| cfg_err(e.to_string()))
    }

    /// Worker count after the deterministic flag and a command-line override.
    pub fn effective_workers(&self, cli: Option<usize>) -> Option<usize> {
        if self.deterministic {
            Some(1)
        } else {
            cli.or(self.workers)
        }
    }

    /// The configured system, with construction metadata when it has any.
    pub fn build_system(&self) -> Result<(SystemDescriptor, Option<Construction>)> {
        let spec = self
            .system
            .as_ref()
            .ok_or_else(|| cfg_err("this command needs a [system] table"))?;
        spec.build(&self.basis()?)
    }

    /// Explicit seeds, generic seeds and (optionally) predicted seeds, in that order.
    pub fn seed_states(&self, sys: &SystemDescriptor, construction: Option<&Construction>) -> Result<Vec<State>> {
        let a = &self.analysis;
        let mut out = Vec::new();
        if sys.is_symbolic() {
            for p in &a.symbolic_points {
                let x = SymbolicPoint::new(p.left.clone(), p.core.clone(), p.right.clone(), p.origin)?;
                out.push(State::Symbolic(x));
            }
            if !a.points.is_empty() || a.seeds > 0 {
                return Err(cfg_err("subshift systems take symbolic_points only"));
            }
        } else {
            for p in &a.points {
                out.push(State::Torus(TorusPoint::new(p.clone())?));
            }
            for p in crate::orbit::generic_seeds(sys.dim(), a.seeds, self.seed) {
                out.push(State::Torus(p));
            }
            if a.include_predicted {
                let c = construction.ok_or_else(|| cfg_err("include_predicted needs a construction"))?;
                let pred = &c.predicted_exceptional_set;
                for p in &pred.fixed_points {
                    out.push(State::Torus(TorusPoint::new(p.clone())?));
                }
                for o in &pred.one_sided_orbits {
                    out.push(State::Torus(TorusPoint::new(o.seed_in.clone())?));
                    out.push(State::Torus(TorusPoint::new(o.seed_out.clone())?));
                }
                for o in &pred.closed_orbits {
                    let mut p = o.base_point.clone();
                    p.push(0.0);
                    out.push(State::Torus(TorusPoint::new(p)?));
                }
            }
        }
        if out.is_empty() {
            return Err(cfg_err("no seeds: set analysis.points, analysis.seeds or include_predicted"));
        }
        Ok(out)
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    BigRational::from_str(s.trim()).map_err(|_| cfg_err(format!("{s:?} is not a rational number")))
}

fn matrix(rows: &[Vec<i64>]) -> Result<IntegerMatrix> {
    let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
    if refs.is_empty() || refs.iter().any(|r| r.len() != refs[0].len()) {
        return Err(cfg_err("matrix rows must be nonempty and of equal length"));
    }
    Ok(IntegerMatrix::from_i64(&refs))
}

fn points(rows: &[Vec<f64>]) -> Result<Vec<TorusPoint>> {
    rows.iter().map(|p| TorusPoint::new(p.clone())).collect()
}

impl SlowedSpec {
    fn gamma(&self, basis: &Arc<SymbolBasis>) -> Result<ExactVector> {
        ExactVector::parse(basis.clone(), &self.frequencies)
    }

    fn build(&self, basis: &Arc<SymbolBasis>) -> Result<Construction> {
        build_slowed_system(
            self.gamma(basis)?,
            points(&self.centers)?,
            self.bump_radius,
            parse_rational(&self.s)?,
            self.profile,
            self.integrator,
        )
    }
}

impl SystemSpec {
    fn expressions(&self) -> Vec<&str> {
        fn strs(v: &[String]) -> Vec<&str> {
            v.iter().map(String::as_str).collect()
        }
        match self {
            SystemSpec::Translation { a } | SystemSpec::Affine { a, .. } => strs(a),
            SystemSpec::Slowed(b) => strs(&b.frequencies),
            SystemSpec::ProductFlow { base, circle_speed } => {
                let mut v = strs(&base.frequencies);
                v.push(circle_speed);
                v
            }
            SystemSpec::TranslationFactor { base, a } => {
                let mut v = strs(&base.frequencies);
                v.extend(strs(a));
                v
            }
            _ => Vec::new(),
        }
    }

    /// Every expression parses against the declared symbols.
    fn check_symbols(&self, basis: &SymbolBasis) -> Result<()> {
        for e in self.expressions() {
            parse_scalar(e, basis).map_err(|err| cfg_err(format!("in {e:?}: {err}")))?;
        }
        Ok(())
    }

    pub fn build(&self, basis: &Arc<SymbolBasis>) -> Result<(SystemDescriptor, Option<Construction>)> {
        Ok(match self {
            SystemSpec::Translation { a } => (SystemDescriptor::translation(ExactVector::parse(basis.clone(), a)?)?, None),
            SystemSpec::Automorphism { matrix: m } => (SystemDescriptor::automorphism(matrix(m)?)?, None),
            SystemSpec::Affine { matrix: m, a } => (
                SystemDescriptor::affine(matrix(m)?, ExactVector::parse(basis.clone(), a)?)?,
                None,
            ),
            SystemSpec::Slowed(spec) => {
                let c = spec.build(basis)?;
                (c.system.clone(), Some(c))
            }
            SystemSpec::ProductFlow { base, circle_speed } => {
                let c = build_product_pm_flow(
                    base.gamma(basis)?,
                    points(&base.centers)?,
                    base.bump_radius,
                    parse_rational(&base.s)?,
                    parse_scalar(circle_speed, basis)?,
                    base.profile,
                    base.integrator,
                )?;
                (c.system.clone(), Some(c))
            }
            SystemSpec::TranslationFactor { base, a } => {
                let b = base.build(basis)?;
                let t = SystemDescriptor::translation(ExactVector::parse(basis.clone(), a)?)?;
                let c = build_translation_factor_product(&t, &b)?;
                (c.system.clone(), Some(c))
            }
            SystemSpec::Subshift { alphabet, transitions } => {
                let sub = match (alphabet, transitions) {
                    (_, Some(t)) => SubshiftDescriptor::new(
                        t.iter().map(|r| r.iter().map(|v| *v != 0).collect()).collect(),
                    )?,
                    (Some(k), None) => SubshiftDescriptor::full(*k)?,
                    (None, None) => return Err(cfg_err("subshift needs alphabet or transitions")),
                };
                (SystemDescriptor::subshift(sub), None)
            }
        })
    }
}

impl RegionSpec {
    pub fn raster(&self, domain: Domain, dim: usize, resolution: u32) -> Result<RasterSet> {
        let check = |v: &[f64]| {
            if v.len() == dim {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: v.len(),
                })
            }
        };
        match self {
            RegionSpec::Empty => RasterSet::empty(domain, dim, resolution),
            RegionSpec::Full => RasterSet::full(domain, dim, resolution),
            RegionSpec::Box { lo, hi } => {
                check(lo)?;
                RasterSet::from_box(domain, resolution, lo, hi)
            }
            RegionSpec::Ball { center, radius } => {
                check(center)?;
                RasterSet::from_centers(domain, dim, resolution, |x| {
                    x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() < *radius
                })
            }
            RegionSpec::Point { at } => {
                check(at)?;
                RasterSet::point(domain, resolution, at)
            }
        }
    }
}

impl SetsSpec {
    pub fn raster_map(&self, system: Option<&SystemDescriptor>) -> Result<RasterMap> {
        let map = match &self.map {
            RasterMapSpec::System => PointMap::System(
                system
                    .cloned()
                    .ok_or_else(|| cfg_err("sets.map = system needs a [system] table"))?,
            ),
            RasterMapSpec::Endomorphism { matrix: m } => PointMap::Endomorphism(matrix(m)?),
            RasterMapSpec::Linear { matrix } => PointMap::Linear(matrix.clone()),
        };
        let f = RasterMap::new(map, self.domain, self.resolution, self.samples)?;
        if f.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: f.dim(),
            });
        }
        Ok(f)
    }

    pub fn region(&self, r: &Option<RegionSpec>, name: &str) -> Result<RasterSet> {
        r.as_ref()
            .ok_or_else(|| cfg_err(format!("sets.{name} is required for this command")))?
            .raster(self.domain, self.dim, self.resolution)
    }
}

/// Independence declarations as they appear in reports.
#[derive(Debug, Clone, Serialize)]
pub struct IndependenceDeclarations {
    pub assumption: String,
    pub symbols: BTreeMap<String, (String, f64)>,
}

impl IndependenceDeclarations {
    pub fn from_basis(basis: &SymbolBasis) -> Self {
        Self {
            assumption: basis.assumption(),
            symbols: basis
                .symbols()
                .iter()
                .map(|s| (s.name.clone(), (s.expr.clone(), s.value)))
                .collect(),
        }
    }
}
