//! Builders for strictly pseudo-minimal examples, each emitting the
//! predicted non-dense locus as checkable metadata.

use num_rational::BigRational;
use serde::Serialize;

use crate::affine::{AffineProblem, IntegerMatrix, Verdict};
use crate::error::{invalid, Error, Result};
use crate::exact::{integer_relation, rationally_independent, ExactScalar, ExactVector};
use crate::flow::{BumpProfile, FlowboxReport, IntegratorConfig, SlowedLinearField, TimeSMap};
use crate::systems::{SystemDescriptor, SystemKind};
use crate::torus::{wrap, TorusPoint};

/// A point expected to be fixed, with its two one-sided dense orbits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecialOrbits {
    pub center: Vec<f64>,
    pub delta: f64,
    /// Forward orbit converges to the center.
    pub seed_in: Vec<f64>,
    /// Backward orbit converges to the center.
    pub seed_out: Vec<f64>,
}

/// A closed orbit `{point} × S^1` of a product flow.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedOrbit {
    /// Coordinates of the base point; the circle coordinate is free.
    pub base_point: Vec<f64>,
    pub flow_period: f64,
    /// Period of the time-s map on this orbit when `s · speed` is rational.
    pub map_period: Option<u64>,
}

/// `{point} × T^m` components of the exceptional set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorusComponent {
    pub base_point: Vec<f64>,
    /// Axes (0-based) spanning the torus factor.
    pub free_axes: Vec<usize>,
}

/// The non-dense locus predicted by the construction.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PredictedExceptionalSet {
    pub fixed_points: Vec<Vec<f64>>,
    pub one_sided_orbits: Vec<SpecialOrbits>,
    pub closed_orbits: Vec<ClosedOrbit>,
    pub tori: Vec<TorusComponent>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionInfo {
    pub recipe: String,
    pub independence_assumption: String,
    /// `{1, γ_1, …, γ_n}` independent, not only `{γ_i}`.
    pub kronecker_with_one: bool,
    pub flowbox: Option<FlowboxReport>,
    pub profile: String,
}

#[derive(Debug, Clone)]
pub struct Construction {
    pub system: SystemDescriptor,
    pub predicted_exceptional_set: PredictedExceptionalSet,
    pub info: ConstructionInfo,
}

/// Time-`s` map of the slowed field with the given centers.
pub fn build_slowed_system(
    gamma: ExactVector,
    centers: Vec<TorusPoint>,
    r: f64,
    s: BigRational,
    profile: BumpProfile,
    cfg: IntegratorConfig,
) -> Result<Construction> {
    let n = gamma.dim();
    if n < 2 {
        return invalid("slowed systems need dimension at least 2");
    }
    if centers.is_empty() {
        return invalid("at least one center is required");
    }
    if !rationally_independent(&gamma, false) {
        let k = integer_relation(&gamma, false).unwrap_or_default();
        let k: Vec<String> = k.iter().map(ToString::to_string).collect();
        return invalid(format!(
            "frequencies {gamma} are rationally dependent: relation k = ({}) gives k·γ = 0",
            k.join(", ")
        ));
    }
    let kronecker_with_one = rationally_independent(&gamma, true);
    let field = SlowedLinearField::new(gamma, centers, r, profile)?;
    let map = TimeSMap::new(field.clone(), s, cfg)?;
    let flowbox = map.flowbox().cloned();
    if let Some(fb) = &flowbox {
        if !fb.ok {
            return invalid(format!(
                "flowbox check failed: {}",
                fb.advice.clone().unwrap_or_default()
            ));
        }
    }
    let delta = r / 2.0;
    let mut predicted = PredictedExceptionalSet::default();
    for c in field.centers() {
        let (seed_in, seed_out) = special_orbit_seeds(&field, c, delta)?;
        predicted.fixed_points.push(c.coords().to_vec());
        predicted.one_sided_orbits.push(SpecialOrbits {
            center: c.coords().to_vec(),
            delta,
            seed_in: seed_in.into_coords(),
            seed_out: seed_out.into_coords(),
        });
    }
    let info = ConstructionInfo {
        recipe: "slowed-linear-time-s".into(),
        independence_assumption: field.gamma().basis().assumption(),
        kronecker_with_one,
        flowbox,
        profile: field.profile().closed_form().into(),
    };
    Ok(Construction {
        system: SystemDescriptor::time_s(map),
        predicted_exceptional_set: predicted,
        info,
    })
}

/// Points at distance `δ` before and after `center` along `γ`.
pub fn special_orbit_seeds(
    field: &SlowedLinearField,
    center: &TorusPoint,
    delta: f64,
) -> Result<(TorusPoint, TorusPoint)> {
    if !(delta > 0.0 && delta < field.radius()) {
        return invalid(format!("δ = {delta} must lie in (0, r) with r = {}", field.radius()));
    }
    if center.dim() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            actual: center.dim(),
        });
    }
    let speed = field.speed();
    let step: Vec<f64> = field.gamma_f64().iter().map(|g| delta * g / speed).collect();
    let seed_in: Vec<f64> = center.coords().iter().zip(&step).map(|(c, d)| c - d).collect();
    let seed_out: Vec<f64> = center.coords().iter().zip(&step).map(|(c, d)| c + d).collect();
    Ok((wrap(&seed_in)?, wrap(&seed_out)?))
}

/// Time-`s` map of the product of the slowed flow on `T^{n−1}` with the
/// rigid circle flow of the given speed.
pub fn build_product_pm_flow(
    gamma: ExactVector,
    centers: Vec<TorusPoint>,
    r: f64,
    s: BigRational,
    circle_speed: ExactScalar,
    profile: BumpProfile,
    cfg: IntegratorConfig,
) -> Result<Construction> {
    let n = gamma.dim() + 1;
    if n < 3 {
        return invalid(format!("product flows need n > 2, got n = {n}"));
    }
    let speed = circle_speed.eval(gamma.basis());
    if speed <= 0.0 {
        return invalid("circle speed must be positive");
    }
    let base = build_slowed_system(gamma.clone(), centers, r, s.clone(), profile, cfg)?;
    let shift = circle_speed.scale(&s);
    let circle = SystemDescriptor::translation(ExactVector::new(gamma.basis().clone(), vec![shift.clone()])?)?;
    let map_period = if shift.is_rational() {
        let q = shift.rational_part();
        let q = q - q.floor();
        u64::try_from(q.denom()).ok()
    } else {
        None
    };
    let mut predicted = PredictedExceptionalSet::default();
    for c in &base.predicted_exceptional_set.fixed_points {
        predicted.closed_orbits.push(ClosedOrbit {
            base_point: c.clone(),
            flow_period: 1.0 / speed,
            map_period,
        });
    }
    let info = ConstructionInfo {
        recipe: "slowed-flow-times-circle".into(),
        ..base.info
    };
    Ok(Construction {
        system: SystemDescriptor::product(base.system, circle)?,
        predicted_exceptional_set: predicted,
        info,
    })
}

/// Product of a strictly pseudo-minimal base with a minimal translation `A`.
pub fn build_translation_factor_product(a: &SystemDescriptor, base: &Construction) -> Result<Construction> {
    let SystemKind::Translation { a: shift } = a.kind() else {
        return invalid("the factor must be a translation");
    };
    let m = shift.dim();
    let problem = AffineProblem::new(IntegerMatrix::identity(m), shift.clone())?;
    let verdict = problem.decide();
    if verdict.verdict != Verdict::TotallyMinimal {
        let cert = serde_json::to_string(&verdict.certificate).unwrap_or_default();
        return invalid(format!("translation factor is not minimal; certificate {cert}"));
    }
    let base_dim = base.system.dim();
    let free_axes: Vec<usize> = (base_dim..base_dim + m).collect();
    let predicted = PredictedExceptionalSet {
        tori: base
            .predicted_exceptional_set
            .fixed_points
            .iter()
            .map(|p| TorusComponent {
                base_point: p.clone(),
                free_axes: free_axes.clone(),
            })
            .collect(),
        ..Default::default()
    };
    Ok(Construction {
        system: SystemDescriptor::product(base.system.clone(), a.clone())?,
        predicted_exceptional_set: predicted,
        info: ConstructionInfo {
            recipe: "base-times-minimal-translation".into(),
            ..base.info.clone()
        },
    })
}
