//! The slowed linear field `V(x) = Φ(x)·γ` on `T^n` and its flow.
//!
//! `Φ` is a product of radial bumps, one per center, each vanishing only at
//! its center and equal to 1 outside radius `r`. Trajectories are computed by
//! an adaptive Dormand–Prince 5(4) pair; straight segments that provably stay
//! in the constant region are advanced exactly.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exact::ExactVector;
use crate::torus::{centered_residue, distance_slices, wrap_scalar, Displacement, TorusPoint};

/// Radial bump profiles `φ : [0, ∞) → [0, 1]` with `φ(0) = 0` and `φ(d) = 1` for `d ≥ r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BumpProfile {
    /// `φ(d) = exp(1 − 1/(1 − (1 − d/r)²))` on `[0, r)`.
    #[default]
    ExpBump,
    /// `ψ(u)/(ψ(u) + ψ(1 − u))` with `ψ(t) = exp(−1/t)`, `u = d/r`; smooth at `d = r` too.
    Smoothstep,
}

impl BumpProfile {
    pub fn id(self) -> &'static str {
        match self {
            BumpProfile::ExpBump => "exp-bump",
            BumpProfile::Smoothstep => "smoothstep",
        }
    }

    pub fn closed_form(self) -> &'static str {
        match self {
            BumpProfile::ExpBump => "phi(d) = exp(1 - 1/(1 - (1 - d/r)^2)) for d < r, 1 otherwise",
            BumpProfile::Smoothstep => {
                "phi(d) = psi(u)/(psi(u) + psi(1-u)), psi(t) = exp(-1/t), u = d/r, clamped to [0,1]"
            }
        }
    }

    #[inline]
    pub fn eval(self, d: f64, r: f64) -> f64 {
        let u = d / r;
        if u >= 1.0 {
            return 1.0;
        }
        if u <= 0.0 {
            return 0.0;
        }
        match self {
            BumpProfile::ExpBump => {
                let w = u * (2.0 - u);
                (1.0 - 1.0 / w).exp()
            }
            BumpProfile::Smoothstep => {
                let a = (-1.0 / u).exp();
                let b = (-1.0 / (1.0 - u)).exp();
                a / (a + b)
            }
        }
    }
}

/// `V(x) = Φ(x)·γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowedLinearField {
    gamma: ExactVector,
    gamma_f: Vec<f64>,
    centers: Vec<TorusPoint>,
    radius: f64,
    profile: BumpProfile,
}

impl SlowedLinearField {
    pub fn new(
        gamma: ExactVector,
        centers: Vec<TorusPoint>,
        radius: f64,
        profile: BumpProfile,
    ) -> Result<Self> {
        let n = gamma.dim();
        if n == 0 {
            return invalid("field dimension must be positive");
        }
        if !(radius > 0.0 && radius <= 0.25) {
            return invalid(format!("bump radius {radius} outside (0, 1/4]"));
        }
        if gamma.is_zero() {
            return invalid("frequency vector must be nonzero");
        }
        let gamma_f = gamma.eval();
        if gamma_f.iter().any(|g| !g.is_finite()) {
            return invalid("frequency vector does not evaluate to finite numbers");
        }
        for c in &centers {
            if c.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: c.dim(),
                });
            }
        }
        for (i, a) in centers.iter().enumerate() {
            for b in &centers[..i] {
                let d = distance_slices(a.coords(), b.coords());
                if d <= 2.0 * radius {
                    return invalid(format!(
                        "centers {:?} and {:?} are {d:.6} apart, not more than 2r = {}",
                        a.coords(),
                        b.coords(),
                        2.0 * radius
                    ));
                }
            }
        }
        Ok(Self {
            gamma,
            gamma_f,
            centers,
            radius,
            profile,
        })
    }

    /// A constant field (no centers).
    pub fn linear(gamma: ExactVector) -> Result<Self> {
        Self::new(gamma, Vec::new(), 0.25, BumpProfile::default())
    }

    pub fn dim(&self) -> usize {
        self.gamma_f.len()
    }

    pub fn gamma(&self) -> &ExactVector {
        &self.gamma
    }

    pub fn gamma_f64(&self) -> &[f64] {
        &self.gamma_f
    }

    pub fn centers(&self) -> &[TorusPoint] {
        &self.centers
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn profile(&self) -> BumpProfile {
        self.profile
    }

    pub fn speed(&self) -> f64 {
        self.gamma_f.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    /// The scalar factor `Φ(x) ∈ [0, 1]`.
    #[inline]
    pub fn factor(&self, x: &[f64]) -> f64 {
        let r2 = self.radius * self.radius;
        let mut phi = 1.0;
        for c in &self.centers {
            let mut d2 = 0.0;
            for (a, b) in x.iter().zip(c.coords()) {
                let t = centered_residue(a - b);
                d2 += t * t;
                if d2 >= r2 {
                    break;
                }
            }
            if d2 < r2 {
                phi *= self.profile.eval(d2.sqrt(), self.radius);
            }
        }
        phi
    }

    #[inline]
    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let phi = self.factor(x);
        for (o, g) in out.iter_mut().zip(&self.gamma_f) {
            *o = phi * g;
        }
    }

    pub fn eval(&self, x: &TorusPoint) -> Result<Displacement> {
        self.check_dim(x.dim())?;
        let mut out = vec![0.0; self.dim()];
        self.eval_into(x.coords(), &mut out);
        Ok(Displacement::new(out))
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: d,
            })
        }
    }

    /// Minimal torus distance from `x` to any center.
    pub fn nearest_center_distance(&self, x: &[f64]) -> Option<f64> {
        self.centers
            .iter()
            .map(|c| distance_slices(x, c.coords()))
            .min_by(f64::total_cmp)
    }

    /// True when the box `∏ [lo_i, hi_i]` keeps distance `≥ r` from every center.
    pub fn box_is_clear(&self, lo: &[f64], hi: &[f64]) -> bool {
        let r2 = self.radius * self.radius;
        self.centers.iter().all(|c| {
            let mut d2 = 0.0;
            for ((l, h), cc) in lo.iter().zip(hi).zip(c.coords()) {
                d2 += axis_gap(*l, *h, *cc).powi(2);
            }
            d2 >= r2
        })
    }

    /// True when the straight segment `x + τγ`, `τ ∈ [0, t]`, stays in the constant region.
    #[inline]
    fn segment_is_clear(&self, x: &[f64], t: f64) -> bool {
        let r2 = self.radius * self.radius;
        self.centers.iter().all(|c| {
            let mut d2 = 0.0;
            for ((xi, gi), ci) in x.iter().zip(&self.gamma_f).zip(c.coords()) {
                let e = xi + t * gi;
                let (l, h) = if e < *xi { (e, *xi) } else { (*xi, e) };
                d2 += axis_gap(l, h, *ci).powi(2);
                if d2 >= r2 {
                    return true;
                }
            }
            d2 >= r2
        })
    }
}

/// Distance on the circle from the point `c` to the arc `[lo, hi]` (lifted, `hi ≥ lo`).
#[inline]
fn axis_gap(lo: f64, hi: f64, c: f64) -> f64 {
    if hi - lo >= 1.0 {
        return 0.0;
    }
    // Place c's lift just above lo.
    let shifted = lo + wrap_scalar(c - lo);
    if shifted <= hi {
        0.0
    } else {
        (shifted - hi).min(lo + 1.0 - shifted)
    }
}

/// Step-size control parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// Accepted plus rejected steps allowed per integration call.
    pub max_steps: u64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-11,
            max_step: 0.1,
            min_step: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rtol > 0.0
            && self.atol > 0.0
            && self.min_step > 0.0
            && self.max_step >= self.min_step
            && self.max_steps > 0
            && [self.rtol, self.atol, self.max_step, self.min_step]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            invalid(format!("invalid integrator configuration {self:?}"))
        }
    }
}

/// Result of one integration call.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowOutcome {
    pub point: TorusPoint,
    /// Signed time actually covered.
    pub elapsed: f64,
    pub requested: f64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    /// The step budget ran out before `requested` was reached.
    pub stalled: bool,
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Reusable integrator with scratch storage.
#[derive(Debug, Clone)]
pub struct Integrator {
    cfg: IntegratorConfig,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
    h: f64,
}

impl Integrator {
    pub fn new(dim: usize, cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
            y_new: vec![0.0; dim],
            h: cfg.max_step,
        })
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    /// Advance `x` (in place, wrapped) by signed time `t`. Returns
    /// `(elapsed, accepted, rejected, stalled)`.
    pub fn advance(
        &mut self,
        field: &SlowedLinearField,
        x: &mut [f64],
        t: f64,
    ) -> Result<(f64, u64, u64, bool)> {
        if !t.is_finite() {
            return invalid("integration time must be finite");
        }
        let dir = if t < 0.0 { -1.0 } else { 1.0 };
        let total = t.abs();
        let mut done = 0.0;
        let (mut accepted, mut rejected) = (0u64, 0u64);
        let n = x.len();
        let eps = total * 1e-15;
        while total - done > eps {
            if accepted + rejected >= self.cfg.max_steps {
                return Ok((dir * done, accepted, rejected, true));
            }
            let rem = total - done;
            // Exact advance while the straight segment stays in the constant region.
            let seg = rem.min(self.cfg.max_step.max(self.h));
            if field.segment_is_clear(x, dir * seg) {
                for (xi, g) in x.iter_mut().zip(field.gamma_f64()) {
                    *xi = wrap_scalar(*xi + dir * seg * g);
                }
                done += seg;
                accepted += 1;
                continue;
            }
            let mut h = self.h.min(self.cfg.max_step).min(rem);
            if h < self.cfg.min_step {
                h = self.cfg.min_step.min(rem);
            }
            let hs = dir * h;
            // Stages; the seventh is evaluated at the 5th-order solution.
            field.eval_into(x, &mut self.k[0]);
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = x[i];
                    for j in 0..s {
                        acc += hs * A[s][j] * self.k[j][i];
                    }
                    self.tmp[i] = acc;
                }
                field.eval_into(&self.tmp, &mut self.k[s]);
            }
            self.y_new.copy_from_slice(&self.tmp);
            let mut err = 0.0;
            for i in 0..n {
                let e: f64 = (0..7).map(|j| hs * E[j] * self.k[j][i]).sum();
                let sc = self.cfg.atol + self.cfg.rtol * x[i].abs().max(self.y_new[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / n as f64).sqrt();
            if err <= 1.0 {
                for i in 0..n {
                    x[i] = wrap_scalar(self.y_new[i]);
                }
                done += h;
                accepted += 1;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if h >= self.h * 0.999 || fac < 1.0 {
                    self.h = (h * fac).min(self.cfg.max_step);
                }
            } else {
                rejected += 1;
                if h <= self.cfg.min_step {
                    return Err(Error::Integration(format!(
                        "error norm {err:.3e} at minimum step {h:.3e}"
                    )));
                }
                self.h = (h * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0)).max(self.cfg.min_step);
            }
        }
        Ok((dir * total, accepted, rejected, false))
    }
}

/// Integrate `x' = V(x)` for signed time `t`.
pub fn integrate(
    field: &SlowedLinearField,
    x0: &TorusPoint,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<FlowOutcome> {
    field.check_dim(x0.dim())?;
    let mut integ = Integrator::new(field.dim(), *cfg)?;
    let mut x = x0.coords().to_vec();
    let (elapsed, accepted, rejected, stalled) = integ.advance(field, &mut x, t)?;
    Ok(FlowOutcome {
        point: TorusPoint::from_wrapped(x),
        elapsed,
        requested: t,
        accepted_steps: accepted,
        rejected_steps: rejected,
        stalled,
    })
}

/// Like [`integrate`] but a stall is an error.
pub fn flow_point(
    field: &SlowedLinearField,
    x0: &TorusPoint,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<TorusPoint> {
    let out = integrate(field, x0, t, cfg)?;
    if out.stalled {
        return Err(Error::Stalled {
            elapsed: out.elapsed,
            requested: out.requested,
        });
    }
    Ok(out.point)
}

/// Samples `(t, x)` at `samples + 1` equally spaced times in `[0, t]`.
pub fn trajectory(
    field: &SlowedLinearField,
    x0: &TorusPoint,
    t: f64,
    samples: usize,
    cfg: &IntegratorConfig,
) -> Result<Vec<(f64, TorusPoint)>> {
    field.check_dim(x0.dim())?;
    let samples = samples.max(1);
    let mut integ = Integrator::new(field.dim(), *cfg)?;
    let mut x = x0.coords().to_vec();
    let dt = t / samples as f64;
    let mut out = vec![(0.0, x0.clone())];
    for i in 1..=samples {
        let (elapsed, _, _, stalled) = integ.advance(field, &mut x, dt)?;
        if stalled {
            return Err(Error::Stalled {
                elapsed: (i - 1) as f64 * dt + elapsed,
                requested: t,
            });
        }
        out.push((i as f64 * dt, TorusPoint::from_wrapped(x.clone())));
    }
    Ok(out)
}

/// Axis-aligned box on the torus, given by lifted corners.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Time for the flow to cross the box along its fastest axis.
    pub crossing_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowboxReport {
    pub ok: bool,
    pub s: f64,
    pub witness: Option<FlowBox>,
    pub advice: Option<String>,
}

/// Search a cube `R` of side `w` on a 32-per-axis corner grid such that `R`
/// and its sweep `R + [0, s]γ` avoid every bump ball and `w / max|γ_i| > s`.
pub fn flowbox_check(field: &SlowedLinearField, s: f64) -> Result<FlowboxReport> {
    if field.centers().is_empty() {
        return invalid("flowbox check needs at least one center");
    }
    if !(s > 0.0 && s.is_finite()) {
        return invalid("flowbox check needs s > 0");
    }
    let n = field.dim();
    let g = field.gamma_f64();
    let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    const GRID: usize = 32;
    let total: u64 = (GRID as u64).saturating_pow(n as u32).min(1 << 20);
    let stride = ((GRID as u64).pow(n.min(12) as u32) / total).max(1);
    for w in [0.5, 0.375, 0.25, 0.1875, 0.125, 0.09375, 0.0625, 0.046875, 0.03125] {
        let crossing_time = w / gmax;
        if crossing_time <= s {
            continue;
        }
        for idx in 0..total {
            let mut code = idx * stride;
            let lo: Vec<f64> = (0..n)
                .map(|_| {
                    let c = (code % GRID as u64) as f64 / GRID as f64;
                    code /= GRID as u64;
                    c
                })
                .collect();
            let hi: Vec<f64> = lo.iter().map(|l| l + w).collect();
            let sweep_lo: Vec<f64> = lo.iter().zip(g).map(|(l, gi)| l + (s * gi).min(0.0)).collect();
            let sweep_hi: Vec<f64> = hi.iter().zip(g).map(|(h, gi)| h + (s * gi).max(0.0)).collect();
            if field.box_is_clear(&sweep_lo, &sweep_hi) {
                return Ok(FlowboxReport {
                    ok: true,
                    s,
                    witness: Some(FlowBox {
                        lo,
                        hi,
                        crossing_time,
                    }),
                    advice: None,
                });
            }
        }
    }
    Ok(FlowboxReport {
        ok: false,
        s,
        witness: None,
        advice: Some(format!(
            "no admissible rectangle for s = {s}; choose s below {:.6}",
            0.5 / gmax
        )),
    })
}

/// The time-`s` map `x ↦ ρ(x, s)` of a slowed field.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSMap {
    field: SlowedLinearField,
    s: BigRational,
    s_f64: f64,
    cfg: IntegratorConfig,
    flowbox: Option<FlowboxReport>,
}

impl TimeSMap {
    pub fn new(field: SlowedLinearField, s: BigRational, cfg: IntegratorConfig) -> Result<Self> {
        if !s.is_positive() || s.is_zero() {
            return invalid("time-s map needs s > 0");
        }
        cfg.validate()?;
        let s_f64 = s.to_f64().unwrap_or(f64::NAN);
        let flowbox = if field.centers().is_empty() {
            None
        } else {
            Some(flowbox_check(&field, s_f64)?)
        };
        Ok(Self {
            field,
            s,
            s_f64,
            cfg,
            flowbox,
        })
    }

    pub fn field(&self) -> &SlowedLinearField {
        &self.field
    }

    pub fn s(&self) -> &BigRational {
        &self.s
    }

    pub fn s_f64(&self) -> f64 {
        self.s_f64
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    pub fn flowbox(&self) -> Option<&FlowboxReport> {
        self.flowbox.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::SymbolBasis;
    use crate::torus::torus_distance;

    fn field(r: f64) -> SlowedLinearField {
        let b = SymbolBasis::from_exprs(&[("theta", "sqrt(2)")]).unwrap();
        let g = ExactVector::parse(b, &["1", "@theta"]).unwrap();
        SlowedLinearField::new(g, vec![TorusPoint::origin(2)], r, BumpProfile::ExpBump).unwrap()
    }

    #[test]
    fn profile_values() {
        let p = BumpProfile::ExpBump;
        assert_eq!(p.eval(0.0, 0.1), 0.0);
        assert_eq!(p.eval(0.1, 0.1), 1.0);
        assert!((p.eval(0.05, 0.1) - (-1.0f64 / 3.0).exp()).abs() < 1e-15);
        let mut prev = 0.0;
        for i in 1..100 {
            let v = p.eval(i as f64 * 1e-3, 0.1);
            assert!(v > prev && v <= 1.0);
            prev = v;
        }
        let q = BumpProfile::Smoothstep;
        assert_eq!(q.eval(0.0, 0.1), 0.0);
        assert_eq!(q.eval(0.2, 0.1), 1.0);
        assert!((q.eval(0.05, 0.1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn field_values() {
        let f = field(0.1);
        let v = f.eval(&TorusPoint::origin(2)).unwrap();
        assert!(v.components().iter().all(|c| *c == 0.0));
        let far = TorusPoint::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(f.eval(&far).unwrap().components(), f.gamma_f64());
        let half = TorusPoint::new(vec![0.05, 0.0]).unwrap();
        let v = f.eval(&half).unwrap();
        assert!((v.components()[0] - (-1.0f64 / 3.0).exp()).abs() < 1e-15);
        // wrap-around: a point just below 1.0 is near the origin.
        let near = TorusPoint::new(vec![0.97, 0.0]).unwrap();
        assert!(f.factor(near.coords()) < 1.0);
    }

    #[test]
    fn rejects_bad_fields() {
        let b = SymbolBasis::from_exprs(&[("theta", "sqrt(2)")]).unwrap();
        let g = ExactVector::parse(b.clone(), &["1", "@theta"]).unwrap();
        let close = vec![TorusPoint::origin(2), TorusPoint::new(vec![0.05, 0.0]).unwrap()];
        assert!(SlowedLinearField::new(g.clone(), close, 0.1, BumpProfile::ExpBump).is_err());
        assert!(SlowedLinearField::new(g.clone(), vec![], 0.3, BumpProfile::ExpBump).is_err());
        assert!(SlowedLinearField::new(g, vec![TorusPoint::origin(3)], 0.1, BumpProfile::ExpBump).is_err());
        let zero = ExactVector::parse(b, &["0", "0"]).unwrap();
        assert!(SlowedLinearField::linear(zero).is_err());
    }

    #[test]
    fn constant_field_is_exact() {
        let b = SymbolBasis::from_exprs(&[("theta", "sqrt(2)")]).unwrap();
        let g = ExactVector::parse(b, &["1/3", "@theta"]).unwrap();
        let f = SlowedLinearField::linear(g).unwrap();
        let x0 = TorusPoint::new(vec![0.2, 0.7]).unwrap();
        let y = flow_point(&f, &x0, 1.0, &IntegratorConfig::default()).unwrap();
        let expect = crate::torus::wrap(&[0.2 + 1.0 / 3.0, 0.7 + 2f64.sqrt()]).unwrap();
        assert!(torus_distance(&y, &expect).unwrap() < 1e-14);
    }

    #[test]
    fn center_is_fixed() {
        let f = field(0.1);
        let c = TorusPoint::origin(2);
        let y = flow_point(&f, &c, 3.7, &IntegratorConfig::default()).unwrap();
        assert_eq!(y, c);
    }

    #[test]
    fn reversibility_and_semigroup() {
        let f = field(0.1);
        let cfg = IntegratorConfig::default();
        for (i, t) in [0.3, 1.7, 4.0, 10.0].iter().enumerate() {
            let x = TorusPoint::new(vec![0.93 - 0.01 * i as f64, 0.95]).unwrap();
            let y = flow_point(&f, &x, *t, &cfg).unwrap();
            let back = flow_point(&f, &y, -*t, &cfg).unwrap();
            assert!(torus_distance(&x, &back).unwrap() < 1e-6, "t = {t}");
            let s = t / 3.0;
            let two = flow_point(&f, &flow_point(&f, &x, s, &cfg).unwrap(), t - s, &cfg).unwrap();
            assert!(torus_distance(&y, &two).unwrap() < 1e-6);
        }
    }

    #[test]
    fn flowbox_search() {
        let f = field(0.1);
        let ok = flowbox_check(&f, 0.05).unwrap();
        assert!(ok.ok);
        let w = ok.witness.unwrap();
        assert!(w.crossing_time > 0.05);
        let bad = flowbox_check(&f, 1.0).unwrap();
        assert!(!bad.ok && bad.advice.is_some());
        let linear = SlowedLinearField::linear(f.gamma().clone()).unwrap();
        assert!(flowbox_check(&linear, 0.05).is_err());
    }

    #[test]
    fn axis_gaps() {
        assert_eq!(axis_gap(0.2, 0.4, 0.3), 0.0);
        assert!((axis_gap(0.2, 0.4, 0.5) - 0.1).abs() < 1e-15);
        assert!((axis_gap(0.2, 0.4, 0.05) - 0.15).abs() < 1e-15);
        assert!((axis_gap(0.9, 1.1, 0.05) - 0.0).abs() < 1e-15);
        assert!((axis_gap(0.2, 0.4, 0.95) - 0.25).abs() < 1e-15);
    }
}
