//! Numerical integration of right-invariant bilinear control systems and the
//! cocycle data extracted from their fundamental solutions.
//!
//! The fundamental solution of `M' = (X_0 + sum u_i X_i) M` is never held as
//! one dense matrix over long horizons. [`evolve_trail`] keeps a chain of
//! QR-renormalized factors per group factor; the Iwasawa `a`-cocycle, polar
//! exponents, projective growth rates and Oseledets data are all read off
//! that chain without overflow.

mod oseledets;
mod polar;
mod trail;

pub use oseledets::{oseledets, oseledets_discrete, OseledetsData, OseledetsOptions};
pub use polar::{
    asymptotic_ray, evolve_vector, log_vector_growth, polar_exponent, polar_exponent_at,
    projective_derivative_exponent, sym_log, AsymptoticRay,
};
pub use trail::{
    a_cocycle, a_cocycle_at, evolve_trail, evolve_trail_with, transported_rotation, write_summary_csv,
    CocycleTrail, TrailOptions,
};

use crate::error::{Error, Result};
use crate::lie::{AlgebraElement, AlgebraSpec};
use nalgebra::DMatrix;

/// Default integrator step.
pub const DEFAULT_DT: f64 = 1e-2;

/// A right-invariant control system `M' = (X_0 + sum u_i X_i) M` on a product
/// of `SL(n_f)` factors, with controls confined to a box containing 0 in its
/// interior.
#[derive(Debug, Clone)]
pub struct BilinearControlSystem {
    spec: AlgebraSpec,
    drift: AlgebraElement,
    controls: Vec<AlgebraElement>,
    range: Vec<(f64, f64)>,
}

impl BilinearControlSystem {
    pub fn new(
        spec: AlgebraSpec,
        drift: AlgebraElement,
        controls: Vec<AlgebraElement>,
        range: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if drift.mats().len() != spec.num_factors() {
            return Err(Error::ShapeMismatch("drift does not match spec".into()));
        }
        for c in &controls {
            if c.mats().len() != spec.num_factors()
                || c.mats().iter().zip(spec.factors()).any(|(m, &n)| m.nrows() != n)
            {
                return Err(Error::ShapeMismatch("control generator does not match spec".into()));
            }
        }
        if range.len() != controls.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} controls but {} range intervals",
                controls.len(),
                range.len()
            )));
        }
        for &(lo, hi) in &range {
            if !(lo < 0.0 && 0.0 < hi) {
                return Err(Error::InvalidSpec(format!(
                    "control range [{lo}, {hi}] must contain 0 in its interior"
                )));
            }
        }
        Ok(Self { spec, drift, controls, range })
    }

    /// A system with no controls (autonomous flow).
    pub fn autonomous(spec: AlgebraSpec, drift: AlgebraElement) -> Result<Self> {
        Self::new(spec, drift, Vec::new(), Vec::new())
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn drift(&self) -> &AlgebraElement {
        &self.drift
    }

    pub fn controls(&self) -> &[AlgebraElement] {
        &self.controls
    }

    pub fn range(&self) -> &[(f64, f64)] {
        &self.range
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn value_in_range(&self, u: &[f64], tol: f64) -> bool {
        u.len() == self.range.len()
            && u.iter().zip(&self.range).all(|(&v, &(lo, hi))| v >= lo - tol && v <= hi + tol)
    }

    /// `X_0 + sum u_i X_i` for one factor.
    pub fn generator(&self, factor: usize, u: &[f64]) -> DMatrix<f64> {
        let mut a = self.drift.factor(factor).clone();
        for (x, &ui) in self.controls.iter().zip(u) {
            a += x.factor(factor) * ui;
        }
        a
    }

    /// The vertices of the control box (2^m points; just the origin if m = 0).
    pub fn extreme_controls(&self) -> Vec<Vec<f64>> {
        let m = self.range.len();
        (0..1usize << m)
            .map(|mask| {
                (0..m)
                    .map(|k| if mask >> k & 1 == 1 { self.range[k].1 } else { self.range[k].0 })
                    .collect()
            })
            .collect()
    }

    pub fn zero_control(&self) -> Vec<f64> {
        vec![0.0; self.range.len()]
    }
}

/// Piecewise-constant admissible control: a schedule of `(duration, value)`
/// pairs, optionally repeated periodically. Beyond a non-periodic schedule
/// the last value is held.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    segments: Vec<(f64, Vec<f64>)>,
    periodic: bool,
}

impl ControlSignal {
    pub fn piecewise(segments: Vec<(f64, Vec<f64>)>, periodic: bool) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidSignal("empty schedule".into()));
        }
        let m = segments[0].1.len();
        for (d, v) in &segments {
            if !(*d > 0.0) {
                return Err(Error::InvalidSignal(format!("non-positive duration {d}")));
            }
            if v.len() != m {
                return Err(Error::InvalidSignal("inconsistent control dimension".into()));
            }
        }
        Ok(Self { segments, periodic })
    }

    pub fn constant(value: Vec<f64>) -> Self {
        Self { segments: vec![(1.0, value)], periodic: true }
    }

    pub fn zero(m: usize) -> Self {
        Self::constant(vec![0.0; m])
    }

    pub fn segments(&self) -> &[(f64, Vec<f64>)] {
        &self.segments
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn dim(&self) -> usize {
        self.segments[0].1.len()
    }

    pub fn value_at(&self, t: f64) -> &[f64] {
        let total: f64 = self.segments.iter().map(|(d, _)| d).sum();
        let mut t = if self.periodic { t.rem_euclid(total) } else { t };
        if !self.periodic && t >= total {
            return &self.segments[self.segments.len() - 1].1;
        }
        for (d, v) in &self.segments {
            if t < *d {
                return v;
            }
            t -= d;
        }
        &self.segments[self.segments.len() - 1].1
    }

    /// Concrete `(duration, value)` pieces covering exactly `[0, horizon]`.
    /// For a non-periodic schedule the final value is held to the horizon.
    pub fn pieces_until(&self, horizon: f64) -> Vec<(f64, Vec<f64>)> {
        let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
        let mut t = 0.0;
        let mut idx = 0usize;
        let last = self.segments.len() - 1;
        while t < horizon - 1e-12 {
            let (d, v) = &self.segments[idx % self.segments.len()];
            let held = !self.periodic && idx >= last;
            let take = if held { horizon - t } else { d.min(horizon - t) };
            out.push((take, v.clone()));
            t += take;
            idx += 1;
        }
        out
    }

    /// Drops the initial `s` time units (the shifted control `u(s + .)`).
    pub fn shifted(&self, s: f64) -> Self {
        let total: f64 = self.segments.iter().map(|(d, _)| d).sum();
        let mut s = if self.periodic { s.rem_euclid(total) } else { s };
        let mut segs = Vec::new();
        for (k, (d, v)) in self.segments.iter().enumerate() {
            if s >= *d {
                s -= d;
                if !self.periodic && k == self.segments.len() - 1 {
                    // past the end: constant tail
                    return Self::constant(v.clone());
                }
                continue;
            }
            let mut first = (*d - s, v.clone());
            if first.0 <= 0.0 {
                first.0 = f64::EPSILON;
            }
            segs.push(first);
            segs.extend(self.segments[k + 1..].iter().cloned());
            if self.periodic {
                // close the period with the consumed prefix
                segs.extend(self.segments[..k].iter().cloned());
                segs.push((s, v.clone()));
            }
            break;
        }
        if segs.is_empty() {
            return Self::constant(self.segments.last().unwrap().1.clone());
        }
        let mut out = Self { segments: segs, periodic: self.periodic };
        out.segments.retain(|(d, _)| *d > 0.0);
        out
    }
}

/// One matrix per factor, each invertible (fundamental solutions, rotations).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    mats: Vec<DMatrix<f64>>,
}

impl GroupElement {
    pub fn new(spec: &AlgebraSpec, mats: Vec<DMatrix<f64>>) -> Result<Self> {
        if mats.len() != spec.num_factors()
            || mats.iter().zip(spec.factors()).any(|(m, &n)| m.nrows() != n || m.ncols() != n)
        {
            return Err(Error::ShapeMismatch("group element does not match spec".into()));
        }
        if mats.iter().any(|m| m.iter().any(|x| !x.is_finite())) {
            return Err(Error::IntegrationFailure { t: f64::NAN, reason: "non-finite entries".into() });
        }
        Ok(Self { mats })
    }

    pub fn identity(spec: &AlgebraSpec) -> Self {
        Self { mats: spec.factors().iter().map(|&n| DMatrix::identity(n, n)).collect() }
    }

    pub fn mats(&self) -> &[DMatrix<f64>] {
        &self.mats
    }

    pub fn factor(&self, f: usize) -> &DMatrix<f64> {
        &self.mats[f]
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a * b).collect(),
        }
    }

    /// True when every factor is orthogonal with determinant one, to `tol`.
    pub fn is_rotation(&self, tol: f64) -> bool {
        self.mats.iter().all(|m| {
            crate::linalg::is_orthogonal(m, tol) && (m.determinant() - 1.0).abs() <= tol.max(1e-8)
        })
    }
}

/// One fixed-step RK4 update of the fundamental solution, followed by a
/// determinant renormalization that projects the factors back onto `SL(n)`.
pub fn integrate_step(
    system: &BilinearControlSystem,
    u: &[f64],
    state: &GroupElement,
    dt: f64,
) -> Result<GroupElement> {
    if !(dt > 0.0) {
        return Err(Error::Precondition(format!("dt = {dt} must be positive")));
    }
    if !system.value_in_range(u, 1e-12) {
        return Err(Error::Precondition(format!("control value {u:?} outside range")));
    }
    let mats = (0..system.spec().num_factors())
        .map(|f| {
            let a = system.generator(f, u);
            rk4_step(&a, state.factor(f), dt).and_then(renormalize_det)
        })
        .collect::<Result<Vec<_>>>()?;
    GroupElement::new(system.spec(), mats)
}

/// RK4 steps covering `duration` (step `dt`, last step shortened), composing
/// onto `state`.
pub fn propagate(
    system: &BilinearControlSystem,
    u: &[f64],
    state: &GroupElement,
    duration: f64,
    dt: f64,
) -> Result<GroupElement> {
    let steps = (duration / dt).ceil().max(1.0) as usize;
    let h = duration / steps as f64;
    let mut cur = state.clone();
    for _ in 0..steps {
        cur = integrate_step(system, u, &cur, h)?;
    }
    Ok(cur)
}

pub(crate) fn rk4_step(a: &DMatrix<f64>, m: &DMatrix<f64>, dt: f64) -> Result<DMatrix<f64>> {
    let k1 = a * m;
    let k2 = a * (m + &k1 * (dt / 2.0));
    let k3 = a * (m + &k2 * (dt / 2.0));
    let k4 = a * (m + &k3 * dt);
    let next = m + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    if next.iter().any(|x| !x.is_finite()) {
        return Err(Error::IntegrationFailure { t: f64::NAN, reason: "non-finite RK4 update".into() });
    }
    Ok(next)
}

pub(crate) fn renormalize_det(m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = m.determinant();
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::IntegrationFailure {
            t: f64::NAN,
            reason: format!("determinant {d} not positive"),
        });
    }
    let scale = d.powf(-1.0 / m.nrows() as f64);
    Ok(m * scale)
}
