//! Morse-spectrum polytope estimation from sampled controls.
//!
//! The attractor spectrum polytope is approximated from below: finite-horizon
//! polar exponents are collected over a deterministic, seeded family of
//! control signals (extremal constants, optionally the zero control, and
//! random switching signals), hull-reduced, and symmetrized under the Weyl
//! subgroup of the inferred flag type. Horizon-halving deltas and the
//! symmetrization residual are reported as convergence diagnostics instead of
//! error bars.

mod polytope;
mod scalar;

pub use polytope::{SpectrumPolytope, VERTEX_TOL};
pub use scalar::{
    entropy_lower_bound, regular_lyapunov_spectrum, regular_lyapunov_values, scalar_spectrum,
    symmetrize_center, EntropyBound, ScalarSpectrum, CENTER_TOL,
};

use crate::cocycle::{evolve_trail, polar_exponent, BilinearControlSystem, ControlSignal};
use crate::error::{Error, Result};
use crate::exec::{map_collect, Execution};
use crate::lie::{simple_roots, weyl_subgroup, CartanVector, FlagType};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Default flag-type inference threshold.
pub const FLAG_TYPE_TOL: f64 = 0.1;

/// How the sup over admissible controls is sampled.
#[derive(Debug, Clone)]
pub struct SamplingPlan {
    pub horizon: f64,
    pub random_signals: usize,
    /// Dwell-time bounds for the random switching signals.
    pub dwell: (f64, f64),
    pub include_zero_control: bool,
    pub seed: u64,
    pub dt: f64,
    pub flag_type_tol: f64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            horizon: 40.0,
            random_signals: 32,
            dwell: (0.5, 2.0),
            include_zero_control: true,
            seed: 0,
            dt: crate::cocycle::DEFAULT_DT,
            flag_type_tol: FLAG_TYPE_TOL,
        }
    }
}

impl SamplingPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) {
            return Err(Error::Precondition("horizon must be positive".into()));
        }
        if !(self.dwell.0 > 0.0 && self.dwell.0 <= self.dwell.1) {
            return Err(Error::Precondition("bad dwell bounds".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Precondition("dt must be positive".into()));
        }
        if !(self.flag_type_tol > 0.0) {
            return Err(Error::Precondition("flag-type tolerance must be positive".into()));
        }
        Ok(())
    }

    /// The deterministic signal family: extremal constants (always), the zero
    /// control, then seeded random switching signals.
    pub fn signals(&self, system: &BilinearControlSystem) -> Vec<ControlSignal> {
        let mut out = Vec::new();
        for v in system.extreme_controls() {
            out.push(ControlSignal::constant(v));
        }
        if self.include_zero_control && system.num_controls() > 0 {
            out.push(ControlSignal::constant(system.zero_control()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.random_signals {
            let mut segments = Vec::new();
            let mut t = 0.0;
            while t < self.horizon {
                let d = rng.random_range(self.dwell.0..=self.dwell.1);
                let v: Vec<f64> = system
                    .range()
                    .iter()
                    .map(|&(lo, hi)| rng.random_range(lo..=hi))
                    .collect();
                segments.push((d, v));
                t += d;
            }
            if segments.is_empty() {
                segments.push((self.horizon, system.zero_control()));
            }
            out.push(ControlSignal::piecewise(segments, false).expect("positive durations"));
        }
        out
    }
}

/// Convergence diagnostics attached to an estimated polytope.
#[derive(Debug, Clone, Default)]
pub struct EstimateDiagnostics {
    /// Max over signals of the sup-norm shift of the polar exponent between
    /// horizons `T` and `T/2`.
    pub horizon_delta: f64,
    /// Hausdorff-type distance from symmetrized vertices to the raw vertex
    /// set (0 when the raw estimate is already symmetric).
    pub symmetrization_residual: f64,
    pub warnings: Vec<String>,
}

/// Estimated attractor spectrum polytope plus diagnostics.
pub fn estimate_attractor_polytope(
    system: &BilinearControlSystem,
    plan: &SamplingPlan,
) -> Result<(SpectrumPolytope, EstimateDiagnostics)> {
    estimate_attractor_polytope_with(system, plan, Execution::Auto)
}

pub fn estimate_attractor_polytope_with(
    system: &BilinearControlSystem,
    plan: &SamplingPlan,
    mode: Execution,
) -> Result<(SpectrumPolytope, EstimateDiagnostics)> {
    plan.validate()?;
    let signals = plan.signals(system);
    let samples = sample_polar_exponents(system, plan, &signals, mode)?;

    let horizon_delta = samples
        .iter()
        .map(|(full, half)| full.dist(half))
        .fold(0.0, f64::max);

    let raw = SpectrumPolytope::new(
        samples.iter().map(|(full, _)| full.clone()).collect(),
        FlagType::empty(),
    )?;
    let (theta_phi, mut warnings) = infer_flag_type(&raw, plan.flag_type_tol);
    let subgroup = weyl_subgroup(system.spec(), &theta_phi)?;
    let symmetric = raw.symmetrized(&subgroup)?.with_theta_phi(theta_phi.clone());

    let symmetrization_residual = symmetric
        .vertices()
        .iter()
        .map(|v| {
            raw.vertices()
                .iter()
                .map(|u| u.dist(v))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    if horizon_delta > 0.5 {
        warnings.push(format!(
            "polar exponents moved by {horizon_delta:.3} between half and full horizon; \
             the horizon may be too short"
        ));
    }

    Ok((symmetric, EstimateDiagnostics { horizon_delta, symmetrization_residual, warnings }))
}

/// Per signal: polar exponent at the full horizon and at half the horizon.
fn sample_polar_exponents(
    system: &BilinearControlSystem,
    plan: &SamplingPlan,
    signals: &[ControlSignal],
    mode: Execution,
) -> Result<Vec<(CartanVector, CartanVector)>> {
    let results = map_collect(mode, signals, |sig| -> Result<(CartanVector, CartanVector)> {
        let full = evolve_trail(system, sig, plan.horizon, plan.dt)?;
        let half = evolve_trail(system, sig, plan.horizon / 2.0, plan.dt)?;
        Ok((polar_exponent(&full)?, polar_exponent(&half)?))
    });
    results.into_iter().collect()
}

/// Flag type read off a chamber-side polytope: simple roots whose minimum
/// over the vertices is at most `tol`. A warning marks every root whose
/// margin lands in the ambiguous band `(tol, 2 tol]`.
pub fn infer_flag_type(polytope: &SpectrumPolytope, tol: f64) -> (FlagType, Vec<String>) {
    let spec = polytope.spec();
    let mut members = Vec::new();
    let mut warnings = Vec::new();
    for alpha in simple_roots(&spec) {
        let (mval, _) = polytope.functional_range(|v| alpha.eval(v));
        if mval <= tol {
            members.push(alpha);
        } else if mval <= 2.0 * tol {
            warnings.push(format!(
                "flag-type margin for {alpha} is ambiguous: min value {mval:.4} in ({tol}, {})",
                2.0 * tol
            ));
        }
    }
    (FlagType::new(members).expect("simple roots"), warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{AlgebraElement, AlgebraSpec};
    use nalgebra::DMatrix;

    fn diag_drift_system(with_control: bool, rho: f64) -> BilinearControlSystem {
        let spec = AlgebraSpec::simple(2).unwrap();
        let d = AlgebraElement::new(
            &spec,
            vec![DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])],
        )
        .unwrap();
        if with_control {
            let y = d.clone();
            BilinearControlSystem::new(spec, d, vec![y], vec![(-rho, rho)]).unwrap()
        } else {
            BilinearControlSystem::autonomous(spec, d).unwrap()
        }
    }

    #[test]
    fn autonomous_flow_gives_single_vertex() {
        let sys = diag_drift_system(false, 0.0);
        let plan = SamplingPlan { horizon: 10.0, random_signals: 0, ..Default::default() };
        let (p, diag) = estimate_attractor_polytope(&sys, &plan).unwrap();
        assert_eq!(p.vertices().len(), 1);
        assert!((p.vertices()[0].factor(0)[0] - 1.0).abs() < 1e-6);
        assert!(diag.horizon_delta < 1e-6);
        assert!(diag.symmetrization_residual < 1e-12);
    }

    #[test]
    fn commuting_control_gives_exact_segment() {
        // Drift and control both diag(1,-1): exponent 1 + mean(u), so the
        // polytope is the segment with vertices (1 +- rho, -(1 +- rho)).
        let rho = 0.5;
        let sys = diag_drift_system(true, rho);
        let plan = SamplingPlan {
            horizon: 12.0,
            random_signals: 8,
            seed: 9,
            ..Default::default()
        };
        let (p, _) = estimate_attractor_polytope(&sys, &plan).unwrap();
        assert_eq!(p.vertices().len(), 2);
        let lo = p.vertices()[0].factor(0)[0];
        let hi = p.vertices()[1].factor(0)[0];
        assert!((lo - (1.0 - rho)).abs() < 1e-6, "lo {lo}");
        assert!((hi - (1.0 + rho)).abs() < 1e-6, "hi {hi}");
    }

    #[test]
    fn flag_type_inference_examples() {
        let mk = |v: Vec<f64>| SpectrumPolytope::new(
            vec![CartanVector::new(vec![v]).unwrap()],
            FlagType::empty(),
        )
        .unwrap();
        // (1, 1, -2): a12 vanishes, a23 = 3.
        let (t, w) = infer_flag_type(&mk(vec![1.0, 1.0, -2.0]), 0.1);
        assert_eq!(t.to_string(), "[a12]");
        assert!(w.is_empty());
        // (2, 0, -2): both simple values are 2.
        let (t, _) = infer_flag_type(&mk(vec![2.0, 0.0, -2.0]), 0.1);
        assert!(t.is_empty());
        // Ambiguity band.
        let (t, w) = infer_flag_type(&mk(vec![0.075, -0.075]), 0.1);
        assert_eq!(t.to_string(), "[]");
        assert!(t.is_empty());
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn plan_signal_family_is_deterministic() {
        let sys = diag_drift_system(true, 0.25);
        let plan = SamplingPlan { random_signals: 4, seed: 123, ..Default::default() };
        let a = plan.signals(&sys);
        let b = plan.signals(&sys);
        assert_eq!(a.len(), 2 + 1 + 4); // extremes + zero + random
        assert_eq!(a, b);
    }
}
