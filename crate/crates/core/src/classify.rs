//! Verdicts for chain control sets: uniformly hyperbolic, partially
//! hyperbolic, not partially hyperbolic, or degenerate.
//!
//! The decision runs on spectral descriptors, never on trajectories, so the
//! exact (symbolic) and sampled (numerical) pipelines share one procedure:
//! with a symmetric center spectrum, partial hyperbolicity amounts to
//! `max center < min(min unstable, -max stable)`. Strict inequality is used
//! (closed spectra with a tie cannot be separated); `gap_tol` widens the
//! required separation.

use crate::error::{Error, Result};
use crate::lie::{
    double_cosets, flag_type_of, root_splitting, weyl_subgroup, AlgebraSpec, CartanVector,
    FlagType, RootSplitting, WeylElement, ZERO_TOL,
};
use crate::spectrum::{scalar_spectrum, symmetrize_center, ScalarSpectrum, SpectrumPolytope};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    UniformlyHyperbolic,
    PartiallyHyperbolic,
    NotPartiallyHyperbolic,
    Degenerate,
}

impl Verdict {
    /// Uniform hyperbolicity is the center-free special case.
    pub fn is_partially_hyperbolic(&self) -> bool {
        matches!(self, Verdict::PartiallyHyperbolic | Verdict::UniformlyHyperbolic)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::UniformlyHyperbolic => "uniformly hyperbolic",
            Verdict::PartiallyHyperbolic => "partially hyperbolic",
            Verdict::NotPartiallyHyperbolic => "not partially hyperbolic",
            Verdict::Degenerate => "degenerate",
        };
        write!(f, "{s}")
    }
}

/// Which inequality decided the verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriterionTrace {
    /// No stable or unstable directions at all.
    NoHyperbolicDirections,
    /// Empty center root set; the margin is the hyperbolic separation.
    EmptyCenter { separation: f64 },
    /// Center envelope against the nearest hyperbolic bound.
    CenterSeparation { max_center: f64, bound: f64 },
}

impl fmt::Display for CriterionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriterionTrace::NoHyperbolicDirections => write!(f, "d- + d+ = 0"),
            CriterionTrace::EmptyCenter { separation } => {
                write!(f, "center roots empty; separation {separation:.6}")
            }
            CriterionTrace::CenterSeparation { max_center, bound } => {
                write!(f, "max center {max_center:.6} vs bound {bound:.6}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    /// Smallest gap realizing (positive) or violating (non-positive) the
    /// criterion; 0 for degenerate sets.
    pub margin: f64,
    pub criterion: CriterionTrace,
}

/// Spectral data of one chain control set.
#[derive(Debug, Clone)]
pub struct ChainControlSetDescriptor {
    pub theta_phi: FlagType,
    pub theta: FlagType,
    pub weyl: WeylElement,
    pub splitting: RootSplitting,
    pub stable_spectrum: ScalarSpectrum,
    pub center_spectrum: ScalarSpectrum,
    pub unstable_spectrum: ScalarSpectrum,
}

impl ChainControlSetDescriptor {
    /// Builds the descriptor from a spectrum polytope; the center spectrum is
    /// symmetrized.
    pub fn from_polytope(
        spec: &AlgebraSpec,
        polytope: &SpectrumPolytope,
        theta_phi: &FlagType,
        theta: &FlagType,
        weyl: &WeylElement,
    ) -> Result<Self> {
        let splitting = root_splitting(spec, theta_phi, theta, weyl)?;
        let stable_spectrum = scalar_spectrum(polytope, &splitting.stable);
        let center_spectrum = symmetrize_center(&scalar_spectrum(polytope, &splitting.center));
        let unstable_spectrum = scalar_spectrum(polytope, &splitting.unstable);
        Ok(Self {
            theta_phi: theta_phi.clone(),
            theta: theta.clone(),
            weyl: weyl.clone(),
            splitting,
            stable_spectrum,
            center_spectrum,
            unstable_spectrum,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.splitting.dims()
    }

    pub fn validate(&self, spec: &AlgebraSpec) -> Result<()> {
        let recomputed = root_splitting(spec, &self.theta_phi, &self.theta, &self.weyl)?;
        if recomputed != self.splitting {
            return Err(Error::InconsistentDescriptor(
                "stored root splitting does not match (theta_phi, theta, w)".into(),
            ));
        }
        for (set, spectrum, name) in [
            (&self.splitting.stable, &self.stable_spectrum, "stable"),
            (&self.splitting.center, &self.center_spectrum, "center"),
            (&self.splitting.unstable, &self.unstable_spectrum, "unstable"),
        ] {
            if set.is_empty() != spectrum.is_empty() {
                return Err(Error::InconsistentDescriptor(format!(
                    "{name} spectrum emptiness does not match its root set"
                )));
            }
        }
        if let Some(hi) = self.stable_spectrum.max() {
            if hi >= 0.0 {
                return Err(Error::InconsistentDescriptor(format!(
                    "stable spectrum reaches {hi}; expected negative values"
                )));
            }
        }
        if let Some(lo) = self.unstable_spectrum.min() {
            if lo <= 0.0 {
                return Err(Error::InconsistentDescriptor(format!(
                    "unstable spectrum reaches {lo}; expected positive values"
                )));
            }
        }
        Ok(())
    }
}

/// Decides the verdict of one descriptor. `gap_tol` is the extra separation
/// demanded between the center envelope and the hyperbolic spectra.
pub fn classify(desc: &ChainControlSetDescriptor, gap_tol: f64) -> Result<Classification> {
    let (d_minus, d_zero, d_plus) = desc.dims();
    if d_minus + d_plus == 0 {
        return Ok(Classification {
            verdict: Verdict::Degenerate,
            margin: 0.0,
            criterion: CriterionTrace::NoHyperbolicDirections,
        });
    }
    let mut bound = f64::INFINITY;
    if let Some(lo) = desc.unstable_spectrum.min() {
        bound = bound.min(lo);
    }
    if let Some(hi) = desc.stable_spectrum.max() {
        bound = bound.min(-hi);
    }
    if d_zero == 0 {
        return Ok(Classification {
            verdict: Verdict::UniformlyHyperbolic,
            margin: bound,
            criterion: CriterionTrace::EmptyCenter { separation: bound },
        });
    }
    let max_center = desc.center_spectrum.max().unwrap_or(0.0);
    let margin = bound - max_center;
    let verdict = if max_center + gap_tol < bound {
        Verdict::PartiallyHyperbolic
    } else {
        Verdict::NotPartiallyHyperbolic
    };
    Ok(Classification { verdict, margin, criterion: CriterionTrace::CenterSeparation { max_center, bound } })
}

/// One row of a full case report: a chain control set on one flag manifold.
#[derive(Debug, Clone)]
pub struct CaseRow {
    pub theta: FlagType,
    /// The Weyl elements of the double coset (Morse sets with these labels
    /// coincide).
    pub coset: Vec<WeylElement>,
    pub representative: WeylElement,
    pub descriptor: ChainControlSetDescriptor,
    pub classification: Classification,
}

/// Verdict table over all proper flag types and all double cosets.
#[derive(Debug, Clone)]
pub struct CaseReport {
    pub theta_phi: FlagType,
    /// The symmetrized polytope the spectra were read from.
    pub polytope: SpectrumPolytope,
    pub rows: Vec<CaseRow>,
}

impl CaseReport {
    /// True when every chain control set is at least partially hyperbolic.
    pub fn all_partially_hyperbolic(&self) -> bool {
        self.rows.iter().all(|r| r.classification.verdict.is_partially_hyperbolic())
    }

    pub fn rows_for(&self, theta: &FlagType) -> Vec<&CaseRow> {
        self.rows.iter().filter(|r| &r.theta == theta).collect()
    }

    /// The row whose coset contains the given Weyl element.
    pub fn row_with(&self, theta: &FlagType, w: &WeylElement) -> Option<&CaseRow> {
        self.rows.iter().find(|r| &r.theta == theta && r.coset.contains(w))
    }
}

/// Classifies every chain control set of every proper flag manifold for a
/// flow with chamber element `h_case`. The polytope is symmetrized under the
/// Weyl subgroup of `Theta(h_case)` first. (The full simple-root set is
/// excluded: its flag manifold is a point.)
pub fn classify_flag_manifolds(
    h_case: &CartanVector,
    polytope: &SpectrumPolytope,
    gap_tol: f64,
) -> Result<CaseReport> {
    let spec = polytope.spec();
    if !h_case.matches(&spec) {
        return Err(Error::ShapeMismatch("chamber element does not match polytope".into()));
    }
    let theta_phi = flag_type_of(h_case, ZERO_TOL)?;
    classify_flag_manifolds_with_type(&theta_phi, polytope, gap_tol)
}

/// Same, with the flag type given directly (e.g. inferred from the polytope).
pub fn classify_flag_manifolds_with_type(
    theta_phi: &FlagType,
    polytope: &SpectrumPolytope,
    gap_tol: f64,
) -> Result<CaseReport> {
    let spec = polytope.spec();
    let subgroup = weyl_subgroup(&spec, theta_phi)?;
    let polytope = polytope.symmetrized(&subgroup)?.with_theta_phi(theta_phi.clone());
    let full = FlagType::full(&spec);
    let mut rows = Vec::new();
    for theta in FlagType::all_subsets(&spec) {
        if theta == full {
            continue;
        }
        for coset in double_cosets(&spec, theta_phi, &theta)? {
            let representative = coset[0].clone();
            let descriptor = ChainControlSetDescriptor::from_polytope(
                &spec,
                &polytope,
                theta_phi,
                &theta,
                &representative,
            )?;
            descriptor.validate(&spec)?;
            let classification = classify(&descriptor, gap_tol)?;
            rows.push(CaseRow {
                theta: theta.clone(),
                coset,
                representative,
                descriptor,
                classification,
            });
        }
    }
    Ok(CaseReport { theta_phi: theta_phi.clone(), polytope, rows })
}

/// Report for the fully chain-transitive case (flag type = all simple roots):
/// the whole flag manifold is one chain control set and every direction is
/// central, so no set is partially hyperbolic.
#[derive(Debug, Clone)]
pub struct ChainTransitiveReport {
    pub classification: Classification,
    /// Largest absolute simple-root value seen on the polytope.
    pub max_simple_value: f64,
    /// Set when the polytope is only zero up to the tolerance rather than to
    /// numerical zero.
    pub ambiguous: bool,
}

/// Precondition: every simple root stays within `tol` of zero on the
/// polytope. The verdict is degenerate; it is flagged ambiguous when the
/// polytope is not zero to [`ZERO_TOL`].
pub fn chain_transitive_report(
    polytope: &SpectrumPolytope,
    tol: f64,
) -> Result<ChainTransitiveReport> {
    let spec = polytope.spec();
    let max_simple_value = crate::lie::simple_roots(&spec)
        .iter()
        .map(|alpha| {
            let (lo, hi) = polytope.functional_range(|v| alpha.eval(v));
            lo.abs().max(hi.abs())
        })
        .fold(0.0, f64::max);
    if max_simple_value > tol {
        return Err(Error::Precondition(format!(
            "simple-root value {max_simple_value:.4} exceeds the tolerance {tol}; \
             the flow is not of full flag type"
        )));
    }
    Ok(ChainTransitiveReport {
        classification: Classification {
            verdict: Verdict::Degenerate,
            margin: 0.0,
            criterion: CriterionTrace::NoHyperbolicDirections,
        },
        max_simple_value,
        ambiguous: max_simple_value > ZERO_TOL,
    })
}
