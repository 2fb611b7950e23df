//! Scalar spectra: images of the spectrum polytope under root functionals,
//! the regular Lyapunov value set and the invariance-entropy lower bound.

use super::SpectrumPolytope;
use crate::error::{Error, Result};
use crate::lie::{root_splitting, AlgebraSpec, CartanVector, FlagType, RootFunctional, WeylElement};
use crate::lie::{all_roots, generated_roots};
use std::collections::BTreeSet;

/// A finite union of closed intervals, kept sorted, merged and disjoint.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScalarSpectrum {
    intervals: Vec<(f64, f64)>,
}

impl ScalarSpectrum {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn singleton(x: f64) -> Self {
        Self { intervals: vec![(x, x)] }
    }

    pub fn from_intervals(raw: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut iv: Vec<(f64, f64)> = raw.into_iter().collect();
        for &(lo, hi) in &iv {
            if !(lo <= hi) {
                return Err(Error::Precondition(format!("bad interval [{lo}, {hi}]")));
            }
        }
        iv.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in iv {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        Ok(Self { intervals: merged })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn min(&self) -> Option<f64> {
        self.intervals.first().map(|&(lo, _)| lo)
    }

    pub fn max(&self) -> Option<f64> {
        self.intervals.last().map(|&(_, hi)| hi)
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_intervals(self.intervals.iter().chain(&other.intervals).copied())
            .expect("normalized inputs")
    }

    /// Subset of `[lo, hi]` (vacuously true when empty).
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.intervals.iter().all(|&(a, b)| a >= lo && b <= hi)
    }

    pub fn contains_value(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x <= b)
    }

    /// Largest absolute endpoint (0 for the empty spectrum).
    pub fn magnitude(&self) -> f64 {
        self.intervals
            .iter()
            .flat_map(|&(a, b)| [a.abs(), b.abs()])
            .fold(0.0, f64::max)
    }
}

impl std::fmt::Display for ScalarSpectrum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "empty");
        }
        let parts: Vec<String> =
            self.intervals.iter().map(|(a, b)| format!("[{a:.6}, {b:.6}]")).collect();
        write!(f, "{}", parts.join(" u "))
    }
}

/// Union over the given roots of `[min alpha(v), max alpha(v)]` over the
/// polytope vertices. An empty root set yields the empty spectrum.
pub fn scalar_spectrum<'a>(
    polytope: &SpectrumPolytope,
    roots: impl IntoIterator<Item = &'a RootFunctional>,
) -> ScalarSpectrum {
    let mut intervals = Vec::new();
    for r in roots {
        let (lo, hi) = polytope.functional_range(|v| r.eval(v));
        intervals.push((lo, hi));
    }
    ScalarSpectrum::from_intervals(intervals).expect("ranges are ordered")
}

/// Smallest symmetric interval `[-m, m]` containing the input; empty stays
/// empty.
pub fn symmetrize_center(spectrum: &ScalarSpectrum) -> ScalarSpectrum {
    if spectrum.is_empty() {
        return ScalarSpectrum::empty();
    }
    let m = spectrum.magnitude();
    ScalarSpectrum::from_intervals([(-m, m)]).expect("ordered")
}

/// The values `alpha(lambda_plus)` over `alpha in w(Pi^- \ <Theta>)`, with
/// multiplicity, sorted ascending.
pub fn regular_lyapunov_values(
    spec: &AlgebraSpec,
    lambda_plus: &CartanVector,
    theta: &FlagType,
    w: &WeylElement,
) -> Result<Vec<f64>> {
    if !lambda_plus.in_closed_chamber(crate::lie::ZERO_TOL) {
        return Err(Error::ChamberViolation("lambda_plus must be chamber-ordered".into()));
    }
    let span: BTreeSet<RootFunctional> = generated_roots(spec, theta);
    let mut vals = Vec::new();
    for r in all_roots(spec) {
        if r.is_positive() || span.contains(&r) {
            continue;
        }
        vals.push(w.apply_root(&r)?.eval(lambda_plus));
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}

/// Same value set with duplicates merged.
pub fn regular_lyapunov_spectrum(
    spec: &AlgebraSpec,
    lambda_plus: &CartanVector,
    theta: &FlagType,
    w: &WeylElement,
) -> Result<Vec<f64>> {
    let mut vals = regular_lyapunov_values(spec, lambda_plus, theta, w)?;
    vals.dedup();
    Ok(vals)
}

/// The §-style entropy lower bound: minimal unstable volume growth over the
/// polytope, with a validity flag encoding "the center spectrum is trivial".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyBound {
    /// `min over vertices of sum of unstable root values`.
    pub value: f64,
    /// True when the center spectrum fits in `[-tol, tol]`.
    pub valid: bool,
    /// Largest absolute center endpoint actually observed.
    pub center_magnitude: f64,
}

/// Default tolerance for the trivial-center hypothesis.
pub const CENTER_TOL: f64 = 0.05;

pub fn entropy_lower_bound(
    spec: &AlgebraSpec,
    polytope: &SpectrumPolytope,
    theta_phi: &FlagType,
    theta: &FlagType,
    w: &WeylElement,
    center_tol: f64,
) -> Result<EntropyBound> {
    let splitting = root_splitting(spec, theta_phi, theta, w)?;
    let (value, _) = polytope
        .functional_range(|v| splitting.unstable.iter().map(|r| r.eval(v)).sum::<f64>());
    let center = scalar_spectrum(polytope, &splitting.center);
    let center_magnitude = center.magnitude();
    Ok(EntropyBound { value, valid: center_magnitude <= center_tol, center_magnitude })
}
