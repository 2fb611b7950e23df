//! Splitting of the roots attached to a chain control set into stable,
//! center and unstable parts.

use super::{all_roots, generated_roots, AlgebraSpec, FlagType, RootFunctional, WeylElement};
use crate::error::{Error, Result};
use std::collections::BTreeSet;

/// The three disjoint root sets whose union is `w(Pi^- \ <Theta>)`:
/// center roots lie in `<Theta_phi>`, the rest split by sign.
///
/// In the split case each root carries a one-dimensional subbundle, so the
/// cardinalities are the bundle dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootSplitting {
    pub stable: BTreeSet<RootFunctional>,
    pub center: BTreeSet<RootFunctional>,
    pub unstable: BTreeSet<RootFunctional>,
}

impl RootSplitting {
    /// Bundle dimensions `(d_-, d_0, d_+)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.stable.len(), self.center.len(), self.unstable.len())
    }

    pub fn total(&self) -> usize {
        self.stable.len() + self.center.len() + self.unstable.len()
    }

    pub fn union(&self) -> BTreeSet<RootFunctional> {
        self.stable.iter().chain(&self.center).chain(&self.unstable).copied().collect()
    }
}

/// Splits `w(Pi^- \ <Theta>)` by the flag type of the flow:
///
/// * center   = `<Theta_phi>  intersect  w(Pi^- \ <Theta>)`
/// * unstable = `(Pi^+ \ <Theta_phi>)  intersect  w(Pi^- \ <Theta>)`
/// * stable   = `(Pi^- \ <Theta_phi>)  intersect  w(Pi^- \ <Theta>)`
pub fn root_splitting(
    spec: &AlgebraSpec,
    theta_phi: &FlagType,
    theta: &FlagType,
    w: &WeylElement,
) -> Result<RootSplitting> {
    if !w.matches(spec) {
        return Err(Error::ShapeMismatch("Weyl element does not match spec".into()));
    }
    let span_theta = generated_roots(spec, theta);
    let span_phi = generated_roots(spec, theta_phi);
    let mut stable = BTreeSet::new();
    let mut center = BTreeSet::new();
    let mut unstable = BTreeSet::new();
    for r in all_roots(spec) {
        if r.is_positive() || span_theta.contains(&r) {
            continue; // only Pi^- \ <Theta> is moved
        }
        let moved = w.apply_root(&r)?;
        if span_phi.contains(&moved) {
            center.insert(moved);
        } else if moved.is_positive() {
            unstable.insert(moved);
        } else {
            stable.insert(moved);
        }
    }
    Ok(RootSplitting { stable, center, unstable })
}

/// The structural uniform-hyperbolicity condition `<Theta_phi> subset of
/// w<Theta>`, equivalent to an empty center set.
pub fn uniformly_hyperbolic_type(
    spec: &AlgebraSpec,
    theta_phi: &FlagType,
    theta: &FlagType,
    w: &WeylElement,
) -> Result<bool> {
    let span_phi = generated_roots(spec, theta_phi);
    let moved_span: BTreeSet<RootFunctional> = generated_roots(spec, theta)
        .iter()
        .map(|r| w.apply_root(r))
        .collect::<Result<_>>()?;
    Ok(span_phi.is_subset(&moved_span))
}
