//! Analysis toolkit for right-invariant control systems on flag manifolds of
//! split semisimple groups (products of `sl(n, R)` factors).
//!
//! The crate is organized around one pipeline:
//!
//! 1. [`lie`] — exact root-system, Weyl-group and flag-type combinatorics.
//! 2. [`cocycle`] — numerical integration of bilinear control systems with
//!    overflow-safe QR factor trails, Iwasawa `a`-cocycles, polar exponents
//!    and Oseledets data.
//! 3. [`spectrum`] — Morse-spectrum polytope estimation from sampled controls
//!    and the scalar spectra obtained by pushing the polytope through root
//!    functionals, plus the invariance-entropy lower bound.
//! 4. [`classify`] — per chain control set verdicts (uniformly hyperbolic,
//!    partially hyperbolic, not partially hyperbolic, degenerate).
//! 5. [`chain`] — set-oriented chain graphs on the circle and the 2-torus
//!    with SCC condensation into a Morse graph.
//!
//! Heavy inner loops (spectrum sampling, chain-graph edge generation) run on
//! rayon when the default `parallel` feature is enabled and fall back to
//! sequential iterators otherwise; see [`exec::Execution`] to pick a mode
//! explicitly.

pub mod chain;
pub mod classify;
pub mod cocycle;
pub mod csvfmt;
pub mod error;
pub mod exec;
pub mod lie;
pub mod linalg;
pub mod spectrum;

pub use error::{Error, Result};
