//! Exact root-system, Weyl-group and flag-type combinatorics for direct
//! products of split factors `sl(n_f, R)`.
//!
//! All root multiplicities are 1 in the split case, so bundle dimensions are
//! plain root counts. Everything in this module is integer/permutation
//! arithmetic except the evaluation of roots on [`CartanVector`]s.

mod splitting;
mod text;
mod weyl;

pub use splitting::{root_splitting, uniformly_hyperbolic_type, RootSplitting};
pub use text::parse_weyl;
pub use weyl::{
    double_cosets, principal_involution, weyl_group, weyl_subgroup, WeylElement, MAX_WEYL_ORDER,
};

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::collections::BTreeSet;

/// Absolute tolerance for the traceless constraint on Cartan vectors.
pub const TRACE_TOL: f64 = 1e-12;

/// Default tolerance for testing `alpha(H) = 0` and chamber membership.
pub const ZERO_TOL: f64 = 1e-9;

/// A direct product of split factors `sl(n_f, R)`, `n_f >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlgebraSpec {
    factors: Vec<usize>,
}

impl AlgebraSpec {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSpec("at least one factor required".into()));
        }
        if let Some(&n) = factors.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidSpec(format!("factor sl({n}) is not allowed, need n >= 2")));
        }
        Ok(Self { factors })
    }

    /// Single factor `sl(n)`.
    pub fn simple(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    /// Dimension of the Cartan subspace, `sum (n_f - 1)`.
    pub fn cartan_dim(&self) -> usize {
        self.factors.iter().map(|n| n - 1).sum()
    }

    /// Sum of the factor sizes (length of a flattened Cartan vector).
    pub fn total_size(&self) -> usize {
        self.factors.iter().sum()
    }

    /// Number of roots, `sum n_f (n_f - 1)`.
    pub fn num_roots(&self) -> usize {
        self.factors.iter().map(|n| n * (n - 1)).sum()
    }
}

/// The root `alpha_{f,i,j}`: evaluates a Cartan vector to `H_{f,i} - H_{f,j}`.
///
/// Indices are 0-based internally and 1-based in the text form. `i < j` is a
/// positive root; negation swaps `i` and `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RootFunctional {
    pub factor: usize,
    pub i: usize,
    pub j: usize,
}

impl RootFunctional {
    pub fn new(factor: usize, i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::InvalidSpec(format!("root indices must differ, got ({i}, {j})")));
        }
        Ok(Self { factor, i, j })
    }

    /// Checked against a spec: indices must lie inside the factor.
    pub fn new_in(spec: &AlgebraSpec, factor: usize, i: usize, j: usize) -> Result<Self> {
        let n = *spec
            .factors()
            .get(factor)
            .ok_or_else(|| Error::InvalidSpec(format!("no factor {factor}")))?;
        if i >= n || j >= n {
            return Err(Error::InvalidSpec(format!(
                "root indices ({i}, {j}) out of range for sl({n})"
            )));
        }
        Self::new(factor, i, j)
    }

    pub fn negated(&self) -> Self {
        Self { factor: self.factor, i: self.j, j: self.i }
    }

    pub fn is_positive(&self) -> bool {
        self.i < self.j
    }

    /// Adjacent-index positive root.
    pub fn is_simple(&self) -> bool {
        self.j == self.i + 1
    }

    pub fn eval(&self, h: &CartanVector) -> f64 {
        let f = &h.entries[self.factor];
        f[self.i] - f[self.j]
    }

    /// Indices of the simple roots appearing in the expansion of this root
    /// (`alpha_{i,j} = alpha_{i,i+1} + ... + alpha_{j-1,j}` for `i < j`).
    fn simple_support(&self) -> std::ops::Range<usize> {
        if self.i < self.j {
            self.i..self.j
        } else {
            self.j..self.i
        }
    }

    pub fn belongs_to(&self, spec: &AlgebraSpec) -> bool {
        spec.factors()
            .get(self.factor)
            .is_some_and(|&n| self.i < n && self.j < n && self.i != self.j)
    }
}


/// Element of the Cartan subspace: one traceless real vector per factor.
///
/// Entries are exponential growth rates per unit time.
#[derive(Debug, Clone, PartialEq)]
pub struct CartanVector {
    entries: Vec<Vec<f64>>,
}

impl CartanVector {
    /// Validates that every factor sums to zero within [`TRACE_TOL`].
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self> {
        for (f, e) in entries.iter().enumerate() {
            if e.len() < 2 {
                return Err(Error::ShapeMismatch(format!("factor {f} has fewer than 2 entries")));
            }
            let s: f64 = e.iter().sum();
            if s.abs() > TRACE_TOL {
                return Err(Error::NotTraceless { factor: f, trace: s });
            }
        }
        Ok(Self { entries })
    }

    /// Projects each factor onto the traceless subspace (subtracts the mean).
    pub fn projected(entries: Vec<Vec<f64>>) -> Result<Self> {
        let entries = entries
            .into_iter()
            .map(|e| {
                let mean = e.iter().sum::<f64>() / e.len() as f64;
                e.into_iter().map(|x| x - mean).collect()
            })
            .collect();
        Self::new(entries)
    }

    pub fn zero(spec: &AlgebraSpec) -> Self {
        Self { entries: spec.factors().iter().map(|&n| vec![0.0; n]).collect() }
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn factor(&self, f: usize) -> &[f64] {
        &self.entries[f]
    }

    pub fn spec(&self) -> Result<AlgebraSpec> {
        AlgebraSpec::new(self.entries.iter().map(Vec::len).collect())
    }

    pub fn matches(&self, spec: &AlgebraSpec) -> bool {
        self.entries.len() == spec.num_factors()
            && self.entries.iter().zip(spec.factors()).all(|(e, &n)| e.len() == n)
    }

    /// Closed positive chamber: entries non-increasing per factor, up to `tol`.
    pub fn in_closed_chamber(&self, tol: f64) -> bool {
        self.entries.iter().all(|e| e.windows(2).all(|w| w[0] >= w[1] - tol))
    }

    /// Entries sorted non-increasing per factor (the chamber representative).
    pub fn chamber_sorted(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let mut e = e.clone();
                e.sort_by(|a, b| b.partial_cmp(a).expect("non-finite Cartan entry"));
                e
            })
            .collect();
        Self { entries }
    }

    pub fn add(&self, other: &Self) -> Self {
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Self { entries }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let entries =
            self.entries.iter().map(|e| e.iter().map(|x| c * x).collect()).collect();
        Self { entries }
    }

    /// Flattened entries over all factors.
    pub fn flat(&self) -> Vec<f64> {
        self.entries.iter().flatten().copied().collect()
    }

    /// Max-norm distance.
    pub fn dist(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Diagonal embedding into the algebra.
    pub fn to_element(&self) -> AlgebraElement {
        let mats = self
            .entries
            .iter()
            .map(|e| DMatrix::from_diagonal(&nalgebra::DVector::from_vec(e.clone())))
            .collect();
        AlgebraElement { mats }
    }
}

/// A subset of the simple roots.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FlagType {
    roots: BTreeSet<RootFunctional>,
}

impl FlagType {
    pub fn empty() -> Self {
        Self::default()
    }

    /// All simple roots of the spec.
    pub fn full(spec: &AlgebraSpec) -> Self {
        Self { roots: simple_roots(spec).into_iter().collect() }
    }

    pub fn new(roots: impl IntoIterator<Item = RootFunctional>) -> Result<Self> {
        let roots: BTreeSet<_> = roots.into_iter().collect();
        if let Some(r) = roots.iter().find(|r| !r.is_simple()) {
            return Err(Error::InvalidSpec(format!("{r} is not a simple root")));
        }
        Ok(Self { roots })
    }

    pub fn roots(&self) -> &BTreeSet<RootFunctional> {
        &self.roots
    }

    pub fn contains(&self, r: &RootFunctional) -> bool {
        self.roots.contains(r)
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    /// Set inclusion.
    pub fn is_subset(&self, other: &Self) -> bool {
        self.roots.is_subset(&other.roots)
    }

    pub fn iter(&self) -> impl Iterator<Item = &RootFunctional> {
        self.roots.iter()
    }

    /// All subsets of the simple roots (2^rank of them), in a stable order.
    pub fn all_subsets(spec: &AlgebraSpec) -> Vec<FlagType> {
        let simple = simple_roots(spec);
        let mut out = Vec::with_capacity(1 << simple.len());
        for mask in 0u32..(1 << simple.len()) {
            let roots = simple
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, r)| *r)
                .collect::<BTreeSet<_>>();
            out.push(FlagType { roots });
        }
        out
    }
}

/// An element of the Lie algebra: one traceless matrix per factor.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    mats: Vec<DMatrix<f64>>,
}

impl AlgebraElement {
    pub fn new(spec: &AlgebraSpec, mats: Vec<DMatrix<f64>>) -> Result<Self> {
        if mats.len() != spec.num_factors() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} factor matrices, got {}",
                spec.num_factors(),
                mats.len()
            )));
        }
        for (f, (m, &n)) in mats.iter().zip(spec.factors()).enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::ShapeMismatch(format!(
                    "factor {f}: expected {n}x{n}, got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let tr = m.trace();
            if tr.abs() > 1e-9 * (1.0 + m.norm()) {
                return Err(Error::NotTraceless { factor: f, trace: tr });
            }
        }
        Ok(Self { mats })
    }

    pub fn zero(spec: &AlgebraSpec) -> Self {
        Self { mats: spec.factors().iter().map(|&n| DMatrix::zeros(n, n)).collect() }
    }

    pub fn mats(&self) -> &[DMatrix<f64>] {
        &self.mats
    }

    pub fn factor(&self, f: usize) -> &DMatrix<f64> {
        &self.mats[f]
    }
}

/// Every root `alpha_{f,i,j}` with `i != j`, in a stable order.
/// Positive roots are exactly those with `i < j`.
pub fn all_roots(spec: &AlgebraSpec) -> Vec<RootFunctional> {
    let mut out = Vec::with_capacity(spec.num_roots());
    for (f, &n) in spec.factors().iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    out.push(RootFunctional { factor: f, i, j });
                }
            }
        }
    }
    out.sort();
    out
}

pub fn positive_roots(spec: &AlgebraSpec) -> Vec<RootFunctional> {
    all_roots(spec).into_iter().filter(RootFunctional::is_positive).collect()
}

/// The simple roots `alpha_{f,i,i+1}`.
pub fn simple_roots(spec: &AlgebraSpec) -> Vec<RootFunctional> {
    let mut out = Vec::with_capacity(spec.cartan_dim());
    for (f, &n) in spec.factors().iter().enumerate() {
        for i in 0..n - 1 {
            out.push(RootFunctional { factor: f, i, j: i + 1 });
        }
    }
    out
}

/// The set `<Theta>` of roots generated by integer combinations of `Theta`
/// within the root system.
///
/// In type A a root lies in `<Theta>` exactly when all simple roots of its
/// expansion belong to `Theta`.
pub fn generated_roots(spec: &AlgebraSpec, theta: &FlagType) -> BTreeSet<RootFunctional> {
    all_roots(spec)
        .into_iter()
        .filter(|r| {
            r.simple_support()
                .all(|k| theta.contains(&RootFunctional { factor: r.factor, i: k, j: k + 1 }))
        })
        .collect()
}

/// The flag type `Theta(H)`: simple roots vanishing on `H` (to `tol`).
///
/// `H` must lie in the closed positive chamber (checked with the same `tol`).
pub fn flag_type_of(h: &CartanVector, tol: f64) -> Result<FlagType> {
    if !h.in_closed_chamber(tol) {
        return Err(Error::ChamberViolation(format!("{:?}", h.entries())));
    }
    let spec = h.spec()?;
    let roots = simple_roots(&spec).into_iter().filter(|r| r.eval(h).abs() <= tol).collect();
    Ok(FlagType { roots })
}

/// The invariant inner product `B(X, Y) = sum_f 2 n_f tr(X_f Y_f^T)`
/// (Cartan-Killing form composed with the split involution `X -> -X^T`).
pub fn invariant_inner(x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
    if x.mats.len() != y.mats.len()
        || x.mats.iter().zip(&y.mats).any(|(a, b)| a.nrows() != b.nrows())
    {
        return Err(Error::ShapeMismatch("inner product of mismatched elements".into()));
    }
    Ok(x.mats
        .iter()
        .zip(&y.mats)
        .map(|(a, b)| 2.0 * a.nrows() as f64 * (a * b.transpose()).trace())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sl(n: usize) -> AlgebraSpec {
        AlgebraSpec::simple(n).unwrap()
    }

    fn root(f: usize, i: usize, j: usize) -> RootFunctional {
        RootFunctional { factor: f, i, j }
    }

    fn cartan(entries: &[f64]) -> CartanVector {
        CartanVector::new(vec![entries.to_vec()]).unwrap()
    }

    #[test]
    fn all_roots_sl3() {
        let roots = all_roots(&sl(3));
        assert_eq!(roots.len(), 6);
        let pos: Vec<_> = roots.iter().filter(|r| r.is_positive()).collect();
        assert_eq!(pos, vec![&root(0, 0, 1), &root(0, 0, 2), &root(0, 1, 2)]);
    }

    #[test]
    fn all_roots_sl2() {
        let roots = all_roots(&sl(2));
        assert_eq!(roots, vec![root(0, 0, 1), root(0, 1, 0)]);
    }

    #[test]
    fn all_roots_product() {
        let spec = AlgebraSpec::new(vec![2, 2]).unwrap();
        let roots = all_roots(&spec);
        assert_eq!(roots.len(), 4);
        assert_eq!(roots.iter().filter(|r| r.factor == 0).count(), 2);
        assert_eq!(roots.iter().filter(|r| r.factor == 1).count(), 2);
    }

    /// Killing-form oracle: `C(X, Y) = tr(ad(X) ad(Y))` computed on the full
    /// `gl(n)` basis (ad kills the identity component, so the trace agrees
    /// with the `sl(n)` one), then `B(X, Y) = -C(X, zeta(Y))`.
    fn inner_oracle(n: usize, x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
        let ad = |m: &DMatrix<f64>| {
            let mut out = DMatrix::zeros(n * n, n * n);
            for a in 0..n {
                for b in 0..n {
                    let mut e = DMatrix::zeros(n, n);
                    e[(a, b)] = 1.0;
                    let bracket = m * &e - &e * m;
                    for r in 0..n {
                        for c in 0..n {
                            out[(r * n + c, a * n + b)] = bracket[(r, c)];
                        }
                    }
                }
            }
            out
        };
        let zeta_y = -y.transpose();
        -(ad(x) * ad(&zeta_y)).trace()
    }

    #[test]
    fn invariant_inner_examples() {
        // sl(3), X = Y = E_12.
        let spec = sl(3);
        let mut e12 = DMatrix::zeros(3, 3);
        e12[(0, 1)] = 1.0;
        let x = AlgebraElement::new(&spec, vec![e12.clone()]).unwrap();
        assert_relative_eq!(invariant_inner(&x, &x).unwrap(), 6.0, epsilon = 1e-12);
        assert_relative_eq!(inner_oracle(3, &e12, &e12), 6.0, epsilon = 1e-9);

        // Zero element.
        let z = AlgebraElement::zero(&spec);
        assert_eq!(invariant_inner(&z, &z).unwrap(), 0.0);

        // sl(2), X = Y = diag(1, -1).
        let spec2 = sl(2);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0]));
        let x2 = AlgebraElement::new(&spec2, vec![d.clone()]).unwrap();
        assert_relative_eq!(invariant_inner(&x2, &x2).unwrap(), 8.0, epsilon = 1e-12);
        assert_relative_eq!(inner_oracle(2, &d, &d), 8.0, epsilon = 1e-9);
    }

    #[test]
    fn invariant_inner_matches_ad_trace_oracle_on_basis() {
        for n in [2usize, 3] {
            let spec = sl(n);
            // Basis of sl(n): off-diagonal E_ij plus diag(e_k - e_{k+1}).
            let mut basis = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let mut e = DMatrix::zeros(n, n);
                        e[(i, j)] = 1.0;
                        basis.push(e);
                    }
                }
            }
            for k in 0..n - 1 {
                let mut e = DMatrix::zeros(n, n);
                e[(k, k)] = 1.0;
                e[(k + 1, k + 1)] = -1.0;
                basis.push(e);
            }
            for a in &basis {
                for b in &basis {
                    let xa = AlgebraElement::new(&spec, vec![a.clone()]).unwrap();
                    let xb = AlgebraElement::new(&spec, vec![b.clone()]).unwrap();
                    assert_relative_eq!(
                        invariant_inner(&xa, &xb).unwrap(),
                        inner_oracle(n, a, b),
                        epsilon = 1e-9
                    );
                }
            }
        }
    }

    #[test]
    fn non_traceless_rejected() {
        let spec = sl(2);
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0]));
        assert!(AlgebraElement::new(&spec, vec![m]).is_err());
        assert!(CartanVector::new(vec![vec![1.0, 1.0]]).is_err());
    }

    #[test]
    fn flag_type_of_examples() {
        // diag(1, 1, -2) -> {a12}
        let t = flag_type_of(&cartan(&[1.0, 1.0, -2.0]), ZERO_TOL).unwrap();
        assert_eq!(t.roots().iter().collect::<Vec<_>>(), vec![&root(0, 0, 1)]);

        // 0 -> all simple roots
        let t = flag_type_of(&cartan(&[0.0, 0.0, 0.0]), ZERO_TOL).unwrap();
        assert_eq!(t, FlagType::full(&sl(3)));

        // diag(2, 0, -2) -> empty
        let t = flag_type_of(&cartan(&[2.0, 0.0, -2.0]), ZERO_TOL).unwrap();
        assert!(t.is_empty());

        // Not in the chamber -> error.
        assert!(flag_type_of(&cartan(&[-1.0, 0.0, 1.0]), ZERO_TOL).is_err());
    }

    /// Brute-force oracle: beta lies in <Theta> iff it equals an integer
    /// combination of Theta with coefficients in [-3, 3].
    fn in_span_oracle(spec: &AlgebraSpec, theta: &FlagType, beta: &RootFunctional) -> bool {
        let gens: Vec<_> = theta.iter().copied().collect();
        if gens.is_empty() {
            return false;
        }
        let dim = spec.total_size();
        let coords = |r: &RootFunctional| {
            let mut v = vec![0i64; dim];
            let off: usize = spec.factors()[..r.factor].iter().sum();
            v[off + r.i] = 1;
            v[off + r.j] = -1;
            v
        };
        let target = coords(beta);
        let gvecs: Vec<_> = gens.iter().map(coords).collect();
        let mut stack = vec![(0usize, vec![0i64; dim])];
        while let Some((k, acc)) = stack.pop() {
            if k == gvecs.len() {
                if acc == target {
                    return true;
                }
                continue;
            }
            for c in -3i64..=3 {
                let next: Vec<i64> =
                    acc.iter().zip(&gvecs[k]).map(|(a, g)| a + c * g).collect();
                stack.push((k + 1, next));
            }
        }
        false
    }

    #[test]
    fn generated_roots_examples() {
        let spec = sl(3);
        let theta = FlagType::new([root(0, 0, 1)]).unwrap();
        let span = generated_roots(&spec, &theta);
        assert_eq!(
            span.iter().collect::<Vec<_>>(),
            vec![&root(0, 0, 1), &root(0, 1, 0)]
        );

        assert!(generated_roots(&spec, &FlagType::empty()).is_empty());
        assert_eq!(generated_roots(&spec, &FlagType::full(&spec)).len(), 6);
    }

    #[test]
    fn generated_roots_matches_brute_force() {
        for spec in [sl(3), sl(4), AlgebraSpec::new(vec![2, 3]).unwrap()] {
            for theta in FlagType::all_subsets(&spec) {
                let span = generated_roots(&spec, &theta);
                for beta in all_roots(&spec) {
                    assert_eq!(
                        span.contains(&beta),
                        in_span_oracle(&spec, &theta, &beta),
                        "spec {spec}, theta {theta}, root {beta}"
                    );
                }
            }
        }
    }

    #[test]
    fn chamber_predicates() {
        assert!(cartan(&[2.0, 0.0, -2.0]).in_closed_chamber(ZERO_TOL));
        assert!(cartan(&[1.0, 1.0, -2.0]).in_closed_chamber(ZERO_TOL));
        assert!(!cartan(&[0.0, 1.0, -1.0]).in_closed_chamber(ZERO_TOL));
        let sorted = cartan(&[0.0, 1.0, -1.0]).chamber_sorted();
        assert_eq!(sorted.factor(0), &[1.0, 0.0, -1.0]);
    }
}
