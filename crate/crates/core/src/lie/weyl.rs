//! Weyl group of a split product: per-factor permutations of the diagonal.

use super::{AlgebraSpec, CartanVector, FlagType, RootFunctional};
use crate::error::{Error, Result};
use std::collections::BTreeSet;

/// Guard against enumerating astronomically large Weyl groups.
pub const MAX_WEYL_ORDER: usize = 40_320;

/// A per-factor permutation of `0..n_f`, acting on Cartan vectors by
/// permuting entries and on roots by `w alpha_{i,j} = alpha_{s(i), s(j)}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeylElement {
    perms: Vec<Vec<usize>>,
}

impl WeylElement {
    pub fn identity(spec: &AlgebraSpec) -> Self {
        Self { perms: spec.factors().iter().map(|&n| (0..n).collect()).collect() }
    }

    /// Builds from one-line notation per factor (`perms[f][i]` = image of `i`).
    pub fn from_perms(spec: &AlgebraSpec, perms: Vec<Vec<usize>>) -> Result<Self> {
        if perms.len() != spec.num_factors() {
            return Err(Error::ShapeMismatch("wrong number of factor permutations".into()));
        }
        for (p, &n) in perms.iter().zip(spec.factors()) {
            if p.len() != n {
                return Err(Error::ShapeMismatch("permutation length mismatch".into()));
            }
            let mut seen = vec![false; n];
            for &x in p {
                if x >= n || seen[x] {
                    return Err(Error::InvalidSpec("not a permutation".into()));
                }
                seen[x] = true;
            }
        }
        Ok(Self { perms })
    }

    /// The reflection at `ker alpha`: the transposition of the root's indices.
    pub fn reflection(spec: &AlgebraSpec, root: &RootFunctional) -> Result<Self> {
        if !root.belongs_to(spec) {
            return Err(Error::InvalidSpec(format!("root {root} outside spec")));
        }
        let mut w = Self::identity(spec);
        w.perms[root.factor].swap(root.i, root.j);
        Ok(w)
    }

    /// The longest element: reverses every factor (maps positive roots to
    /// negative ones).
    pub fn longest(spec: &AlgebraSpec) -> Self {
        Self { perms: spec.factors().iter().map(|&n| (0..n).rev().collect()).collect() }
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn is_identity(&self) -> bool {
        self.perms.iter().all(|p| p.iter().enumerate().all(|(i, &x)| i == x))
    }

    pub fn matches(&self, spec: &AlgebraSpec) -> bool {
        self.perms.len() == spec.num_factors()
            && self.perms.iter().zip(spec.factors()).all(|(p, &n)| p.len() == n)
    }

    /// `(self . other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Self) -> Self {
        let perms = self
            .perms
            .iter()
            .zip(&other.perms)
            .map(|(a, b)| b.iter().map(|&x| a[x]).collect())
            .collect();
        Self { perms }
    }

    pub fn inverse(&self) -> Self {
        let perms = self
            .perms
            .iter()
            .map(|p| {
                let mut inv = vec![0; p.len()];
                for (i, &x) in p.iter().enumerate() {
                    inv[x] = i;
                }
                inv
            })
            .collect();
        Self { perms }
    }

    /// Permutes the entries: `(wH)_{s(i)} = H_i`.
    pub fn apply_vector(&self, h: &CartanVector) -> Result<CartanVector> {
        if h.entries().len() != self.perms.len()
            || h.entries().iter().zip(&self.perms).any(|(e, p)| e.len() != p.len())
        {
            return Err(Error::ShapeMismatch("Weyl element does not match vector".into()));
        }
        let entries = h
            .entries()
            .iter()
            .zip(&self.perms)
            .map(|(e, p)| {
                let mut out = vec![0.0; e.len()];
                for (i, &x) in e.iter().enumerate() {
                    out[p[i]] = x;
                }
                out
            })
            .collect();
        CartanVector::new(entries)
    }

    /// `w alpha_{i,j} = alpha_{s(i), s(j)}`, so that `(w a)(H) = a(w^{-1} H)`.
    pub fn apply_root(&self, r: &RootFunctional) -> Result<RootFunctional> {
        let p = self
            .perms
            .get(r.factor)
            .ok_or_else(|| Error::ShapeMismatch("root factor outside Weyl element".into()))?;
        if r.i >= p.len() || r.j >= p.len() {
            return Err(Error::ShapeMismatch("root indices outside Weyl element".into()));
        }
        Ok(RootFunctional { factor: r.factor, i: p[r.i], j: p[r.j] })
    }

    pub fn apply_root_set(&self, roots: &BTreeSet<RootFunctional>) -> Result<BTreeSet<RootFunctional>> {
        roots.iter().map(|r| self.apply_root(r)).collect()
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    heap_permute(&mut cur, n, &mut out);
    out.sort();
    out
}

fn heap_permute(cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k {
        heap_permute(cur, k - 1, out);
        if k % 2 == 0 {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
}

/// The full Weyl group (product of symmetric groups), sorted.
pub fn weyl_group(spec: &AlgebraSpec) -> Result<Vec<WeylElement>> {
    let order: usize = spec.factors().iter().map(|&n| (1..=n).product::<usize>()).product();
    if order > MAX_WEYL_ORDER {
        return Err(Error::InvalidSpec(format!(
            "Weyl group order {order} exceeds the enumeration limit {MAX_WEYL_ORDER}"
        )));
    }
    let per_factor: Vec<Vec<Vec<usize>>> =
        spec.factors().iter().map(|&n| permutations(n)).collect();
    let mut out = vec![WeylElement { perms: Vec::new() }];
    for fperms in &per_factor {
        let mut next = Vec::with_capacity(out.len() * fperms.len());
        for w in &out {
            for p in fperms {
                let mut perms = w.perms.clone();
                perms.push(p.clone());
                next.push(WeylElement { perms });
            }
        }
        out = next;
    }
    out.sort();
    Ok(out)
}

/// The subgroup `W_Theta` generated by the reflections at `ker alpha`,
/// `alpha in Theta`, computed by closure. Sorted.
pub fn weyl_subgroup(spec: &AlgebraSpec, theta: &FlagType) -> Result<Vec<WeylElement>> {
    let gens: Vec<WeylElement> = theta
        .iter()
        .map(|r| WeylElement::reflection(spec, r))
        .collect::<Result<_>>()?;
    let mut seen = BTreeSet::new();
    let mut queue = vec![WeylElement::identity(spec)];
    seen.insert(queue[0].clone());
    while let Some(w) = queue.pop() {
        for g in &gens {
            let next = g.compose(&w);
            if seen.insert(next.clone()) {
                queue.push(next);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Alias for the longest element.
pub fn principal_involution(spec: &AlgebraSpec) -> WeylElement {
    WeylElement::longest(spec)
}

/// Partition of the Weyl group into double cosets `W_Theta1 w W_Theta2`.
///
/// Blocks are sorted internally and ordered by their smallest element, so the
/// first element of each block is a canonical coset representative.
pub fn double_cosets(
    spec: &AlgebraSpec,
    theta1: &FlagType,
    theta2: &FlagType,
) -> Result<Vec<Vec<WeylElement>>> {
    let group = weyl_group(spec)?;
    let left = weyl_subgroup(spec, theta1)?;
    let right = weyl_subgroup(spec, theta2)?;
    let mut assigned: BTreeSet<WeylElement> = BTreeSet::new();
    let mut blocks = Vec::new();
    for w in &group {
        if assigned.contains(w) {
            continue;
        }
        let mut block = BTreeSet::new();
        for a in &left {
            let aw = a.compose(w);
            for b in &right {
                block.insert(aw.compose(b));
            }
        }
        for x in &block {
            assigned.insert(x.clone());
        }
        blocks.push(block.into_iter().collect::<Vec<_>>());
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{all_roots, simple_roots};
    use rand::{Rng, SeedableRng};

    fn sl(n: usize) -> AlgebraSpec {
        AlgebraSpec::simple(n).unwrap()
    }

    fn root(i: usize, j: usize) -> RootFunctional {
        RootFunctional { factor: 0, i, j }
    }

    #[test]
    fn group_laws() {
        let spec = AlgebraSpec::new(vec![3, 2]).unwrap();
        let group = weyl_group(&spec).unwrap();
        assert_eq!(group.len(), 12);
        let id = WeylElement::identity(&spec);
        for w in &group {
            assert_eq!(w.compose(&w.inverse()), id);
            assert_eq!(w.inverse().compose(w), id);
        }
        // Associativity on a few triples.
        for (a, b, c) in [(0usize, 3, 7), (1, 5, 11), (2, 2, 9)] {
            let (a, b, c) = (&group[a], &group[b], &group[c]);
            assert_eq!(a.compose(b).compose(c), a.compose(&b.compose(c)));
        }
    }

    #[test]
    fn vector_action_examples() {
        let spec = sl(3);
        let w13 = WeylElement::reflection(&spec, &root(0, 2)).unwrap();
        let h = CartanVector::new(vec![vec![3.0, 1.0, -4.0]]).unwrap();
        assert_eq!(w13.apply_vector(&h).unwrap().factor(0), &[-4.0, 1.0, 3.0]);

        let id = WeylElement::identity(&spec);
        let a = root(1, 2);
        assert_eq!(id.apply_root(&a).unwrap(), a);

        // w12 . a23 = a13
        let w12 = WeylElement::reflection(&spec, &root(0, 1)).unwrap();
        assert_eq!(w12.apply_root(&root(1, 2)).unwrap(), root(0, 2));
    }

    #[test]
    fn root_action_is_dual_to_vector_action() {
        // (w a)(H) = a(w^{-1} H) on random vectors.
        let spec = AlgebraSpec::new(vec![3, 2]).unwrap();
        let group = weyl_group(&spec).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let h = CartanVector::projected(vec![
                (0..3).map(|_| rng.random_range(-2.0..2.0)).collect(),
                (0..2).map(|_| rng.random_range(-2.0..2.0)).collect(),
            ])
            .unwrap();
            for w in &group {
                let winv = w.inverse();
                for a in all_roots(&spec) {
                    let lhs = w.apply_root(&a).unwrap().eval(&h);
                    let rhs = a.eval(&winv.apply_vector(&h).unwrap());
                    assert!((lhs - rhs).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn longest_element_flips_positive_roots() {
        for spec in [sl(2), sl(3), AlgebraSpec::new(vec![2, 2]).unwrap()] {
            let w0 = WeylElement::longest(&spec);
            for a in all_roots(&spec) {
                assert_eq!(w0.apply_root(&a).unwrap().is_positive(), !a.is_positive());
            }
        }
    }

    #[test]
    fn subgroup_generated_by_simple_roots() {
        let spec = sl(3);
        let t = FlagType::new([root(0, 1)]).unwrap();
        let sub = weyl_subgroup(&spec, &t).unwrap();
        assert_eq!(sub.len(), 2);
        let full = weyl_subgroup(&spec, &FlagType::full(&spec)).unwrap();
        assert_eq!(full.len(), 6);
        let trivial = weyl_subgroup(&spec, &FlagType::empty()).unwrap();
        assert_eq!(trivial.len(), 1);
    }

    #[test]
    fn double_cosets_sl3_examples() {
        let spec = sl(3);
        // Theta1 = {a12}, Theta2 = {}: three blocks of size 2.
        let t1 = FlagType::new([root(0, 1)]).unwrap();
        let blocks = double_cosets(&spec, &t1, &FlagType::empty()).unwrap();
        assert_eq!(blocks.len(), 3);
        assert!(blocks.iter().all(|b| b.len() == 2));

        // (empty, empty): singletons.
        let blocks = double_cosets(&spec, &FlagType::empty(), &FlagType::empty()).unwrap();
        assert_eq!(blocks.len(), 6);
        assert!(blocks.iter().all(|b| b.len() == 1));

        // Theta1 = {a12}, Theta2 = {a23}: blocks of sizes 4 and 2.
        let t2 = FlagType::new([root(1, 2)]).unwrap();
        let blocks = double_cosets(&spec, &t1, &t2).unwrap();
        let mut sizes: Vec<_> = blocks.iter().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, vec![2, 4]);
    }

    #[test]
    fn double_coset_blocks_are_stable() {
        let spec = AlgebraSpec::new(vec![2, 2]).unwrap();
        let simple = simple_roots(&spec);
        let t1 = FlagType::new([simple[0]]).unwrap();
        let t2 = FlagType::new([simple[1]]).unwrap();
        let blocks = double_cosets(&spec, &t1, &t2).unwrap();
        let left = weyl_subgroup(&spec, &t1).unwrap();
        let right = weyl_subgroup(&spec, &t2).unwrap();
        let group = weyl_group(&spec).unwrap();
        let total: usize = blocks.iter().map(Vec::len).sum();
        assert_eq!(total, group.len());
        for block in &blocks {
            let set: BTreeSet<_> = block.iter().cloned().collect();
            for w in block {
                for a in &left {
                    assert!(set.contains(&a.compose(w)));
                }
                for b in &right {
                    assert!(set.contains(&w.compose(b)));
                }
            }
        }
    }
}
