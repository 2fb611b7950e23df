//! Finite vertex sets with convex-hull semantics in the Cartan subspace.

use crate::error::{Error, Result};
use crate::lie::{AlgebraSpec, CartanVector, FlagType, WeylElement};

/// Vertex dedup tolerance.
pub const VERTEX_TOL: f64 = 1e-9;

/// Model of a spectrum polytope: vertices in the Cartan subspace plus the
/// flag type used for symmetry bookkeeping.
#[derive(Debug, Clone)]
pub struct SpectrumPolytope {
    vertices: Vec<CartanVector>,
    theta_phi: FlagType,
}

impl SpectrumPolytope {
    /// Hull-reduces the given points. At least one point is required.
    pub fn new(points: Vec<CartanVector>, theta_phi: FlagType) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Precondition("empty polytope".into()));
        }
        let spec = points[0].spec()?;
        if points.iter().any(|p| !p.matches(&spec)) {
            return Err(Error::ShapeMismatch("polytope points of mixed shape".into()));
        }
        let mut vertices = hull_reduce(points);
        vertices.sort_by(|a, b| {
            a.flat()
                .partial_cmp(&b.flat())
                .expect("non-finite vertex")
        });
        Ok(Self { vertices, theta_phi })
    }

    pub fn vertices(&self) -> &[CartanVector] {
        &self.vertices
    }

    pub fn theta_phi(&self) -> &FlagType {
        &self.theta_phi
    }

    pub fn with_theta_phi(mut self, theta_phi: FlagType) -> Self {
        self.theta_phi = theta_phi;
        self
    }

    pub fn spec(&self) -> AlgebraSpec {
        self.vertices[0].spec().expect("validated at construction")
    }

    /// Min and max of a linear functional over the polytope (attained at
    /// vertices).
    pub fn functional_range(&self, eval: impl Fn(&CartanVector) -> f64) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in &self.vertices {
            let x = eval(v);
            lo = lo.min(x);
            hi = hi.max(x);
        }
        (lo, hi)
    }

    /// Orbit union under the given Weyl elements, hull-reduced again.
    pub fn symmetrized(&self, subgroup: &[WeylElement]) -> Result<Self> {
        let mut points = Vec::with_capacity(self.vertices.len() * subgroup.len());
        for v in &self.vertices {
            for w in subgroup {
                points.push(w.apply_vector(v)?);
            }
        }
        Self::new(points, self.theta_phi.clone())
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.vertices.iter().map(|v| v.scaled(c)).collect(), self.theta_phi.clone())
    }

    /// Distance from a point to the hull (Frank-Wolfe on the squared
    /// distance; exact line search, vertex oracle for the linear step).
    pub fn distance(&self, point: &CartanVector) -> f64 {
        let p = point.flat();
        let verts: Vec<Vec<f64>> = self.vertices.iter().map(|v| v.flat()).collect();
        // start at the nearest vertex
        let mut x = verts
            .iter()
            .min_by(|a, b| dist2(a, &p).partial_cmp(&dist2(b, &p)).unwrap())
            .unwrap()
            .clone();
        for _ in 0..500 {
            let grad: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| xi - pi).collect();
            let s = verts
                .iter()
                .min_by(|a, b| dot(a, &grad).partial_cmp(&dot(b, &grad)).unwrap())
                .unwrap();
            let gap = dot(&x, &grad) - dot(s, &grad);
            if gap <= 1e-18 {
                break;
            }
            let dxs: Vec<f64> = x.iter().zip(s).map(|(xi, si)| xi - si).collect();
            let denom = dot(&dxs, &dxs);
            if denom <= 0.0 {
                break;
            }
            let gamma = (dot(&grad, &dxs) / denom).clamp(0.0, 1.0);
            for (xi, di) in x.iter_mut().zip(&dxs) {
                *xi -= gamma * di;
            }
        }
        dist2(&x, &p).sqrt()
    }

    pub fn contains(&self, point: &CartanVector, tol: f64) -> bool {
        self.distance(point) <= tol
    }

    /// Hull containment of another polytope's vertex set.
    pub fn contains_polytope(&self, other: &Self, tol: f64) -> bool {
        other.vertices.iter().all(|v| self.contains(v, tol))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Independent coordinates: all factor entries except the last per factor.
fn coords(v: &CartanVector) -> Vec<f64> {
    v.entries().iter().flat_map(|e| e[..e.len() - 1].iter().copied()).collect()
}

fn hull_reduce(points: Vec<CartanVector>) -> Vec<CartanVector> {
    // dedup within VERTEX_TOL
    let mut dedup: Vec<CartanVector> = Vec::new();
    for p in points {
        if dedup.iter().all(|q| q.dist(&p) > VERTEX_TOL) {
            dedup.push(p);
        }
    }
    if dedup.len() <= 1 {
        return dedup;
    }
    let dim = coords(&dedup[0]).len();
    match dim {
        1 => {
            let lo = dedup
                .iter()
                .min_by(|a, b| coords(a)[0].partial_cmp(&coords(b)[0]).unwrap())
                .unwrap()
                .clone();
            let hi = dedup
                .iter()
                .max_by(|a, b| coords(a)[0].partial_cmp(&coords(b)[0]).unwrap())
                .unwrap()
                .clone();
            let mut out = vec![lo];
            if out[0].dist(&hi) > VERTEX_TOL {
                out.push(hi);
            }
            out
        }
        2 => hull_2d(dedup),
        _ => hull_nd(dedup),
    }
}

/// Andrew monotone chain; collinear middle points are dropped.
fn hull_2d(points: Vec<CartanVector>) -> Vec<CartanVector> {
    let mut pts: Vec<(f64, f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let c = coords(p);
            (c[0], c[1], i)
        })
        .collect();
    pts.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
    let scale: f64 = pts
        .iter()
        .map(|p| p.0.abs().max(p.1.abs()))
        .fold(1.0, f64::max);
    let eps = 1e-12 * scale * scale;
    let cross = |o: &(f64, f64, usize), a: &(f64, f64, usize), b: &(f64, f64, usize)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let build = |iter: Box<dyn Iterator<Item = &(f64, f64, usize)> + '_>| {
        let mut chain: Vec<(f64, f64, usize)> = Vec::new();
        for p in iter {
            while chain.len() >= 2 && cross(&chain[chain.len() - 2], &chain[chain.len() - 1], p) <= eps
            {
                chain.pop();
            }
            chain.push(*p);
        }
        chain
    };
    let lower = build(Box::new(pts.iter()));
    let upper = build(Box::new(pts.iter().rev()));
    let mut idx: Vec<usize> = lower[..lower.len() - 1]
        .iter()
        .chain(&upper[..upper.len() - 1])
        .map(|p| p.2)
        .collect();
    if idx.is_empty() {
        idx.push(pts[0].2);
    }
    idx.sort_unstable();
    idx.dedup();
    idx.into_iter().map(|i| points[i].clone()).collect()
}

/// General dimension: drop every point that lies in the hull of the others.
fn hull_nd(points: Vec<CartanVector>) -> Vec<CartanVector> {
    let mut keep = vec![true; points.len()];
    for i in 0..points.len() {
        let others: Vec<CartanVector> = points
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i && keep[*j])
            .map(|(_, p)| p.clone())
            .collect();
        if others.is_empty() {
            continue;
        }
        let hull = SpectrumPolytope { vertices: others, theta_phi: FlagType::empty() };
        if hull.distance(&points[i]) <= VERTEX_TOL {
            keep[i] = false;
        }
    }
    points
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{simple_roots, weyl_subgroup};

    fn v3(a: f64, b: f64, c: f64) -> CartanVector {
        CartanVector::new(vec![vec![a, b, c]]).unwrap()
    }

    #[test]
    fn hull_drops_interior_and_duplicate_points() {
        let pts = vec![
            v3(2.0, 0.0, -2.0),
            v3(0.0, 2.0, -2.0),
            v3(2.0, -1.0, -1.0),
            v3(1.0, 0.5, -1.5), // inside
            v3(2.0, 0.0, -2.0), // duplicate
        ];
        let p = SpectrumPolytope::new(pts, FlagType::empty()).unwrap();
        assert_eq!(p.vertices().len(), 3);
        assert!(p.contains(&v3(1.0, 0.5, -1.5), 1e-9));
        assert!(!p.contains(&v3(3.0, 0.0, -3.0), 1e-6));
    }

    #[test]
    fn segment_and_point_hulls() {
        let p = SpectrumPolytope::new(vec![v3(1.0, 1.0, -2.0)], FlagType::empty()).unwrap();
        assert_eq!(p.vertices().len(), 1);

        let seg = SpectrumPolytope::new(
            vec![
                CartanVector::new(vec![vec![1.0, -1.0]]).unwrap(),
                CartanVector::new(vec![vec![0.5, -0.5]]).unwrap(),
                CartanVector::new(vec![vec![0.75, -0.75]]).unwrap(),
            ],
            FlagType::empty(),
        )
        .unwrap();
        assert_eq!(seg.vertices().len(), 2);
    }

    #[test]
    fn symmetrization_adds_orbit_points() {
        let spec = AlgebraSpec::simple(3).unwrap();
        let a12 = simple_roots(&spec)[0];
        let sub = weyl_subgroup(&spec, &FlagType::new([a12]).unwrap()).unwrap();
        let p = SpectrumPolytope::new(
            vec![v3(1.0, 1.0, -2.0), v3(2.0, 0.0, -2.0)],
            FlagType::new([a12]).unwrap(),
        )
        .unwrap();
        let s = p.symmetrized(&sub).unwrap();
        // (1,1,-2) is fixed; (2,0,-2) spawns (0,2,-2).
        assert_eq!(s.vertices().len(), 3);
        assert!(s.vertices().iter().any(|v| v.dist(&v3(0.0, 2.0, -2.0)) < 1e-12));
        // invariance as a set
        for w in &sub {
            for v in s.vertices() {
                let moved = w.apply_vector(v).unwrap();
                assert!(s.vertices().iter().any(|u| u.dist(&moved) < 1e-9));
            }
        }
    }

    #[test]
    fn four_dim_hull_via_redundancy_filter() {
        // sl(2)^3: coordinate dim 3.
        let mk = |a: f64, b: f64, c: f64| {
            CartanVector::new(vec![vec![a, -a], vec![b, -b], vec![c, -c]]).unwrap()
        };
        let pts = vec![
            mk(0.0, 0.0, 0.0),
            mk(1.0, 0.0, 0.0),
            mk(0.0, 1.0, 0.0),
            mk(0.0, 0.0, 1.0),
            mk(0.25, 0.25, 0.25), // interior
        ];
        let p = SpectrumPolytope::new(pts, FlagType::empty()).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert!(p.contains(&mk(0.25, 0.25, 0.25), 1e-8));
    }
}
