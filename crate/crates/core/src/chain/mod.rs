//! Set-oriented approximation of chain control sets on the circle (projective
//! line) and the 2-torus (product of two projective lines).
//!
//! The state space is cut into half-open angle cells; for every cell, sampled
//! constant controls and start points are flowed for time `T`, and edges go
//! to every cell meeting the epsilon-ball around the endpoint. Chains that
//! concatenate across cells are supplied by the SCC closure of the graph.

mod morse;

pub use morse::{chain_components, component_extent, MorseComponent, MorseGraph};

use crate::cocycle::BilinearControlSystem;
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use nalgebra::{Matrix2, Vector2};
use std::collections::BTreeSet;
use std::f64::consts::PI;

/// Partition of the circle or the torus into half-open angle cells.
///
/// Cell `k` along a dimension with resolution `r` covers
/// `[k h - h/2, k h + h/2)` with `h = pi / r`, so the cell *centers* sit on
/// the angle grid (fixed directions like `[e1]` land in cell interiors).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellComplex {
    resolutions: Vec<usize>,
}

impl CellComplex {
    pub fn circle(resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Precondition("need at least 2 cells".into()));
        }
        Ok(Self { resolutions: vec![resolution] })
    }

    pub fn torus(res_a: usize, res_b: usize) -> Result<Self> {
        if res_a < 2 || res_b < 2 {
            return Err(Error::Precondition("need at least 2 cells per dimension".into()));
        }
        Ok(Self { resolutions: vec![res_a, res_b] })
    }

    pub fn resolutions(&self) -> &[usize] {
        &self.resolutions
    }

    pub fn dim(&self) -> usize {
        self.resolutions.len()
    }

    pub fn num_cells(&self) -> usize {
        self.resolutions.iter().product()
    }

    /// Cell width per dimension.
    pub fn widths(&self) -> Vec<f64> {
        self.resolutions.iter().map(|&r| PI / r as f64).collect()
    }

    /// Cell diameter in the sup metric.
    pub fn diameter(&self) -> f64 {
        self.widths().into_iter().fold(0.0, f64::max)
    }

    /// Doubled resolution in every dimension.
    pub fn refined(&self) -> Self {
        Self { resolutions: self.resolutions.iter().map(|r| r * 2).collect() }
    }

    pub fn cell_id(&self, coords: &[usize]) -> usize {
        let mut id = 0;
        for (c, r) in coords.iter().zip(&self.resolutions) {
            id = id * r + (c % r);
        }
        id
    }

    pub fn cell_coords(&self, id: usize) -> Vec<usize> {
        let mut coords = vec![0; self.dim()];
        let mut rest = id;
        for d in (0..self.dim()).rev() {
            coords[d] = rest % self.resolutions[d];
            rest /= self.resolutions[d];
        }
        coords
    }

    /// Index of the cell containing the given angles (each taken mod pi).
    pub fn locate(&self, angles: &[f64]) -> usize {
        let coords: Vec<usize> = angles
            .iter()
            .zip(&self.resolutions)
            .map(|(&a, &r)| {
                let h = PI / r as f64;
                let k = (a.rem_euclid(PI) / h + 0.5).floor() as usize;
                k % r
            })
            .collect();
        self.cell_id(&coords)
    }

    pub fn cell_center(&self, id: usize) -> Vec<f64> {
        self.cell_coords(id)
            .iter()
            .zip(&self.resolutions)
            .map(|(&k, &r)| k as f64 * PI / r as f64)
            .collect()
    }

    /// Evenly spaced start angles inside a cell, `per_axis` per dimension.
    pub fn sample_angles(&self, id: usize, per_axis: usize) -> Vec<Vec<f64>> {
        let center = self.cell_center(id);
        let widths = self.widths();
        let mut points: Vec<Vec<f64>> = vec![Vec::new()];
        for d in 0..self.dim() {
            let mut next = Vec::with_capacity(points.len() * per_axis);
            for p in &points {
                for k in 0..per_axis {
                    let frac = (k as f64 + 0.5) / per_axis as f64 - 0.5;
                    let mut q = p.clone();
                    q.push((center[d] + frac * widths[d]).rem_euclid(PI));
                    next.push(q);
                }
            }
            points = next;
        }
        points
    }

    /// Cells meeting the closed sup-metric ball of radius `eps` around the
    /// given angles.
    pub fn ball_cells(&self, angles: &[f64], eps: f64) -> Vec<usize> {
        let mut ranges: Vec<Vec<usize>> = Vec::with_capacity(self.dim());
        for (d, &r) in self.resolutions.iter().enumerate() {
            let h = PI / r as f64;
            let a = angles[d].rem_euclid(PI);
            let lo = ((a - eps) / h + 0.5).floor() as i64;
            let hi = ((a + eps) / h + 0.5).floor() as i64;
            let count = (hi - lo + 1).min(r as i64);
            let idx: Vec<usize> =
                (0..count).map(|o| ((lo + o).rem_euclid(r as i64)) as usize).collect();
            ranges.push(idx);
        }
        let mut cells: Vec<Vec<usize>> = vec![Vec::new()];
        for range in &ranges {
            let mut next = Vec::with_capacity(cells.len() * range.len());
            for c in &cells {
                for &k in range {
                    let mut q = c.clone();
                    q.push(k);
                    next.push(q);
                }
            }
            cells = next;
        }
        let mut out: Vec<usize> = cells.iter().map(|c| self.cell_id(c)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Controlled reachability graph over a cell complex.
#[derive(Debug, Clone)]
pub struct ChainGraph {
    complex: CellComplex,
    edges: Vec<Vec<usize>>,
    epsilon: f64,
    horizon: f64,
    control_samples: Vec<Vec<f64>>,
}

impl ChainGraph {
    pub fn complex(&self) -> &CellComplex {
        &self.complex
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn control_samples(&self) -> &[Vec<f64>] {
        &self.control_samples
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// True when `to` is reachable from `from` along graph edges.
    pub fn reachable(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.edges.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            for &w in &self.edges[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    }

    /// Edge list as CSV (`from,to` per row).
    pub fn write_edge_csv<W: std::io::Write>(&self, out: &mut W) -> Result<()> {
        let io_err = |e: std::io::Error| Error::Parse(format!("io error: {e}"));
        writeln!(out, "from,to").map_err(io_err)?;
        for (from, tos) in self.edges.iter().enumerate() {
            for to in tos {
                writeln!(out, "{from},{to}").map_err(io_err)?;
            }
        }
        Ok(())
    }
}

/// Default sampled controls: the vertices of the control box plus its
/// midpoint (the zero control).
pub fn default_control_samples(system: &BilinearControlSystem) -> Vec<Vec<f64>> {
    let mut out = system.extreme_controls();
    if system.num_controls() > 0 {
        out.push(system.zero_control());
    }
    out
}

pub fn build_chain_graph(
    system: &BilinearControlSystem,
    complex: &CellComplex,
    epsilon: f64,
    horizon: f64,
    control_samples: &[Vec<f64>],
    points_per_axis: usize,
    dt: f64,
) -> Result<ChainGraph> {
    build_chain_graph_with(
        system,
        complex,
        epsilon,
        horizon,
        control_samples,
        points_per_axis,
        dt,
        Execution::Auto,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn build_chain_graph_with(
    system: &BilinearControlSystem,
    complex: &CellComplex,
    epsilon: f64,
    horizon: f64,
    control_samples: &[Vec<f64>],
    points_per_axis: usize,
    dt: f64,
    mode: Execution,
) -> Result<ChainGraph> {
    if !(epsilon > 0.0) || !(horizon > 0.0) || !(dt > 0.0) || points_per_axis == 0 {
        return Err(Error::Precondition(
            "epsilon, horizon, dt and points_per_axis must be positive".into(),
        ));
    }
    let spec = system.spec();
    if spec.factors().iter().any(|&n| n != 2) {
        return Err(Error::Precondition(
            "chain graphs are built only over products of sl(2) factors".into(),
        ));
    }
    if spec.num_factors() != complex.dim() {
        return Err(Error::ShapeMismatch(format!(
            "complex dimension {} does not match {} factors",
            complex.dim(),
            spec.num_factors()
        )));
    }
    for u in control_samples {
        if !system.value_in_range(u, 1e-12) {
            return Err(Error::Precondition(format!("control sample {u:?} outside range")));
        }
    }
    if control_samples.is_empty() {
        return Err(Error::Precondition("need at least one control sample".into()));
    }

    // Per control sample and factor: the constant 2x2 generator.
    let generators: Vec<Vec<Matrix2<f64>>> = control_samples
        .iter()
        .map(|u| {
            (0..spec.num_factors())
                .map(|f| {
                    let g = system.generator(f, u);
                    Matrix2::new(g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)])
                })
                .collect()
        })
        .collect();
    let steps = (horizon / dt).ceil().max(1.0) as usize;
    let h = horizon / steps as f64;

    let edge_lists: Vec<Result<Vec<usize>>> = map_range(mode, complex.num_cells(), |cell| {
        let mut targets = BTreeSet::new();
        for gens in &generators {
            for start in complex.sample_angles(cell, points_per_axis) {
                let mut endpoint = Vec::with_capacity(start.len());
                for (f, gen) in gens.iter().enumerate() {
                    let angle = flow_angle(gen, start[f], steps, h)?;
                    endpoint.push(angle);
                }
                for c in complex.ball_cells(&endpoint, epsilon) {
                    targets.insert(c);
                }
            }
        }
        Ok(targets.into_iter().collect())
    });
    let edges = edge_lists.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ChainGraph {
        complex: complex.clone(),
        edges,
        epsilon,
        horizon,
        control_samples: control_samples.to_vec(),
    })
}

/// Flows a projective direction for the full horizon under a constant 2x2
/// generator; RK4 with per-step renormalization.
fn flow_angle(gen: &Matrix2<f64>, angle: f64, steps: usize, h: f64) -> Result<f64> {
    let mut v = Vector2::new(angle.cos(), angle.sin());
    for _ in 0..steps {
        let k1 = gen * v;
        let k2 = gen * (v + k1 * (h / 2.0));
        let k3 = gen * (v + k2 * (h / 2.0));
        let k4 = gen * (v + k3 * h);
        v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let n = v.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::IntegrationFailure {
                t: f64::NAN,
                reason: "projective direction collapsed".into(),
            });
        }
        v /= n;
    }
    Ok(v[1].atan2(v[0]).rem_euclid(PI))
}

/// Distance between two projective angles (mod pi).
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::lie::{AlgebraElement, AlgebraSpec};
    use nalgebra::DMatrix;

    pub(crate) fn sl2_diag_system() -> BilinearControlSystem {
        let spec = AlgebraSpec::simple(2).unwrap();
        let d = AlgebraElement::new(
            &spec,
            vec![DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])],
        )
        .unwrap();
        BilinearControlSystem::autonomous(spec, d).unwrap()
    }

    pub(crate) fn sl2_rotation_system() -> BilinearControlSystem {
        let spec = AlgebraSpec::simple(2).unwrap();
        let d = AlgebraElement::new(
            &spec,
            vec![DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])],
        )
        .unwrap();
        BilinearControlSystem::autonomous(spec, d).unwrap()
    }

    pub(crate) fn diag_graph(resolution: usize) -> ChainGraph {
        let sys = sl2_diag_system();
        let complex = CellComplex::circle(resolution).unwrap();
        let eps = 0.25 * complex.diameter();
        build_chain_graph(&sys, &complex, eps, 1.0, &[vec![]], 8, 1e-2).unwrap()
    }

    #[test]
    fn cell_indexing_round_trips() {
        let c = CellComplex::torus(8, 6).unwrap();
        for id in 0..c.num_cells() {
            assert_eq!(c.cell_id(&c.cell_coords(id)), id);
            let center = c.cell_center(id);
            assert_eq!(c.locate(&center), id);
        }
    }

    #[test]
    fn ball_cells_wrap_around() {
        let c = CellComplex::circle(8).unwrap();
        let h = c.widths()[0];
        // Ball around angle 0 with radius 1.2 h covers cells -1, 0, 1.
        let cells = c.ball_cells(&[0.0], 1.2 * h);
        assert_eq!(cells, vec![0, 1, 7]);
        // Huge radius covers everything.
        let cells = c.ball_cells(&[0.3], 10.0);
        assert_eq!(cells.len(), 8);
    }

    #[test]
    fn diag_flow_has_fixed_point_self_loops() {
        let g = diag_graph(64);
        // cells containing angles 0 and pi/2
        let c0 = g.complex().locate(&[0.0]);
        let c1 = g.complex().locate(&[std::f64::consts::FRAC_PI_2]);
        assert!(g.edges()[c0].contains(&c0));
        assert!(g.edges()[c1].contains(&c1));
        // a generic cell moves strictly toward the attractor
        let mid = g.complex().locate(&[0.7]);
        assert!(!g.edges()[mid].contains(&mid));
    }

    #[test]
    fn rotation_flow_cycles_all_cells() {
        let sys = sl2_rotation_system();
        let complex = CellComplex::circle(32).unwrap();
        let eps = 0.25 * complex.diameter();
        let g = build_chain_graph(&sys, &complex, eps, 1.0, &[vec![]], 4, 1e-2).unwrap();
        // every cell reaches every other cell
        assert!(g.reachable(0, 17));
        assert!(g.reachable(17, 0));
    }

    #[test]
    fn endpoint_cell_is_always_reachable() {
        let g = diag_graph(32);
        let complex = g.complex();
        for cell in 0..complex.num_cells() {
            for start in complex.sample_angles(cell, 3) {
                let gen = Matrix2::new(1.0, 0.0, 0.0, -1.0);
                let end = flow_angle(&gen, start[0], 100, 1e-2).unwrap();
                let target = complex.locate(&[end]);
                assert!(g.reachable(cell, target));
            }
        }
    }
}
