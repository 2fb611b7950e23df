//! SCC condensation of a chain graph into a Morse graph.

use super::{CellComplex, ChainGraph};
use crate::error::{Error, Result};
use std::collections::BTreeSet;
use std::f64::consts::PI;

/// One nontrivial strongly connected component (size > 1 or a self-loop).
#[derive(Debug, Clone)]
pub struct MorseComponent {
    pub id: usize,
    /// Member cells, sorted.
    pub cells: Vec<usize>,
    /// No outgoing reachability edge to another component.
    pub attractor: bool,
    /// No incoming reachability edge from another component.
    pub repeller: bool,
}

/// Condensation restricted to the nontrivial components, with the
/// reachability partial order between them.
#[derive(Debug, Clone)]
pub struct MorseGraph {
    pub components: Vec<MorseComponent>,
    /// `(a, b)` whenever component `b` is reachable from component `a`
    /// (transitive, irreflexive).
    pub order: Vec<(usize, usize)>,
}

impl MorseGraph {
    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn attractors(&self) -> Vec<&MorseComponent> {
        self.components.iter().filter(|c| c.attractor).collect()
    }

    pub fn repellers(&self) -> Vec<&MorseComponent> {
        self.components.iter().filter(|c| c.repeller).collect()
    }

    pub fn component(&self, id: usize) -> Result<&MorseComponent> {
        self.components.get(id).ok_or(Error::UnknownComponent(id))
    }

    /// The component containing a cell, if any.
    pub fn component_of_cell(&self, cell: usize) -> Option<usize> {
        self.components.iter().find(|c| c.cells.binary_search(&cell).is_ok()).map(|c| c.id)
    }

    /// Rows `(component id, attractor, repeller, cell count, members)` plus
    /// order edges, as CSV.
    pub fn write_component_csv<W: std::io::Write>(&self, out: &mut W) -> Result<()> {
        let io_err = |e: std::io::Error| Error::Parse(format!("io error: {e}"));
        writeln!(out, "component,attractor,repeller,cells,successors,members").map_err(io_err)?;
        for c in &self.components {
            let succ: Vec<String> = self
                .order
                .iter()
                .filter(|(a, _)| *a == c.id)
                .map(|(_, b)| b.to_string())
                .collect();
            let members: Vec<String> = c.cells.iter().map(|x| x.to_string()).collect();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                c.id,
                c.attractor,
                c.repeller,
                c.cells.len(),
                succ.join(";"),
                members.join(";")
            )
            .map_err(io_err)?;
        }
        Ok(())
    }
}

/// Iterative Tarjan SCC over the cell graph, keeping components that are
/// nontrivial (more than one cell, or a self-loop).
pub fn chain_components(graph: &ChainGraph) -> MorseGraph {
    let n = graph.edges().len();
    let sccs = tarjan(graph.edges());

    // Map cell -> scc index.
    let mut scc_of = vec![0usize; n];
    for (i, scc) in sccs.iter().enumerate() {
        for &v in scc {
            scc_of[v] = i;
        }
    }
    let nontrivial: Vec<usize> = sccs
        .iter()
        .enumerate()
        .filter(|(_, scc)| {
            scc.len() > 1 || graph.edges()[scc[0]].contains(&scc[0])
        })
        .map(|(i, _)| i)
        .collect();

    // Condensation adjacency over all SCCs.
    let mut cond: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); sccs.len()];
    for (v, outs) in graph.edges().iter().enumerate() {
        for &w in outs {
            if scc_of[v] != scc_of[w] {
                cond[scc_of[v]].insert(scc_of[w]);
            }
        }
    }

    // Reachability from each nontrivial SCC to the others.
    let mut order = Vec::new();
    let mut reaches = vec![BTreeSet::new(); nontrivial.len()];
    for (a_pos, &a) in nontrivial.iter().enumerate() {
        let mut seen = vec![false; sccs.len()];
        let mut stack = vec![a];
        seen[a] = true;
        while let Some(x) = stack.pop() {
            for &y in &cond[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        for (b_pos, &b) in nontrivial.iter().enumerate() {
            if a_pos != b_pos && seen[b] {
                reaches[a_pos].insert(b_pos);
            }
        }
    }

    // Deterministic component order: topological (repellers first), ties by
    // smallest member cell.
    let mut positions: Vec<usize> = (0..nontrivial.len()).collect();
    positions.sort_by_key(|&p| {
        let downstream = reaches[p].len();
        let smallest = sccs[nontrivial[p]].iter().min().copied().unwrap_or(usize::MAX);
        (std::cmp::Reverse(downstream), smallest)
    });

    let mut components = Vec::with_capacity(positions.len());
    let mut new_id = vec![0usize; positions.len()];
    for (id, &p) in positions.iter().enumerate() {
        new_id[p] = id;
    }
    for (id, &p) in positions.iter().enumerate() {
        let mut cells = sccs[nontrivial[p]].clone();
        cells.sort_unstable();
        let incoming = (0..nontrivial.len()).any(|q| q != p && reaches[q].contains(&p));
        components.push(MorseComponent {
            id,
            cells,
            attractor: reaches[p].is_empty(),
            repeller: !incoming,
        });
    }
    for (p, set) in reaches.iter().enumerate() {
        for &q in set {
            order.push((new_id[p], new_id[q]));
        }
    }
    order.sort_unstable();
    MorseGraph { components, order }
}

fn tarjan(edges: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = edges.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut sccs: Vec<Vec<usize>> = Vec::new();
    // explicit DFS frames: (vertex, next edge position)
    let mut frames: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        frames.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut ei)) = frames.last_mut() {
            if *ei < edges[v].len() {
                let w = edges[v][*ei];
                *ei += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&mut (parent, _)) = frames.last_mut() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut scc = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        scc.push(w);
                        if w == v {
                            break;
                        }
                    }
                    sccs.push(scc);
                }
            }
        }
    }
    sccs
}

/// Member cells of a component as per-dimension angle arcs `(start, end)`,
/// `end > start`; an arc crossing pi is reported with `end > pi`.
pub fn component_extent(
    complex: &CellComplex,
    morse: &MorseGraph,
    id: usize,
) -> Result<Vec<Vec<(f64, f64)>>> {
    let comp = morse.component(id)?;
    let mut out = Vec::with_capacity(complex.dim());
    for d in 0..complex.dim() {
        let r = complex.resolutions()[d];
        let h = PI / r as f64;
        let mut present = vec![false; r];
        for &cell in &comp.cells {
            present[complex.cell_coords(cell)[d]] = true;
        }
        out.push(merge_arcs(&present, h));
    }
    Ok(out)
}

/// Merges consecutive occupied cells (cyclically) into arcs.
fn merge_arcs(present: &[bool], h: f64) -> Vec<(f64, f64)> {
    let r = present.len();
    if present.iter().all(|&p| p) {
        return vec![(0.0, PI)];
    }
    // find a gap to anchor the scan
    let start = (0..r).find(|&k| !present[k]).expect("checked above");
    let mut arcs = Vec::new();
    let mut run_start: Option<usize> = None;
    for off in 1..=r {
        let k = (start + off) % r;
        if present[k] && run_start.is_none() {
            run_start = Some(off);
        }
        if (!present[k] || off == r) && run_start.is_some() {
            let s = run_start.take().unwrap();
            let e = if present[k] && off == r { off } else { off - 1 };
            let lo = ((start + s) % r) as f64 * h - h / 2.0;
            let len = (e - s + 1) as f64 * h;
            arcs.push((lo.rem_euclid(PI), lo.rem_euclid(PI) + len));
        }
    }
    arcs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    arcs
}

/// True when the component is exactly the product of its per-dimension
/// projections.
pub fn is_product_component(complex: &CellComplex, comp: &MorseComponent) -> bool {
    let mut projections: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); complex.dim()];
    for &cell in &comp.cells {
        for (d, &k) in complex.cell_coords(cell).iter().enumerate() {
            projections[d].insert(k);
        }
    }
    let product_size: usize = projections.iter().map(BTreeSet::len).product();
    product_size == comp.cells.len()
}

#[cfg(test)]
mod tests {
    use super::super::tests::{diag_graph, sl2_rotation_system};
    use super::super::{build_chain_graph, CellComplex};
    use super::*;

    #[test]
    fn diag_flow_two_singleton_components_one_attractor() {
        let g = diag_graph(64);
        let morse = chain_components(&g);
        assert_eq!(morse.num_components(), 2);
        for c in &morse.components {
            assert_eq!(c.cells.len(), 1, "component {c:?}");
        }
        assert_eq!(morse.attractors().len(), 1);
        assert_eq!(morse.repellers().len(), 1);
        // the attractor is the cell containing [e1] (forward flow pushes
        // generic directions toward it)
        let att = morse.attractors()[0];
        assert_eq!(att.cells, vec![g.complex().locate(&[0.0])]);
        let rep = morse.repellers()[0];
        assert_eq!(rep.cells, vec![g.complex().locate(&[std::f64::consts::FRAC_PI_2])]);
        // repeller precedes attractor in the order
        assert_eq!(morse.order, vec![(rep.id, att.id)]);
    }

    #[test]
    fn rotation_flow_single_full_component() {
        let sys = sl2_rotation_system();
        let complex = CellComplex::circle(24).unwrap();
        let g = build_chain_graph(&sys, &complex, 0.25 * complex.diameter(), 1.0, &[vec![]], 4, 1e-2)
            .unwrap();
        let morse = chain_components(&g);
        assert_eq!(morse.num_components(), 1);
        assert_eq!(morse.components[0].cells.len(), 24);
        assert!(morse.components[0].attractor && morse.components[0].repeller);
        let ext = component_extent(&complex, &morse, 0).unwrap();
        assert_eq!(ext[0], vec![(0.0, PI)]);
    }

    #[test]
    fn component_count_stable_under_refinement() {
        let a = chain_components(&diag_graph(64));
        let b = chain_components(&diag_graph(128));
        assert_eq!(a.num_components(), b.num_components());
    }

    #[test]
    fn extent_shrinks_under_refinement() {
        let coarse = diag_graph(32);
        let fine = diag_graph(64);
        let mc = chain_components(&coarse);
        let mf = chain_components(&fine);
        let att_c = mc.attractors()[0].id;
        let att_f = mf.attractors()[0].id;
        let ec = component_extent(coarse.complex(), &mc, att_c).unwrap()[0].clone();
        let ef = component_extent(fine.complex(), &mf, att_f).unwrap()[0].clone();
        let width =
            |arcs: &[(f64, f64)]| arcs.iter().map(|(a, b)| b - a).sum::<f64>();
        assert!(width(&ef) <= width(&ec) + 1e-12);
    }

    #[test]
    fn condensation_order_is_acyclic() {
        let g = diag_graph(48);
        let morse = chain_components(&g);
        for &(a, b) in &morse.order {
            assert!(!morse.order.contains(&(b, a)), "cycle between {a} and {b}");
            assert_ne!(a, b);
        }
    }

    #[test]
    fn merge_arcs_handles_wrap() {
        // occupied cells 7 and 0 of 8: one arc crossing pi
        let mut present = vec![false; 8];
        present[7] = true;
        present[0] = true;
        let h = PI / 8.0;
        let arcs = merge_arcs(&present, h);
        assert_eq!(arcs.len(), 1);
        let (lo, hi) = arcs[0];
        assert!((hi - lo - 2.0 * h).abs() < 1e-12);
        assert!(hi > PI);
    }
}
