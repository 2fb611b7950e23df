//! Finite-horizon Oseledets data of a discrete matrix cocycle.
//!
//! Exponents are the per-step log singular values of the product
//! `psi(n) = A_n ... A_1`, merged into clusters where adjacent gaps fall
//! under the clustering threshold. The filtration subspace attached to a
//! cluster boundary is the span of the trailing right-singular directions,
//! recovered overflow-safely: the top wedge of the inverse-transpose chain is
//! decomposable and its kernel under `x -> x ^ w` is exactly the subspace.

use super::polar::{log_singular_values, ProductChain};
use super::{propagate, BilinearControlSystem, ControlSignal, GroupElement};
use crate::error::{Error, Result};
use crate::linalg::k_subsets;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct OseledetsOptions {
    /// Adjacent exponents closer than this merge into one cluster.
    pub clustering_gap: f64,
    /// Integrator step for the continuous-time wrapper.
    pub dt: f64,
}

impl Default for OseledetsOptions {
    fn default() -> Self {
        Self { clustering_gap: 0.05, dt: super::DEFAULT_DT }
    }
}

/// Exponents, multiplicities and the filtration of trailing subspaces.
#[derive(Debug, Clone)]
pub struct OseledetsData {
    /// Distinct exponents, strictly decreasing (cluster means, per step).
    pub exponents: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// `filtration[i]` is an orthonormal basis (columns) of `V_{i+1}`, the
    /// span of all directions with exponent at most `exponents[i]`.
    /// `filtration[0]` is the full space.
    pub filtration: Vec<DMatrix<f64>>,
    /// Largest principal angle between `A(0) V_i` and the same subspace of
    /// the time-shifted cocycle.
    pub equivariance_residual: f64,
    /// Max shift of the raw exponents between horizons `n` and `n/2`.
    pub horizon_delta: f64,
    /// `|sum d_i lambda_i - (1/n) log |det psi(n)||`.
    pub volume_defect: f64,
}

impl OseledetsData {
    pub fn dim(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Sum of exponents with multiplicity (volume growth rate).
    pub fn trace(&self) -> f64 {
        self.exponents.iter().zip(&self.multiplicities).map(|(l, &d)| l * d as f64).sum()
    }
}

/// Oseledets data of the time-one maps of a control system along a signal.
pub fn oseledets(
    system: &BilinearControlSystem,
    signal: &ControlSignal,
    n_max: usize,
    opts: OseledetsOptions,
) -> Result<OseledetsData> {
    if n_max < 10 {
        return Err(Error::Precondition(format!("n_max = {n_max} must be at least 10")));
    }
    let spec = system.spec();
    let total = spec.total_size();
    let mut steps = Vec::with_capacity(n_max);
    for k in 0..n_max {
        // Time-one map over [k, k+1]; the signal may switch inside the
        // interval, so integrate piece by piece.
        let shifted = signal.shifted(k as f64);
        let mut cur = GroupElement::identity(spec);
        for (dur, val) in shifted.pieces_until(1.0) {
            cur = propagate(system, &val, &cur, dur, opts.dt)?;
        }
        // assemble the block-diagonal step over all factors
        let mut block = DMatrix::zeros(total, total);
        let mut off = 0;
        for (f, &n) in spec.factors().iter().enumerate() {
            block.view_mut((off, off), (n, n)).copy_from(cur.factor(f));
            off += n;
        }
        steps.push(block);
    }
    oseledets_discrete(&steps, opts.clustering_gap)
}

/// Oseledets data of an explicit step sequence `A_1, ..., A_n`.
pub fn oseledets_discrete(steps: &[DMatrix<f64>], clustering_gap: f64) -> Result<OseledetsData> {
    let n = steps.len();
    if n < 10 {
        return Err(Error::Precondition(format!("need at least 10 steps, got {n}")));
    }
    let d = steps[0].nrows();
    if steps.iter().any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::ShapeMismatch("inconsistent step dimensions".into()));
    }
    if !(clustering_gap > 0.0) {
        return Err(Error::Precondition("clustering gap must be positive".into()));
    }

    let chain = ProductChain { mats: steps.to_vec() };
    let raw: Vec<f64> = log_singular_values(&chain).iter().map(|l| l / n as f64).collect();
    let half = ProductChain { mats: steps[..n / 2].to_vec() };
    let raw_half: Vec<f64> =
        log_singular_values(&half).iter().map(|l| l / (n / 2) as f64).collect();
    let horizon_delta = raw
        .iter()
        .zip(&raw_half)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    // Cluster by adjacent gaps.
    let mut clusters: Vec<Vec<f64>> = vec![vec![raw[0]]];
    for &l in &raw[1..] {
        let last = clusters.last_mut().unwrap();
        if last.last().unwrap() - l < clustering_gap {
            last.push(l);
        } else {
            clusters.push(vec![l]);
        }
    }
    for c in &clusters {
        let spread = c.first().unwrap() - c.last().unwrap();
        if spread >= clustering_gap {
            return Err(Error::UnresolvedSpectrum(format!(
                "cluster spread {spread:.4} is not below the clustering gap {clustering_gap}; \
                 increase the horizon or the gap"
            )));
        }
    }
    let exponents: Vec<f64> =
        clusters.iter().map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let multiplicities: Vec<usize> = clusters.iter().map(Vec::len).collect();

    let log_det = chain.log_abs_det() / n as f64;
    let volume_defect = (exponents
        .iter()
        .zip(&multiplicities)
        .map(|(l, &m)| l * m as f64)
        .sum::<f64>()
        - log_det)
        .abs();

    let filtration = filtration_bases(steps, &multiplicities)?;
    let equivariance_residual = if n >= 11 {
        let shifted = filtration_bases(&steps[1..], &multiplicities)?;
        let mut worst = 0.0f64;
        for (v, vs) in filtration.iter().zip(&shifted).skip(1) {
            let moved = &steps[0] * v;
            worst = worst.max(principal_angle(&moved, vs));
        }
        worst
    } else {
        0.0
    };

    Ok(OseledetsData {
        exponents,
        multiplicities,
        filtration,
        equivariance_residual,
        horizon_delta,
        volume_defect,
    })
}

/// `V_1 = R^d` plus, for every cluster boundary, the span of the trailing
/// right-singular directions.
fn filtration_bases(steps: &[DMatrix<f64>], mults: &[usize]) -> Result<Vec<DMatrix<f64>>> {
    let d = steps[0].nrows();
    let inv_t = ProductChain { mats: steps.to_vec() }.inverse_transpose()?;
    let mut out = vec![DMatrix::identity(d, d)];
    let mut tail: usize = mults.iter().sum();
    for &m in &mults[..mults.len() - 1] {
        tail -= m;
        // Tail subspace of psi = top-(tail) right subspace of psi^{-T}.
        out.push(top_right_subspace(&inv_t, tail)?);
    }
    Ok(out)
}

/// Top-`k` right-singular subspace of the chain via the wedge trick.
fn top_right_subspace(chain: &ProductChain, k: usize) -> Result<DMatrix<f64>> {
    let d = chain.mats[0].nrows();
    if k == 0 || k > d {
        return Err(Error::Precondition(format!("subspace dimension {k} out of range")));
    }
    if k == d {
        return Ok(DMatrix::identity(d, d));
    }
    let wedge_chain = if k == 1 {
        ProductChain { mats: chain.mats.clone() }
    } else {
        let subsets = k_subsets(d, k);
        ProductChain { mats: chain.mats.iter().map(|m| crate::linalg::exterior_power(m, &subsets)).collect() }
    };
    let w = wedge_chain.top_right_singular_vector();
    if k == 1 {
        return Ok(DMatrix::from_column_slice(d, 1, w.as_slice()));
    }
    decode_wedge_subspace(&w, d, k)
}

/// Kernel of `x -> x ^ w` for a decomposable unit wedge `w`.
fn decode_wedge_subspace(w: &DVector<f64>, d: usize, k: usize) -> Result<DMatrix<f64>> {
    let subsets = k_subsets(d, k);
    let bigger = k_subsets(d, k + 1);
    let index_of = |t: &Vec<usize>| bigger.binary_search(t).expect("subset enumeration is sorted");
    let mut l = DMatrix::<f64>::zeros(bigger.len(), d);
    for (si, s) in subsets.iter().enumerate() {
        if w[si] == 0.0 {
            continue;
        }
        for m in 0..d {
            if s.contains(&m) {
                continue;
            }
            let mut t: Vec<usize> = s.clone();
            let pos = t.iter().position(|&x| x > m).unwrap_or(t.len());
            t.insert(pos, m);
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            l[(index_of(&t), m)] += sign * w[si];
        }
    }
    let svd = l.svd(false, true);
    let vt = svd.v_t.as_ref().ok_or_else(|| Error::RankLoss("wedge decode SVD failed".into()))?;
    // Null directions come last in the sorted SVD.
    let mut basis = DMatrix::zeros(d, k);
    for c in 0..k {
        let row = vt.row(d - 1 - c);
        for r in 0..d {
            basis[(r, c)] = row[r];
        }
    }
    // Guard: the smallest kept singular value should be tiny relative to the
    // largest dropped one for a genuinely decomposable wedge.
    let sv = &svd.singular_values;
    if sv[d - k - 1] > 0.0 && sv[d - k] / sv[d - k - 1] > 1e-4 {
        return Err(Error::RankLoss(format!(
            "wedge is far from decomposable (gap ratio {:.2e})",
            sv[d - k] / sv[d - k - 1]
        )));
    }
    Ok(basis)
}

/// Largest principal angle between the column spans of two full-rank bases.
fn principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = orthonormalize(a);
    let qb = orthonormalize(b);
    let m = qa.transpose() * qb;
    let svd = m.svd(false, false);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    smin.clamp(-1.0, 1.0).acos()
}

fn orthonormalize(a: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = a.clone().qr();
    let q = qr.q();
    q.columns(0, a.ncols()).into_owned()
}
