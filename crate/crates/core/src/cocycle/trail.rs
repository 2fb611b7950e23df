//! QR-renormalized factor chains of the fundamental solution.
//!
//! With `Q_0 = I` and `Phi_k` the propagator over step `k`, the chain keeps
//! `Phi_k Q_{k-1} = Q_k R_k` (positive-diagonal QR). The full solution is
//! `Phi(t_N) = Q_N R_N ... R_1` and the diagonal of the triangular product is
//! the product of the step diagonals, so the Iwasawa `a`-component is the
//! accumulated log-diagonal — no dense long product is ever formed.

use super::{renormalize_det, rk4_step, BilinearControlSystem, ControlSignal, GroupElement};
use crate::csvfmt;
use crate::error::{Error, Result};
use crate::lie::{AlgebraSpec, CartanVector};
use crate::linalg::qr_positive;
use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy)]
pub struct TrailOptions {
    pub dt: f64,
    /// Substeps between QR re-factorizations.
    pub renorm_interval: usize,
}

impl Default for TrailOptions {
    fn default() -> Self {
        Self { dt: super::DEFAULT_DT, renorm_interval: 10 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct FactorTrail {
    pub qs: Vec<DMatrix<f64>>,
    pub rs: Vec<DMatrix<f64>>,
    /// Cumulative log-diagonal at every grid point (entry 0 is all zeros).
    pub cum_log_diag: Vec<Vec<f64>>,
}

/// Time grid plus per-step orthogonal and positive-triangular factors for
/// every group factor.
#[derive(Debug, Clone)]
pub struct CocycleTrail {
    spec: AlgebraSpec,
    times: Vec<f64>,
    pub(crate) factors: Vec<FactorTrail>,
}

impl CocycleTrail {
    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn num_steps(&self) -> usize {
        self.times.len() - 1
    }

    /// The propagator over step `k` (1-based), reconstructed as
    /// `Q_k R_k Q_{k-1}^T`.
    pub fn step_propagator(&self, factor: usize, k: usize) -> DMatrix<f64> {
        let ft = &self.factors[factor];
        let qr = &ft.qs[k - 1] * &ft.rs[k - 1];
        if k == 1 {
            qr
        } else {
            qr * ft.qs[k - 2].transpose()
        }
    }

    fn identity_q(&self, factor: usize) -> DMatrix<f64> {
        let n = self.spec.factors()[factor];
        DMatrix::identity(n, n)
    }

    /// Q at grid point `k` for the chain started at the identity rotation.
    pub fn rotation_at(&self, factor: usize, k: usize) -> DMatrix<f64> {
        if k == 0 {
            self.identity_q(factor)
        } else {
            self.factors[factor].qs[k - 1].clone()
        }
    }

    /// Grid index whose time is within half a step of `t`.
    pub fn index_at(&self, t: f64) -> Result<usize> {
        let idx = self
            .times
            .iter()
            .position(|&x| (x - t).abs() <= 1e-9 * (1.0 + t.abs()))
            .ok_or_else(|| Error::Precondition(format!("t = {t} is not a grid time")))?;
        Ok(idx)
    }

    /// Largest deviation of any stored Q from orthogonality.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for ft in &self.factors {
            for q in &ft.qs {
                let n = q.nrows();
                let d = (q.transpose() * q - DMatrix::<f64>::identity(n, n)).abs().max();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Total accumulated log-determinant (should vanish for SL factors).
    pub fn log_det_defect(&self) -> f64 {
        self.factors
            .iter()
            .map(|ft| ft.cum_log_diag.last().unwrap().iter().sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}

pub fn evolve_trail(
    system: &BilinearControlSystem,
    signal: &ControlSignal,
    horizon: f64,
    dt: f64,
) -> Result<CocycleTrail> {
    evolve_trail_with(system, signal, horizon, TrailOptions { dt, ..Default::default() })
}

pub fn evolve_trail_with(
    system: &BilinearControlSystem,
    signal: &ControlSignal,
    horizon: f64,
    opts: TrailOptions,
) -> Result<CocycleTrail> {
    if !(horizon > 0.0) {
        return Err(Error::Precondition(format!("horizon {horizon} must be positive")));
    }
    if !(opts.dt > 0.0) || opts.renorm_interval == 0 {
        return Err(Error::Precondition("dt and renorm_interval must be positive".into()));
    }
    let spec = system.spec().clone();
    let nf = spec.num_factors();
    let mut factors: Vec<FactorTrail> = spec
        .factors()
        .iter()
        .map(|&n| FactorTrail { qs: Vec::new(), rs: Vec::new(), cum_log_diag: vec![vec![0.0; n]] })
        .collect();
    let mut times = vec![0.0];
    let mut q_prev: Vec<DMatrix<f64>> =
        spec.factors().iter().map(|&n| DMatrix::identity(n, n)).collect();

    let mut t = 0.0;
    for (duration, value) in signal.pieces_until(horizon) {
        if !system.value_in_range(&value, 1e-9) {
            return Err(Error::InvalidSignal(format!("value {value:?} outside control range")));
        }
        let gens: Vec<DMatrix<f64>> = (0..nf).map(|f| system.generator(f, &value)).collect();
        let steps = (duration / opts.dt).ceil().max(1.0) as usize;
        let h = duration / steps as f64;
        let mut blocks: Vec<DMatrix<f64>> =
            spec.factors().iter().map(|&n| DMatrix::identity(n, n)).collect();
        let mut pending = 0usize;
        for s in 0..steps {
            for f in 0..nf {
                let next = rk4_step(&gens[f], &blocks[f], h)
                    .and_then(renormalize_det)
                    .map_err(|e| match e {
                        Error::IntegrationFailure { reason, .. } => {
                            Error::IntegrationFailure { t: t + s as f64 * h, reason }
                        }
                        other => other,
                    })?;
                blocks[f] = next;
            }
            pending += 1;
            let at_boundary = pending == opts.renorm_interval || s == steps - 1;
            if at_boundary {
                for f in 0..nf {
                    let z = &blocks[f] * &q_prev[f];
                    let (q, r) = qr_positive(&z)?;
                    let n = spec.factors()[f];
                    let prev = factors[f].cum_log_diag.last().unwrap().clone();
                    let cum: Vec<f64> =
                        (0..n).map(|i| prev[i] + r[(i, i)].ln()).collect();
                    q_prev[f] = q.clone();
                    factors[f].qs.push(q);
                    factors[f].rs.push(r);
                    factors[f].cum_log_diag.push(cum);
                    blocks[f] = DMatrix::identity(n, n);
                }
                times.push(t + (s + 1) as f64 * h);
                pending = 0;
            }
        }
        t += duration;
    }

    let trail = CocycleTrail { spec, times, factors };
    if trail.log_det_defect() > 1e-6 {
        return Err(Error::IntegrationFailure {
            t: trail.duration(),
            reason: format!("volume drift {:.3e} exceeds 1e-6", trail.log_det_defect()),
        });
    }
    Ok(trail)
}

/// The Iwasawa `a`-component of `Phi(T) k0`: per-factor log of the positive
/// diagonal, projected traceless.
pub fn a_cocycle(trail: &CocycleTrail, basepoint: &GroupElement) -> Result<CartanVector> {
    a_cocycle_at(trail, basepoint, trail.duration())
}

/// Same, over the prefix `[0, t]` (a grid time).
pub fn a_cocycle_at(trail: &CocycleTrail, basepoint: &GroupElement, t: f64) -> Result<CartanVector> {
    let (entries, _) = replay(trail, basepoint, trail.index_at(t)?)?;
    CartanVector::projected(entries)
}

/// The orthogonal Iwasawa factor of `Phi(T) k0` — the rotation that
/// transports a flag basepoint along the trail.
pub fn transported_rotation(trail: &CocycleTrail, basepoint: &GroupElement) -> Result<GroupElement> {
    let end = trail.times().len() - 1;
    let (_, qs) = replay(trail, basepoint, end)?;
    GroupElement::new(trail.spec(), qs)
}

/// Runs the QR chain for an arbitrary orthogonal basepoint on top of the
/// stored identity-based factors. Returns per-factor accumulated log
/// diagonals and the final orthogonal factors.
fn replay(
    trail: &CocycleTrail,
    basepoint: &GroupElement,
    end: usize,
) -> Result<(Vec<Vec<f64>>, Vec<DMatrix<f64>>)> {
    if !basepoint.is_rotation(1e-8) {
        return Err(Error::Precondition("basepoint must be orthogonal with det 1".into()));
    }
    if basepoint.mats().len() != trail.spec().num_factors() {
        return Err(Error::ShapeMismatch("basepoint does not match trail".into()));
    }
    let mut entries = Vec::new();
    let mut rotations = Vec::new();
    for (f, ft) in trail.factors.iter().enumerate() {
        let n = trail.spec().factors()[f];
        let k0 = basepoint.factor(f);
        if k0.iter().enumerate().all(|(idx, &x)| {
            let (r, c) = (idx % n, idx / n);
            (x - if r == c { 1.0 } else { 0.0 }).abs() < 1e-15
        }) {
            // identity basepoint: the stored chain is already the answer
            entries.push(ft.cum_log_diag[end].clone());
            rotations.push(trail.rotation_at(f, end));
            continue;
        }
        let mut p = k0.clone();
        let mut acc = vec![0.0; n];
        for k in 0..end {
            let b = &ft.rs[k] * &p;
            let (q, r) = qr_positive(&b)?;
            for i in 0..n {
                acc[i] += r[(i, i)].ln();
            }
            p = q;
        }
        rotations.push(trail.rotation_at(f, end) * &p);
        entries.push(acc);
    }
    Ok((entries, rotations))
}

/// Writes `(t, a-components, polar-components)` rows at the given stride.
pub fn write_summary_csv<W: std::io::Write>(
    trail: &CocycleTrail,
    stride: usize,
    out: &mut W,
) -> Result<()> {
    let stride = stride.max(1);
    let spec = trail.spec();
    let mut header = vec!["t".to_string()];
    for (f, &n) in spec.factors().iter().enumerate() {
        for i in 0..n {
            header.push(format!("a_f{}_{}", f + 1, i + 1));
        }
    }
    for (f, &n) in spec.factors().iter().enumerate() {
        for i in 0..n {
            header.push(format!("polar_f{}_{}", f + 1, i + 1));
        }
    }
    let io_err = |e: std::io::Error| Error::Parse(format!("io error: {e}"));
    writeln!(out, "{}", csvfmt::line(header)).map_err(io_err)?;
    let mut k = stride;
    while k < trail.times().len() {
        let t = trail.times()[k];
        let mut fields = vec![csvfmt::sig12(t)];
        let a = CartanVector::projected(
            trail.factors.iter().map(|ft| ft.cum_log_diag[k].clone()).collect(),
        )?;
        for v in a.flat() {
            fields.push(csvfmt::sig12(v));
        }
        let polar = super::polar_exponent_at(trail, t)?;
        for v in polar.flat() {
            fields.push(csvfmt::sig12(v));
        }
        writeln!(out, "{}", csvfmt::line(fields)).map_err(io_err)?;
        k += stride;
    }
    Ok(())
}
