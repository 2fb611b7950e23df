//! Polar (singular-value) exponents of long matrix products, asymptotic rays
//! and projective growth rates.
//!
//! Direct SVD of `Phi(T)` loses the small singular values once the spread
//! exceeds the f64 range, so the log singular values are recovered from
//! variational norms instead: `log(s_1 ... s_k) = log ||wedge^k Phi||`, and
//! each wedge-power norm is evaluated by power iteration through the stored
//! step factors with per-step renormalization. This route is independent of
//! the triangular log-diagonal route used by the `a`-cocycle.

use super::{BilinearControlSystem, CocycleTrail, ControlSignal, GroupElement};
use crate::error::{Error, Result};
use crate::lie::CartanVector;
use crate::linalg::{exterior_power, k_subsets, sym_eigen_desc};
use nalgebra::{DMatrix, DVector};

/// A product `M = mats[N-1] ... mats[0]` applied factor-by-factor with
/// renormalization, tracking log growth.
pub(crate) struct ProductChain {
    pub mats: Vec<DMatrix<f64>>,
}

impl ProductChain {
    fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    /// `(unit vector along Mv, log |Mv|)` for unit `v`.
    fn apply(&self, v: &DVector<f64>) -> (DVector<f64>, f64) {
        let mut v = v.clone();
        let mut lg = 0.0;
        for m in &self.mats {
            v = m * v;
            let norm = v.norm();
            lg += norm.ln();
            v /= norm;
        }
        (v, lg)
    }

    /// Transposed product `M^T w`, factors visited in reverse.
    fn apply_transpose(&self, v: &DVector<f64>) -> (DVector<f64>, f64) {
        let mut v = v.clone();
        let mut lg = 0.0;
        for m in self.mats.iter().rev() {
            v = m.tr_mul(&v);
            let norm = v.norm();
            lg += norm.ln();
            v /= norm;
        }
        (v, lg)
    }

    /// `log s_max(M)` by power iteration on `M^T M`. Estimates increase
    /// monotonically toward the true value; iteration stops when they settle.
    pub fn log_sigma_max(&self) -> f64 {
        let d = self.dim();
        let seed = 0x9e37_79b9u64 ^ ((self.mats.len() as u64) << 8) ^ d as u64;
        let mut v = pseudo_random_unit(d, seed);
        let mut prev = f64::NEG_INFINITY;
        for _ in 0..1000 {
            let (w, lg_fwd) = self.apply(&v);
            let (back, _) = self.apply_transpose(&w);
            v = back;
            if (lg_fwd - prev).abs() <= 1e-12 * (1.0 + lg_fwd.abs()) {
                return lg_fwd;
            }
            prev = lg_fwd;
        }
        prev
    }

    pub fn log_abs_det(&self) -> f64 {
        self.mats.iter().map(|m| m.determinant().abs().ln()).sum()
    }

    /// Inverse-transpose chain (same order): the right singular directions of
    /// `M` reappear in reverse singular-value order.
    pub fn inverse_transpose(&self) -> Result<ProductChain> {
        let mats = self
            .mats
            .iter()
            .map(|m| {
                m.clone()
                    .try_inverse()
                    .map(|inv| inv.transpose())
                    .ok_or_else(|| Error::RankLoss("singular step factor".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProductChain { mats })
    }

    /// The unit top right-singular vector of `M` (power iteration on `M^T M`).
    pub fn top_right_singular_vector(&self) -> DVector<f64> {
        let d = self.dim();
        let mut v = pseudo_random_unit(d, 0xc2b2_ae35 ^ d as u64);
        let mut prev = f64::NEG_INFINITY;
        for _ in 0..1000 {
            let (w, lg) = self.apply(&v);
            let (back, _) = self.apply_transpose(&w);
            v = back;
            if (lg - prev).abs() <= 1e-13 * (1.0 + lg.abs()) {
                break;
            }
            prev = lg;
        }
        v
    }
}

fn pseudo_random_unit(dim: usize, seed: u64) -> DVector<f64> {
    let mut state = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1);
    let mut next = move || {
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        (state.wrapping_mul(0x2545_f491_4f6c_dd1d) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut v = DVector::from_fn(dim, |_, _| next());
    if v.norm() < 1e-12 {
        v = DVector::from_element(dim, 1.0);
    }
    let n = v.norm();
    v / n
}

/// All `log` singular values of the product chain, descending, computed from
/// wedge-power norms plus the exact log-determinant.
pub(crate) fn log_singular_values(chain: &ProductChain) -> Vec<f64> {
    let d = chain.dim();
    if d == 1 {
        return vec![chain.log_abs_det()];
    }
    let mut cumulative = Vec::with_capacity(d);
    for k in 1..d {
        if k == 1 {
            cumulative.push(chain.log_sigma_max());
        } else {
            let subsets = k_subsets(d, k);
            let wedge =
                ProductChain { mats: chain.mats.iter().map(|m| exterior_power(m, &subsets)).collect() };
            cumulative.push(wedge.log_sigma_max());
        }
    }
    cumulative.push(chain.log_abs_det());
    let mut logs = Vec::with_capacity(d);
    let mut prev = 0.0;
    for c in &cumulative {
        logs.push(c - prev);
        prev = *c;
    }
    // Wedge norms are exact cumulative maxima, so this is already sorted up
    // to power-iteration residuals.
    logs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    logs
}

pub(crate) fn factor_chain(trail: &CocycleTrail, factor: usize, end: usize) -> ProductChain {
    let mats = (1..=end).map(|k| trail.step_propagator(factor, k)).collect();
    ProductChain { mats }
}

/// Per-unit-time log singular values of `Phi(T)`, chamber-ordered per factor
/// and projected traceless.
pub fn polar_exponent(trail: &CocycleTrail) -> Result<CartanVector> {
    polar_exponent_at(trail, trail.duration())
}

/// Same over the prefix `[0, t]` (a grid time).
pub fn polar_exponent_at(trail: &CocycleTrail, t: f64) -> Result<CartanVector> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("t = {t} must be positive")));
    }
    let end = trail.index_at(t)?;
    let entries = (0..trail.spec().num_factors())
        .map(|f| {
            let chain = factor_chain(trail, f, end);
            log_singular_values(&chain).into_iter().map(|x| x / t).collect::<Vec<f64>>()
        })
        .collect();
    CartanVector::projected(entries)
}

/// Direction of a regular sequence read from its polar parts: at the largest
/// sample `(n, g_n)` this is the symmetric matrix `(1/n) log (g_n^T g_n)^{1/2}`
/// per factor; the diagnostic is the max-norm distance to the estimate at the
/// previous sample.
#[derive(Debug, Clone)]
pub struct AsymptoticRay {
    pub direction: Vec<DMatrix<f64>>,
    pub cauchy_delta: f64,
}

pub fn asymptotic_ray(samples: &[(f64, GroupElement)]) -> Result<AsymptoticRay> {
    if samples.len() < 2 {
        return Err(Error::Precondition("need at least two samples".into()));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) || !(samples[0].0 > 0.0) {
        return Err(Error::Precondition("sample times must be positive and increasing".into()));
    }
    let estimate = |&(n, ref g): &(f64, GroupElement)| -> Result<Vec<DMatrix<f64>>> {
        g.mats()
            .iter()
            .map(|m| {
                // (g^T g)^{1/2} = V Sigma V^T from the SVD of g.
                let svd = m.clone().svd(true, true);
                if svd.singular_values.iter().any(|&s| s <= 0.0) {
                    return Err(Error::RankLoss("non-invertible sample".into()));
                }
                let vt = svd.v_t.as_ref().unwrap();
                let logs = DMatrix::from_diagonal(&svd.singular_values.map(|s| s.ln() / n));
                Ok(vt.transpose() * logs * vt)
            })
            .collect()
    };
    let last = estimate(&samples[samples.len() - 1])?;
    let prev = estimate(&samples[samples.len() - 2])?;
    let cauchy_delta = last
        .iter()
        .zip(&prev)
        .map(|(a, b)| (a - b).abs().max())
        .fold(0.0, f64::max);
    Ok(AsymptoticRay { direction: last, cauchy_delta })
}

/// Evolves a single factor direction under the flow, renormalizing every
/// step. Returns the endpoint unit vector and the accumulated log growth.
pub fn evolve_vector(
    system: &BilinearControlSystem,
    signal: &ControlSignal,
    factor: usize,
    v0: DVector<f64>,
    horizon: f64,
    dt: f64,
) -> Result<(DVector<f64>, f64)> {
    if factor >= system.spec().num_factors() {
        return Err(Error::ShapeMismatch(format!("no factor {factor}")));
    }
    if v0.len() != system.spec().factors()[factor] {
        return Err(Error::ShapeMismatch("vector length does not match factor".into()));
    }
    let norm = v0.norm();
    if !(norm > 0.0) {
        return Err(Error::Precondition("zero start vector".into()));
    }
    let mut v = v0 / norm;
    let mut lg = 0.0;
    for (duration, value) in signal.pieces_until(horizon) {
        if !system.value_in_range(&value, 1e-9) {
            return Err(Error::InvalidSignal(format!("value {value:?} outside control range")));
        }
        let a = system.generator(factor, &value);
        let steps = (duration / dt).ceil().max(1.0) as usize;
        let h = duration / steps as f64;
        for _ in 0..steps {
            let k1 = &a * &v;
            let k2 = &a * (&v + &k1 * (h / 2.0));
            let k3 = &a * (&v + &k2 * (h / 2.0));
            let k4 = &a * (&v + &k3 * h);
            v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            let n = v.norm();
            if !n.is_finite() || n == 0.0 {
                return Err(Error::IntegrationFailure {
                    t: f64::NAN,
                    reason: "direction collapsed".into(),
                });
            }
            lg += n.ln();
            v /= n;
        }
    }
    Ok((v, lg))
}

/// `(1/T) log |Phi(T) v|` for a unit start direction.
pub fn log_vector_growth(
    system: &BilinearControlSystem,
    signal: &ControlSignal,
    factor: usize,
    v0: DVector<f64>,
    horizon: f64,
    dt: f64,
) -> Result<f64> {
    let (_, lg) = evolve_vector(system, signal, factor, v0, horizon, dt)?;
    Ok(lg / horizon)
}

/// Derivative growth rate of the induced projective flow at the point with
/// the given projective angle: `-(2/T) log |Phi(T) (cos a, sin a)|`.
///
/// Requires a single `sl(2)` factor.
pub fn projective_derivative_exponent(
    system: &BilinearControlSystem,
    signal: &ControlSignal,
    angle: f64,
    horizon: f64,
    dt: f64,
) -> Result<f64> {
    if system.spec().factors() != [2] {
        return Err(Error::Precondition("projective exponent needs a single sl(2) factor".into()));
    }
    let v0 = DVector::from_vec(vec![angle.cos(), angle.sin()]);
    let rate = log_vector_growth(system, signal, 0, v0, horizon, dt)?;
    Ok(-2.0 * rate)
}

/// Spectral decomposition helper used by tests and reports: symmetric log of
/// a positive matrix.
pub fn sym_log(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (vals, vecs) = sym_eigen_desc(m);
    if vals.iter().any(|&x| x <= 0.0) {
        return Err(Error::RankLoss("matrix is not positive definite".into()));
    }
    let d = DMatrix::from_diagonal(&DVector::from_vec(vals.iter().map(|x| x.ln()).collect()));
    Ok(&vecs * d * vecs.transpose())
}

#[cfg(test)]
mod tests {
    use super::super::tests::{diag_system, rotation_system, sl2};
    use super::super::{evolve_trail, BilinearControlSystem};
    use super::*;
    use crate::lie::{AlgebraElement, AlgebraSpec};
    use approx::assert_relative_eq;

    #[test]
    fn diagonal_polar_exact() {
        let sys = diag_system(&[1.0, -1.0]);
        for horizon in [2.0, 10.0, 50.0] {
            let trail = evolve_trail(&sys, &ControlSignal::zero(0), horizon, 1e-2).unwrap();
            let p = polar_exponent(&trail).unwrap();
            assert_relative_eq!(p.factor(0)[0], 1.0, epsilon = 1e-6);
            assert_relative_eq!(p.factor(0)[1], -1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn rotation_polar_zero() {
        let sys = rotation_system();
        let trail = evolve_trail(&sys, &ControlSignal::zero(0), 20.0, 1e-2).unwrap();
        let p = polar_exponent(&trail).unwrap();
        assert!(p.flat().iter().all(|x| x.abs() < 1e-6));
    }

    #[test]
    fn triangular_polar_converges_with_halving_error() {
        // A = [[1, 1], [0, -1]]: the top growth rate tends to the spectral
        // abscissa 1 with an O(1/T) defect; eigenvalue oracle = (1, -1).
        let spec = sl2();
        let a = AlgebraElement::new(&spec, vec![DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, -1.0])])
            .unwrap();
        let sys = BilinearControlSystem::autonomous(spec, a).unwrap();
        let trail = evolve_trail(&sys, &ControlSignal::zero(0), 50.0, 1e-2).unwrap();
        let p50 = polar_exponent(&trail).unwrap();
        let p25 = polar_exponent_at(&trail, 25.0).unwrap();
        assert!((p50.factor(0)[0] - 1.0).abs() < 2e-2);
        assert!((p50.factor(0)[1] + 1.0).abs() < 2e-2);
        let e25 = (p25.factor(0)[0] - 1.0).abs();
        let e50 = (p50.factor(0)[0] - 1.0).abs();
        let ratio = e50 / e25;
        assert!((0.35..=0.65).contains(&ratio), "error ratio {ratio}");
    }

    #[test]
    fn polar_in_closed_chamber_and_traceless() {
        let spec = sl2();
        let a = AlgebraElement::new(&spec, vec![DMatrix::from_row_slice(2, 2, &[0.4, 1.0, 0.3, -0.4])])
            .unwrap();
        let y = AlgebraElement::new(&spec, vec![DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])])
            .unwrap();
        let sys = BilinearControlSystem::new(spec, a, vec![y], vec![(-0.5, 0.5)]).unwrap();
        let sig = ControlSignal::piecewise(vec![(0.7, vec![0.5]), (1.1, vec![-0.4])], true).unwrap();
        let trail = evolve_trail(&sys, &sig, 30.0, 1e-2).unwrap();
        let p = polar_exponent(&trail).unwrap();
        assert!(p.in_closed_chamber(1e-9));
        assert!(p.flat().iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn deeply_contracting_product_stays_accurate() {
        // Spread e^{+-100} would be hopeless for a dense SVD; the wedge-norm
        // route keeps both exponents.
        let sys = diag_system(&[2.0, -2.0]);
        let trail = evolve_trail(&sys, &ControlSignal::zero(0), 50.0, 1e-2).unwrap();
        let p = polar_exponent(&trail).unwrap();
        assert_relative_eq!(p.factor(0)[0], 2.0, epsilon = 1e-6);
        assert_relative_eq!(p.factor(0)[1], -2.0, epsilon = 1e-6);
    }

    #[test]
    fn asymptotic_ray_examples() {
        let spec = sl2();
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        // g_n = exp(nH): D = H exactly.
        let samples: Vec<(f64, GroupElement)> = (1..=6)
            .map(|n| {
                let e = DMatrix::from_row_slice(
                    2,
                    2,
                    &[(n as f64).exp(), 0.0, 0.0, (-(n as f64)).exp()],
                );
                (n as f64, GroupElement::new(&spec, vec![e]).unwrap())
            })
            .collect();
        let ray = asymptotic_ray(&samples).unwrap();
        assert!((ray.direction[0].clone() - &h).abs().max() < 1e-12);

        // g_n = k_n exp(nH) with rotations k_n: the polar part kills k_n.
        let rot = |t: f64| DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        let samples: Vec<(f64, GroupElement)> = (1..=8)
            .map(|n| {
                let e = DMatrix::from_row_slice(
                    2,
                    2,
                    &[(n as f64).exp(), 0.0, 0.0, (-(n as f64)).exp()],
                );
                let g = rot(1.7 * n as f64) * e;
                (n as f64, GroupElement::new(&spec, vec![g]).unwrap())
            })
            .collect();
        let ray = asymptotic_ray(&samples).unwrap();
        assert!((ray.direction[0].clone() - &h).abs().max() < 1e-8);
    }

    #[test]
    fn asymptotic_ray_conjugated_vs_brute_force() {
        // g_n = (g exp(H) g^{-1})^n: compare against (g_n^T g_n)^{1/2n} taken
        // literally at n = 200 (mild scale keeps the Gram eigensolve accurate).
        let spec = sl2();
        let h = DMatrix::from_row_slice(2, 2, &[0.02, 0.0, 0.0, -0.02]);
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, -0.2, 1.1]);
        let ginv = g.clone().try_inverse().unwrap();
        let (h00, h11): (f64, f64) = (h[(0, 0)], h[(1, 1)]);
        let step = &g * DMatrix::from_row_slice(2, 2, &[h00.exp(), 0.0, 0.0, h11.exp()]) * &ginv;
        let mut cur = DMatrix::<f64>::identity(2, 2);
        let mut samples = Vec::new();
        for n in 1..=200u32 {
            cur = &step * cur;
            if n % 50 == 0 {
                samples.push((n as f64, GroupElement::new(&spec, vec![cur.clone()]).unwrap()));
            }
        }
        let ray = asymptotic_ray(&samples).unwrap();
        // Brute-force oracle at n = 200.
        let n = 200.0;
        let gram = samples.last().unwrap().1.factor(0).transpose() * samples.last().unwrap().1.factor(0);
        let oracle = sym_log(&gram).unwrap() / (2.0 * n);
        assert!((ray.direction[0].clone() - oracle).abs().max() < 1e-9);
        assert!(ray.cauchy_delta < 1e-3);
    }

    #[test]
    fn projective_exponent_examples() {
        let sys = diag_system(&[1.0, -1.0]);
        let sig = ControlSignal::zero(0);
        let at_e1 = projective_derivative_exponent(&sys, &sig, 0.0, 10.0, 1e-2).unwrap();
        assert_relative_eq!(at_e1, -2.0, epsilon = 1e-9);
        let at_e2 =
            projective_derivative_exponent(&sys, &sig, std::f64::consts::FRAC_PI_2, 10.0, 1e-2)
                .unwrap();
        assert_relative_eq!(at_e2, 2.0, epsilon = 1e-9);

        let rot = rotation_system();
        let any = projective_derivative_exponent(&rot, &sig, 0.83, 10.0, 1e-2).unwrap();
        assert!(any.abs() < 1e-9);
    }

    #[test]
    fn projective_exponent_matches_finite_difference_oracle() {
        // Oracle: directly difference the projective angle map.
        let spec = sl2();
        let a = AlgebraElement::new(&spec, vec![DMatrix::from_row_slice(2, 2, &[0.8, 0.3, 0.3, -0.8])])
            .unwrap();
        let sys = BilinearControlSystem::autonomous(spec, a).unwrap();
        let sig = ControlSignal::zero(0);
        let horizon = 6.0;
        let angle_map = |theta: f64| -> f64 {
            let v0 = DVector::from_vec(vec![theta.cos(), theta.sin()]);
            let (v, _) = evolve_vector(&sys, &sig, 0, v0, horizon, 1e-3).unwrap();
            v[1].atan2(v[0]).rem_euclid(std::f64::consts::PI)
        };
        let theta = 0.3;
        let delta = 1e-6;
        let raw = angle_map(theta + delta) - angle_map(theta);
        // wrap into (-pi/2, pi/2] before differencing the projective angles
        let d1 = raw - std::f64::consts::PI * (raw / std::f64::consts::PI).round();
        let fd_rate = ((d1 / delta).abs().ln()) / horizon;
        let rate = projective_derivative_exponent(&sys, &sig, theta, horizon, 1e-3).unwrap();
        assert!((rate - fd_rate).abs() < 1e-3, "rate {rate} vs oracle {fd_rate}");
    }

    #[test]
    fn multi_factor_polar() {
        let spec = AlgebraSpec::new(vec![2, 2]).unwrap();
        let drift = AlgebraElement::new(
            &spec,
            vec![
                DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
                DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
            ],
        )
        .unwrap();
        let sys = BilinearControlSystem::autonomous(spec, drift).unwrap();
        let trail = evolve_trail(&sys, &ControlSignal::zero(0), 15.0, 1e-2).unwrap();
        let p = polar_exponent(&trail).unwrap();
        assert_relative_eq!(p.factor(0)[0], 1.0, epsilon = 1e-6);
        assert!(p.factor(1)[0].abs() < 1e-6);
    }
}
