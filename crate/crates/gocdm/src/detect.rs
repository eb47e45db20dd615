//! Symbol detection.
//!
//! Three detectors share the GF-domain input-output model `y = H̃x + ω`:
//!
//! * [`mp_detect`] — damped message passing on the sparse factor graph. Each
//!   observation node computes the mean and variance of its interference
//!   from all but one edge; each variable node turns the `L−1` other
//!   observations into a leave-one-out symbol pmf. A convergence indicator
//!   `η` (fraction of symbols whose combined posterior clears a confidence
//!   threshold) drives early stopping and best-estimate selection.
//! * [`mmse_equalize`] — linear MMSE on a dense effective channel.
//! * [`ml_bruteforce`] — exhaustive maximum-likelihood search for tiny
//!   blocks; the oracle the message passer is validated against.

use ndarray::Array2;
use num_complex::Complex;

use crate::gf_channel::SparseGfChannel;
use crate::linalg::solve_hermitian;
use crate::scalar::GocdmFloat;
use crate::waveform::Constellation;
use crate::{Error, Result};

/// Knobs of the message-passing detector.
#[derive(Debug, Clone, Copy)]
pub struct MpConfig<T> {
    /// Damping factor Δ ∈ (0, 1]: weight of the fresh message in the convex
    /// update (1 = undamped).
    pub damping: T,
    /// Iteration cap `I_max`.
    pub max_iterations: usize,
    /// Confidence threshold γ ∈ (0, 1) a posterior max must clear to count
    /// as converged.
    pub confidence: T,
    /// Back-off tolerance ε ≥ 0: stop once η drops below `η_max − ε`.
    pub backoff: T,
    /// Observation-noise variance σ_o² > 0 (thermal noise plus any channel
    /// approximation residual).
    pub noise_var: T,
    /// Basis truncation depth used upstream when building the sparse
    /// channel; carried here so a run is described by one struct.
    pub b_trunc: usize,
}

impl<T: GocdmFloat> MpConfig<T> {
    /// Defaults from the reference experiments: Δ = 0.6, I_max = 20,
    /// γ = 0.99, ε = 0.05.
    pub fn new(noise_var: T, b_trunc: usize) -> Self {
        Self {
            damping: T::from_f64c(0.6),
            max_iterations: 20,
            confidence: T::from_f64c(0.99),
            backoff: T::from_f64c(0.05),
            noise_var,
            b_trunc,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.damping > T::zero() && self.damping <= T::one()) {
            return Err(Error::InvalidParameter("damping must be in (0, 1]".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        if !(self.confidence > T::zero() && self.confidence < T::one()) {
            return Err(Error::InvalidParameter("confidence must be in (0, 1)".into()));
        }
        if self.backoff < T::zero() {
            return Err(Error::InvalidParameter("backoff must be >= 0".into()));
        }
        if !(self.noise_var > T::zero()) {
            return Err(Error::InvalidParameter(
                "observation-noise variance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Per-edge message tables of the factor graph.
///
/// `pmf[(p'·L + ℓ)·M + m]` is the probability that variable `p'` equals
/// constellation point `m`, as sent on its edge `ℓ`; `mu`/`var` hold the
/// interference moments computed at observation nodes, indexed `(p·L + ℓ)`
/// with `ℓ` the excluded edge.
pub struct MpState<T> {
    mn: usize,
    l: usize,
    order: usize,
    tx_idx: Vec<usize>,
    rx_idx: Vec<usize>,
    pmf: Vec<T>,
    mu: Vec<Complex<T>>,
    var: Vec<T>,
}

impl<T: GocdmFloat> MpState<T> {
    /// Uniform initialization (every message `1/M`).
    pub fn new(sg: &SparseGfChannel<T>, c: &Constellation<T>) -> Result<Self> {
        let mn = sg.block_len();
        let l = sg.num_groups();
        if l == 0 {
            return Err(Error::InvalidParameter("channel has no shift groups".into()));
        }
        let order = c.order();
        let mut tx_idx = Vec::with_capacity(mn * l);
        let mut rx_idx = Vec::with_capacity(mn * l);
        for p in 0..mn {
            tx_idx.extend(sg.tx_indices(p)?);
            rx_idx.extend(sg.rx_indices(p)?);
        }
        Ok(Self {
            mn,
            l,
            order,
            tx_idx,
            rx_idx,
            pmf: vec![T::one() / T::from_usizec(order); mn * l * order],
            mu: vec![Complex::new(T::zero(), T::zero()); mn * l],
            var: vec![T::zero(); mn * l],
        })
    }

    pub fn num_edges(&self) -> usize {
        self.l
    }

    /// Message pmf of variable `p_prime` on edge `edge`.
    pub fn pmf(&self, p_prime: usize, edge: usize) -> &[T] {
        let base = (p_prime * self.l + edge) * self.order;
        &self.pmf[base..base + self.order]
    }

    /// Interference mean/variance at observation `p` excluding edge `edge`.
    pub fn moments(&self, p: usize, edge: usize) -> (Complex<T>, T) {
        let idx = p * self.l + edge;
        (self.mu[idx], self.var[idx])
    }
}

/// Observation-node update: for every observation `p` and excluded edge `ℓ`,
/// the mean and variance of the interference from the other `L−1` edges
/// under the current messages, plus the observation-noise floor.
pub fn interference_moments<T: GocdmFloat>(
    state: &mut MpState<T>,
    sg: &SparseGfChannel<T>,
    c: &Constellation<T>,
    noise_var: T,
) {
    let (mn, l, order) = (state.mn, state.l, state.order);
    let points = c.points();
    let mut edge_mean = vec![Complex::new(T::zero(), T::zero()); l];
    let mut edge_var = vec![T::zero(); l];
    for p in 0..mn {
        let mut total_mean = Complex::new(T::zero(), T::zero());
        let mut total_var = T::zero();
        for i in 0..l {
            let source = state.tx_idx[p * l + i];
            let base = (source * l + i) * order;
            let mut sym_mean = Complex::new(T::zero(), T::zero());
            let mut sym_energy = T::zero();
            for (m, alpha) in points.iter().enumerate() {
                let w = state.pmf[base + m];
                sym_mean = sym_mean + alpha.scale(w);
                sym_energy = sym_energy + w * alpha.norm_sqr();
            }
            let h = sg.coeff(p, i);
            let mean = h * sym_mean;
            let var = h.norm_sqr() * sym_energy - mean.norm_sqr();
            edge_mean[i] = mean;
            edge_var[i] = var;
            total_mean = total_mean + mean;
            total_var = total_var + var;
        }
        for i in 0..l {
            state.mu[p * l + i] = total_mean - edge_mean[i];
            state.var[p * l + i] = total_var - edge_var[i] + noise_var;
        }
    }
}

/// Result of a message-passing detection.
#[derive(Debug, Clone)]
pub struct MpDetection<T> {
    /// Hard decisions as constellation labels.
    pub labels: Vec<usize>,
    /// Hard decisions as symbols.
    pub symbols: Vec<Complex<T>>,
    /// Iterations actually run.
    pub iterations: usize,
    /// Best convergence indicator seen; the returned estimate is from the
    /// iteration that achieved it.
    pub eta_max: T,
}

/// One variable-node sweep: refreshes every edge pmf (leave-one-out
/// likelihood product, damped) and returns the per-symbol posterior argmax
/// plus the convergence indicator η. Likelihood products run in the log
/// domain with max subtraction; a degenerate all-(−∞) row renormalizes to
/// uniform.
fn update_messages<T: GocdmFloat>(
    state: &mut MpState<T>,
    y: &[Complex<T>],
    sg: &SparseGfChannel<T>,
    c: &Constellation<T>,
    cfg: &MpConfig<T>,
    labels: &mut [usize],
) -> T {
    let (mn, l, order) = (state.mn, state.l, state.order);
    let points = c.points();
    let mut loglik = vec![T::zero(); l * order]; // g_i(α_m) for one variable
    let mut combined = vec![T::zero(); order];
    let mut loo = vec![T::zero(); order];
    let mut confident = 0usize;

    for p_prime in 0..mn {
        for i in 0..l {
            let q = state.rx_idx[p_prime * l + i];
            let h = sg.coeff(q, i);
            let idx = q * l + i;
            let inv_var = T::one() / state.var[idx];
            let obs = y[q] - state.mu[idx];
            for (m, alpha) in points.iter().enumerate() {
                let resid = obs - h * *alpha;
                loglik[i * order + m] = -resid.norm_sqr() * inv_var;
            }
        }
        // column sums over all L edges
        for m in 0..order {
            combined[m] = T::zero();
        }
        for i in 0..l {
            for m in 0..order {
                combined[m] = combined[m] + loglik[i * order + m];
            }
        }
        // leave-one-out messages with damping
        for edge in 0..l {
            let mut peak = T::neg_infinity();
            for m in 0..order {
                loo[m] = combined[m] - loglik[edge * order + m];
                if loo[m] > peak {
                    peak = loo[m];
                }
            }
            if !peak.is_finite() {
                let u = T::one() / T::from_usizec(order);
                for m in 0..order {
                    loo[m] = u;
                }
            } else {
                let mut sum = T::zero();
                for m in 0..order {
                    loo[m] = (loo[m] - peak).exp();
                    sum = sum + loo[m];
                }
                for m in 0..order {
                    loo[m] = loo[m] / sum;
                }
            }
            let base = (p_prime * l + edge) * order;
            for m in 0..order {
                let old = state.pmf[base + m];
                state.pmf[base + m] = cfg.damping * loo[m] + (T::one() - cfg.damping) * old;
            }
        }
        // combined posterior over all L edges
        let mut peak = T::neg_infinity();
        for &v in combined.iter() {
            if v > peak {
                peak = v;
            }
        }
        let (mut sum, mut best_m, mut best_v) = (T::zero(), 0usize, T::neg_infinity());
        for (m, v) in combined.iter().enumerate() {
            let e = if peak.is_finite() { (*v - peak).exp() } else { T::one() };
            sum = sum + e;
            if e > best_v {
                best_v = e;
                best_m = m;
            }
        }
        labels[p_prime] = best_m;
        if best_v / sum >= cfg.confidence {
            confident += 1;
        }
    }
    T::from_usizec(confident) / T::from_usizec(mn)
}

/// Damped message passing on the sparse GF-domain factor graph.
///
/// Messages start uniform; every iteration recomputes interference moments
/// at the observation nodes, refreshes the leave-one-out edge pmfs with
/// damping Δ, and evaluates the convergence indicator η. The estimate from
/// the iteration with the highest η is returned; iteration stops when η
/// reaches 1, drops more than ε below its running maximum, or the cap is
/// hit.
pub fn mp_detect<T: GocdmFloat>(
    y: &[Complex<T>],
    sg: &SparseGfChannel<T>,
    c: &Constellation<T>,
    cfg: &MpConfig<T>,
) -> Result<MpDetection<T>> {
    cfg.validate()?;
    let mn = sg.block_len();
    if y.len() != mn {
        return Err(Error::LengthMismatch {
            expected: mn,
            got: y.len(),
        });
    }
    let mut state = MpState::new(sg, c)?;
    let mut best_labels = vec![0usize; mn];
    let mut labels = vec![0usize; mn];
    let mut eta_max = T::neg_infinity();
    let mut iterations = 0usize;

    while iterations < cfg.max_iterations {
        interference_moments(&mut state, sg, c, cfg.noise_var);
        let eta = update_messages(&mut state, y, sg, c, cfg, &mut labels);
        iterations += 1;

        if eta > eta_max {
            eta_max = eta;
            best_labels.copy_from_slice(&labels);
        } else if eta < eta_max - cfg.backoff {
            break;
        }
        if eta >= T::one() {
            break;
        }
    }

    let symbols = best_labels.iter().map(|&m| c.point(m)).collect();
    Ok(MpDetection {
        labels: best_labels,
        symbols,
        iterations,
        eta_max: eta_max.max(T::zero()),
    })
}

/// Soft linear MMSE estimate `z = Hᴴ(HHᴴ + N0·I)⁻¹ y`.
pub fn mmse_soft<T: GocdmFloat>(
    y: &[Complex<T>],
    h_eff: &Array2<Complex<T>>,
    n0: T,
) -> Result<Vec<Complex<T>>> {
    let mn = h_eff.nrows();
    if h_eff.ncols() != mn || y.len() != mn {
        return Err(Error::LengthMismatch {
            expected: mn,
            got: y.len(),
        });
    }
    if n0 < T::zero() {
        return Err(Error::InvalidParameter("noise variance must be >= 0".into()));
    }
    let h_herm = h_eff.t().mapv(|z| z.conj());
    let mut gram = h_eff.dot(&h_herm);
    for i in 0..mn {
        gram[(i, i)] = gram[(i, i)] + Complex::new(n0, T::zero());
    }
    let z = solve_hermitian(gram, y)?;
    let mut out = vec![Complex::new(T::zero(), T::zero()); mn];
    for (p, o) in out.iter_mut().enumerate() {
        let mut acc = Complex::new(T::zero(), T::zero());
        for q in 0..mn {
            acc = acc + h_herm[(p, q)] * z[q];
        }
        *o = acc;
    }
    Ok(out)
}

/// Linear MMSE equalization followed by nearest-point slicing; returns
/// constellation labels.
pub fn mmse_equalize<T: GocdmFloat>(
    y: &[Complex<T>],
    h_eff: &Array2<Complex<T>>,
    n0: T,
    c: &Constellation<T>,
) -> Result<Vec<usize>> {
    Ok(mmse_soft(y, h_eff, n0)?
        .into_iter()
        .map(|z| c.slice(z))
        .collect())
}

/// Per-subcarrier (single-tap) MMSE: each symbol is equalized with only the
/// diagonal entry of the effective channel,
/// `z_p = H*_{p,p}·y_p / (|H_{p,p}|² + N0)`.
///
/// This is the standard one-tap OFDM receiver; off-diagonal leakage acts as
/// untreated interference.
pub fn mmse_single_tap<T: GocdmFloat>(
    y: &[Complex<T>],
    h_eff: &Array2<Complex<T>>,
    n0: T,
    c: &Constellation<T>,
) -> Result<Vec<usize>> {
    let mn = h_eff.nrows();
    if h_eff.ncols() != mn || y.len() != mn {
        return Err(Error::LengthMismatch {
            expected: mn,
            got: y.len(),
        });
    }
    Ok(y.iter()
        .enumerate()
        .map(|(p, &yp)| {
            let h = h_eff[(p, p)];
            let z = h.conj() * yp / Complex::new(h.norm_sqr() + n0, T::zero());
            c.slice(z)
        })
        .collect())
}

/// Exhaustive ML detection: minimizes `‖y − Hx‖²` over all constellation
/// vectors. Caps the search at 2¹⁶ hypotheses.
pub fn ml_bruteforce<T: GocdmFloat>(
    y: &[Complex<T>],
    h_eff: &Array2<Complex<T>>,
    c: &Constellation<T>,
) -> Result<Vec<usize>> {
    const CAP: u128 = 1 << 16;
    let mn = h_eff.nrows();
    if h_eff.ncols() != mn || y.len() != mn {
        return Err(Error::LengthMismatch {
            expected: mn,
            got: y.len(),
        });
    }
    let order = c.order();
    let hypotheses = (order as u128)
        .checked_pow(mn as u32)
        .unwrap_or(u128::MAX);
    if hypotheses > CAP {
        return Err(Error::SearchSpaceExceeded {
            hypotheses,
            cap: CAP,
        });
    }
    let points = c.points();
    let mut best_metric = T::infinity();
    let mut best = vec![0usize; mn];
    let mut labels = vec![0usize; mn];
    for hyp in 0..hypotheses {
        let mut v = hyp;
        for lab in labels.iter_mut() {
            *lab = (v % order as u128) as usize;
            v /= order as u128;
        }
        let mut metric = T::zero();
        for p in 0..mn {
            let mut acc = y[p];
            for (q, &lab) in labels.iter().enumerate() {
                acc = acc - h_eff[(p, q)] * points[lab];
            }
            metric = metric + acc.norm_sqr();
            if metric >= best_metric {
                break;
            }
        }
        if metric < best_metric {
            best_metric = metric;
            best.copy_from_slice(&labels);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf_channel::SparseGfChannel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn qam4() -> Constellation<f64> {
        Constellation::qam4()
    }

    fn identity_sparse(mn: usize) -> SparseGfChannel<f64> {
        let coeff = Array2::from_elem((mn, 1), C::new(1.0, 0.0));
        SparseGfChannel::from_parts(mn, vec![0], coeff).unwrap()
    }

    fn random_sparse(
        mn: usize,
        l: usize,
        rng: &mut impl Rng,
    ) -> SparseGfChannel<f64> {
        let mut shifts: Vec<usize> = (0..mn).collect();
        for i in (1..mn).rev() {
            shifts.swap(i, rng.random_range(0..=i));
        }
        shifts.truncate(l);
        shifts.sort_unstable();
        let coeff = Array2::from_shape_fn((mn, l), |_| {
            C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * std::f64::consts::SQRT_2
        });
        SparseGfChannel::from_parts(mn, shifts, coeff).unwrap()
    }

    fn random_labels(mn: usize, rng: &mut impl Rng) -> Vec<usize> {
        (0..mn).map(|_| rng.random_range(0..4)).collect()
    }

    #[test]
    fn config_validation() {
        let mut cfg = MpConfig::<f64>::new(1e-3, 5);
        assert!(cfg.validate().is_ok());
        cfg.damping = 0.0;
        assert!(cfg.validate().is_err());
        cfg.damping = 1.0;
        assert!(cfg.validate().is_ok());
        cfg.noise_var = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn identity_channel_converges_immediately() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let c = qam4();
        let sg = identity_sparse(8);
        let labels = random_labels(8, &mut rng);
        let y: Vec<C> = labels.iter().map(|&m| c.point(m)).collect();
        let cfg = MpConfig::new(1e-4, 0);
        let det = mp_detect(&y, &sg, &c, &cfg).unwrap();
        assert_eq!(det.labels, labels);
        assert_eq!(det.iterations, 1);
        assert!((det.eta_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moments_uniform_pmfs_are_centered() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let c = qam4();
        let sg = random_sparse(8, 3, &mut rng);
        let mut state = MpState::new(&sg, &c).unwrap();
        interference_moments(&mut state, &sg, &c, 0.25);
        for p in 0..8 {
            for edge in 0..3 {
                let (mu, var) = state.moments(p, edge);
                // 4-QAM points sum to zero, so uniform pmfs give zero mean
                assert!(mu.norm() < 1e-12);
                assert!(var >= 0.25 - 1e-12);
            }
        }
    }

    #[test]
    fn moments_single_edge_graph() {
        let c = qam4();
        let sg = identity_sparse(4);
        let mut state = MpState::new(&sg, &c).unwrap();
        interference_moments(&mut state, &sg, &c, 0.5);
        for p in 0..4 {
            let (mu, var) = state.moments(p, 0);
            assert!(mu.norm() < 1e-15);
            assert!((var - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn moments_concentrated_pmfs_give_exact_interference() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let c = qam4();
        let sg = random_sparse(8, 3, &mut rng);
        let labels = random_labels(8, &mut rng);
        let mut state = MpState::new(&sg, &c).unwrap();
        // concentrate every message on the true symbol
        for p_prime in 0..8 {
            for edge in 0..3 {
                let base = (p_prime * 3 + edge) * 4;
                for m in 0..4 {
                    state.pmf[base + m] = if m == labels[p_prime] { 1.0 } else { 0.0 };
                }
            }
        }
        interference_moments(&mut state, &sg, &c, 1e-9);
        for p in 0..8 {
            let b = sg.tx_indices(p).unwrap();
            for edge in 0..3 {
                let mut expect = C::new(0.0, 0.0);
                for (i, &src) in b.iter().enumerate() {
                    if i != edge {
                        expect += sg.coeff(p, i) * c.point(labels[src]);
                    }
                }
                let (mu, var) = state.moments(p, edge);
                assert!((mu - expect).norm() < 1e-12);
                assert!(var >= 0.0 && var < 1e-8);
            }
        }
    }

    #[test]
    fn pmfs_remain_distributions_across_iterations() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let c = qam4();
        let sg = random_sparse(8, 3, &mut rng);
        let labels = random_labels(8, &mut rng);
        let x: Vec<C> = labels.iter().map(|&m| c.point(m)).collect();
        let mut y = sg.matvec(&x).unwrap();
        for v in y.iter_mut() {
            *v += C::new(0.05, -0.03); // mild noise so pmfs stay soft
        }
        let cfg = MpConfig::new(0.05, 0);
        let mut state = MpState::new(&sg, &c).unwrap();
        let mut out = vec![0usize; 8];
        for _ in 0..5 {
            interference_moments(&mut state, &sg, &c, cfg.noise_var);
            let eta = update_messages(&mut state, &y, &sg, &c, &cfg, &mut out);
            assert!((0.0..=1.0).contains(&eta));
            for p_prime in 0..8 {
                for edge in 0..3 {
                    let pmf = state.pmf(p_prime, edge);
                    let sum: f64 = pmf.iter().sum();
                    assert!((sum - 1.0).abs() < 1e-9, "pmf sum {sum}");
                    assert!(pmf.iter().all(|&w| w >= 0.0));
                    let (_, var) = state.moments(p_prime, edge);
                    assert!(var >= cfg.noise_var - 1e-15);
                }
            }
        }
    }

    #[test]
    fn mp_matches_ml_on_small_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let c = qam4();
        let mut agree = 0;
        let trials = 50;
        for _ in 0..trials {
            let l = rng.random_range(1..=3);
            let sg = random_sparse(4, l, &mut rng);
            let labels = random_labels(4, &mut rng);
            let x: Vec<C> = labels.iter().map(|&m| c.point(m)).collect();
            let y = sg.matvec(&x).unwrap();
            let mut cfg = MpConfig::new(1e-3, 0);
            cfg.max_iterations = 30;
            let mp = mp_detect(&y, &sg, &c, &cfg).unwrap();
            let ml = ml_bruteforce(&y, &sg.to_dense(), &c).unwrap();
            if mp.labels == ml {
                agree += 1;
            }
        }
        assert!(agree * 10 >= trials * 9, "MP=ML on {agree}/{trials}");
    }

    #[test]
    fn damping_does_not_change_noise_free_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        let c = qam4();
        let sg = random_sparse(8, 2, &mut rng);
        let labels = random_labels(8, &mut rng);
        let x: Vec<C> = labels.iter().map(|&m| c.point(m)).collect();
        let y = sg.matvec(&x).unwrap();
        let mut undamped = MpConfig::new(1e-3, 0);
        undamped.damping = 1.0;
        undamped.max_iterations = 40;
        let mut damped = undamped;
        damped.damping = 0.6;
        let a = mp_detect(&y, &sg, &c, &undamped).unwrap();
        let b = mp_detect(&y, &sg, &c, &damped).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.labels, labels);
    }

    #[test]
    fn mp_input_validation() {
        let c = qam4();
        let sg = identity_sparse(4);
        let y = vec![C::new(0.0, 0.0); 3];
        assert!(mp_detect(&y, &sg, &c, &MpConfig::new(1e-3, 0)).is_err());
        let y = vec![C::new(0.0, 0.0); 4];
        let mut cfg = MpConfig::new(0.0, 0);
        assert!(mp_detect(&y, &sg, &c, &cfg).is_err());
        cfg.noise_var = 1e-3;
        assert!(mp_detect(&y, &sg, &c, &cfg).is_ok());
    }

    #[test]
    fn mmse_identity_channel_slices() {
        let c = qam4();
        let mn = 6;
        let h = Array2::from_shape_fn((mn, mn), |(i, j)| {
            if i == j {
                C::new(1.0, 0.0)
            } else {
                C::new(0.0, 0.0)
            }
        });
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        let labels = random_labels(mn, &mut rng);
        let y: Vec<C> = labels
            .iter()
            .map(|&m| c.point(m) + C::new(0.01, -0.01))
            .collect();
        let got = mmse_equalize(&y, &h, 1e-9, &c).unwrap();
        assert_eq!(got, labels);
    }

    #[test]
    fn mmse_noise_free_inverts_well_conditioned_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(58);
        let c = qam4();
        let mn = 8;
        let mut h = Array2::from_shape_fn((mn, mn), |_| {
            C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * 0.3
        });
        for i in 0..mn {
            h[(i, i)] += C::new(2.0, 0.0);
        }
        let labels = random_labels(mn, &mut rng);
        let x: Vec<C> = labels.iter().map(|&m| c.point(m)).collect();
        let mut y = vec![C::new(0.0, 0.0); mn];
        for p in 0..mn {
            for q in 0..mn {
                y[p] += h[(p, q)] * x[q];
            }
        }
        let got = mmse_equalize(&y, &h, 0.0, &c).unwrap();
        assert_eq!(got, labels);
    }

    #[test]
    fn mmse_unitary_channel_is_scalar_shrinkage() {
        // for unitary H: z = Hᴴy/(1+N0)
        let params = crate::transforms::GdfntParams::new(2, 4).unwrap();
        let theta = crate::transforms::gdfnt_matrix::<f64>(params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let y: Vec<C> = (0..8)
            .map(|_| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let n0 = 0.3;
        let z = mmse_soft(&y, &theta, n0).unwrap();
        let theta_h = theta.t().mapv(|v| v.conj());
        for p in 0..8 {
            let mut hy = C::new(0.0, 0.0);
            for q in 0..8 {
                hy += theta_h[(p, q)] * y[q];
            }
            assert!((z[p] - hy / (1.0 + n0)).norm() < 1e-10);
        }
    }

    #[test]
    fn mmse_singular_noise_free_fails() {
        let h = Array2::from_elem((4, 4), C::new(1.0, 0.0));
        let y = vec![C::new(1.0, 0.0); 4];
        assert!(matches!(
            mmse_soft(&y, &h, 0.0),
            Err(Error::SingularMatrix)
        ));
    }

    #[test]
    fn ml_identity_is_per_symbol_slicing() {
        let c = qam4();
        let mn = 4;
        let h = Array2::from_shape_fn((mn, mn), |(i, j)| {
            if i == j {
                C::new(1.0, 0.0)
            } else {
                C::new(0.0, 0.0)
            }
        });
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let y: Vec<C> = (0..mn)
            .map(|_| C::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
            .collect();
        let ml = ml_bruteforce(&y, &h, &c).unwrap();
        let sliced: Vec<usize> = y.iter().map(|&z| c.slice(z)).collect();
        assert_eq!(ml, sliced);
    }

    #[test]
    fn ml_recovers_noise_free_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let c = qam4();
        let sg = random_sparse(4, 2, &mut rng);
        let labels = random_labels(4, &mut rng);
        let x: Vec<C> = labels.iter().map(|&m| c.point(m)).collect();
        let y = sg.matvec(&x).unwrap();
        let ml = ml_bruteforce(&y, &sg.to_dense(), &c).unwrap();
        assert_eq!(ml, labels);
    }

    #[test]
    fn ml_matches_independent_recursive_search() {
        // second implementation: recursive enumeration, no early pruning
        fn recurse(
            h: &Array2<C>,
            y: &[C],
            c: &Constellation<f64>,
            partial: &mut Vec<usize>,
            best: &mut (f64, Vec<usize>),
        ) {
            let mn = y.len();
            if partial.len() == mn {
                let mut metric = 0.0;
                for p in 0..mn {
                    let mut acc = y[p];
                    for (q, &lab) in partial.iter().enumerate() {
                        acc -= h[(p, q)] * c.point(lab);
                    }
                    metric += acc.norm_sqr();
                }
                if metric < best.0 {
                    *best = (metric, partial.clone());
                }
                return;
            }
            for m in 0..c.order() {
                partial.push(m);
                recurse(h, y, c, partial, best);
                partial.pop();
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let c = qam4();
        let h = Array2::from_shape_fn((4, 4), |_| {
            C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let y: Vec<C> = (0..4)
            .map(|_| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let fast = ml_bruteforce(&y, &h, &c).unwrap();
        let mut best = (f64::INFINITY, vec![]);
        recurse(&h, &y, &c, &mut Vec::new(), &mut best);
        assert_eq!(fast, best.1);
    }

    #[test]
    fn ml_rejects_oversized_search() {
        let c = qam4();
        let mn = 16; // 4^16 hypotheses
        let h = Array2::from_elem((mn, mn), C::new(1.0, 0.0));
        let y = vec![C::new(0.0, 0.0); mn];
        assert!(matches!(
            ml_bruteforce(&y, &h, &c),
            Err(Error::SearchSpaceExceeded { .. })
        ));
    }

    #[test]
    fn eta_non_decreasing_on_identity_channel() {
        // identity channel, mild noise: every iteration can only sharpen
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let c = qam4();
        let sg = identity_sparse(16);
        let labels = random_labels(16, &mut rng);
        let y: Vec<C> = labels.iter().map(|&m| c.point(m)).collect();
        let cfg = MpConfig::new(1e-4, 0);
        let det = mp_detect(&y, &sg, &c, &cfg).unwrap();
        assert!(det.iterations <= 2);
        assert!((det.eta_max - 1.0).abs() < 1e-12);
        assert_eq!(det.labels, labels);
    }
}
