//! Bit-to-symbol mapping, block modulation with cyclic prefix for the four
//! supported waveforms, the receiver front-end, and PAPR.
//!
//! A block carries `MN` constellation symbols. GOCDM sends them through the
//! inverse GDFnT, OCDM is the `M = 1` special case, SC is the `N = 1`
//! identity case, and OFDM replaces the transform with a unitary inverse DFT
//! of size `MN`. The cyclic prefix copies the last `G` time-domain samples in
//! front of the block.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::GocdmFloat;
use crate::transforms::{DftPlan, Direction, GdfntParams, GdfntPlan};
use crate::{Error, Result};

/// Block transform selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveformMode {
    Gocdm,
    Ocdm,
    Ofdm,
    Sc,
}

impl std::fmt::Display for WaveformMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            WaveformMode::Gocdm => "gocdm",
            WaveformMode::Ocdm => "ocdm",
            WaveformMode::Ofdm => "ofdm",
            WaveformMode::Sc => "sc",
        };
        f.write_str(s)
    }
}

/// A unit-energy symbol constellation with its bit labeling.
///
/// `points[u]` is the symbol whose bit group, read MSB first, equals `u`.
#[derive(Debug, Clone)]
pub struct Constellation<T> {
    points: Vec<Complex<T>>,
    bits_per_symbol: usize,
}

impl<T: GocdmFloat> Constellation<T> {
    /// Gray-labeled 4-QAM:
    /// `00 → (+1+j)/√2`, `01 → (−1+j)/√2`, `11 → (−1−j)/√2`, `10 → (+1−j)/√2`.
    pub fn qam4() -> Self {
        let a = T::from_f64c(std::f64::consts::FRAC_1_SQRT_2);
        let na = -a;
        Self {
            points: vec![
                Complex::new(a, a),   // 00
                Complex::new(na, a),  // 01
                Complex::new(a, na),  // 10
                Complex::new(na, na), // 11
            ],
            bits_per_symbol: 2,
        }
    }

    /// Builds a constellation from explicit points.
    ///
    /// The order must be a power of two (at least 2) and the mean symbol
    /// energy must be 1.
    pub fn from_points(points: Vec<Complex<T>>) -> Result<Self> {
        let order = points.len();
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "constellation order must be a power of two >= 2, got {order}"
            )));
        }
        let mean_energy = points
            .iter()
            .map(|p| p.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            / T::from_usizec(order);
        if (mean_energy - T::one()).abs() > T::from_f64c(1e-9) {
            return Err(Error::InvalidParameter(format!(
                "constellation mean energy must be 1, got {mean_energy}"
            )));
        }
        Ok(Self {
            points,
            bits_per_symbol: order.trailing_zeros() as usize,
        })
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex<T> {
        self.points[label]
    }

    /// Nearest-point decision; ties go to the lowest label.
    pub fn slice(&self, z: Complex<T>) -> usize {
        let mut best = 0usize;
        let mut best_d = (z - self.points[0]).norm_sqr();
        for (u, p) in self.points.iter().enumerate().skip(1) {
            let d = (z - *p).norm_sqr();
            if d < best_d {
                best = u;
                best_d = d;
            }
        }
        best
    }

    /// Packs one bit group (MSB first) into a label.
    pub fn label_from_bits(&self, bits: &[bool]) -> usize {
        debug_assert_eq!(bits.len(), self.bits_per_symbol);
        bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }
}

/// Maps a bit sequence to constellation symbols, one symbol per
/// `log₂(order)` consecutive bits.
pub fn map_bits<T: GocdmFloat>(bits: &[bool], c: &Constellation<T>) -> Result<Vec<Complex<T>>> {
    let bps = c.bits_per_symbol();
    if bits.len() % bps != 0 {
        return Err(Error::LengthMismatch {
            expected: bits.len().div_ceil(bps) * bps,
            got: bits.len(),
        });
    }
    Ok(bits
        .chunks_exact(bps)
        .map(|group| c.point(c.label_from_bits(group)))
        .collect())
}

/// Block geometry and waveform selection for one link.
#[derive(Debug, Clone)]
pub struct FrameParams<T> {
    mode: WaveformMode,
    transform: GdfntParams,
    cp_len: usize,
    sample_interval: T,
    constellation: Constellation<T>,
}

impl<T: GocdmFloat> FrameParams<T> {
    pub fn new(
        mode: WaveformMode,
        m: usize,
        n: usize,
        cp_len: usize,
        sample_interval: T,
        constellation: Constellation<T>,
    ) -> Result<Self> {
        let transform = GdfntParams::new(m, n)?;
        match mode {
            WaveformMode::Ocdm if m != 1 => {
                return Err(Error::InvalidParameter(format!("OCDM requires M = 1, got M={m}")));
            }
            WaveformMode::Sc if n != 1 => {
                return Err(Error::InvalidParameter(format!("SC requires N = 1, got N={n}")));
            }
            _ => {}
        }
        if !(sample_interval > T::zero()) {
            return Err(Error::InvalidParameter("sampling interval must be positive".into()));
        }
        Ok(Self {
            mode,
            transform,
            cp_len,
            sample_interval,
            constellation,
        })
    }

    pub fn mode(&self) -> WaveformMode {
        self.mode
    }

    pub fn transform(&self) -> GdfntParams {
        self.transform
    }

    pub fn m(&self) -> usize {
        self.transform.m()
    }

    pub fn n(&self) -> usize {
        self.transform.n()
    }

    pub fn block_len(&self) -> usize {
        self.transform.block_len()
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    pub fn sample_interval(&self) -> T {
        self.sample_interval
    }

    /// Block duration `T = MN·Ts`, excluding the cyclic prefix.
    pub fn block_duration(&self) -> T {
        self.sample_interval * T::from_usizec(self.block_len())
    }

    /// Frequency-domain sampling interval `Δf = 1/T`.
    pub fn delta_f(&self) -> T {
        T::one() / self.block_duration()
    }

    pub fn constellation(&self) -> &Constellation<T> {
        &self.constellation
    }
}

/// One modulated block: GF-domain symbols, the time-domain block, and the
/// block with its cyclic prefix.
#[derive(Debug, Clone)]
pub struct TxBlock<T> {
    pub x: Vec<Complex<T>>,
    pub s: Vec<Complex<T>>,
    pub s_cp: Vec<Complex<T>>,
}

enum TransformPlan<T: GocdmFloat> {
    Fresnel(GdfntPlan<T>),
    Dft(DftPlan<T>),
}

/// Modulator / receiver front-end for one [`FrameParams`]. Holds the
/// transform plan so repeated blocks reuse it.
pub struct Modem<T: GocdmFloat> {
    params: FrameParams<T>,
    plan: TransformPlan<T>,
}

impl<T: GocdmFloat> Modem<T> {
    pub fn new(params: FrameParams<T>) -> Result<Self> {
        let plan = match params.mode {
            WaveformMode::Ofdm => TransformPlan::Dft(DftPlan::new(params.block_len())?),
            _ => TransformPlan::Fresnel(GdfntPlan::new(params.transform)?),
        };
        Ok(Self { params, plan })
    }

    pub fn params(&self) -> &FrameParams<T> {
        &self.params
    }

    fn transform(&mut self, data: &mut [Complex<T>], direction: Direction) -> Result<()> {
        match &mut self.plan {
            TransformPlan::Fresnel(p) => p.apply(data, direction)?,
            TransformPlan::Dft(p) => {
                if data.len() != self.params.block_len() {
                    return Err(Error::LengthMismatch {
                        expected: self.params.block_len(),
                        got: data.len(),
                    });
                }
                p.apply(data, direction);
            }
        }
        Ok(())
    }

    /// GF-domain symbols to time domain: `s = Θᴴ x`, then the last `G`
    /// samples of `s` are prepended as the cyclic prefix.
    pub fn modulate(&mut self, x: &[Complex<T>]) -> Result<TxBlock<T>> {
        let mn = self.params.block_len();
        if x.len() != mn {
            return Err(Error::LengthMismatch {
                expected: mn,
                got: x.len(),
            });
        }
        let g = self.params.cp_len;
        if g > mn {
            // a CP longer than the block would have to repeat it
            return Err(Error::InvalidParameter(format!(
                "cyclic prefix length {g} exceeds block length {mn}"
            )));
        }
        let mut s = x.to_vec();
        self.transform(&mut s, Direction::Inverse)?;
        let mut s_cp = Vec::with_capacity(g + mn);
        s_cp.extend_from_slice(&s[mn - g..]);
        s_cp.extend_from_slice(&s);
        Ok(TxBlock {
            x: x.to_vec(),
            s,
            s_cp,
        })
    }

    /// Forward transform of a CP-free received block: `y = Θ r`.
    pub fn demodulate(&mut self, r: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let mn = self.params.block_len();
        if r.len() != mn {
            return Err(Error::LengthMismatch {
                expected: mn,
                got: r.len(),
            });
        }
        let mut y = r.to_vec();
        self.transform(&mut y, Direction::Forward)?;
        Ok(y)
    }

    /// Receiver front-end: drops the `G` cyclic-prefix samples and applies
    /// the forward transform.
    pub fn rx_front(&mut self, r_cp: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let expected = self.params.cp_len + self.params.block_len();
        if r_cp.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: r_cp.len(),
            });
        }
        self.demodulate(&r_cp[self.params.cp_len..])
    }
}

/// Peak-to-average power ratio `max|sₙ|² / mean|sₙ|²` of a time-domain
/// block (CP excluded by convention: pass `s`, not `s_cp`).
pub fn papr<T: GocdmFloat>(s: &[Complex<T>]) -> Result<T> {
    if s.is_empty() {
        return Err(Error::ZeroEnergy);
    }
    let mut peak = T::zero();
    let mut sum = T::zero();
    for v in s {
        let p = v.norm_sqr();
        if p > peak {
            peak = p;
        }
        sum = sum + p;
    }
    if !(sum > T::zero()) {
        return Err(Error::ZeroEnergy);
    }
    Ok(peak * T::from_usizec(s.len()) / sum)
}

/// PAPR in decibels.
pub fn papr_db<T: GocdmFloat>(s: &[Complex<T>]) -> Result<T> {
    Ok(papr(s)?.log10() * T::from_f64c(10.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::gdfnt_matrix;
    use ndarray::Array1;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn qam4_params(mode: WaveformMode, m: usize, n: usize, g: usize) -> FrameParams<f64> {
        FrameParams::new(mode, m, n, g, 1.0 / 3200.0, Constellation::qam4()).unwrap()
    }

    fn energy(v: &[C]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum()
    }

    #[test]
    fn qam4_gray_table() {
        let c = Constellation::<f64>::qam4();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [
            ([false, false], C::new(s, s)),
            ([false, true], C::new(-s, s)),
            ([true, true], C::new(-s, -s)),
            ([true, false], C::new(s, -s)),
        ];
        for (bits, point) in expect {
            let got = map_bits(&bits, &c).unwrap()[0];
            assert!((got - point).norm() < 1e-15, "{bits:?}");
        }
    }

    #[test]
    fn map_bits_all_zero() {
        let c = Constellation::<f64>::qam4();
        let bits = vec![false; 8];
        let syms = map_bits(&bits, &c).unwrap();
        assert_eq!(syms.len(), 4);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for z in syms {
            assert!((z - C::new(s, s)).norm() < 1e-15);
        }
    }

    #[test]
    fn map_bits_rejects_ragged_length() {
        let c = Constellation::<f64>::qam4();
        assert!(map_bits::<f64>(&[false, true, true], &c).is_err());
    }

    #[test]
    fn mapped_random_bits_have_unit_power() {
        let c = Constellation::<f64>::qam4();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let bits: Vec<bool> = (0..200_000).map(|_| rng.random::<bool>()).collect();
        let syms = map_bits(&bits, &c).unwrap();
        let power = energy(&syms) / syms.len() as f64;
        assert!((power - 1.0).abs() < 0.01, "power {power}");
    }

    #[test]
    fn constellation_validation() {
        assert!(Constellation::<f64>::from_points(vec![C::new(1.0, 0.0)]).is_err());
        assert!(Constellation::<f64>::from_points(vec![C::new(1.0, 0.0); 3]).is_err());
        assert!(Constellation::<f64>::from_points(vec![
            C::new(2.0, 0.0),
            C::new(-2.0, 0.0),
        ])
        .is_err());
        let bpsk =
            Constellation::<f64>::from_points(vec![C::new(1.0, 0.0), C::new(-1.0, 0.0)]).unwrap();
        assert_eq!(bpsk.bits_per_symbol(), 1);
    }

    #[test]
    fn slice_tie_breaks_low() {
        let c = Constellation::<f64>::qam4();
        // origin is equidistant from all four points
        assert_eq!(c.slice(C::new(0.0, 0.0)), 0);
    }

    #[test]
    fn mode_constraints() {
        assert!(FrameParams::new(WaveformMode::Ocdm, 2, 8, 0, 1.0, Constellation::<f64>::qam4())
            .is_err());
        assert!(FrameParams::new(WaveformMode::Sc, 2, 8, 0, 1.0, Constellation::<f64>::qam4())
            .is_err());
    }

    #[test]
    fn sc_mode_is_identity_with_cp() {
        let p = qam4_params(WaveformMode::Sc, 8, 1, 3);
        let mut modem = Modem::new(p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let bits: Vec<bool> = (0..16).map(|_| rng.random()).collect();
        let x = map_bits(&bits, modem.params().constellation()).unwrap();
        let blk = modem.modulate(&x).unwrap();
        assert_eq!(blk.s, x);
        assert_eq!(&blk.s_cp[..3], &x[5..]);
        assert_eq!(&blk.s_cp[3..], &x[..]);
    }

    #[test]
    fn gocdm_m1_equals_ocdm() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x: Vec<C> = (0..8)
            .map(|_| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let mut a = Modem::new(qam4_params(WaveformMode::Gocdm, 1, 8, 2)).unwrap();
        let mut b = Modem::new(qam4_params(WaveformMode::Ocdm, 1, 8, 2)).unwrap();
        let sa = a.modulate(&x).unwrap();
        let sb = b.modulate(&x).unwrap();
        for (u, v) in sa.s.iter().zip(&sb.s) {
            assert!((u - v).norm() < 1e-15);
        }
    }

    #[test]
    fn gocdm_n1_equals_sc() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let x: Vec<C> = (0..8)
            .map(|_| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let mut a = Modem::new(qam4_params(WaveformMode::Gocdm, 8, 1, 2)).unwrap();
        let mut b = Modem::new(qam4_params(WaveformMode::Sc, 8, 1, 2)).unwrap();
        let sa = a.modulate(&x).unwrap();
        let sb = b.modulate(&x).unwrap();
        for (u, v) in sa.s.iter().zip(&sb.s) {
            assert!((u - v).norm() < 1e-15);
        }
    }

    #[test]
    fn gocdm_impulse_matches_dense_column() {
        let p = qam4_params(WaveformMode::Gocdm, 2, 2, 0);
        let mut modem = Modem::new(p).unwrap();
        let mut x = vec![C::new(0.0, 0.0); 4];
        x[0] = C::new(1.0, 0.0);
        let blk = modem.modulate(&x).unwrap();
        let theta = gdfnt_matrix::<f64>(GdfntParams::new(2, 2).unwrap()).unwrap();
        let theta_h = theta.t().mapv(|z| z.conj());
        let col = theta_h.dot(&Array1::from_vec(x));
        for (u, v) in blk.s.iter().zip(col.iter()) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_all_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for (mode, m, n) in [
            (WaveformMode::Gocdm, 2, 4),
            (WaveformMode::Gocdm, 4, 8),
            (WaveformMode::Ocdm, 1, 16),
            (WaveformMode::Ofdm, 2, 8),
            (WaveformMode::Sc, 8, 1),
        ] {
            let p = qam4_params(mode, m, n, 3);
            let mut modem = Modem::new(p).unwrap();
            let x: Vec<C> = (0..m * n)
                .map(|_| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let blk = modem.modulate(&x).unwrap();
            let y = modem.rx_front(&blk.s_cp).unwrap();
            let err = x
                .iter()
                .zip(&y)
                .map(|(u, v)| (u - v).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "{mode} round trip err {err}");
            // energy bookkeeping
            assert!((energy(&blk.s) - energy(&x)).abs() < 1e-10);
            let tail = energy(&blk.s[m * n - 3..]);
            assert!((energy(&blk.s_cp) - energy(&blk.s) - tail).abs() < 1e-10);
        }
    }

    #[test]
    fn ofdm_forward_is_dft() {
        let p = qam4_params(WaveformMode::Ofdm, 1, 4, 0);
        let mut modem = Modem::new(p).unwrap();
        let r = vec![
            C::new(1.0, 0.0),
            C::new(0.0, 0.0),
            C::new(0.0, 0.0),
            C::new(0.0, 0.0),
        ];
        let y = modem.demodulate(&r).unwrap();
        for v in y {
            assert!((v - C::new(0.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn papr_basics() {
        let flat = vec![C::new(1.0, 0.0); 16];
        assert!((papr(&flat).unwrap() - 1.0).abs() < 1e-12);
        let spike = vec![
            C::new(2.0, 0.0),
            C::new(0.0, 0.0),
            C::new(0.0, 0.0),
            C::new(0.0, 0.0),
        ];
        assert!((papr(&spike).unwrap() - 4.0).abs() < 1e-12);
        assert!(papr::<f64>(&[]).is_err());
        assert!(papr(&vec![C::new(0.0, 0.0); 4]).is_err());
    }

    #[test]
    fn sc_blocks_are_constant_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let p = qam4_params(WaveformMode::Sc, 16, 1, 0);
        let mut modem = Modem::new(p).unwrap();
        let bits: Vec<bool> = (0..32).map(|_| rng.random()).collect();
        let x = map_bits(&bits, modem.params().constellation()).unwrap();
        let blk = modem.modulate(&x).unwrap();
        assert!((papr(&blk.s).unwrap() - 1.0).abs() < 1e-12);
    }
}
