//! Multi-lag multi-Doppler linear time-variant channel.
//!
//! A realization is a finite set of paths, each with a complex gain, an
//! integer sample delay, and a normalized Doppler shift split into integer
//! and fractional parts. With the cyclic prefix absorbing the delay spread,
//! the received block is
//!
//! ```text
//! r[n] = Σᵢ h̃ᵢ · e^{j2π(kᵢ+κᵢ)n/MN} · s[⟨n−lᵢ⟩_MN] + ω[n]
//! ```
//!
//! equivalently `r = H s + ω` with `H = Σᵢ h̃ᵢ Λ^{kᵢ+κᵢ} Π^{lᵢ}`.
//!
//! Two delay-power profiles ship built in: `uwa_table2`, a mobile underwater
//! acoustic channel (overspread), and `eva_table4`, the Extended Vehicular A
//! radio channel at 500 km/h (underspread). Custom profiles load from TOML.

use ndarray::Array2;
use num_complex::Complex;
use rand::Rng;
use serde::Deserialize;

use crate::scalar::{cis, complex_gaussian, GocdmFloat};
use crate::waveform::FrameParams;
use crate::{Error, Result};

/// One tap of a delay-power profile.
#[derive(Debug, Clone, Copy)]
pub struct ChannelTap<T> {
    pub delay_s: T,
    pub power_db: T,
}

/// Physical description of a channel: geometry-independent constants plus
/// the tap list. Tap powers are normalized at draw time so the realized mean
/// path energies sum to 1.
#[derive(Debug, Clone)]
pub struct ChannelProfile<T> {
    pub name: String,
    pub carrier_hz: T,
    /// Propagation speed of the medium (sound or radio), m/s.
    pub wave_speed_mps: T,
    /// Relative transmitter/receiver speed, m/s.
    pub relative_speed_mps: T,
    pub bandwidth_hz: T,
    pub taps: Vec<ChannelTap<T>>,
    /// Guard (CP) duration from the signal configuration tables, if known.
    pub guard_s: Option<T>,
}

/// Delay and Doppler spreads of a profile.
#[derive(Debug, Clone, Copy)]
pub struct Spreads<T> {
    pub time_spread_s: T,
    pub doppler_spread_hz: T,
    /// `S_t · S_f`; ≫ 1 means overspread, ≪ 1 underspread.
    pub product: T,
}

#[derive(Deserialize)]
struct RawTap {
    delay_s: f64,
    power_db: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    name: Option<String>,
    carrier_hz: f64,
    wave_speed_mps: f64,
    relative_speed_mps: f64,
    bandwidth_hz: f64,
    taps: Vec<RawTap>,
    guard_s: Option<f64>,
}

impl<T: GocdmFloat> ChannelProfile<T> {
    /// Mobile underwater acoustic profile: 24 kHz carrier, 3.2 kHz
    /// bandwidth, 40 km/h relative speed, ten taps out to 14.7 ms.
    pub fn uwa_table2() -> Self {
        let taps_ms_db = [
            (0.0, 0.0),
            (0.6, -0.6),
            (1.3, -1.0),
            (2.2, -1.3),
            (6.9, -2.8),
            (7.5, -4.2),
            (8.1, -3.5),
            (13.1, -6.2),
            (13.8, -7.3),
            (14.7, -8.1),
        ];
        Self {
            name: "uwa_table2".into(),
            carrier_hz: T::from_f64c(24e3),
            wave_speed_mps: T::from_f64c(1500.0),
            relative_speed_mps: T::from_f64c(40.0 / 3.6),
            bandwidth_hz: T::from_f64c(3200.0),
            taps: taps_ms_db
                .iter()
                .map(|&(ms, db)| ChannelTap {
                    delay_s: T::from_f64c(ms * 1e-3),
                    power_db: T::from_f64c(db),
                })
                .collect(),
            guard_s: Some(T::from_f64c(15e-3)),
        }
    }

    /// Extended Vehicular A profile: 5 GHz carrier, 15.36 MHz bandwidth,
    /// 500 km/h relative speed, nine taps out to 2510 ns.
    pub fn eva_table4() -> Self {
        let taps_ns_db = [
            (0.0, 0.0),
            (30.0, -1.5),
            (150.0, -1.4),
            (310.0, -3.6),
            (370.0, -0.6),
            (710.0, -9.1),
            (1090.0, -7.0),
            (1730.0, -12.0),
            (2510.0, -16.9),
        ];
        Self {
            name: "eva_table4".into(),
            carrier_hz: T::from_f64c(5e9),
            wave_speed_mps: T::from_f64c(3e8),
            relative_speed_mps: T::from_f64c(500.0 / 3.6),
            bandwidth_hz: T::from_f64c(15.36e6),
            taps: taps_ns_db
                .iter()
                .map(|&(ns, db)| ChannelTap {
                    delay_s: T::from_f64c(ns * 1e-9),
                    power_db: T::from_f64c(db),
                })
                .collect(),
            guard_s: Some(T::from_f64c(2.6e-6)),
        }
    }

    /// Looks up a built-in profile by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "uwa_table2" => Some(Self::uwa_table2()),
            "eva_table4" => Some(Self::eva_table4()),
            _ => None,
        }
    }

    /// Parses a profile from TOML text.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawProfile = toml::from_str(text)?;
        let profile = Self {
            name: raw.name.unwrap_or_else(|| "custom".into()),
            carrier_hz: T::from_f64c(raw.carrier_hz),
            wave_speed_mps: T::from_f64c(raw.wave_speed_mps),
            relative_speed_mps: T::from_f64c(raw.relative_speed_mps),
            bandwidth_hz: T::from_f64c(raw.bandwidth_hz),
            taps: raw
                .taps
                .iter()
                .map(|t| ChannelTap {
                    delay_s: T::from_f64c(t.delay_s),
                    power_db: T::from_f64c(t.power_db),
                })
                .collect(),
            guard_s: raw.guard_s.map(T::from_f64c),
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Reads a profile from a TOML file.
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Resolves a name: built-in first, then as a file path.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if let Some(p) = Self::builtin(name_or_path) {
            return Ok(p);
        }
        let path = std::path::Path::new(name_or_path);
        if path.exists() {
            return Self::from_file(path);
        }
        Err(Error::Config(format!(
            "unknown channel profile '{name_or_path}' (not a built-in, not a file)"
        )))
    }

    pub fn validate(&self) -> Result<()> {
        if self.taps.is_empty() {
            return Err(Error::InvalidParameter("profile has no taps".into()));
        }
        if !(self.bandwidth_hz > T::zero())
            || !(self.carrier_hz > T::zero())
            || !(self.wave_speed_mps > T::zero())
            || self.relative_speed_mps < T::zero()
        {
            return Err(Error::InvalidParameter(
                "profile constants must be positive (speed may be zero)".into(),
            ));
        }
        Ok(())
    }

    /// Maximum Doppler shift `v_max = V·f_c/C` in Hz.
    pub fn max_doppler_hz(&self) -> T {
        self.relative_speed_mps * self.carrier_hz / self.wave_speed_mps
    }

    /// Nominal sampling interval `Ts = 1/bandwidth`.
    pub fn sample_interval(&self) -> T {
        T::one() / self.bandwidth_hz
    }

    /// Tap powers linearized and normalized to sum to 1.
    pub fn normalized_powers(&self) -> Vec<T> {
        let ten = T::from_f64c(10.0);
        let lin: Vec<T> = self
            .taps
            .iter()
            .map(|t| ten.powf(t.power_db / ten))
            .collect();
        let total = lin.iter().fold(T::zero(), |a, &b| a + b);
        lin.into_iter().map(|p| p / total).collect()
    }

    pub fn max_delay_s(&self) -> T {
        self.taps
            .iter()
            .map(|t| t.delay_s)
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Time spread `S_t = max τᵢ`, Doppler spread `S_f = 2·v_max`, and their
    /// product.
    pub fn spreads(&self) -> Spreads<T> {
        let st = self.max_delay_s();
        let sf = self.max_doppler_hz() * T::from_f64c(2.0);
        Spreads {
            time_spread_s: st,
            doppler_spread_hz: sf,
            product: st * sf,
        }
    }
}

/// One realized propagation path.
#[derive(Debug, Clone, Copy)]
pub struct PathRealization<T> {
    /// Equivalent gain `h̃ᵢ = hᵢ·e^{-j2π(kᵢ+κᵢ)lᵢ/MN}`.
    pub gain: Complex<T>,
    /// Delay in samples.
    pub delay: usize,
    /// Integer part of the normalized Doppler shift.
    pub doppler_int: i64,
    /// Fractional part, in `(-0.5, 0.5]`.
    pub doppler_frac: T,
}

impl<T: GocdmFloat> PathRealization<T> {
    /// `kᵢ + κᵢ`.
    pub fn normalized_doppler(&self) -> T {
        T::from_f64c(self.doppler_int as f64) + self.doppler_frac
    }
}

/// A set of paths drawn for one block geometry.
#[derive(Debug, Clone)]
pub struct ChannelRealization<T> {
    paths: Vec<PathRealization<T>>,
    block_len: usize,
    cp_len: usize,
}

impl<T: GocdmFloat> ChannelRealization<T> {
    /// Validates that every delay fits inside the cyclic prefix (so the
    /// cyclic input-output model is exact).
    pub fn new(paths: Vec<PathRealization<T>>, block_len: usize, cp_len: usize) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::InvalidParameter("channel realization has no paths".into()));
        }
        for p in &paths {
            if p.delay > cp_len {
                return Err(Error::DelayExceedsCp {
                    delay_samples: p.delay,
                    cp_len,
                });
            }
        }
        Ok(Self {
            paths,
            block_len,
            cp_len,
        })
    }

    pub fn paths(&self) -> &[PathRealization<T>] {
        &self.paths
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }
}

/// Draws one block-fading realization of `profile` for the block geometry of
/// `params`.
///
/// Per tap: the gain is circular complex Gaussian with the normalized tap
/// power, the delay is rounded to the nearest sample (ties toward +∞), the
/// arrival angle is uniform on `[-π/2, π/2]`, and the physical Doppler
/// `v_max·cosθ` is split into integer and fractional parts of `v·T`.
pub fn draw_channel<T: GocdmFloat, R: Rng + ?Sized>(
    profile: &ChannelProfile<T>,
    params: &FrameParams<T>,
    rng: &mut R,
) -> Result<ChannelRealization<T>> {
    profile.validate()?;
    let ts = params.sample_interval();
    let nominal = profile.sample_interval();
    if ((ts - nominal) / nominal).abs() > T::from_f64c(1e-9) {
        return Err(Error::InvalidParameter(format!(
            "frame sampling interval {ts} does not match profile bandwidth (expects {nominal})"
        )));
    }
    let mn = params.block_len();
    let block_duration = params.block_duration();
    let v_max = profile.max_doppler_hz();
    let powers = profile.normalized_powers();
    let half = T::from_f64c(0.5);
    let two_pi = T::PI() * T::from_f64c(2.0);

    let mut paths = Vec::with_capacity(profile.taps.len());
    for (tap, power) in profile.taps.iter().zip(powers) {
        let gain = complex_gaussian(rng, power);
        let delay_f = (tap.delay_s / ts + half).floor();
        let delay = delay_f.to_usize().ok_or_else(|| {
            Error::InvalidParameter(format!("tap delay {} s is not representable", tap.delay_s))
        })?;
        if delay > params.cp_len() {
            return Err(Error::DelayExceedsCp {
                delay_samples: delay,
                cp_len: params.cp_len(),
            });
        }
        let theta = T::uniform(rng, -T::FRAC_PI_2(), T::FRAC_PI_2());
        let doppler_hz = v_max * theta.cos();
        let normalized = doppler_hz * block_duration;
        let k = (normalized - half).ceil();
        let kappa = normalized - k;
        let k = k.to_i64().ok_or_else(|| {
            Error::InvalidParameter(format!("normalized Doppler {normalized} out of range"))
        })?;
        // fold the e^{-j2π(k+κ)l/MN} factor into the gain
        let phase = -two_pi * normalized * T::from_usizec(delay) / T::from_usizec(mn);
        paths.push(PathRealization {
            gain: gain * cis(phase),
            delay,
            doppler_int: k,
            doppler_frac: kappa,
        });
    }
    ChannelRealization::new(paths, mn, params.cp_len())
}

/// Passes a CP-free time-domain block through the channel and adds white
/// complex Gaussian noise of per-sample variance `n0`.
pub fn apply_channel<T: GocdmFloat, R: Rng + ?Sized>(
    ch: &ChannelRealization<T>,
    s: &[Complex<T>],
    n0: T,
    rng: &mut R,
) -> Result<Vec<Complex<T>>> {
    let mn = ch.block_len;
    if s.len() != mn {
        return Err(Error::LengthMismatch {
            expected: mn,
            got: s.len(),
        });
    }
    let two_pi = T::PI() * T::from_f64c(2.0);
    let mut r = vec![Complex::new(T::zero(), T::zero()); mn];
    for path in &ch.paths {
        let a = path.normalized_doppler();
        let step = two_pi * a / T::from_usizec(mn);
        for (n, out) in r.iter_mut().enumerate() {
            let rotate = cis(step * T::from_usizec(n));
            *out = *out + path.gain * rotate * s[(n + mn - path.delay % mn) % mn];
        }
    }
    if n0 > T::zero() {
        for out in r.iter_mut() {
            *out = *out + complex_gaussian(rng, n0);
        }
    }
    Ok(r)
}

/// Materializes the dense time-domain channel matrix
/// `H = Σᵢ h̃ᵢ Λ^{kᵢ+κᵢ} Π^{lᵢ}`. Test and MMSE oracle.
pub fn dense_h<T: GocdmFloat>(ch: &ChannelRealization<T>) -> Array2<Complex<T>> {
    let mn = ch.block_len;
    let two_pi = T::PI() * T::from_f64c(2.0);
    let mut h = Array2::from_elem((mn, mn), Complex::new(T::zero(), T::zero()));
    for path in &ch.paths {
        let a = path.normalized_doppler();
        let step = two_pi * a / T::from_usizec(mn);
        for n in 0..mn {
            let col = (n + mn - path.delay % mn) % mn;
            h[(n, col)] = h[(n, col)] + path.gain * cis(step * T::from_usizec(n));
        }
    }
    h
}
