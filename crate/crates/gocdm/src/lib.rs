//! Simulation toolkit for Generalized Orthogonal Chirp Division Multiplexing
//! (GOCDM) over doubly selective channels.
//!
//! The crate is organized along the signal path:
//!
//! * [`transforms`] — discrete Fresnel transform, its `(M, N)` generalization,
//!   and the chirp-FFT fast path;
//! * [`waveform`] — bit mapping, block modulation (GOCDM / OCDM / OFDM / SC)
//!   with cyclic prefix, and PAPR;
//! * [`channel`] — multi-lag multi-Doppler linear time-variant channel with
//!   built-in underwater-acoustic and vehicular profiles;
//! * [`gf_channel`] — the effective channel seen in the generalized Fresnel
//!   domain, both the exact dense form and the grouped sparse form;
//! * [`detect`] — damped message-passing detection on the sparse factor
//!   graph, an MMSE baseline, and a brute-force ML oracle;
//! * [`harness`] — Monte Carlo drivers (PAPR CCDF, BER sweeps), Eb/N0
//!   calibration, configuration files, and CSV output.
//!
//! All numeric code is generic over the scalar type via
//! [`GocdmFloat`](scalar::GocdmFloat) (`f32` or `f64`); the harness and the
//! aliases below fix `f64`, which every reported tolerance assumes.

pub mod channel;
pub mod detect;
pub mod gf_channel;
pub mod harness;
mod linalg;
pub mod scalar;
pub mod transforms;
pub mod waveform;

pub use scalar::GocdmFloat;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("tap delay of {delay_samples} samples exceeds cyclic prefix length {cp_len}")]
    DelayExceedsCp { delay_samples: usize, cp_len: usize },
    #[error("zero-energy block")]
    ZeroEnergy,
    #[error("linear solve failed: matrix is singular")]
    SingularMatrix,
    #[error("search space of {hypotheses} hypotheses exceeds cap {cap}")]
    SearchSpaceExceeded { hypotheses: u128, cap: u128 },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("failed to parse TOML: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Complex sample types.
pub type C32 = num_complex::Complex<f32>;
pub type C64 = num_complex::Complex<f64>;

/// `f64` aliases for the main domain types (what the harness and CLI use).
pub type GdfntParams64 = transforms::GdfntParams;
pub type Constellation64 = waveform::Constellation<f64>;
pub type FrameParams64 = waveform::FrameParams<f64>;
pub type ChannelProfile64 = channel::ChannelProfile<f64>;
pub type ChannelRealization64 = channel::ChannelRealization<f64>;
pub type SparseGfChannel64 = gf_channel::SparseGfChannel<f64>;
pub type MpConfig64 = detect::MpConfig<f64>;
