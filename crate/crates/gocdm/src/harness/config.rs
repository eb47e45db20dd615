//! Experiment configuration: a TOML file describing waveforms, channel,
//! detectors, the Eb/N0 grid, and trial counts.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelProfile;
use crate::waveform::{Constellation, FrameParams, WaveformMode};
use crate::{Error, Result};

/// One waveform entry of a sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WaveformSpec {
    pub mode: WaveformMode,
    pub m: usize,
    pub n: usize,
}

impl WaveformSpec {
    /// Stable identifier used in CSV output and seed derivation.
    pub fn id(&self) -> String {
        match self.mode {
            WaveformMode::Gocdm => format!("gocdm_m{}_n{}", self.m, self.n),
            WaveformMode::Ocdm => format!("ocdm_n{}", self.n),
            WaveformMode::Ofdm => format!("ofdm_{}", self.m * self.n),
            WaveformMode::Sc => format!("sc_{}", self.m * self.n),
        }
    }

    pub fn frame_params(
        &self,
        cp_len: usize,
        sample_interval: f64,
        constellation: Constellation<f64>,
    ) -> Result<FrameParams<f64>> {
        FrameParams::new(self.mode, self.m, self.n, cp_len, sample_interval, constellation)
    }
}

/// Constellation selector. Only 4-QAM ships a bit-label table.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ConstellationSpec {
    #[default]
    Qam4,
}

impl ConstellationSpec {
    pub fn build(&self) -> Constellation<f64> {
        match self {
            ConstellationSpec::Qam4 => Constellation::qam4(),
        }
    }
}

fn default_damping() -> f64 {
    0.6
}
fn default_max_iterations() -> usize {
    20
}
fn default_confidence() -> f64 {
    0.99
}
fn default_backoff() -> f64 {
    0.05
}
fn default_b() -> usize {
    10
}

/// One detector entry of a sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DetectorSpec {
    /// Linear MMSE on the dense effective channel (per-subcarrier for OFDM).
    Mmse,
    /// Damped message passing on the sparse effective channel.
    Mp {
        #[serde(default = "default_damping")]
        damping: f64,
        #[serde(default = "default_max_iterations")]
        max_iterations: usize,
        #[serde(default = "default_confidence")]
        confidence: f64,
        #[serde(default = "default_backoff")]
        backoff: f64,
        /// Fractional-Doppler basis truncation depth used for the sparse
        /// channel construction.
        #[serde(default = "default_b")]
        b: usize,
        /// Additive inflation of the observation-noise variance over the
        /// thermal N0 (covers channel-approximation residue if desired).
        #[serde(default)]
        sigma_inflation: f64,
    },
}

impl DetectorSpec {
    pub fn id(&self) -> &'static str {
        match self {
            DetectorSpec::Mmse => "mmse",
            DetectorSpec::Mp { .. } => "mp",
        }
    }
}

/// A full experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Channel profile: a built-in name (`uwa_table2`, `eva_table4`) or a
    /// path to a profile TOML. Required for `ber` and `chan-dump`.
    pub channel: Option<String>,
    /// Cyclic prefix length in samples. Required for `ber`.
    pub cp_len: Option<usize>,
    pub waveforms: Vec<WaveformSpec>,
    #[serde(default)]
    pub detectors: Vec<DetectorSpec>,
    #[serde(default)]
    pub ebn0_db: Vec<f64>,
    /// Monte Carlo blocks per waveform (PAPR) or per grid point (BER).
    pub blocks_per_point: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub constellation: ConstellationSpec,
    /// Default output path; the CLI `--out` flag overrides it.
    pub out: Option<String>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn resolve_channel(&self) -> Result<ChannelProfile<f64>> {
        let name = self
            .channel
            .as_deref()
            .ok_or_else(|| Error::Config("config is missing the `channel` field".into()))?;
        ChannelProfile::load(name)
    }

    fn validate_waveforms(&self) -> Result<()> {
        if self.waveforms.is_empty() {
            return Err(Error::Config("config lists no waveforms".into()));
        }
        if self.blocks_per_point == 0 {
            return Err(Error::Config("blocks_per_point must be >= 1".into()));
        }
        Ok(())
    }

    /// Checks everything a PAPR run needs.
    pub fn validate_for_papr(&self) -> Result<()> {
        self.validate_waveforms()?;
        for w in &self.waveforms {
            // geometry constraints surface here rather than mid-run
            w.frame_params(0, 1.0, self.constellation.build())?;
        }
        Ok(())
    }

    /// Checks everything a BER run needs, including that every waveform and
    /// the channel fit together (CP covers the delay spread, dense-path
    /// detectors stay within the block cap).
    pub fn validate_for_ber(&self) -> Result<()> {
        self.validate_waveforms()?;
        if self.detectors.is_empty() {
            return Err(Error::Config("config lists no detectors".into()));
        }
        if self.ebn0_db.is_empty() {
            return Err(Error::Config("config has an empty ebn0_db grid".into()));
        }
        let cp_len = self
            .cp_len
            .ok_or_else(|| Error::Config("config is missing `cp_len`".into()))?;
        let profile = self.resolve_channel()?;
        let ts = profile.sample_interval();
        let max_delay = (profile.max_delay_s() / ts + 0.5).floor() as usize;
        if max_delay > cp_len {
            return Err(Error::DelayExceedsCp {
                delay_samples: max_delay,
                cp_len,
            });
        }
        for w in &self.waveforms {
            let params = w.frame_params(cp_len, ts, self.constellation.build())?;
            let needs_dense = self.detectors.iter().any(|d| {
                matches!(d, DetectorSpec::Mmse)
                    || (matches!(d, DetectorSpec::Mp { .. }) && w.mode == WaveformMode::Ofdm)
            });
            if needs_dense && params.block_len() > 1024 {
                return Err(Error::Config(format!(
                    "waveform {} needs the dense effective channel but MN = {} exceeds 1024",
                    w.id(),
                    params.block_len()
                )));
            }
        }
        Ok(())
    }
}
