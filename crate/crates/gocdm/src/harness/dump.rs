//! Channel inspection: draw one realization and dump the path table plus
//! the sparse GF-domain nonzeros as CSV.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::csvfmt::fmt_sig9;
use crate::channel::{draw_channel, ChannelProfile};
use crate::gf_channel::sparse_heff;
use crate::waveform::{Constellation, FrameParams, WaveformMode};
use crate::Result;

/// Inputs for a channel dump.
#[derive(Debug, Clone)]
pub struct ChanDumpRequest {
    /// Built-in profile name or path to a profile TOML.
    pub profile: String,
    pub m: usize,
    pub n: usize,
    /// CP length in samples; defaults to the profile's guard duration (or
    /// the exact delay spread when no guard is recorded).
    pub cp_len: Option<usize>,
    /// Fractional-Doppler truncation depth for the sparse table.
    pub b: usize,
    pub seed: u64,
}

/// Draws one realization and renders two CSV blocks: the realized paths
/// (`path,delay,doppler_int,doppler_frac,gain_real,gain_imag`) and the
/// sparse effective channel (`p,group,d,real,imag`). Identical output for
/// identical inputs.
pub fn chan_dump(req: &ChanDumpRequest) -> Result<String> {
    let profile = ChannelProfile::<f64>::load(&req.profile)?;
    let ts = profile.sample_interval();
    let cp_len = match req.cp_len {
        Some(g) => g,
        None => {
            let guard = profile.guard_s.unwrap_or_else(|| profile.max_delay_s());
            (guard / ts + 0.5).floor() as usize
        }
    };
    let params = FrameParams::new(
        WaveformMode::Gocdm,
        req.m,
        req.n,
        cp_len,
        ts,
        Constellation::qam4(),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let ch = draw_channel(&profile, &params, &mut rng)?;
    let sg = sparse_heff(&params, &ch, req.b)?;

    let mut out = String::new();
    out.push_str(&format!(
        "# profile={} m={} n={} cp_len={} b={} seed={}\n",
        profile.name, req.m, req.n, cp_len, req.b, req.seed
    ));
    out.push_str("# paths\npath,delay,doppler_int,doppler_frac,gain_real,gain_imag\n");
    for (i, p) in ch.paths().iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            i,
            p.delay,
            p.doppler_int,
            fmt_sig9(p.doppler_frac),
            fmt_sig9(p.gain.re),
            fmt_sig9(p.gain.im)
        ));
    }
    out.push_str("# sparse_heff\np,group,d,real,imag\n");
    for p in 0..sg.block_len() {
        for (group, &d) in sg.shifts().iter().enumerate() {
            let c = sg.coeff(p, group);
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p,
                group,
                d,
                fmt_sig9(c.re),
                fmt_sig9(c.im)
            ));
        }
    }
    Ok(out)
}
