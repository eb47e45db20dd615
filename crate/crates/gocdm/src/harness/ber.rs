//! BER sweep driver: waveforms × detectors × Eb/N0 grid, block-fading Monte
//! Carlo with per-trial derived seeds.

use ndarray::Array2;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{DetectorSpec, ExperimentConfig, WaveformSpec};
use super::csvfmt::fmt_sig9;
use super::{ebn0_to_n0, trial_seed};
use crate::channel::{apply_channel, draw_channel, ChannelProfile};
use crate::detect::{mmse_equalize, mmse_single_tap, mp_detect, MpConfig};
use crate::gf_channel::{dense_heff, sparse_heff, SparseGfChannel};
use crate::waveform::{map_bits, papr_db, Constellation, FrameParams, Modem, WaveformMode};
use crate::{Error, Result};

/// Outcome of one transmitted block under one detector.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub seed: u64,
    pub waveform: String,
    pub detector: String,
    pub ebn0_db: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub papr: f64,
    pub iterations: u64,
}

/// Aggregated result for one (waveform, detector, Eb/N0) cell.
#[derive(Debug, Clone)]
pub struct BerPoint {
    pub waveform: String,
    pub detector: String,
    pub ebn0_db: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub blocks: u64,
    pub mean_iterations: f64,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.bits as f64
    }
}

fn count_bit_errors(tx: &[usize], rx: &[usize]) -> u64 {
    tx.iter()
        .zip(rx)
        .map(|(&a, &b)| (a ^ b).count_ones() as u64)
        .sum()
}

/// Which detector backend a trial runs.
enum DetectorRun {
    Mmse,
    Mp(MpConfig<f64>),
}

fn detector_run(spec: &DetectorSpec, n0: f64) -> DetectorRun {
    match *spec {
        DetectorSpec::Mmse => DetectorRun::Mmse,
        DetectorSpec::Mp {
            damping,
            max_iterations,
            confidence,
            backoff,
            b,
            sigma_inflation,
        } => DetectorRun::Mp(MpConfig {
            damping,
            max_iterations,
            confidence,
            backoff,
            noise_var: n0 + sigma_inflation,
            b_trunc: b,
        }),
    }
}

struct TrialContext<'a> {
    profile: &'a ChannelProfile<f64>,
    params: &'a FrameParams<f64>,
    constellation: &'a Constellation<f64>,
    wf: &'a WaveformSpec,
    detectors: &'a [DetectorSpec],
    ebn0_db: f64,
    n0: f64,
}

fn run_trial(
    ctx: &TrialContext<'_>,
    modem: &mut Modem<f64>,
    seed: u64,
) -> Result<Vec<TrialRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = ctx.constellation;
    let mn = ctx.params.block_len();
    let bps = c.bits_per_symbol();

    let ch = draw_channel(ctx.profile, ctx.params, &mut rng)?;
    let bits: Vec<bool> = (0..mn * bps).map(|_| rng.random()).collect();
    let tx_labels: Vec<usize> = bits
        .chunks_exact(bps)
        .map(|g| c.label_from_bits(g))
        .collect();
    let x = map_bits(&bits, c)?;
    let block = modem.modulate(&x)?;
    let papr = papr_db(&block.s)?;
    let r = apply_channel(&ch, &block.s, ctx.n0, &mut rng)?;
    let y = modem.demodulate(&r)?;

    // the dense effective channel serves MMSE and the OFDM message passer;
    // build it at most once per trial
    let needs_dense = ctx.detectors.iter().any(|d| {
        matches!(d, DetectorSpec::Mmse)
            || (ctx.wf.mode == WaveformMode::Ofdm && matches!(d, DetectorSpec::Mp { .. }))
    });
    let dense: Option<Array2<Complex<f64>>> = if needs_dense {
        Some(dense_heff(ctx.params, &ch)?)
    } else {
        None
    };

    let mut records = Vec::with_capacity(ctx.detectors.len());
    for spec in ctx.detectors {
        let (labels, iterations) = match detector_run(spec, ctx.n0) {
            DetectorRun::Mmse => {
                let heff = dense.as_ref().expect("dense built for MMSE");
                let labels = if ctx.wf.mode == WaveformMode::Ofdm {
                    mmse_single_tap(&y, heff, ctx.n0, c)?
                } else {
                    mmse_equalize(&y, heff, ctx.n0, c)?
                };
                (labels, 1u64)
            }
            DetectorRun::Mp(mp_cfg) => {
                let sg = if ctx.wf.mode == WaveformMode::Ofdm {
                    let heff = dense.as_ref().expect("dense built for OFDM MP");
                    let scale = heff.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    SparseGfChannel::from_dense(heff, scale * 1e-9)
                } else {
                    sparse_heff(ctx.params, &ch, mp_cfg.b_trunc)?
                };
                let det = mp_detect(&y, &sg, c, &mp_cfg)?;
                (det.labels, det.iterations as u64)
            }
        };
        records.push(TrialRecord {
            seed,
            waveform: ctx.wf.id(),
            detector: spec.id().to_string(),
            ebn0_db: ctx.ebn0_db,
            bit_errors: count_bit_errors(&tx_labels, &labels),
            bits: (mn * bps) as u64,
            papr,
            iterations,
        });
    }
    Ok(records)
}

#[derive(Clone, Default)]
struct Accum {
    errors: u64,
    bits: u64,
    iterations: u64,
}

/// Runs the BER sweep. Trials fan out across `threads` workers (`None` =
/// rayon default); aggregation is order-independent, so output is identical
/// for any worker count.
pub fn run_ber(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<BerPoint>> {
    cfg.validate_for_ber()?;
    let profile = cfg.resolve_channel()?;
    let ts = profile.sample_interval();
    let cp_len = cfg.cp_len.expect("validated");
    let constellation = cfg.constellation.build();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("failed to build thread pool: {e}")))?;

    let blocks = cfg.blocks_per_point;
    let mut out = Vec::new();
    for wf in &cfg.waveforms {
        let params = wf.frame_params(cp_len, ts, constellation.clone())?;
        let wf_id = wf.id();
        for (point, &ebn0_db) in cfg.ebn0_db.iter().enumerate() {
            let n0 = ebn0_to_n0(ebn0_db, &params);
            let ctx = TrialContext {
                profile: &profile,
                params: &params,
                constellation: &constellation,
                wf,
                detectors: &cfg.detectors,
                ebn0_db,
                n0,
            };
            let zero = || vec![Accum::default(); cfg.detectors.len()];
            let sums: Result<Vec<Accum>> = pool.install(|| {
                (0..blocks)
                    .into_par_iter()
                    .map_init(
                        || Modem::new(params.clone()),
                        |modem, trial| -> Result<Vec<TrialRecord>> {
                            let modem = modem.as_mut().map_err(|e| {
                                Error::Config(format!("modem construction failed: {e}"))
                            })?;
                            run_trial(&ctx, modem, trial_seed(cfg.master_seed, &wf_id, point, trial))
                        },
                    )
                    .try_fold(zero, |mut acc, records| {
                        let records = records?;
                        for (a, r) in acc.iter_mut().zip(&records) {
                            a.errors += r.bit_errors;
                            a.bits += r.bits;
                            a.iterations += r.iterations;
                        }
                        Ok(acc)
                    })
                    .try_reduce(zero, |mut a, b| {
                        for (x, y) in a.iter_mut().zip(&b) {
                            x.errors += y.errors;
                            x.bits += y.bits;
                            x.iterations += y.iterations;
                        }
                        Ok(a)
                    })
            });
            for (spec, acc) in cfg.detectors.iter().zip(sums?) {
                out.push(BerPoint {
                    waveform: wf_id.clone(),
                    detector: spec.id().to_string(),
                    ebn0_db,
                    bit_errors: acc.errors,
                    bits: acc.bits,
                    blocks: blocks as u64,
                    mean_iterations: acc.iterations as f64 / blocks as f64,
                });
            }
        }
    }
    Ok(out)
}

/// Writes points as `waveform,detector,ebn0_db,ber,blocks,mean_iterations`.
pub fn write_ber_csv<W: std::io::Write>(points: &[BerPoint], mut out: W) -> Result<()> {
    writeln!(out, "waveform,detector,ebn0_db,ber,blocks,mean_iterations")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.waveform,
            p.detector,
            fmt_sig9(p.ebn0_db),
            fmt_sig9(p.ber()),
            p.blocks,
            fmt_sig9(p.mean_iterations)
        )?;
    }
    Ok(())
}
