//! PAPR CCDF estimation: random blocks per waveform, empirical exceedance
//! probability on a 0.1 dB grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::csvfmt::fmt_sig9;
use super::trial_seed;
use crate::waveform::{map_bits, papr_db, Modem};
use crate::{Error, Result};

/// One row of a CCDF table: `Pr(PAPR > papr0_db)` for one waveform.
#[derive(Debug, Clone)]
pub struct CcdfRow {
    pub waveform: String,
    pub papr0_db: f64,
    pub prob: f64,
}

fn build_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("failed to build thread pool: {e}")))
}

/// Runs the PAPR experiment: `blocks_per_point` random blocks per waveform,
/// then the empirical tail on a 0.1 dB grid from 0 up to the observed
/// maximum. The tail is non-increasing by construction.
pub fn run_papr(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<CcdfRow>> {
    cfg.validate_for_papr()?;
    let pool = build_pool(threads)?;
    let blocks = cfg.blocks_per_point;
    let mut rows = Vec::new();

    for wf in &cfg.waveforms {
        let wf_id = wf.id();
        let params = wf.frame_params(0, 1.0, cfg.constellation.build())?;
        let bits_per_block = params.block_len() * params.constellation().bits_per_symbol();

        let paprs: Result<Vec<f64>> = pool.install(|| {
            (0..blocks)
                .into_par_iter()
                .map_init(
                    || Modem::new(params.clone()),
                    |modem, trial| -> Result<f64> {
                        let modem = modem.as_mut().map_err(|e| {
                            Error::Config(format!("modem construction failed: {e}"))
                        })?;
                        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(
                            cfg.master_seed,
                            &wf_id,
                            0,
                            trial,
                        ));
                        let bits: Vec<bool> =
                            (0..bits_per_block).map(|_| rand::Rng::random(&mut rng)).collect();
                        let x = map_bits(&bits, modem.params().constellation())?;
                        let block = modem.modulate(&x)?;
                        papr_db(&block.s)
                    },
                )
                .collect()
        });
        let mut paprs = paprs?;
        paprs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("PAPR values are finite"));

        let max_db = paprs.last().copied().unwrap_or(0.0).max(0.0);
        let steps = (max_db * 10.0).ceil() as usize;
        for i in 0..=steps {
            let papr0 = i as f64 * 0.1;
            let below = paprs.partition_point(|&p| p <= papr0);
            rows.push(CcdfRow {
                waveform: wf_id.clone(),
                papr0_db: papr0,
                prob: (paprs.len() - below) as f64 / paprs.len() as f64,
            });
        }
    }
    Ok(rows)
}

/// Writes rows as `waveform,papr0_db,prob`.
pub fn write_papr_csv<W: std::io::Write>(rows: &[CcdfRow], mut out: W) -> Result<()> {
    writeln!(out, "waveform,papr0_db,prob")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.waveform, fmt_sig9(r.papr0_db), fmt_sig9(r.prob))?;
    }
    Ok(())
}
