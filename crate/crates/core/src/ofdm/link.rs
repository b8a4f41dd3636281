use std::io::Write;
use std::path::Path;

use log::warn;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    apply_link, count_bit_errors, demodulate, modulate_frame, synchronize, BerReport, ChannelEstimator,
    LinkCondition, OfdmError, OfdmParams,
};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkOptions {
    pub estimator: ChannelEstimator,
    /// Samples by which the FFT window is started ahead of the sync peak.
    /// Must not exceed `cp_len` minus the channel length plus one.
    pub timing_backoff: usize,
    /// Data symbols of the first frame kept for the constellation dump.
    pub constellation_symbols: usize,
}

impl Default for LinkOptions {
    fn default() -> Self {
        Self { estimator: ChannelEstimator::Preamble, timing_backoff: 3, constellation_symbols: 2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstellationPoint {
    pub frame: usize,
    pub symbol: usize,
    /// Signed subcarrier index.
    pub subcarrier: i64,
    pub i: f64,
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkRun {
    pub report: BerReport,
    pub frames: usize,
    /// Frames whose bits were decided at random after a sync failure.
    pub sync_failures: usize,
    pub constellation: Vec<ConstellationPoint>,
}

struct FrameOutcome {
    errors: u64,
    sync_failed: bool,
    constellation: Vec<ConstellationPoint>,
}

fn run_frame(
    index: usize,
    base_seed: u64,
    params: &OfdmParams,
    cond: &LinkCondition,
    options: &LinkOptions,
) -> Result<FrameOutcome, OfdmError> {
    let mut rng = rng::stream(base_seed, "frame", &[index as u64]);
    let bits: Vec<bool> = (0..params.bits_per_frame()).map(|_| rng.random()).collect();
    let preamble_seed: u64 = rng.random();
    let frame = modulate_frame(&bits, params, preamble_seed)?;
    let rx = apply_link(&frame, cond, params, &mut rng)?;
    match synchronize(&rx, params, preamble_seed, None) {
        Ok(sync) => {
            let start = sync.offset.saturating_sub(options.timing_backoff);
            let out = demodulate(&rx, start, params, preamble_seed, &options.estimator)?;
            let constellation = if index == 0 {
                let subcarriers = params.active_indices();
                out.symbols
                    .iter()
                    .take(options.constellation_symbols)
                    .enumerate()
                    .flat_map(|(symbol, row)| {
                        row.iter().zip(&subcarriers).map(move |(x, &subcarrier)| ConstellationPoint {
                            frame: index,
                            symbol,
                            subcarrier,
                            i: x.re,
                            q: x.im,
                        })
                    })
                    .collect()
            } else {
                Vec::new()
            };
            Ok(FrameOutcome { errors: count_bit_errors(&bits, &out.bits), sync_failed: false, constellation })
        }
        Err(OfdmError::SyncFailure { ratio, .. }) => {
            warn!("frame {index}: sync failed (peak/median {ratio:.2}); bits decided at random");
            let guesses: Vec<bool> = (0..bits.len()).map(|_| rng.random()).collect();
            Ok(FrameOutcome { errors: count_bit_errors(&bits, &guesses), sync_failed: true, constellation: Vec::new() })
        }
        Err(e) => Err(e),
    }
}

/// Sends `ceil(bits_target / bits_per_frame)` random frames over the link and
/// counts bit errors. Frames run in parallel on independent streams derived
/// from one draw of `rng`, so results do not depend on scheduling.
pub fn run_link<R: Rng + ?Sized>(
    bits_target: usize,
    params: &OfdmParams,
    cond: &LinkCondition,
    options: &LinkOptions,
    rng: &mut R,
) -> Result<LinkRun, OfdmError> {
    params.validate()?;
    cond.validate(params)?;
    if bits_target == 0 {
        return Err(OfdmError::InvalidArgument("bits_target must be at least 1".into()));
    }
    let frames = params.frames_for_bits(bits_target);
    let base_seed: u64 = rng.random();
    let outcomes = (0..frames)
        .into_par_iter()
        .map(|i| run_frame(i, base_seed, params, cond, options))
        .collect::<Result<Vec<_>, _>>()?;
    let errors = outcomes.iter().map(|o| o.errors).sum();
    let sync_failures = outcomes.iter().filter(|o| o.sync_failed).count();
    let constellation = outcomes.into_iter().flat_map(|o| o.constellation).collect();
    Ok(LinkRun {
        report: BerReport::new((frames * params.bits_per_frame()) as u64, errors),
        frames,
        sync_failures,
        constellation,
    })
}

/// Writes samples as interleaved little-endian `f32` I/Q pairs.
pub fn write_iq(path: &Path, samples: &[Complex64]) -> Result<(), OfdmError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for s in samples {
        out.write_all(&(s.re as f32).to_le_bytes())?;
        out.write_all(&(s.im as f32).to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}
