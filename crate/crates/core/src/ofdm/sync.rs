use std::ops::RangeInclusive;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::modem::{ofdm_symbol, preamble_symbols};
use super::{OfdmError, OfdmParams};

/// Minimum peak-to-median ratio of the correlation for a valid lock.
pub const SYNC_THRESHOLD: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyncResult {
    /// Index of the first sample of the frame (start of the preamble's cyclic prefix).
    pub offset: usize,
    pub peak_to_median: f64,
}

/// Locates the frame by correlating against the preamble body.
///
/// The received spectrum is whitened (unit magnitude per bin) before
/// correlating, so a strong narrowband tone cannot mask the peak. `window` is
/// the range of candidate frame starts; by default every start at which a full
/// frame fits.
pub fn synchronize(
    rx: &[Complex64],
    params: &OfdmParams,
    preamble_seed: u64,
    window: Option<RangeInclusive<usize>>,
) -> Result<SyncResult, OfdmError> {
    params.validate()?;
    let frame_len = params.frame_len();
    if rx.len() < frame_len {
        return Err(OfdmError::InvalidArgument(format!(
            "received {} samples, need at least one frame ({frame_len})",
            rx.len()
        )));
    }
    let last_start = rx.len() - frame_len;
    let window = window.unwrap_or(0..=last_start);
    if window.is_empty() || *window.end() > last_start {
        return Err(OfdmError::InvalidArgument(format!(
            "sync window {window:?} must be non-empty and end at or before {last_start}"
        )));
    }

    let n = params.n_fft;
    let mut planner = FftPlanner::new();
    let mut template = Vec::with_capacity(params.symbol_len());
    ofdm_symbol(
        params,
        planner.plan_fft_inverse(n).as_ref(),
        &params.active_bins(),
        &preamble_symbols(params, preamble_seed),
        &mut template,
    );
    let body = &template[params.cp_len..];

    let size = (rx.len() + n).next_power_of_two();
    let fft = planner.plan_fft_forward(size);
    let ifft = planner.plan_fft_inverse(size);
    let mut y = rx.to_vec();
    y.resize(size, Complex64::new(0.0, 0.0));
    fft.process(&mut y);
    let mut p = body.to_vec();
    p.resize(size, Complex64::new(0.0, 0.0));
    fft.process(&mut p);

    let floor = 1e-12 * y.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for (yk, pk) in y.iter_mut().zip(&p) {
        let mag = yk.norm();
        *yk = if mag > floor { *yk / mag * pk.conj() } else { Complex64::new(0.0, 0.0) };
    }
    ifft.process(&mut y);

    let scores: Vec<f64> = window.clone().map(|s| y[s + params.cp_len].norm()).collect();
    let (best, peak) = scores
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let mut sorted = scores.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let ratio = if median > 0.0 { peak / median } else if peak > 0.0 { f64::INFINITY } else { 0.0 };
    // A window of one candidate has no reference level; accept any nonzero peak.
    if (sorted.len() > 1 && ratio < SYNC_THRESHOLD) || peak <= 0.0 {
        return Err(OfdmError::SyncFailure { ratio, threshold: SYNC_THRESHOLD });
    }
    Ok(SyncResult { offset: window.start() + best, peak_to_median: ratio })
}
