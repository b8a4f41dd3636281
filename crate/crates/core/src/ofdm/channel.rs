use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use super::{Frame, LinkCondition, OfdmError, OfdmParams};

/// Taps below this fraction of the largest tap are zeroed.
const TAP_FLOOR: f64 = 1e-12;
/// Discarded energy fraction above which truncation is reported.
const TRUNCATION_WARNING: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct ImpulseResponse {
    /// First `cp_len` taps of the inverse DFT of the per-bin channel.
    pub taps: Vec<Complex64>,
    /// Energy fraction of the full response lost by truncation.
    pub discarded_fraction: f64,
}

/// Impulse response whose DFT approximates the per-bin channel `h_k`.
pub fn impulse_response(h_k: &[Complex64], params: &OfdmParams) -> Result<ImpulseResponse, OfdmError> {
    let n = params.n_fft;
    if h_k.len() != n {
        return Err(OfdmError::InvalidArgument(format!("channel has {} bins, expected {n}", h_k.len())));
    }
    let mut full = h_k.to_vec();
    FftPlanner::new().plan_fft_inverse(n).process(&mut full);
    full.iter_mut().for_each(|x| *x /= n as f64);
    let total: f64 = full.iter().map(|x| x.norm_sqr()).sum();
    let kept: f64 = full[..params.cp_len].iter().map(|x| x.norm_sqr()).sum();
    let discarded_fraction = if total > 0.0 { 1.0 - kept / total } else { 0.0 };
    let peak = full.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let taps = full[..params.cp_len]
        .iter()
        .map(|&x| if x.norm() < TAP_FLOOR * peak { Complex64::new(0.0, 0.0) } else { x })
        .collect();
    Ok(ImpulseResponse { taps, discarded_fraction })
}

/// Passes a frame through the link: multipath, jammer tone, delay and AWGN.
///
/// Output length is `sample_delay + frame_len + cp_len`. The jammer phase is
/// drawn first, then the noise.
pub fn apply_link<R: Rng + ?Sized>(
    frame: &Frame,
    cond: &LinkCondition,
    params: &OfdmParams,
    rng: &mut R,
) -> Result<Vec<Complex64>, OfdmError> {
    params.validate()?;
    cond.validate(params)?;
    if frame.tx_samples.len() != params.frame_len() {
        return Err(OfdmError::InvalidArgument(format!(
            "frame has {} samples, expected {}",
            frame.tx_samples.len(),
            params.frame_len()
        )));
    }
    let ir = impulse_response(&cond.h_des_k, params)?;
    if ir.discarded_fraction > TRUNCATION_WARNING {
        warn!(
            "impulse response truncated to {} taps discards {:.2}% of its energy; cyclic prefix is insufficient",
            params.cp_len,
            100.0 * ir.discarded_fraction
        );
    }

    let len = cond.sample_delay + params.frame_len() + params.cp_len;
    let mut rx = vec![Complex64::new(0.0, 0.0); len];
    for (l, &h) in ir.taps.iter().enumerate() {
        if h == Complex64::new(0.0, 0.0) {
            continue;
        }
        let out = &mut rx[cond.sample_delay + l..];
        for (y, &x) in out.iter_mut().zip(&frame.tx_samples) {
            *y += h * x;
        }
    }

    let tx_power = params.n_active as f64 / params.n_fft as f64;
    let bins = params.active_bins();
    let mean_gain = bins.iter().map(|&b| cond.h_des_k[b].norm_sqr()).sum::<f64>() / bins.len() as f64;
    let signal_power = tx_power * mean_gain;

    let phase0: f64 = rng.random::<f64>() * 2.0 * PI;
    if cond.jam_rel_db.is_finite() {
        let amplitude = (tx_power * 10f64.powf(cond.jam_rel_db / 10.0)).sqrt() * cond.h_und_jam.norm();
        let step = 2.0 * PI * cond.jam_offset_hz / params.sample_rate_hz;
        for (n, y) in rx.iter_mut().enumerate() {
            *y += Complex64::from_polar(amplitude, step * n as f64 + phase0);
        }
    }

    if cond.snr_db.is_finite() {
        let sigma = (signal_power / 10f64.powf(cond.snr_db / 10.0) / 2.0).sqrt();
        for y in rx.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *y += Complex64::new(re, im) * sigma;
        }
    }
    Ok(rx)
}
