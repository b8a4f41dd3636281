//! QPSK-OFDM baseband transceiver: framing, link impairments (multipath,
//! narrowband jammer, AWGN), correlation sync, LS channel estimation and
//! zero-forcing equalization.
//!
//! Per-subcarrier arrays of length `n_fft` are indexed by FFT bin in natural
//! order (bin `b` holds signed subcarrier `b` for `b < n_fft/2`, else `b - n_fft`).
//! Time-domain samples use the unitary DFT, so per-symbol energy is equal in
//! both domains.

mod channel;
mod demod;
mod link;
mod modem;
mod params;
mod sync;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use channel::{apply_link, impulse_response, ImpulseResponse};
pub use demod::{demodulate, ChannelEstimate, ChannelEstimator, Demodulated};
pub use link::{run_link, write_iq, ConstellationPoint, LinkOptions, LinkRun};
pub use modem::{gray_demap, gray_map, modulate_frame, preamble_symbols, Frame};
pub use params::OfdmParams;
pub use sync::{synchronize, SyncResult, SYNC_THRESHOLD};

#[derive(Debug, Error)]
pub enum OfdmError {
    #[error("invalid OFDM parameters: {0}")]
    InvalidParams(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("synchronization failed: peak-to-median ratio {ratio:.2} below {threshold}")]
    SyncFailure { ratio: f64, threshold: f64 },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Channel, jammer and noise conditions of one link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkCondition {
    /// Desired channel per FFT bin (natural order), length `n_fft`.
    pub h_des_k: Vec<Complex64>,
    /// Undesired (jammer) channel at the jammer frequency.
    pub h_und_jam: Complex64,
    /// Jammer-to-signal power ratio at the transmitter ports, dB. `-inf` disables the jammer.
    pub jam_rel_db: f64,
    /// Received signal-to-noise ratio, dB. `+inf` disables noise.
    pub snr_db: f64,
    pub sample_delay: usize,
    pub jam_offset_hz: f64,
}

impl LinkCondition {
    /// Unit flat channel, no jammer, no noise, no delay; jammer offset 2.5 bins.
    pub fn ideal(params: &OfdmParams) -> Self {
        Self {
            h_des_k: vec![Complex64::new(1.0, 0.0); params.n_fft],
            h_und_jam: Complex64::new(1.0, 0.0),
            jam_rel_db: f64::NEG_INFINITY,
            snr_db: f64::INFINITY,
            sample_delay: 0,
            jam_offset_hz: 2.5 * params.subcarrier_spacing_hz(),
        }
    }

    pub fn validate(&self, params: &OfdmParams) -> Result<(), OfdmError> {
        let bad = |msg: String| Err(OfdmError::InvalidArgument(msg));
        if self.h_des_k.len() != params.n_fft {
            return bad(format!("h_des_k has {} entries, expected {}", self.h_des_k.len(), params.n_fft));
        }
        if self.h_des_k.iter().any(|h| !h.is_finite()) || !self.h_und_jam.is_finite() {
            return bad("channel coefficients must be finite".into());
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return bad(format!("snr_db = {} must be finite or +inf", self.snr_db));
        }
        if self.jam_rel_db.is_nan() || self.jam_rel_db == f64::INFINITY {
            return bad(format!("jam_rel_db = {} must be finite or -inf", self.jam_rel_db));
        }
        if !self.jam_offset_hz.is_finite() {
            return bad("jam_offset_hz must be finite".into());
        }
        Ok(())
    }
}

/// Bit error count with the at-least-100-errors validity rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerReport {
    pub bits_total: u64,
    pub bits_error: u64,
    pub ber: f64,
    pub statistically_valid: bool,
}

impl BerReport {
    pub const MIN_ERRORS: u64 = 100;

    pub fn new(bits_total: u64, bits_error: u64) -> Self {
        let ber = if bits_total == 0 { 0.0 } else { bits_error as f64 / bits_total as f64 };
        Self { bits_total, bits_error, ber, statistically_valid: bits_error >= Self::MIN_ERRORS }
    }

    pub fn merge(&self, other: &BerReport) -> Self {
        Self::new(self.bits_total + other.bits_total, self.bits_error + other.bits_error)
    }
}

pub(crate) fn count_bit_errors(a: &[bool], b: &[bool]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

#[cfg(test)]
mod tests;
