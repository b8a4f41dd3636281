use serde::{Deserialize, Serialize};

use super::OfdmError;

/// OFDM numerology.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfdmParams {
    pub n_fft: usize,
    /// Active data carriers, split evenly around a null DC bin.
    pub n_active: usize,
    pub cp_len: usize,
    pub data_symbols_per_frame: usize,
    pub preamble_symbols: usize,
    pub bits_per_symbol: usize,
    pub sample_rate_hz: f64,
    pub bandwidth_hz: f64,
}

impl Default for OfdmParams {
    fn default() -> Self {
        Self {
            n_fft: 256,
            n_active: 152,
            cp_len: 32,
            data_symbols_per_frame: 20,
            preamble_symbols: 1,
            bits_per_symbol: 2,
            sample_rate_hz: 15e6,
            bandwidth_hz: 15e6,
        }
    }
}

impl OfdmParams {
    pub fn validate(&self) -> Result<(), OfdmError> {
        let bad = |msg: String| Err(OfdmError::InvalidParams(msg));
        if self.n_active == 0 || !self.n_active.is_multiple_of(2) || self.n_active > self.n_fft - 1 {
            return bad(format!("n_active = {} must be even, positive and below n_fft", self.n_active));
        }
        if self.cp_len >= self.n_fft {
            return bad(format!("cp_len = {} must be shorter than n_fft = {}", self.cp_len, self.n_fft));
        }
        if self.bits_per_symbol != 2 {
            return bad("only QPSK (2 bits per symbol) is supported".into());
        }
        if self.preamble_symbols != 1 {
            return bad("exactly one preamble symbol is supported".into());
        }
        if self.data_symbols_per_frame == 0 {
            return bad("a frame needs at least one data symbol".into());
        }
        if !(self.sample_rate_hz > 0.0 && self.bandwidth_hz > 0.0) {
            return bad("sample rate and bandwidth must be positive".into());
        }
        Ok(())
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.bandwidth_hz / self.n_fft as f64
    }

    pub fn symbol_len(&self) -> usize {
        self.n_fft + self.cp_len
    }

    pub fn frame_len(&self) -> usize {
        (self.preamble_symbols + self.data_symbols_per_frame) * self.symbol_len()
    }

    pub fn bits_per_frame(&self) -> usize {
        self.data_symbols_per_frame * self.n_active * self.bits_per_symbol
    }

    /// Signed subcarrier indices of the active carriers, ascending in frequency:
    /// `-n_active/2 ..= -1` then `1 ..= n_active/2`.
    pub fn active_indices(&self) -> Vec<i64> {
        let half = (self.n_active / 2) as i64;
        (-half..0).chain(1..=half).collect()
    }

    /// FFT bin (natural order) holding signed subcarrier `k`.
    pub fn bin_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n_fft as i64) as usize
    }

    /// Signed subcarrier index of FFT bin `bin`.
    pub fn signed_index(&self, bin: usize) -> i64 {
        let n = self.n_fft as i64;
        let b = bin as i64;
        if b < n / 2 {
            b
        } else {
            b - n
        }
    }

    pub fn active_bins(&self) -> Vec<usize> {
        self.active_indices().into_iter().map(|k| self.bin_of(k)).collect()
    }

    /// Frames needed to carry at least `bits` payload bits.
    pub fn frames_for_bits(&self, bits: usize) -> usize {
        bits.div_ceil(self.bits_per_frame())
    }

    /// Receiver SNR (signal power over noise power in the sampled band) that
    /// yields the given Eb/N0 on the active carriers.
    pub fn snr_db_for_ebn0(&self, ebn0_db: f64) -> f64 {
        let occupancy = self.n_active as f64 / self.n_fft as f64;
        ebn0_db + 10.0 * (self.bits_per_symbol as f64).log10() + 10.0 * occupancy.log10()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_numerology() {
        let p = OfdmParams::default();
        p.validate().unwrap();
        assert_eq!(p.subcarrier_spacing_hz(), 58_593.75);
        assert_eq!(p.frame_len(), 6048);
        assert_eq!(p.bits_per_frame(), 6080);
        assert_eq!(p.frames_for_bits(167_200), 28);
        assert_eq!(p.frames_for_bits(167_200) * p.bits_per_frame(), 170_240);
        let bins = p.active_bins();
        assert_eq!(bins.len(), 152);
        assert!(!bins.contains(&0));
        assert_eq!(p.active_indices()[0], -76);
        assert_eq!(p.bin_of(-76), 180);
        assert_eq!(p.signed_index(180), -76);
        // Guard band: signed indices 77..=128 are unused on both sides.
        assert!(!bins.contains(&77) && !bins.contains(&128) && !bins.contains(&179));
    }

    #[test]
    fn invalid_numerology_is_rejected() {
        assert!(OfdmParams { n_active: 151, ..Default::default() }.validate().is_err());
        assert!(OfdmParams { n_active: 256, ..Default::default() }.validate().is_err());
        assert!(OfdmParams { cp_len: 256, ..Default::default() }.validate().is_err());
    }
}
