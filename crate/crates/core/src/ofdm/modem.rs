use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;

use super::{OfdmError, OfdmParams};
use crate::rng;

/// One transmitted frame: a preamble symbol followed by the data symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub bits: Vec<bool>,
    pub tx_samples: Vec<Complex64>,
    pub preamble_seed: u64,
}

/// Gray QPSK: `(b0, b1) -> ((1 - 2 b0) + i (1 - 2 b1)) / sqrt(2)`.
pub fn gray_map(b0: bool, b1: bool) -> Complex64 {
    let s = |b: bool| if b { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    Complex64::new(s(b0), s(b1))
}

/// Hard decision inverse of [`gray_map`].
pub fn gray_demap(x: Complex64) -> (bool, bool) {
    (x.re < 0.0, x.im < 0.0)
}

/// Known preamble constellation points on the active carriers.
pub fn preamble_symbols(params: &OfdmParams, preamble_seed: u64) -> Vec<Complex64> {
    let mut rng = rng::stream(preamble_seed, "preamble", &[]);
    (0..params.n_active).map(|_| gray_map(rng.random(), rng.random())).collect()
}

/// Unitary inverse DFT of the active-carrier values, with cyclic prefix.
pub(crate) fn ofdm_symbol(
    params: &OfdmParams,
    ifft: &dyn rustfft::Fft<f64>,
    bins: &[usize],
    values: &[Complex64],
    out: &mut Vec<Complex64>,
) {
    let n = params.n_fft;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (&b, &v) in bins.iter().zip(values) {
        buf[b] = v;
    }
    ifft.process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|x| *x *= scale);
    out.extend_from_slice(&buf[n - params.cp_len..]);
    out.extend_from_slice(&buf);
}

pub fn modulate_frame(bits: &[bool], params: &OfdmParams, preamble_seed: u64) -> Result<Frame, OfdmError> {
    params.validate()?;
    if bits.len() != params.bits_per_frame() {
        return Err(OfdmError::InvalidArgument(format!(
            "frame carries {} bits, got {}",
            params.bits_per_frame(),
            bits.len()
        )));
    }
    let ifft = FftPlanner::new().plan_fft_inverse(params.n_fft);
    let bins = params.active_bins();
    let mut tx = Vec::with_capacity(params.frame_len());
    ofdm_symbol(params, ifft.as_ref(), &bins, &preamble_symbols(params, preamble_seed), &mut tx);
    let per_symbol = params.n_active * params.bits_per_symbol;
    for chunk in bits.chunks(per_symbol) {
        let values: Vec<Complex64> = chunk.chunks(2).map(|b| gray_map(b[0], b[1])).collect();
        ofdm_symbol(params, ifft.as_ref(), &bins, &values, &mut tx);
    }
    Ok(Frame { bits: bits.to_vec(), tx_samples: tx, preamble_seed })
}
