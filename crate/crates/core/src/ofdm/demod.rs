use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::modem::{gray_demap, gray_map, preamble_symbols};
use super::{OfdmError, OfdmParams};
use crate::rng;

/// Estimates below this magnitude are treated as erasures.
const ERASURE_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ChannelEstimator {
    /// Least squares on the preamble, `H = Y / X`.
    Preamble,
    /// Preamble LS refined by averaging decision-directed estimates over the data symbols.
    DataAided,
    /// Genie knowledge: per-bin channel in natural FFT order, length `n_fft`.
    Known(Vec<Complex64>),
}

/// Per-active-carrier channel estimate, ascending in frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelEstimate {
    pub h: Vec<Complex64>,
    pub erased: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Demodulated {
    pub bits: Vec<bool>,
    pub estimate: ChannelEstimate,
    /// Equalized data symbols: `[symbol][active carrier]`.
    pub symbols: Vec<Vec<Complex64>>,
}

fn decide(symbols: &[Vec<Complex64>], erased: &[bool], preamble_seed: u64) -> Vec<bool> {
    let mut fallback = rng::stream(preamble_seed, "erasure", &[]);
    let mut bits = Vec::with_capacity(symbols.len() * erased.len() * 2);
    for row in symbols {
        for (x, &e) in row.iter().zip(erased) {
            let (b0, b1) = if e { (fallback.random(), fallback.random()) } else { gray_demap(*x) };
            bits.push(b0);
            bits.push(b1);
        }
    }
    bits
}

/// Demodulates one frame starting at `offset` (first sample of the preamble's
/// cyclic prefix) and zero-forcing equalizes the data symbols.
///
/// Erased carriers (estimate below 1e-12) get bits from a stream seeded by
/// `preamble_seed`, so the decision is reproducible.
pub fn demodulate(
    rx: &[Complex64],
    offset: usize,
    params: &OfdmParams,
    preamble_seed: u64,
    estimator: &ChannelEstimator,
) -> Result<Demodulated, OfdmError> {
    params.validate()?;
    if offset + params.frame_len() > rx.len() {
        return Err(OfdmError::InvalidArgument(format!(
            "frame at offset {offset} overruns the {} received samples",
            rx.len()
        )));
    }
    let n = params.n_fft;
    let bins = params.active_bins();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let scale = 1.0 / (n as f64).sqrt();
    let symbol_count = params.preamble_symbols + params.data_symbols_per_frame;
    let received: Vec<Vec<Complex64>> = (0..symbol_count)
        .map(|j| {
            let start = offset + j * params.symbol_len() + params.cp_len;
            let mut buf = rx[start..start + n].to_vec();
            fft.process(&mut buf);
            bins.iter().map(|&b| buf[b] * scale).collect()
        })
        .collect();
    let (preamble_rx, data_rx) = received.split_at(params.preamble_symbols);
    let known = preamble_symbols(params, preamble_seed);

    let mut h: Vec<Complex64> = match estimator {
        ChannelEstimator::Known(h_k) => {
            if h_k.len() != n {
                return Err(OfdmError::InvalidArgument(format!("known channel has {} bins, expected {n}", h_k.len())));
            }
            bins.iter().map(|&b| h_k[b]).collect()
        }
        _ => preamble_rx[0].iter().zip(&known).map(|(y, x)| y / x).collect(),
    };
    let equalize = |h: &[Complex64]| -> (Vec<bool>, Vec<Vec<Complex64>>) {
        let erased: Vec<bool> = h.iter().map(|v| !(v.norm() >= ERASURE_FLOOR)).collect();
        let symbols = data_rx
            .iter()
            .map(|row| row.iter().zip(h).zip(&erased).map(|((y, hk), &e)| if e { *y } else { y / hk }).collect())
            .collect();
        (erased, symbols)
    };
    let (mut erased, mut symbols) = equalize(&h);

    if matches!(estimator, ChannelEstimator::DataAided) {
        let total = 1.0 + data_rx.len() as f64;
        h = (0..bins.len())
            .map(|k| {
                let decided: Complex64 = data_rx
                    .iter()
                    .zip(&symbols)
                    .map(|(row, eq)| {
                        let (b0, b1) = gray_demap(eq[k]);
                        row[k] / gray_map(b0, b1)
                    })
                    .sum();
                (h[k] + decided) / total
            })
            .collect();
        (erased, symbols) = equalize(&h);
    }

    let bits = decide(&symbols, &erased, preamble_seed);
    Ok(Demodulated { bits, estimate: ChannelEstimate { h, erased }, symbols })
}
