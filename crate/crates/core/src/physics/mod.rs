//! Mutual-coupling-aware ground truth for the two wireless channels seen by
//! the metasurface receiver, in place of a measured (VNA) channel.

mod config;
mod model;
mod synth;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::DmaConfiguration;
pub use model::{
    lorentzian, Band, CavityMode, CouplingOperator, FrequencySnapshot, ModelParts, PhysicsModel, Polarizability,
    PortCoupling, Resonance, Transmitter, SPEED_OF_LIGHT,
};
pub use synth::{build_model, seeded_configuration, ModelParams, Placement, BOUND_PER_UNIT_STRENGTH, MAX_CONTRACTION};

#[derive(Debug, Error)]
pub enum PhysicsError {
    #[error("configuration bit {index} has value {value}; only 0 and 1 are allowed")]
    InvalidBit { index: usize, value: u8 },
    #[error("configuration character {index} is {value:?}; only '0' and '1' are allowed")]
    InvalidBitChar { index: usize, value: char },
    #[error("invalid band [{start_hz}, {stop_hz}] Hz")]
    InvalidBand { start_hz: f64, stop_hz: f64 },
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("{what} has length {found}, expected {expected}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    #[error("frequency {freq_hz} Hz lies outside the model band [{}, {}] Hz", band.start_hz, band.stop_hz)]
    OutOfBand { freq_hz: f64, band: Band },
    #[error("singular resolvent at {freq_hz} Hz: {detail}")]
    Singular { freq_hz: f64, detail: String },
    #[error("model construction failed at {freq_hz} Hz: {detail}")]
    Construction { freq_hz: f64, detail: String },
    #[error("empty frequency grid")]
    EmptyGrid,
    #[error("frequency grid is not strictly increasing at index {0}")]
    UnsortedGrid(usize),
    #[error("model serialization: {0}")]
    Serialization(String),
}

/// Desired (H1 to receiver) and undesired (H2 to receiver) channel coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelPair {
    pub h_des: Complex64,
    pub h_und: Complex64,
}

impl ChannelPair {
    pub fn gains_db(&self) -> (f64, f64) {
        (gain_db(self.h_des), gain_db(self.h_und))
    }

    /// Desired minus undesired gain, dB.
    pub fn discrimination_db(&self) -> f64 {
        gain_db(self.h_des) - gain_db(self.h_und)
    }
}

/// Voltage gain `20 log10 |h|`; `h = 0` maps to negative infinity.
pub fn gain_db(h: Complex64) -> f64 {
    let mag = h.norm();
    if mag == 0.0 {
        f64::NEG_INFINITY
    } else {
        20.0 * mag.log10()
    }
}

/// Channel gains over a frequency grid for one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSweep {
    pub frequencies: Vec<f64>,
    pub gains_des_db: Vec<f64>,
    pub gains_und_db: Vec<f64>,
}

impl SpectrumSweep {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

/// `points` equally spaced frequencies covering `center ± half_span`.
pub fn linear_grid(center_hz: f64, half_span_hz: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![center_hz],
        _ => (0..points)
            .map(|k| center_hz - half_span_hz + 2.0 * half_span_hz * k as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Evaluates both channels of `config` at every grid frequency.
pub fn sweep(model: &PhysicsModel, config: &DmaConfiguration, grid: &[f64]) -> Result<SpectrumSweep, PhysicsError> {
    if grid.is_empty() {
        return Err(PhysicsError::EmptyGrid);
    }
    if let Some(i) = grid.windows(2).position(|w| w[1] <= w[0]) {
        return Err(PhysicsError::UnsortedGrid(i + 1));
    }
    let gains = grid
        .par_iter()
        .map(|&f| model.channel(config, f).map(|pair| pair.gains_db()))
        .collect::<Result<Vec<_>, _>>()?;
    let (gains_des_db, gains_und_db) = gains.into_iter().unzip();
    Ok(SpectrumSweep { frequencies: grid.to_vec(), gains_des_db, gains_und_db })
}
