//! DMA configuration strategies against a black-box channel oracle.
//!
//! OPT and MAX run a random-search initialization followed by coordinate
//! descent directly on the oracle. LIN fits an affine (mutual-coupling
//! unaware) surrogate to the same random samples and descends on its
//! predictions. RAND draws a single random configuration.

mod codebook;
mod cost;
mod descent;
mod search;
mod strategy;
mod surrogate;

use std::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

use crate::physics::{ChannelPair, DmaConfiguration, FrequencySnapshot, PhysicsError, PhysicsModel};

pub use codebook::{Codebook, CodebookEntry};
pub use cost::{cost, cost_of, CostKind, CostSpec};
pub use descent::{coordinate_descent, descend_on_oracle, DescentOutcome, TracePoint};
pub use search::{evaluate_configs, random_search, sample_channels, search_over, SampleSet, SearchOutcome};
pub use strategy::{
    optimize_lin, optimize_lin_from_samples, optimize_oracle_from_samples, rand_config, run_strategies,
    OptimizationResult, Strategy, StrategySettings,
};
pub use surrogate::{fit_linear_surrogate, AffineMap, FitDiagnostics, LinearSurrogate};

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("surrogate fit: {0}")]
    Surrogate(String),
    #[error("codebook: {0}")]
    Codebook(String),
}

/// Anything that returns the desired/undesired channel pair for a configuration.
pub trait ChannelOracle: Sync {
    fn n_atoms(&self) -> usize;
    fn channels(&self, config: &DmaConfiguration, freq_hz: f64) -> Result<ChannelPair, PhysicsError>;
}

impl ChannelOracle for PhysicsModel {
    fn n_atoms(&self) -> usize {
        PhysicsModel::n_atoms(self)
    }

    fn channels(&self, config: &DmaConfiguration, freq_hz: f64) -> Result<ChannelPair, PhysicsError> {
        self.channel(config, freq_hz)
    }
}

/// A snapshot answers only at its own frequency; it avoids re-synthesizing the
/// coupling operator on every call.
impl ChannelOracle for FrequencySnapshot {
    fn n_atoms(&self) -> usize {
        FrequencySnapshot::n_atoms(self)
    }

    fn channels(&self, config: &DmaConfiguration, freq_hz: f64) -> Result<ChannelPair, PhysicsError> {
        if freq_hz != self.freq_hz {
            return Err(PhysicsError::InvalidParameter(format!(
                "snapshot at {} Hz queried at {freq_hz} Hz",
                self.freq_hz
            )));
        }
        self.channel(config)
    }
}

/// Wraps an oracle and counts evaluations.
pub struct CountingOracle<'a, O: ?Sized> {
    inner: &'a O,
    calls: AtomicUsize,
}

impl<'a, O: ChannelOracle + ?Sized> CountingOracle<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        Self { inner, calls: AtomicUsize::new(0) }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

impl<O: ChannelOracle + ?Sized> ChannelOracle for CountingOracle<'_, O> {
    fn n_atoms(&self) -> usize {
        self.inner.n_atoms()
    }

    fn channels(&self, config: &DmaConfiguration, freq_hz: f64) -> Result<ChannelPair, PhysicsError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.channels(config, freq_hz)
    }
}
