use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    cost_of, descend_on_oracle, fit_linear_surrogate, sample_channels, coordinate_descent, ChannelOracle, CostKind,
    CostSpec, OptimizeError, SampleSet, TracePoint,
};
use crate::physics::{ChannelPair, DmaConfiguration};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Strategy {
    /// Coordinate descent on the true beam-and-null cost.
    Opt,
    /// Coordinate descent on the desired-channel gain only.
    Max,
    /// Coordinate descent on an affine surrogate fitted to the random samples.
    Lin,
    /// One random configuration.
    Rand,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Opt, Strategy::Max, Strategy::Lin, Strategy::Rand];

    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Opt => "OPT",
            Strategy::Max => "MAX",
            Strategy::Lin => "LIN",
            Strategy::Rand => "RAND",
        }
    }

    /// Cost the strategy minimizes.
    pub fn cost_kind(&self) -> CostKind {
        match self {
            Strategy::Max => CostKind::BeamOnly,
            _ => CostKind::BeamAndNull,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Strategy {
    type Err = OptimizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "OPT" => Ok(Strategy::Opt),
            "MAX" => Ok(Strategy::Max),
            "LIN" => Ok(Strategy::Lin),
            "RAND" => Ok(Strategy::Rand),
            other => Err(OptimizeError::InvalidArgument(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategySettings {
    /// Random configurations measured before the descent.
    pub samples: usize,
    pub max_sweeps: usize,
}

impl Default for StrategySettings {
    fn default() -> Self {
        Self { samples: 500, max_sweeps: 5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub strategy: Strategy,
    pub kind: CostKind,
    pub f_op_hz: f64,
    pub config: DmaConfiguration,
    /// True oracle cost of `config`.
    pub cost: f64,
    /// True oracle cost of the starting configuration.
    pub init_cost: f64,
    /// Final value of the objective the descent actually minimized
    /// (the surrogate prediction for LIN).
    pub descent_cost: f64,
    pub trace: Vec<TracePoint>,
    pub oracle_calls: usize,
    pub sweeps: usize,
    /// True channels of `config` at `f_op_hz`.
    pub channels: ChannelPair,
}

/// OPT/MAX-style optimization: best sample as the start, then descent on the oracle.
pub fn optimize_oracle_from_samples<O: ChannelOracle + ?Sized>(
    oracle: &O,
    strategy: Strategy,
    spec: &CostSpec,
    samples: &SampleSet,
    settings: &StrategySettings,
) -> Result<OptimizationResult, OptimizeError> {
    let (index, init_cost) = samples
        .best(spec.kind)
        .ok_or_else(|| OptimizeError::InvalidArgument("empty sample set".into()))?;
    let descent = descend_on_oracle(
        oracle,
        spec,
        samples.configs[index].clone(),
        Some(init_cost),
        settings.max_sweeps,
    )?;
    let channels = oracle.channels(&descent.config, spec.f_op_hz)?;
    Ok(OptimizationResult {
        strategy,
        kind: spec.kind,
        f_op_hz: spec.f_op_hz,
        cost: cost_of(&channels, spec.kind),
        init_cost,
        descent_cost: descent.cost,
        trace: descent.trace,
        oracle_calls: samples.len() + descent.evaluations + 1,
        sweeps: descent.sweeps,
        channels,
        config: descent.config,
    })
}

/// LIN: fit the affine surrogate to the samples, descend on its predictions
/// from the best true sample, then measure the result on the oracle.
pub fn optimize_lin_from_samples<O: ChannelOracle + ?Sized>(
    oracle: &O,
    spec: &CostSpec,
    samples: &SampleSet,
    settings: &StrategySettings,
) -> Result<OptimizationResult, OptimizeError> {
    let surrogate = fit_linear_surrogate(samples.pairs())?;
    let (index, init_cost) = samples
        .best(spec.kind)
        .ok_or_else(|| OptimizeError::InvalidArgument("empty sample set".into()))?;
    let descent = coordinate_descent(samples.configs[index].clone(), None, settings.max_sweeps, |c| {
        Ok::<_, OptimizeError>(cost_of(&surrogate.predict(c), spec.kind))
    })?;
    let channels = oracle.channels(&descent.config, spec.f_op_hz)?;
    Ok(OptimizationResult {
        strategy: Strategy::Lin,
        kind: spec.kind,
        f_op_hz: spec.f_op_hz,
        cost: cost_of(&channels, spec.kind),
        init_cost,
        descent_cost: descent.cost,
        trace: descent.trace,
        oracle_calls: samples.len() + 1,
        sweeps: descent.sweeps,
        channels,
        config: descent.config,
    })
}

/// LIN with its own random samples.
pub fn optimize_lin<O: ChannelOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &O,
    spec: &CostSpec,
    settings: &StrategySettings,
    rng: &mut R,
) -> Result<OptimizationResult, OptimizeError> {
    let samples = sample_channels(oracle, spec.f_op_hz, settings.samples, rng)?;
    optimize_lin_from_samples(oracle, spec, &samples, settings)
}

/// Uniformly random configuration.
pub fn rand_config<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DmaConfiguration, OptimizeError> {
    if n == 0 {
        return Err(OptimizeError::InvalidArgument("configuration length must be at least 1".into()));
    }
    Ok(DmaConfiguration::random(n, rng))
}

/// Runs the requested strategies at one operating frequency.
///
/// OPT, MAX and LIN share one set of random samples drawn from `sample_rng`;
/// RAND draws from `rand_rng`.
pub fn run_strategies<O, R1, R2>(
    oracle: &O,
    f_op_hz: f64,
    strategies: &[Strategy],
    settings: &StrategySettings,
    sample_rng: &mut R1,
    rand_rng: &mut R2,
) -> Result<Vec<OptimizationResult>, OptimizeError>
where
    O: ChannelOracle + ?Sized,
    R1: Rng + ?Sized,
    R2: Rng + ?Sized,
{
    let needs_samples = strategies.iter().any(|s| *s != Strategy::Rand);
    let samples = if needs_samples {
        Some(sample_channels(oracle, f_op_hz, settings.samples, sample_rng)?)
    } else {
        None
    };
    strategies
        .iter()
        .map(|&strategy| {
            let spec = CostSpec::new(strategy.cost_kind(), f_op_hz);
            match strategy {
                Strategy::Opt | Strategy::Max => optimize_oracle_from_samples(
                    oracle,
                    strategy,
                    &spec,
                    samples.as_ref().expect("samples drawn"),
                    settings,
                ),
                Strategy::Lin => optimize_lin_from_samples(oracle, &spec, samples.as_ref().expect("samples drawn"), settings),
                Strategy::Rand => {
                    let config = rand_config(oracle.n_atoms(), rand_rng)?;
                    let channels = oracle.channels(&config, f_op_hz)?;
                    let cost = cost_of(&channels, spec.kind);
                    Ok(OptimizationResult {
                        strategy,
                        kind: spec.kind,
                        f_op_hz,
                        config,
                        cost,
                        init_cost: cost,
                        descent_cost: cost,
                        trace: vec![TracePoint { evaluation: 1, cost }],
                        oracle_calls: 1,
                        sweeps: 0,
                        channels,
                    })
                }
            }
        })
        .collect()
}
