use rand::Rng;
use rayon::prelude::*;

use super::{cost_of, ChannelOracle, CostKind, CostSpec, OptimizeError};
use crate::physics::{ChannelPair, DmaConfiguration};

/// Evaluated configurations at one frequency. Shared between strategies so
/// that OPT, MAX and LIN all see the same random draws.
#[derive(Clone, Debug)]
pub struct SampleSet {
    pub f_op_hz: f64,
    pub configs: Vec<DmaConfiguration>,
    pub channels: Vec<ChannelPair>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    /// Index and cost of the lowest-cost sample (first one on ties).
    pub fn best(&self, kind: CostKind) -> Option<(usize, f64)> {
        self.channels
            .iter()
            .map(|p| cost_of(p, kind))
            .enumerate()
            .fold(None, |best, (i, c)| match best {
                Some((_, b)) if c >= b => best,
                _ => Some((i, c)),
            })
    }

    pub fn costs(&self, kind: CostKind) -> Vec<f64> {
        self.channels.iter().map(|p| cost_of(p, kind)).collect()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&DmaConfiguration, &ChannelPair)> {
        self.configs.iter().zip(&self.channels)
    }
}

/// Evaluates the oracle on every configuration. Evaluation runs in parallel;
/// results keep the input order.
pub fn evaluate_configs<O: ChannelOracle + ?Sized>(
    oracle: &O,
    f_op_hz: f64,
    configs: Vec<DmaConfiguration>,
) -> Result<SampleSet, OptimizeError> {
    let n = oracle.n_atoms();
    if let Some(bad) = configs.iter().find(|c| c.len() != n) {
        return Err(OptimizeError::InvalidArgument(format!(
            "configuration of length {} for a {n}-element oracle",
            bad.len()
        )));
    }
    let channels = configs
        .par_iter()
        .map(|c| oracle.channels(c, f_op_hz))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SampleSet { f_op_hz, configs, channels })
}

/// Draws `k` i.i.d. uniform configurations and evaluates them.
pub fn sample_channels<O: ChannelOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &O,
    f_op_hz: f64,
    k: usize,
    rng: &mut R,
) -> Result<SampleSet, OptimizeError> {
    if k == 0 {
        return Err(OptimizeError::InvalidArgument("random search needs at least one sample".into()));
    }
    let n = oracle.n_atoms();
    // Draw sequentially so the stream is consumed identically regardless of parallelism.
    let configs = (0..k).map(|_| DmaConfiguration::random(n, rng)).collect();
    evaluate_configs(oracle, f_op_hz, configs)
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub config: DmaConfiguration,
    pub cost: f64,
    pub samples: SampleSet,
}

/// Lowest-cost configuration among an explicit candidate list.
pub fn search_over<O: ChannelOracle + ?Sized>(
    oracle: &O,
    spec: &CostSpec,
    candidates: Vec<DmaConfiguration>,
) -> Result<SearchOutcome, OptimizeError> {
    if candidates.is_empty() {
        return Err(OptimizeError::InvalidArgument("no candidate configurations".into()));
    }
    let samples = evaluate_configs(oracle, spec.f_op_hz, candidates)?;
    let (index, cost) = samples.best(spec.kind).expect("non-empty sample set");
    Ok(SearchOutcome { config: samples.configs[index].clone(), cost, samples })
}

/// Best of `k` uniformly random configurations.
pub fn random_search<O: ChannelOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &O,
    spec: &CostSpec,
    k: usize,
    rng: &mut R,
) -> Result<SearchOutcome, OptimizeError> {
    let samples = sample_channels(oracle, spec.f_op_hz, k, rng)?;
    let (index, cost) = samples.best(spec.kind).expect("non-empty sample set");
    Ok(SearchOutcome { config: samples.configs[index].clone(), cost, samples })
}
