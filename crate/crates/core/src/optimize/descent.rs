use serde::{Deserialize, Serialize};

use super::{cost, ChannelOracle, CostSpec, OptimizeError};
use crate::physics::DmaConfiguration;

/// Cost after an accepted move, tagged with the evaluation that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub evaluation: usize,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DescentOutcome {
    pub config: DmaConfiguration,
    pub cost: f64,
    pub init_cost: f64,
    /// Starting point followed by every accepted flip.
    pub trace: Vec<TracePoint>,
    /// Cost evaluations spent, including the initial one when it was not supplied.
    pub evaluations: usize,
    pub sweeps: usize,
}

/// Binary coordinate descent.
///
/// Visits elements in ascending index order and keeps a flip only if it
/// strictly lowers the cost. Stops after `max_sweeps` sweeps or after the
/// first sweep without an accepted flip.
pub fn coordinate_descent<F, E>(
    init: DmaConfiguration,
    init_cost: Option<f64>,
    max_sweeps: usize,
    mut cost_fn: F,
) -> Result<DescentOutcome, E>
where
    F: FnMut(&DmaConfiguration) -> Result<f64, E>,
{
    let mut evaluations = 0;
    let init_cost = match init_cost {
        Some(c) => c,
        None => {
            evaluations += 1;
            cost_fn(&init)?
        }
    };
    let mut config = init;
    let mut current = init_cost;
    let mut trace = vec![TracePoint { evaluation: evaluations, cost: current }];
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut accepted = 0;
        for i in 0..config.len() {
            config.flip(i);
            evaluations += 1;
            let candidate = cost_fn(&config)?;
            if candidate < current {
                current = candidate;
                accepted += 1;
                trace.push(TracePoint { evaluation: evaluations, cost: current });
            } else {
                config.flip(i);
            }
        }
        if accepted == 0 {
            break;
        }
    }
    Ok(DescentOutcome { config, cost: current, init_cost, trace, evaluations, sweeps })
}

/// Coordinate descent on the true oracle cost.
pub fn descend_on_oracle<O: ChannelOracle + ?Sized>(
    oracle: &O,
    spec: &CostSpec,
    init: DmaConfiguration,
    init_cost: Option<f64>,
    max_sweeps: usize,
) -> Result<DescentOutcome, OptimizeError> {
    if init.len() != oracle.n_atoms() {
        return Err(OptimizeError::InvalidArgument(format!(
            "initial configuration has {} elements, oracle has {}",
            init.len(),
            oracle.n_atoms()
        )));
    }
    coordinate_descent(init, init_cost, max_sweeps, |c| cost(oracle, c, spec))
}

#[cfg(test)]
mod tests {
    use std::convert::Infallible;

    use proptest::prelude::*;

    use super::*;

    fn popcount(c: &DmaConfiguration) -> Result<f64, Infallible> {
        Ok(c.count_ones() as f64)
    }

    #[test]
    fn separable_cost_converges_in_one_sweep_plus_verification() {
        let init: DmaConfiguration = "1101101110".parse().unwrap();
        let out = coordinate_descent(init, None, 5, popcount).unwrap();
        assert_eq!(out.config, DmaConfiguration::zeros(10));
        assert_eq!(out.cost, 0.0);
        assert_eq!(out.sweeps, 2);
        assert_eq!(out.evaluations, 1 + 2 * 10);
        assert_eq!(out.trace.len(), 1 + 7);
    }

    #[test]
    fn constant_cost_runs_exactly_one_sweep() {
        let mut calls = 0;
        let out = coordinate_descent(DmaConfiguration::ones(12), Some(3.0), 5, |_| {
            calls += 1;
            Ok::<_, Infallible>(3.0)
        })
        .unwrap();
        assert_eq!(calls, 12);
        assert_eq!(out.sweeps, 1);
        assert_eq!(out.config, DmaConfiguration::ones(12));
    }

    #[test]
    fn ties_are_rejected() {
        // Flipping bit 0 leaves the cost unchanged; it must not be accepted.
        let out = coordinate_descent(DmaConfiguration::ones(2), None, 5, |c| {
            Ok::<_, Infallible>(if c.bit(1) { 1.0 } else { 0.0 })
        })
        .unwrap();
        assert_eq!(out.config.to_string(), "10");
    }

    #[test]
    fn sweep_budget_is_respected() {
        // Cost that always prefers a flip of the element just visited: never settles.
        let mut tick = 0.0;
        let out = coordinate_descent(DmaConfiguration::zeros(4), Some(0.0), 3, |_| {
            tick -= 1.0;
            Ok::<_, Infallible>(tick)
        })
        .unwrap();
        assert_eq!(out.sweeps, 3);
        assert_eq!(out.evaluations, 12);
    }

    proptest! {
        #[test]
        fn trace_is_monotone_and_budget_holds(
            weights in proptest::collection::vec(-5.0f64..5.0, 1..24),
            pair in proptest::collection::vec(-2.0f64..2.0, 1..24),
            init_bits in proptest::collection::vec(any::<bool>(), 24),
        ) {
            let n = weights.len();
            let init = DmaConfiguration::from_bools(init_bits[..n].to_vec());
            // Quadratic pseudo-Boolean cost with neighbour interactions.
            let cost_fn = |c: &DmaConfiguration| {
                let x: Vec<f64> = c.as_bools().iter().map(|&b| b as u8 as f64).collect();
                let mut v: f64 = weights.iter().zip(&x).map(|(w, xi)| w * xi).sum();
                for i in 1..n {
                    v += pair[i % pair.len()] * x[i] * x[i - 1];
                }
                Ok::<_, Infallible>(v)
            };
            let out = coordinate_descent(init, None, 5, cost_fn).unwrap();
            prop_assert!(out.cost <= out.init_cost);
            prop_assert!(out.trace.windows(2).all(|w| w[1].cost < w[0].cost));
            prop_assert!(out.evaluations <= 1 + 5 * n);
            prop_assert_eq!(out.trace.last().unwrap().cost, out.cost);
        }
    }
}
