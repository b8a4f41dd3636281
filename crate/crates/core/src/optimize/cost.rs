use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ChannelOracle, OptimizeError};
use crate::physics::{gain_db, ChannelPair, DmaConfiguration};

/// Objective to minimize, in dB.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CostKind {
    /// Undesired-channel gain minus desired-channel gain.
    BeamAndNull,
    /// Negative desired-channel gain.
    BeamOnly,
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostKind::BeamAndNull => "beam-and-null",
            CostKind::BeamOnly => "beam-only",
        })
    }
}

impl FromStr for CostKind {
    type Err = OptimizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "beam-and-null" | "beam_and_null" | "beamandnull" => Ok(CostKind::BeamAndNull),
            "beam-only" | "beam_only" | "beamonly" => Ok(CostKind::BeamOnly),
            other => Err(OptimizeError::InvalidArgument(format!("unknown cost kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    pub kind: CostKind,
    pub f_op_hz: f64,
}

impl CostSpec {
    pub fn new(kind: CostKind, f_op_hz: f64) -> Self {
        Self { kind, f_op_hz }
    }
}

/// Cost of a channel pair. Lower is better; undefined values (both channels
/// zero) count as the worst possible cost.
pub fn cost_of(pair: &ChannelPair, kind: CostKind) -> f64 {
    let value = match kind {
        CostKind::BeamAndNull => gain_db(pair.h_und) - gain_db(pair.h_des),
        CostKind::BeamOnly => -gain_db(pair.h_des),
    };
    if value.is_nan() {
        f64::INFINITY
    } else {
        value
    }
}

pub fn cost<O: ChannelOracle + ?Sized>(
    oracle: &O,
    config: &DmaConfiguration,
    spec: &CostSpec,
) -> Result<f64, OptimizeError> {
    Ok(cost_of(&oracle.channels(config, spec.f_op_hz)?, spec.kind))
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    use super::*;

    fn from_gains(des_db: f64, und_db: f64) -> ChannelPair {
        ChannelPair {
            h_des: Complex64::from_polar(10f64.powf(des_db / 20.0), 0.3),
            h_und: Complex64::from_polar(10f64.powf(und_db / 20.0), -1.1),
        }
    }

    #[test]
    fn discrimination_examples() {
        assert_relative_eq!(cost_of(&from_gains(-34.0, -77.0), CostKind::BeamAndNull), -43.0, epsilon = 1e-9);
        assert_relative_eq!(cost_of(&from_gains(-33.0, -47.0), CostKind::BeamAndNull), -14.0, epsilon = 1e-9);
        assert_relative_eq!(cost_of(&from_gains(-33.0, -47.0), CostKind::BeamOnly), 33.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_channels() {
        let zero = Complex64::new(0.0, 0.0);
        let null = ChannelPair { h_des: Complex64::new(1.0, 0.0), h_und: zero };
        assert_eq!(cost_of(&null, CostKind::BeamAndNull), f64::NEG_INFINITY);
        let dead = ChannelPair { h_des: zero, h_und: zero };
        assert_eq!(cost_of(&dead, CostKind::BeamAndNull), f64::INFINITY);
        assert_eq!(cost_of(&dead, CostKind::BeamOnly), f64::INFINITY);
    }

    #[test]
    fn kind_parses() {
        assert_eq!("beam-and-null".parse::<CostKind>().unwrap(), CostKind::BeamAndNull);
        assert_eq!("BEAM_ONLY".parse::<CostKind>().unwrap(), CostKind::BeamOnly);
        assert!("null".parse::<CostKind>().is_err());
    }
}
