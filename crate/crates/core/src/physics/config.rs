use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::PhysicsError;

/// Binary state of every meta-atom: `false` is the diode off-state, `true` the on-state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DmaConfiguration {
    bits: Vec<bool>,
}

impl DmaConfiguration {
    pub fn zeros(n: usize) -> Self {
        Self { bits: vec![false; n] }
    }

    pub fn ones(n: usize) -> Self {
        Self { bits: vec![true; n] }
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Builds a configuration from integer states, rejecting anything but 0 and 1.
    pub fn from_bits(bits: &[u8]) -> Result<Self, PhysicsError> {
        bits.iter()
            .enumerate()
            .map(|(index, &b)| match b {
                0 => Ok(false),
                1 => Ok(true),
                value => Err(PhysicsError::InvalidBit { index, value }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self::from_bools)
    }

    /// Draws i.i.d. fair-coin states.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self { bits: (0..n).map(|_| rng.random::<bool>()).collect() }
    }

    /// Configuration whose bits are the binary digits of `index` (bit 0 is element 0).
    pub fn from_index(n: usize, index: u64) -> Self {
        Self { bits: (0..n).map(|i| (index >> i) & 1 == 1).collect() }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, state: bool) {
        self.bits[i] = state;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    /// Copy with element `i` toggled.
    pub fn flipped(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.flip(i);
        out
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn as_bools(&self) -> &[bool] {
        &self.bits
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| b as u8).collect()
    }

    /// Number of elements in which two equally sized configurations differ.
    pub fn hamming_distance(&self, other: &Self) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count()
    }
}

impl fmt::Display for DmaConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for DmaConfiguration {
    type Err = PhysicsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .chars()
            .enumerate()
            .map(|(index, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(PhysicsError::InvalidBitChar { index, value: c }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self::from_bools)
    }
}

impl Serialize for DmaConfiguration {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DmaConfiguration {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
