use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::ofdm::{LinkOptions, OfdmParams};
use crate::optimize::{Strategy, StrategySettings};
use crate::physics::ModelParams;

/// Overrides the scenario's output directory.
pub const OUTPUT_DIR_ENV: &str = "DMASIM_OUTPUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSettings {
    pub half_span_hz: f64,
    pub points: usize,
}

impl Default for SpectrumSettings {
    fn default() -> Self {
        Self { half_span_hz: 250e6, points: 1001 }
    }
}

/// Everything a run depends on. Loaded from TOML; every field has a default.
///
/// ```toml
/// master_seed = 7
/// operating_freqs_ghz = [18.75, 19.25, 19.75]
/// strategies = ["OPT", "MAX", "LIN", "RAND"]
/// jam_rel_db_grid = [-36.0, -30.0, 0.0, 30.0]
/// snr_db = 25.0
/// bits_target = 167200
/// output_dir = "out"
///
/// [model]
/// n_atoms = 96
/// mc_strength = 2.0
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub master_seed: u64,
    pub operating_freqs_ghz: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub jam_rel_db_grid: Vec<f64>,
    pub snr_db: f64,
    pub bits_target: usize,
    /// Jammer offset from the carrier in subcarrier spacings.
    pub jam_offset_bins: f64,
    pub sample_delay: usize,
    pub output_dir: PathBuf,
    pub model: ModelParams,
    pub optimizer: StrategySettings,
    pub spectrum: SpectrumSettings,
    pub ofdm: OfdmParams,
    pub link: LinkOptions,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            master_seed: 7,
            operating_freqs_ghz: vec![18.75, 19.25, 19.75],
            strategies: Strategy::ALL.to_vec(),
            jam_rel_db_grid: (0..12).map(|i| -36.0 + 6.0 * i as f64).collect(),
            snr_db: 25.0,
            bits_target: 167_200,
            jam_offset_bins: 2.5,
            sample_delay: 37,
            output_dir: PathBuf::from("out"),
            model: ModelParams::default(),
            optimizer: StrategySettings::default(),
            spectrum: SpectrumSettings::default(),
            ofdm: OfdmParams::default(),
            link: LinkOptions::default(),
        }
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let scenario: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Reads a config file and applies the output-directory environment override.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let mut scenario = Self::from_toml(&text)?;
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            scenario.output_dir = PathBuf::from(dir);
        }
        Ok(scenario)
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        toml::to_string_pretty(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.operating_freqs_ghz.is_empty() {
            return bad("operating_freqs_ghz is empty".into());
        }
        if self.strategies.is_empty() {
            return bad("strategies is empty".into());
        }
        if self.jam_rel_db_grid.is_empty() {
            return bad("jam_rel_db_grid is empty".into());
        }
        if let Some(j) = self.jam_rel_db_grid.iter().find(|j| j.is_nan() || **j == f64::INFINITY) {
            return bad(format!("jam_rel_db_grid entry {j} is not allowed"));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return bad(format!("snr_db = {} must be finite or +inf", self.snr_db));
        }
        if self.bits_target == 0 {
            return bad("bits_target must be at least 1".into());
        }
        if self.spectrum.points == 0 || !(self.spectrum.half_span_hz >= 0.0) {
            return bad("spectrum needs at least one point and a nonnegative span".into());
        }
        self.ofdm.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        let band = self.model.band;
        let half_occupied = self.ofdm.bandwidth_hz / 2.0;
        for &f in &self.operating_freqs_ghz {
            let hz = f * 1e9;
            for probe in [hz - half_occupied, hz + half_occupied, hz + self.jam_offset_hz()] {
                if !band.contains(probe) {
                    return bad(format!("operating frequency {f} GHz: {probe} Hz falls outside the model band"));
                }
            }
        }
        Ok(())
    }

    pub fn operating_freqs_hz(&self) -> Vec<f64> {
        self.operating_freqs_ghz.iter().map(|f| f * 1e9).collect()
    }

    pub fn jam_offset_hz(&self) -> f64 {
        self.jam_offset_bins * self.ofdm.subcarrier_spacing_hz()
    }

    /// Seed of the ground-truth model.
    pub fn model_seed(&self) -> u64 {
        self.master_seed
    }
}
