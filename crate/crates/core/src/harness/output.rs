use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{HarnessError, Scenario};
use crate::optimize::Strategy;

pub const MODEL_FILE: &str = "model.json";
pub const CODEBOOK_FILE: &str = "codebook.json";
pub const BER_FILE: &str = "ber.csv";
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn model_path(dir: &Path) -> PathBuf {
    dir.join(MODEL_FILE)
}

pub fn codebook_path(dir: &Path) -> PathBuf {
    dir.join(CODEBOOK_FILE)
}

pub fn constellation_file_name(f_op_ghz: f64) -> String {
    format!("constellation_{f_op_ghz}GHz.csv")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerRow {
    pub freq_ghz: f64,
    pub strategy: Strategy,
    pub jam_rel_db: f64,
    pub bits_total: u64,
    pub bits_error: u64,
    pub ber: f64,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub freq_hz: f64,
    pub gain_des_db: f64,
    pub gain_und_db: f64,
    pub strategy: Strategy,
    pub f_op_ghz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstellationRow {
    pub strategy: Strategy,
    pub jam_rel_db: f64,
    pub frame: usize,
    pub symbol: usize,
    pub subcarrier: i64,
    pub i: f64,
    pub q: f64,
}

/// Record of a run: inputs, progress and timings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub master_seed: u64,
    pub scenario: Scenario,
    pub completed_stages: Vec<String>,
    pub timings_s: Vec<(String, f64)>,
    pub files: Vec<String>,
    /// Link runs in which at least one frame failed to synchronize.
    pub sync_failures: Vec<String>,
    pub error: Option<String>,
}

impl Manifest {
    pub fn new(scenario: &Scenario) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: scenario.master_seed,
            scenario: scenario.clone(),
            completed_stages: Vec::new(),
            timings_s: Vec::new(),
            files: Vec::new(),
            sync_failures: Vec::new(),
            error: None,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).map_err(|e| HarnessError::io(&path, e))?;
        std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))
    }
}

pub(crate) fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| HarnessError::io(path, e))?;
    for row in rows {
        writer.serialize(row).map_err(|e| HarnessError::io(path, e))?;
    }
    writer.flush().map_err(|e| HarnessError::io(path, e))
}

/// Header-only file for an empty table, so the schema is always present.
pub(crate) fn write_csv_with_header<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), HarnessError> {
    if rows.is_empty() {
        let mut writer = csv::Writer::from_path(path).map_err(|e| HarnessError::io(path, e))?;
        writer.write_record(header).map_err(|e| HarnessError::io(path, e))?;
        return writer.flush().map_err(|e| HarnessError::io(path, e));
    }
    write_csv(path, rows)
}

pub(crate) fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| HarnessError::io(path, e))?;
    reader.deserialize().collect::<Result<Vec<T>, _>>().map_err(|e| HarnessError::io(path, e))
}

pub fn ber_rows_from_csv(path: &Path) -> Result<Vec<BerRow>, HarnessError> {
    read_csv(path)
}

pub(crate) const BER_HEADER: [&str; 7] =
    ["freq_ghz", "strategy", "jam_rel_db", "bits_total", "bits_error", "ber", "valid"];
pub(crate) const SPECTRUM_HEADER: [&str; 5] = ["freq_hz", "gain_des_db", "gain_und_db", "strategy", "f_op_ghz"];
pub(crate) const CONSTELLATION_HEADER: [&str; 7] = ["strategy", "jam_rel_db", "frame", "symbol", "subcarrier", "i", "q"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ber_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(BER_FILE);
        let rows = vec![BerRow {
            freq_ghz: 19.25,
            strategy: Strategy::Opt,
            jam_rel_db: 30.0,
            bits_total: 170_240,
            bits_error: 0,
            ber: 0.0,
            valid: false,
        }];
        write_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(&BER_HEADER.join(",")));
        assert_eq!(ber_rows_from_csv(&path).unwrap(), rows);
    }

    #[test]
    fn empty_table_still_has_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_csv_with_header::<ConstellationRow>(&path, &CONSTELLATION_HEADER, &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().trim(), CONSTELLATION_HEADER.join(","));
    }
}
