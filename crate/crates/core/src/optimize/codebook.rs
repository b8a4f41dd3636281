use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CostKind, OptimizationResult, OptimizeError, Strategy, TracePoint};
use crate::physics::DmaConfiguration;

/// One stored configuration: what to load for a strategy at an operating frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodebookEntry {
    pub strategy: Strategy,
    pub f_op_hz: f64,
    pub kind: CostKind,
    pub config: DmaConfiguration,
    pub cost: f64,
    pub oracle_calls: usize,
    pub init_cost: f64,
    pub gain_des_db: f64,
    pub gain_und_db: f64,
    pub trace: Vec<TracePoint>,
}

impl From<&OptimizationResult> for CodebookEntry {
    fn from(r: &OptimizationResult) -> Self {
        let (gain_des_db, gain_und_db) = r.channels.gains_db();
        Self {
            strategy: r.strategy,
            f_op_hz: r.f_op_hz,
            kind: r.kind,
            config: r.config.clone(),
            cost: r.cost,
            oracle_calls: r.oracle_calls,
            init_cost: r.init_cost,
            gain_des_db,
            gain_und_db,
            trace: r.trace.clone(),
        }
    }
}

/// Optimized configurations keyed by (strategy, operating frequency).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub model_seed: Option<u64>,
    pub entries: Vec<CodebookEntry>,
}

impl Codebook {
    /// Inserts or replaces the entry for the same strategy and frequency.
    pub fn upsert(&mut self, entry: CodebookEntry) {
        match self.entries.iter_mut().find(|e| e.strategy == entry.strategy && e.f_op_hz == entry.f_op_hz) {
            Some(slot) => *slot = entry,
            None => self.entries.push(entry),
        }
        self.entries.sort_by(|a, b| a.f_op_hz.total_cmp(&b.f_op_hz).then(a.strategy.cmp(&b.strategy)));
    }

    pub fn lookup(&self, strategy: Strategy, f_op_hz: f64) -> Option<&CodebookEntry> {
        // Frequencies are compared to within 1 Hz since they round-trip through text.
        self.entries.iter().find(|e| e.strategy == strategy && (e.f_op_hz - f_op_hz).abs() < 1.0)
    }

    pub fn to_json(&self) -> Result<String, OptimizeError> {
        serde_json::to_string_pretty(self).map_err(|e| OptimizeError::Codebook(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, OptimizeError> {
        serde_json::from_str(text).map_err(|e| OptimizeError::Codebook(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, OptimizeError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OptimizeError::Codebook(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), OptimizeError> {
        std::fs::write(path, self.to_json()?).map_err(|e| OptimizeError::Codebook(format!("{}: {e}", path.display())))
    }
}
