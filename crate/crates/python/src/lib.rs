//! Python module `dmalink`: the channel model, the configuration strategies,
//! the OFDM link and the experiment runner.

use dmalink::harness::{self, HarnessError, Scenario};
use dmalink::ofdm::{self, ChannelEstimator, LinkCondition, LinkOptions, OfdmParams};
use dmalink::optimize::{self, OptimizationResult, Strategy, StrategySettings};
use dmalink::physics::{self, DmaConfiguration, ModelParams};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn harness_err(e: HarnessError) -> PyErr {
    match e {
        HarnessError::Config(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Accepts a bitstring such as "0110" or a sequence of 0/1 integers.
fn config_from_py(obj: &Bound<'_, PyAny>) -> PyResult<DmaConfiguration> {
    if let Ok(s) = obj.extract::<String>() {
        return s.parse().map_err(value_err);
    }
    let bits: Vec<u8> = obj.extract()?;
    DmaConfiguration::from_bits(&bits).map_err(value_err)
}

fn parse_strategy(name: &str) -> PyResult<Strategy> {
    name.parse().map_err(value_err)
}

/// Seeded ground-truth channel model of a dynamic metasurface antenna.
#[pyclass(name = "PhysicsModel", module = "dmalink", frozen)]
struct PyPhysicsModel {
    inner: physics::PhysicsModel,
}

#[pymethods]
impl PyPhysicsModel {
    #[new]
    #[pyo3(signature = (seed, n_atoms = 96, mc_strength = 2.0))]
    fn new(seed: u64, n_atoms: usize, mc_strength: f64) -> PyResult<Self> {
        let params = ModelParams::with_size(n_atoms, mc_strength);
        let inner = physics::PhysicsModel::build(seed, &params).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: physics::PhysicsModel::from_json(text).map_err(value_err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(value_err)
    }

    #[getter]
    fn n_atoms(&self) -> usize {
        self.inner.n_atoms()
    }

    #[getter]
    fn mc_strength(&self) -> f64 {
        self.inner.mc_strength()
    }

    /// `(start_hz, stop_hz)` of the valid band.
    #[getter]
    fn band(&self) -> (f64, f64) {
        let b = self.inner.band();
        (b.start_hz, b.stop_hz)
    }

    /// `(h_des, h_und)` for a configuration at one frequency.
    fn channel(&self, config: &Bound<'_, PyAny>, freq_hz: f64) -> PyResult<(Complex64, Complex64)> {
        let pair = self.inner.channel(&config_from_py(config)?, freq_hz).map_err(value_err)?;
        Ok((pair.h_des, pair.h_und))
    }

    /// Desired and undesired gains in dB over an increasing frequency grid.
    fn sweep(&self, py: Python<'_>, config: &Bound<'_, PyAny>, freqs_hz: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let config = config_from_py(config)?;
        let s = py
            .detach(|| physics::sweep(&self.inner, &config, &freqs_hz))
            .map_err(value_err)?;
        Ok((s.gains_des_db, s.gains_und_db))
    }

    fn __repr__(&self) -> String {
        format!(
            "PhysicsModel(seed={:?}, n_atoms={}, mc_strength={})",
            self.inner.seed(),
            self.inner.n_atoms(),
            self.inner.mc_strength()
        )
    }
}

/// Outcome of one configuration strategy.
#[pyclass(name = "OptimizationResult", module = "dmalink", frozen, get_all)]
struct PyOptimizationResult {
    strategy: String,
    f_op_hz: f64,
    /// Bitstring, element 0 first.
    config: String,
    cost: f64,
    init_cost: f64,
    oracle_calls: usize,
    gain_des_db: f64,
    gain_und_db: f64,
    h_des: Complex64,
    h_und: Complex64,
}

impl From<OptimizationResult> for PyOptimizationResult {
    fn from(r: OptimizationResult) -> Self {
        let (gain_des_db, gain_und_db) = r.channels.gains_db();
        Self {
            strategy: r.strategy.to_string(),
            f_op_hz: r.f_op_hz,
            config: r.config.to_string(),
            cost: r.cost,
            init_cost: r.init_cost,
            oracle_calls: r.oracle_calls,
            gain_des_db,
            gain_und_db,
            h_des: r.channels.h_des,
            h_und: r.channels.h_und,
        }
    }
}

#[pymethods]
impl PyOptimizationResult {
    fn __repr__(&self) -> String {
        format!(
            "OptimizationResult(strategy={}, cost={:.2} dB, gains=({:.1}, {:.1}) dB)",
            self.strategy, self.cost, self.gain_des_db, self.gain_und_db
        )
    }
}

/// Runs configuration strategies ("OPT", "MAX", "LIN", "RAND") at one frequency.
#[pyfunction]
#[pyo3(signature = (model, f_op_hz, strategies = None, seed = 0, samples = 500, max_sweeps = 5))]
fn optimize_strategies(
    py: Python<'_>,
    model: &PyPhysicsModel,
    f_op_hz: f64,
    strategies: Option<Vec<String>>,
    seed: u64,
    samples: usize,
    max_sweeps: usize,
) -> PyResult<Vec<PyOptimizationResult>> {
    let strategies = match strategies {
        Some(names) => names.iter().map(|s| parse_strategy(s)).collect::<PyResult<Vec<_>>>()?,
        None => Strategy::ALL.to_vec(),
    };
    let settings = StrategySettings { samples, max_sweeps };
    let results = py.detach(|| {
        let snapshot = model.inner.snapshot(f_op_hz)?;
        let mut sample_rng = ChaCha20Rng::seed_from_u64(seed);
        let mut rand_rng = ChaCha20Rng::seed_from_u64(seed.wrapping_add(1));
        optimize::run_strategies(&snapshot, f_op_hz, &strategies, &settings, &mut sample_rng, &mut rand_rng)
    });
    Ok(results.map_err(value_err)?.into_iter().map(Into::into).collect())
}

/// `20 log10 |h|`; zero maps to `-inf`.
#[pyfunction]
fn gain_db(h: Complex64) -> f64 {
    physics::gain_db(h)
}

/// Sends random QPSK-OFDM frames over a link and counts bit errors.
///
/// `h_des_k` holds one coefficient per FFT bin in natural order (length 256
/// for the default numerology). Returns a dict with `bits_total`,
/// `bits_error`, `ber`, `valid`, `frames` and `sync_failures`.
#[pyfunction]
#[pyo3(signature = (h_des_k, h_und_jam, jam_rel_db, snr_db, bits_target = 167_200, seed = 0, sample_delay = 37, estimator = "preamble"))]
#[allow(clippy::too_many_arguments)]
fn run_link<'py>(
    py: Python<'py>,
    h_des_k: Vec<Complex64>,
    h_und_jam: Complex64,
    jam_rel_db: f64,
    snr_db: f64,
    bits_target: usize,
    seed: u64,
    sample_delay: usize,
    estimator: &str,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let params = OfdmParams::default();
    let estimator = match estimator {
        "preamble" => ChannelEstimator::Preamble,
        "data-aided" => ChannelEstimator::DataAided,
        "genie" => ChannelEstimator::Known(h_des_k.clone()),
        other => return Err(PyValueError::new_err(format!("unknown estimator {other:?}"))),
    };
    let cond = LinkCondition {
        h_des_k,
        h_und_jam,
        jam_rel_db,
        snr_db,
        sample_delay,
        jam_offset_hz: 2.5 * params.subcarrier_spacing_hz(),
    };
    let options = LinkOptions { estimator, ..LinkOptions::default() };
    let run = py
        .detach(|| ofdm::run_link(bits_target, &params, &cond, &options, &mut ChaCha20Rng::seed_from_u64(seed)))
        .map_err(value_err)?;
    let out = pyo3::types::PyDict::new(py);
    out.set_item("bits_total", run.report.bits_total)?;
    out.set_item("bits_error", run.report.bits_error)?;
    out.set_item("ber", run.report.ber)?;
    out.set_item("valid", run.report.statistically_valid)?;
    out.set_item("frames", run.frames)?;
    out.set_item("sync_failures", run.sync_failures)?;
    Ok(out)
}

/// Runs the full experiment described by a TOML scenario and returns the BER
/// table as a list of dicts. Files are written to `output_dir`.
#[pyfunction]
#[pyo3(signature = (config_toml, output_dir))]
fn run_full_experiment<'py>(
    py: Python<'py>,
    config_toml: &str,
    output_dir: std::path::PathBuf,
) -> PyResult<Vec<Bound<'py, pyo3::types::PyDict>>> {
    let mut scenario = Scenario::from_toml(config_toml).map_err(harness_err)?;
    scenario.output_dir = output_dir;
    let out = py.detach(|| harness::run_full_experiment(&scenario)).map_err(harness_err)?;
    out.ber
        .iter()
        .map(|r| {
            let d = pyo3::types::PyDict::new(py);
            d.set_item("freq_ghz", r.freq_ghz)?;
            d.set_item("strategy", r.strategy.to_string())?;
            d.set_item("jam_rel_db", r.jam_rel_db)?;
            d.set_item("bits_total", r.bits_total)?;
            d.set_item("bits_error", r.bits_error)?;
            d.set_item("ber", r.ber)?;
            d.set_item("valid", r.valid)?;
            Ok(d)
        })
        .collect()
}

/// Default scenario as TOML text, a starting point for custom configs.
#[pyfunction]
fn default_scenario_toml() -> PyResult<String> {
    Scenario::default().to_toml().map_err(harness_err)
}

#[pymodule]
#[pyo3(name = "dmalink")]
fn dmalink_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPhysicsModel>()?;
    m.add_class::<PyOptimizationResult>()?;
    m.add_function(wrap_pyfunction!(optimize_strategies, m)?)?;
    m.add_function(wrap_pyfunction!(gain_db, m)?)?;
    m.add_function(wrap_pyfunction!(run_link, m)?)?;
    m.add_function(wrap_pyfunction!(run_full_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(default_scenario_toml, m)?)?;
    m.add("STRATEGIES", Strategy::ALL.iter().map(|s| s.to_string()).collect::<Vec<_>>())?;
    Ok(())
}
