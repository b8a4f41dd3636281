use std::path::Path;
use std::time::Instant;

use log::{info, warn};
use num_complex::Complex64;
use rayon::prelude::*;

use super::output::{
    write_csv, write_csv_with_header, BER_HEADER, CONSTELLATION_HEADER, SPECTRUM_HEADER,
};
use super::{
    codebook_path, constellation_file_name, model_path, BerRow, ConstellationRow, HarnessError, Manifest, Scenario,
    SpectrumRow, BER_FILE, SPECTRUM_FILE,
};
use crate::ofdm::{run_link, LinkCondition, LinkRun};
use crate::optimize::{run_strategies, Codebook, CodebookEntry, OptimizationResult, Strategy};
use crate::physics::{gain_db, linear_grid, DmaConfiguration, PhysicsModel};
use crate::rng;

/// Everything a full experiment produced.
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub codebook: Codebook,
    pub ber: Vec<BerRow>,
    pub spectrum: Vec<SpectrumRow>,
    /// Constellation records per operating frequency (GHz).
    pub constellations: Vec<(f64, Vec<ConstellationRow>)>,
    pub manifest: Manifest,
}

/// Channels a link needs: the desired channel on every FFT bin and the
/// undesired channel at the jammer frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkChannels {
    pub h_des_k: Vec<Complex64>,
    pub h_und_jam: Complex64,
}

fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

/// Reuses the persisted model when it matches the scenario's seed, otherwise
/// builds it and saves it.
pub fn load_or_build_model(scenario: &Scenario) -> Result<PhysicsModel, HarnessError> {
    let dir = &scenario.output_dir;
    ensure_dir(dir)?;
    let path = model_path(dir);
    if path.exists() {
        let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
        let model = PhysicsModel::from_json(&text)?;
        if model.seed() == Some(scenario.model_seed()) && model.n_atoms() == scenario.model.n_atoms {
            return Ok(model);
        }
        warn!("{} was built for another seed or size; rebuilding", path.display());
    }
    let model = PhysicsModel::build(scenario.model_seed(), &scenario.model)?;
    std::fs::write(&path, model.to_json()?).map_err(|e| HarnessError::io(&path, e))?;
    Ok(model)
}

fn load_model(scenario: &Scenario) -> Result<PhysicsModel, HarnessError> {
    let path = model_path(&scenario.output_dir);
    if !path.exists() {
        return Err(HarnessError::MissingArtifact { artifact: path.display().to_string(), subcommand: "optimize" });
    }
    let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
    Ok(PhysicsModel::from_json(&text)?)
}

fn load_codebook_entry(scenario: &Scenario, strategy: Strategy, f_op_hz: f64) -> Result<CodebookEntry, HarnessError> {
    let path = codebook_path(&scenario.output_dir);
    let missing = || HarnessError::MissingArtifact {
        artifact: format!("codebook entry for {strategy} at {} GHz in {}", f_op_hz / 1e9, path.display()),
        subcommand: "optimize",
    };
    if !path.exists() {
        return Err(missing());
    }
    let book = Codebook::load(&path)?;
    book.lookup(strategy, f_op_hz).cloned().ok_or_else(missing)
}

/// Runs the requested strategies at one operating frequency on seeded streams
/// keyed by the frequency, so any subset of strategies reproduces the same
/// configurations.
pub fn optimize_frequency(
    model: &PhysicsModel,
    scenario: &Scenario,
    f_op_hz: f64,
    strategies: &[Strategy],
) -> Result<Vec<OptimizationResult>, HarnessError> {
    let snapshot = model.snapshot(f_op_hz)?;
    let key = [f_op_hz.to_bits()];
    let mut sample_rng = rng::stream(scenario.master_seed, "samples", &key);
    let mut rand_rng = rng::stream(scenario.master_seed, "rand", &key);
    Ok(run_strategies(&snapshot, f_op_hz, strategies, &scenario.optimizer, &mut sample_rng, &mut rand_rng)?)
}

/// Per-bin desired channels around `f_c` and the undesired channel at the
/// jammer frequency, for each configuration. One snapshot per frequency is
/// shared by all configurations.
pub fn link_channels(
    model: &PhysicsModel,
    configs: &[&DmaConfiguration],
    f_c_hz: f64,
    scenario: &Scenario,
) -> Result<Vec<LinkChannels>, HarnessError> {
    let params = &scenario.ofdm;
    let spacing = params.subcarrier_spacing_hz();
    let freqs: Vec<f64> = (0..params.n_fft).map(|b| f_c_hz + params.signed_index(b) as f64 * spacing).collect();
    let per_bin = freqs
        .par_iter()
        .map(|&f| {
            let snap = model.snapshot(f)?;
            configs.iter().map(|c| snap.channel(c).map(|p| p.h_des)).collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, crate::physics::PhysicsError>>()?;
    let jam = model.snapshot(f_c_hz + scenario.jam_offset_hz())?;
    configs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            Ok(LinkChannels { h_des_k: per_bin.iter().map(|row| row[i]).collect(), h_und_jam: jam.channel(c)?.h_und })
        })
        .collect()
}

/// Spectrum rows for each (strategy, configuration) around `f_op_hz`.
pub fn spectrum_rows(
    model: &PhysicsModel,
    entries: &[(Strategy, &DmaConfiguration)],
    f_op_hz: f64,
    scenario: &Scenario,
) -> Result<Vec<SpectrumRow>, HarnessError> {
    let band = model.band();
    let grid: Vec<f64> = linear_grid(f_op_hz, scenario.spectrum.half_span_hz, scenario.spectrum.points)
        .into_iter()
        .map(|f| f.clamp(band.start_hz, band.stop_hz))
        .collect();
    let per_freq = grid
        .par_iter()
        .map(|&f| {
            let snap = model.snapshot(f)?;
            entries.iter().map(|(_, c)| snap.channel(c)).collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, crate::physics::PhysicsError>>()?;
    let mut rows = Vec::with_capacity(grid.len() * entries.len());
    for (j, (strategy, _)) in entries.iter().enumerate() {
        for (f, pairs) in grid.iter().zip(&per_freq) {
            rows.push(SpectrumRow {
                freq_hz: *f,
                gain_des_db: gain_db(pairs[j].h_des),
                gain_und_db: gain_db(pairs[j].h_und),
                strategy: *strategy,
                f_op_ghz: f_op_hz / 1e9,
            });
        }
    }
    Ok(rows)
}

/// One link run on the stream keyed by (frequency, strategy, jamming level).
pub fn run_link_task(
    scenario: &Scenario,
    f_op_hz: f64,
    strategy: Strategy,
    jam_rel_db: f64,
    channels: &LinkChannels,
) -> Result<LinkRun, HarnessError> {
    let cond = LinkCondition {
        h_des_k: channels.h_des_k.clone(),
        h_und_jam: channels.h_und_jam,
        jam_rel_db,
        snr_db: scenario.snr_db,
        sample_delay: scenario.sample_delay,
        jam_offset_hz: scenario.jam_offset_hz(),
    };
    let strategy_index = Strategy::ALL.iter().position(|s| *s == strategy).unwrap_or(0) as u64;
    let mut stream = rng::stream(scenario.master_seed, "link", &[f_op_hz.to_bits(), strategy_index, jam_rel_db.to_bits()]);
    Ok(run_link(scenario.bits_target, &scenario.ofdm, &cond, &scenario.link, &mut stream)?)
}

fn ber_row(f_op_hz: f64, strategy: Strategy, jam_rel_db: f64, run: &LinkRun) -> BerRow {
    BerRow {
        freq_ghz: f_op_hz / 1e9,
        strategy,
        jam_rel_db,
        bits_total: run.report.bits_total,
        bits_error: run.report.bits_error,
        ber: run.report.ber,
        valid: run.report.statistically_valid,
    }
}

fn constellation_rows(strategy: Strategy, jam_rel_db: f64, run: &LinkRun) -> Vec<ConstellationRow> {
    run.constellation
        .iter()
        .map(|p| ConstellationRow {
            strategy,
            jam_rel_db,
            frame: p.frame,
            symbol: p.symbol,
            subcarrier: p.subcarrier,
            i: p.i,
            q: p.q,
        })
        .collect()
}

/// BER rows, constellation records and sync-failure notes of one frequency.
pub type LinkStageOutput = (Vec<BerRow>, Vec<ConstellationRow>, Vec<String>);

/// BER sweep over strategies and jamming levels at one operating frequency.
/// Runs execute in parallel; rows come back in (strategy, jam) order.
pub fn run_link_stage(
    scenario: &Scenario,
    f_op_hz: f64,
    strategies: &[Strategy],
    channels: &[LinkChannels],
) -> Result<LinkStageOutput, HarnessError> {
    let tasks: Vec<(usize, f64)> = (0..strategies.len())
        .flat_map(|s| scenario.jam_rel_db_grid.iter().map(move |&j| (s, j)))
        .collect();
    let runs = tasks
        .par_iter()
        .map(|&(s, jam)| run_link_task(scenario, f_op_hz, strategies[s], jam, &channels[s]))
        .collect::<Result<Vec<_>, _>>()?;
    let mut ber = Vec::with_capacity(runs.len());
    let mut constellation = Vec::new();
    let mut sync_notes = Vec::new();
    for (&(s, jam), run) in tasks.iter().zip(&runs) {
        ber.push(ber_row(f_op_hz, strategies[s], jam, run));
        constellation.extend(constellation_rows(strategies[s], jam, run));
        if run.sync_failures > 0 {
            sync_notes.push(format!(
                "{} GHz {} {} dB: {}/{} frames",
                f_op_hz / 1e9,
                strategies[s],
                jam,
                run.sync_failures,
                run.frames
            ));
        }
    }
    Ok((ber, constellation, sync_notes))
}

/// Build the model, optimize every strategy at every operating frequency,
/// sweep spectra, run the BER sweep and write all outputs. On failure the
/// manifest still records the completed stages.
pub fn run_full_experiment(scenario: &Scenario) -> Result<ExperimentOutput, HarnessError> {
    scenario.validate()?;
    let dir = scenario.output_dir.clone();
    ensure_dir(&dir)?;
    let mut manifest = Manifest::new(scenario);
    match run_stages(scenario, &dir, &mut manifest) {
        Ok(mut output) => {
            manifest.write(&dir)?;
            output.manifest = manifest;
            Ok(output)
        }
        Err(e) => {
            manifest.error = Some(e.to_string());
            manifest.write(&dir)?;
            Err(e)
        }
    }
}

fn run_stages(scenario: &Scenario, dir: &Path, manifest: &mut Manifest) -> Result<ExperimentOutput, HarnessError> {
    let stage = |manifest: &mut Manifest, name: &str, started: Instant| {
        manifest.completed_stages.push(name.to_string());
        manifest.timings_s.push((name.to_string(), started.elapsed().as_secs_f64()));
        info!("stage {name} done in {:.1} s", started.elapsed().as_secs_f64());
    };

    let started = Instant::now();
    let model = PhysicsModel::build(scenario.model_seed(), &scenario.model)?;
    let path = model_path(dir);
    std::fs::write(&path, model.to_json()?).map_err(|e| HarnessError::io(&path, e))?;
    manifest.files.push(super::MODEL_FILE.into());
    stage(manifest, "model", started);

    let started = Instant::now();
    let freqs = scenario.operating_freqs_hz();
    let mut results = Vec::with_capacity(freqs.len());
    let mut codebook = Codebook { model_seed: Some(scenario.model_seed()), entries: Vec::new() };
    for &f in &freqs {
        let r = optimize_frequency(&model, scenario, f, &scenario.strategies)?;
        for res in &r {
            codebook.upsert(CodebookEntry::from(res));
        }
        results.push(r);
    }
    codebook.save(&codebook_path(dir))?;
    manifest.files.push(super::CODEBOOK_FILE.into());
    stage(manifest, "optimize", started);

    let started = Instant::now();
    let mut spectrum = Vec::new();
    for (&f, r) in freqs.iter().zip(&results) {
        let entries: Vec<(Strategy, &DmaConfiguration)> = r.iter().map(|x| (x.strategy, &x.config)).collect();
        spectrum.extend(spectrum_rows(&model, &entries, f, scenario)?);
    }
    write_csv_with_header(&dir.join(SPECTRUM_FILE), &SPECTRUM_HEADER, &spectrum)?;
    manifest.files.push(SPECTRUM_FILE.into());
    stage(manifest, "spectrum", started);

    let started = Instant::now();
    let mut ber = Vec::new();
    let mut constellations = Vec::new();
    for (&f, r) in freqs.iter().zip(&results) {
        let configs: Vec<&DmaConfiguration> = r.iter().map(|x| &x.config).collect();
        let channels = link_channels(&model, &configs, f, scenario)?;
        let strategies: Vec<Strategy> = r.iter().map(|x| x.strategy).collect();
        let (rows, points, notes) = run_link_stage(scenario, f, &strategies, &channels)?;
        ber.extend(rows);
        manifest.sync_failures.extend(notes);
        let name = constellation_file_name(f / 1e9);
        write_csv_with_header(&dir.join(&name), &CONSTELLATION_HEADER, &points)?;
        manifest.files.push(name);
        constellations.push((f / 1e9, points));
    }
    write_csv_with_header(&dir.join(BER_FILE), &BER_HEADER, &ber)?;
    manifest.files.push(BER_FILE.into());
    stage(manifest, "link", started);

    Ok(ExperimentOutput { codebook, ber, spectrum, constellations, manifest: manifest.clone() })
}

/// `optimize` subcommand: optimizes one strategy and records it in the codebook.
pub fn subcommand_optimize(scenario: &Scenario, strategy: Strategy, f_op_hz: f64) -> Result<CodebookEntry, HarnessError> {
    let model = load_or_build_model(scenario)?;
    let result = optimize_frequency(&model, scenario, f_op_hz, &[strategy])?.remove(0);
    let path = codebook_path(&scenario.output_dir);
    let mut book = if path.exists() {
        Codebook::load(&path)?
    } else {
        Codebook { model_seed: Some(scenario.model_seed()), entries: Vec::new() }
    };
    if book.model_seed != Some(scenario.model_seed()) {
        return Err(HarnessError::Config(format!(
            "{} belongs to model seed {:?}, scenario uses {}",
            path.display(),
            book.model_seed,
            scenario.model_seed()
        )));
    }
    let entry = CodebookEntry::from(&result);
    book.upsert(entry.clone());
    book.save(&path)?;
    Ok(entry)
}

/// `sweep-spectrum` subcommand: spectrum of a stored configuration.
pub fn subcommand_sweep_spectrum(
    scenario: &Scenario,
    strategy: Strategy,
    f_op_hz: f64,
) -> Result<Vec<SpectrumRow>, HarnessError> {
    let model = load_model(scenario)?;
    let entry = load_codebook_entry(scenario, strategy, f_op_hz)?;
    let rows = spectrum_rows(&model, &[(strategy, &entry.config)], f_op_hz, scenario)?;
    let path = scenario.output_dir.join(format!("spectrum_{strategy}_{}GHz.csv", f_op_hz / 1e9));
    write_csv_with_header(&path, &SPECTRUM_HEADER, &rows)?;
    Ok(rows)
}

/// `run-link` subcommand: one BER measurement with a stored configuration.
/// Fails with a sync error only when no frame synchronized.
pub fn subcommand_run_link(
    scenario: &Scenario,
    strategy: Strategy,
    f_op_hz: f64,
    jam_rel_db: f64,
) -> Result<(BerRow, LinkRun), HarnessError> {
    let model = load_model(scenario)?;
    let entry = load_codebook_entry(scenario, strategy, f_op_hz)?;
    let channels = link_channels(&model, &[&entry.config], f_op_hz, scenario)?.remove(0);
    let run = run_link_task(scenario, f_op_hz, strategy, jam_rel_db, &channels)?;
    if run.sync_failures == run.frames {
        return Err(HarnessError::Sync { frames: run.frames });
    }
    let row = ber_row(f_op_hz, strategy, jam_rel_db, &run);
    let stem = format!("{strategy}_{}GHz_{jam_rel_db}dB", f_op_hz / 1e9);
    write_csv(&scenario.output_dir.join(format!("ber_{stem}.csv")), std::slice::from_ref(&row))?;
    write_csv_with_header(
        &scenario.output_dir.join(format!("constellation_{stem}.csv")),
        &CONSTELLATION_HEADER,
        &constellation_rows(strategy, jam_rel_db, &run),
    )?;
    Ok((row, run))
}
