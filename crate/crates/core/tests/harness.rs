use std::fs;
use std::path::Path;

use dmalink::harness::*;
use dmalink::optimize::{Codebook, Strategy};

fn small_scenario(dir: &Path) -> Scenario {
    Scenario {
        output_dir: dir.to_path_buf(),
        jam_rel_db_grid: vec![-12.0, 30.0],
        bits_target: 12_000,
        spectrum: SpectrumSettings { half_span_hz: 50e6, points: 21 },
        ..Scenario::default()
    }
}

#[test]
fn rand_only_experiment_has_one_row_per_frequency_and_jam_level() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = Scenario { strategies: vec![Strategy::Rand], ..small_scenario(dir.path()) };
    let out = run_full_experiment(&scenario).unwrap();
    let rows = ber_rows_from_csv(&dir.path().join(BER_FILE)).unwrap();
    assert_eq!(rows.len(), 3 * 2);
    assert_eq!(rows, out.ber);
    assert!(rows.iter().all(|r| r.strategy == Strategy::Rand && r.bits_total >= 12_000));
    assert_eq!(out.manifest.completed_stages, ["model", "optimize", "spectrum", "link"]);
}

#[test]
fn full_experiment_writes_every_artifact_and_they_reload() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = Scenario { operating_freqs_ghz: vec![19.25], ..small_scenario(dir.path()) };
    let out = run_full_experiment(&scenario).unwrap();
    for name in [MODEL_FILE, CODEBOOK_FILE, BER_FILE, SPECTRUM_FILE, MANIFEST_FILE] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let constellation = fs::read_to_string(dir.path().join(constellation_file_name(19.25))).unwrap();
    assert!(constellation.starts_with("strategy,jam_rel_db,frame,symbol,subcarrier,i,q"));
    // 4 strategies, 2 jam levels, 2 symbols of 152 carriers each.
    assert_eq!(constellation.lines().count(), 1 + 4 * 2 * 2 * 152);
    assert_eq!(out.spectrum.len(), 4 * 21);

    let book = Codebook::load(&codebook_path(dir.path())).unwrap();
    assert_eq!(book, out.codebook);
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(manifest.scenario, scenario);
    assert!(manifest.error.is_none());

    // Subcommands reuse the stored model and codebook and reproduce the full run.
    let model = load_or_build_model(&scenario).unwrap();
    let opt = book.lookup(Strategy::Opt, 19.25e9).unwrap();
    let again = optimize_frequency(&model, &scenario, 19.25e9, &[Strategy::Opt]).unwrap();
    assert_eq!(again[0].config, opt.config);
    let (row, _) = subcommand_run_link(&scenario, Strategy::Opt, 19.25e9, 30.0).unwrap();
    let full = out.ber.iter().find(|r| r.strategy == Strategy::Opt && r.jam_rel_db == 30.0).unwrap();
    assert_eq!(&row, full);
}

#[test]
fn subcommands_without_artifacts_name_the_missing_step() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = small_scenario(dir.path());
    for err in [
        subcommand_run_link(&scenario, Strategy::Opt, 19.25e9, 0.0).unwrap_err(),
        subcommand_sweep_spectrum(&scenario, Strategy::Opt, 19.25e9).map(|_| ()).unwrap_err(),
    ] {
        assert!(matches!(err, HarnessError::MissingArtifact { subcommand: "optimize", .. }), "{err}");
        assert_eq!(err.exit_code(), 6);
    }
    subcommand_optimize(&scenario, Strategy::Max, 19.25e9).unwrap();
    // The model now exists but no OPT entry does.
    let err = subcommand_run_link(&scenario, Strategy::Opt, 19.25e9, 0.0).unwrap_err();
    assert!(matches!(err, HarnessError::MissingArtifact { .. }), "{err}");
    assert!(subcommand_run_link(&scenario, Strategy::Max, 19.25e9, 0.0).is_ok());
}

#[test]
fn failed_run_still_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut scenario = small_scenario(dir.path());
    scenario.model.n_atoms = 0;
    let err = run_full_experiment(&scenario).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    let text = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(manifest["error"].is_string());
    assert_eq!(manifest["completed_stages"].as_array().unwrap().len(), 0);
}

#[test]
fn same_seed_gives_identical_tables() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let base = Scenario { operating_freqs_ghz: vec![18.75], strategies: vec![Strategy::Lin, Strategy::Rand], ..small_scenario(a.path()) };
    run_full_experiment(&base).unwrap();
    run_full_experiment(&Scenario { output_dir: b.path().to_path_buf(), ..base }).unwrap();
    for name in [BER_FILE, SPECTRUM_FILE, CODEBOOK_FILE, &constellation_file_name(18.75)] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}
