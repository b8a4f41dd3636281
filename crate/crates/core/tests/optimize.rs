use dmalink::optimize::*;
use dmalink::physics::{build_model, Band, DmaConfiguration, ModelParams, PhysicsModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const F_OP: f64 = 19.25e9;

fn default_snapshot(seed: u64) -> dmalink::physics::FrequencySnapshot {
    PhysicsModel::build(seed, &ModelParams::default()).unwrap().snapshot(F_OP).unwrap()
}

#[test]
fn random_search_with_one_sample_returns_it() {
    let snap = default_snapshot(1);
    let spec = CostSpec::new(CostKind::BeamAndNull, F_OP);
    let out = random_search(&snap, &spec, 1, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    let expected = DmaConfiguration::random(96, &mut ChaCha8Rng::seed_from_u64(4));
    assert_eq!(out.config, expected);
    assert_eq!(out.cost, cost(&snap, &expected, &spec).unwrap());
}

#[test]
fn random_search_beats_the_median_sample() {
    let snap = default_snapshot(1);
    let spec = CostSpec::new(CostKind::BeamAndNull, F_OP);
    let out = random_search(&snap, &spec, 500, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    let mut costs = out.samples.costs(spec.kind);
    assert!(costs.iter().all(|c| *c >= out.cost));
    costs.sort_by(f64::total_cmp);
    assert!(out.cost <= costs[costs.len() / 2]);
}

#[test]
fn strategies_respect_budget_and_never_worsen() {
    let snap = default_snapshot(3);
    let counter = CountingOracle::new(&snap);
    let settings = StrategySettings::default();
    let results = run_strategies(
        &counter,
        F_OP,
        &[Strategy::Opt],
        &settings,
        &mut ChaCha8Rng::seed_from_u64(1),
        &mut ChaCha8Rng::seed_from_u64(2),
    )
    .unwrap();
    let opt = &results[0];
    assert_eq!(counter.calls(), opt.oracle_calls);
    assert!(opt.oracle_calls <= settings.samples + (settings.max_sweeps + 1) * 96);
    assert!(opt.cost <= opt.init_cost);
    assert!(opt.trace.windows(2).all(|w| w[1].cost < w[0].cost));
}

#[test]
fn optimized_configurations_are_not_degenerate() {
    // Optimized patterns mix both states; all-on or all-off would mean the
    // cost ignores most elements.
    for seed in 0..3 {
        let snap = default_snapshot(seed);
        let results = run_strategies(
            &snap,
            F_OP,
            &[Strategy::Opt, Strategy::Max, Strategy::Lin],
            &StrategySettings::default(),
            &mut ChaCha8Rng::seed_from_u64(seed),
            &mut ChaCha8Rng::seed_from_u64(seed + 100),
        )
        .unwrap();
        for r in results {
            let frac = r.config.count_ones() as f64 / 96.0;
            assert!((0.30..=0.70).contains(&frac), "{} seed {seed}: ones fraction {frac}", r.strategy);
        }
    }
}

#[test]
fn opt_discriminates_better_than_lin_max_and_rand() {
    let snap = default_snapshot(7);
    let results = run_strategies(
        &snap,
        F_OP,
        &Strategy::ALL,
        &StrategySettings::default(),
        &mut ChaCha8Rng::seed_from_u64(8),
        &mut ChaCha8Rng::seed_from_u64(9),
    )
    .unwrap();
    let disc: Vec<f64> = results.iter().map(|r| r.channels.discrimination_db()).collect();
    assert!(disc[0] > disc[2] && disc[0] > disc[1] && disc[0] > disc[3], "{disc:?}");
    // MAX maximizes the desired gain, so no other strategy beats it there.
    let des: Vec<f64> = results.iter().map(|r| r.channels.gains_db().0).collect();
    assert!(des[1] >= des[0] && des[1] >= des[2] && des[1] >= des[3], "{des:?}");
}

#[test]
fn surrogate_is_exact_without_coupling_and_biased_with_it() {
    let holdout_error = |eta: f64| {
        let model = build_model(2, 96, eta, Band::default()).unwrap();
        let snap = model.snapshot(F_OP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let train = sample_channels(&snap, F_OP, 500, &mut rng).unwrap();
        let surrogate = fit_linear_surrogate(train.pairs()).unwrap();
        let test = sample_channels(&snap, F_OP, 200, &mut rng).unwrap();
        let (mut err, mut norm) = (0.0, 0.0);
        for (c, p) in test.pairs() {
            let q = surrogate.predict(c);
            err += (q.h_des - p.h_des).norm_sqr() + (q.h_und - p.h_und).norm_sqr();
            norm += p.h_des.norm_sqr() + p.h_und.norm_sqr();
        }
        (err / norm).sqrt()
    };
    assert!(holdout_error(0.0) < 1e-9);
    assert!(holdout_error(2.0) > 1e-2);
}

#[test]
fn lin_matches_opt_without_coupling() {
    let model = build_model(4, 24, 0.0, Band::default()).unwrap();
    let snap = model.snapshot(F_OP).unwrap();
    let results = run_strategies(
        &snap,
        F_OP,
        &[Strategy::Opt, Strategy::Lin],
        &StrategySettings::default(),
        &mut ChaCha8Rng::seed_from_u64(1),
        &mut ChaCha8Rng::seed_from_u64(2),
    )
    .unwrap();
    assert_eq!(results[0].config, results[1].config);
    approx::assert_relative_eq!(results[0].cost, results[1].cost, max_relative = 1e-9);
}
