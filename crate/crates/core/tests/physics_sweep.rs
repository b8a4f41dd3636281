use dmalink::optimize::{run_strategies, Strategy, StrategySettings};
use dmalink::physics::{linear_grid, sweep, ModelParams, PhysicsModel, SpectrumSweep};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const F_OP: f64 = 19.25e9;

fn opt_sweep(seed: u64, half_span: f64, points: usize) -> SpectrumSweep {
    let model = PhysicsModel::build(seed, &ModelParams::default()).unwrap();
    let snap = model.snapshot(F_OP).unwrap();
    let opt = run_strategies(
        &snap,
        F_OP,
        &[Strategy::Opt],
        &StrategySettings::default(),
        &mut ChaCha8Rng::seed_from_u64(seed),
        &mut ChaCha8Rng::seed_from_u64(seed + 1),
    )
    .unwrap()
    .remove(0);
    sweep(&model, &opt.config, &linear_grid(F_OP, half_span, points)).unwrap()
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap()
}

/// Width of the contiguous region around `center` where `inside` holds.
fn width_around(freqs: &[f64], center: usize, inside: impl Fn(usize) -> bool) -> f64 {
    let (mut lo, mut hi) = (center, center);
    while lo > 0 && inside(lo - 1) {
        lo -= 1;
    }
    while hi + 1 < freqs.len() && inside(hi + 1) {
        hi += 1;
    }
    freqs[hi] - freqs[lo]
}

#[test]
fn optimized_null_sits_at_the_operating_frequency() {
    for seed in 0..3 {
        let s = opt_sweep(seed, 250e6, 1001);
        let f_min = s.frequencies[argmin(&s.gains_und_db)];
        assert!((f_min - F_OP).abs() <= 25e6, "seed {seed}: null at {f_min}");
    }
}

#[test]
fn null_is_narrower_than_the_desired_peak() {
    for seed in 0..3 {
        let s = opt_sweep(seed, 100e6, 2001);
        let null = argmin(&s.gains_und_db);
        let floor = s.gains_und_db[null];
        let null_width = width_around(&s.frequencies, null, |i| s.gains_und_db[i] <= floor + 3.0);
        let neg: Vec<f64> = s.gains_des_db.iter().map(|g| -g).collect();
        let center = s.frequencies.len() / 2;
        let span = 250; // ±25 MHz at 100 kHz spacing
        let peak = center - span + argmin(&neg[center - span..=center + span]);
        let top = s.gains_des_db[peak];
        let peak_width = width_around(&s.frequencies, peak, |i| s.gains_des_db[i] >= top - 3.0);
        assert!(null_width < peak_width, "seed {seed}: null {null_width} Hz, peak {peak_width} Hz");
    }
}
