use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use super::*;

fn params() -> OfdmParams {
    OfdmParams::default()
}

fn random_bits(rng: &mut impl Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.random()).collect()
}

/// Per-bin channel of a tap vector (natural FFT order).
fn spectrum_of_taps(taps: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut buf = taps.to_vec();
    buf.resize(n, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf
}

fn random_taps(rng: &mut impl Rng, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) / (2.0 * len as f64).sqrt())
        .collect()
}

#[test]
fn all_zero_bits_put_one_point_on_every_carrier() {
    let p = params();
    let frame = modulate_frame(&vec![false; p.bits_per_frame()], &p, 1).unwrap();
    assert_eq!(frame.tx_samples.len(), 6048);
    let out = demodulate(&frame.tx_samples, 0, &p, 1, &ChannelEstimator::Preamble).unwrap();
    assert_eq!(out.bits, frame.bits);
    let ideal = gray_map(false, false);
    for row in &out.symbols {
        for x in row {
            assert!((x - ideal).norm() < 1e-10);
        }
    }
}

#[test]
fn parseval_and_cyclic_prefix() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let frame = modulate_frame(&random_bits(&mut rng, p.bits_per_frame()), &p, 9).unwrap();
    for sym in frame.tx_samples.chunks(p.symbol_len()) {
        let (cp, body) = sym.split_at(p.cp_len);
        assert_eq!(cp, &body[p.n_fft - p.cp_len..]);
        let energy: f64 = body.iter().map(|x| x.norm_sqr()).sum();
        // Unit-energy points on every active carrier.
        assert!((energy - p.n_active as f64).abs() < 1e-12 * p.n_active as f64);
    }
}

#[test]
fn wrong_bit_count_is_rejected() {
    let p = params();
    assert!(matches!(modulate_frame(&[true; 10], &p, 0), Err(OfdmError::InvalidArgument(_))));
}

#[test]
fn identity_link_is_exact() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let frame = modulate_frame(&random_bits(&mut rng, p.bits_per_frame()), &p, 2).unwrap();
    let rx = apply_link(&frame, &LinkCondition::ideal(&p), &p, &mut rng).unwrap();
    assert_eq!(&rx[..p.frame_len()], &frame.tx_samples[..]);
    assert!(rx[p.frame_len()..].iter().all(|x| *x == Complex64::new(0.0, 0.0)));
}

#[test]
fn jammer_power_matches_configuration() {
    let p = params();
    let frame = Frame {
        bits: vec![false; p.bits_per_frame()],
        tx_samples: vec![Complex64::new(0.0, 0.0); p.frame_len()],
        preamble_seed: 0,
    };
    let cond = LinkCondition { jam_rel_db: 12.0, h_und_jam: Complex64::new(0.0, 0.3), ..LinkCondition::ideal(&p) };
    let rx = apply_link(&frame, &cond, &p, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
    let measured: f64 = rx[..p.frame_len()].iter().map(|x| x.norm_sqr()).sum::<f64>() / p.frame_len() as f64;
    let expected = p.n_active as f64 / p.n_fft as f64 * 10f64.powf(1.2) * 0.09;
    assert!((10.0 * (measured / expected).log10()).abs() < 0.1);
}

#[test]
fn delay_prepends_silence() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let frame = modulate_frame(&random_bits(&mut rng, p.bits_per_frame()), &p, 3).unwrap();
    let cond = LinkCondition { sample_delay: 100, ..LinkCondition::ideal(&p) };
    let rx = apply_link(&frame, &cond, &p, &mut rng).unwrap();
    assert_eq!(rx.len(), 100 + p.frame_len() + p.cp_len);
    assert!(rx[..100].iter().all(|x| *x == Complex64::new(0.0, 0.0)));
    assert_eq!(&rx[100..100 + p.frame_len()], &frame.tx_samples[..]);
}

#[test]
fn sync_on_clean_link_is_exact() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let frame = modulate_frame(&random_bits(&mut rng, p.bits_per_frame()), &p, 4).unwrap();
    let rx = apply_link(&frame, &LinkCondition::ideal(&p), &p, &mut rng).unwrap();
    assert_eq!(synchronize(&rx, &p, 4, None).unwrap().offset, 0);
}

#[test]
fn sync_at_delay_100_and_25_db() {
    let p = params();
    let mut hits = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let frame = modulate_frame(&random_bits(&mut rng, p.bits_per_frame()), &p, seed).unwrap();
        let cond = LinkCondition { sample_delay: 100, snr_db: 25.0, ..LinkCondition::ideal(&p) };
        let rx = apply_link(&frame, &cond, &p, &mut rng).unwrap();
        if matches!(synchronize(&rx, &p, seed, None), Ok(s) if s.offset == 100) {
            hits += 1;
        }
    }
    assert!(hits >= 99, "{hits}/100");
}

#[test]
fn sync_fails_on_noise() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let noise: Vec<Complex64> = (0..p.frame_len() + 132)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    assert!(matches!(synchronize(&noise, &p, 0, None), Err(OfdmError::SyncFailure { .. })));
}

#[test]
fn sync_survives_strong_tone() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let frame = modulate_frame(&random_bits(&mut rng, p.bits_per_frame()), &p, 5).unwrap();
    let cond = LinkCondition { sample_delay: 37, snr_db: 25.0, jam_rel_db: 30.0, ..LinkCondition::ideal(&p) };
    let rx = apply_link(&frame, &cond, &p, &mut rng).unwrap();
    assert_eq!(synchronize(&rx, &p, 5, None).unwrap().offset, 37);
}

#[test]
fn channels_within_cyclic_prefix_are_error_free() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for len in [1, 16, 32] {
        let taps = random_taps(&mut rng, len);
        let cond = LinkCondition { h_des_k: spectrum_of_taps(&taps, p.n_fft), ..LinkCondition::ideal(&p) };
        let frame = modulate_frame(&random_bits(&mut rng, p.bits_per_frame()), &p, 6).unwrap();
        let rx = apply_link(&frame, &cond, &p, &mut rng).unwrap();
        let out = demodulate(&rx, 0, &p, 6, &ChannelEstimator::Preamble).unwrap();
        assert_eq!(out.bits, frame.bits, "{len} taps");
        // Genie ZF recovers the ideal points.
        let genie = demodulate(&rx, 0, &p, 6, &ChannelEstimator::Known(cond.h_des_k.clone())).unwrap();
        let bits = &frame.bits[..2 * p.n_active];
        for (k, x) in genie.symbols[0].iter().enumerate() {
            assert!((x - gray_map(bits[2 * k], bits[2 * k + 1])).norm() < 1e-9);
        }
    }
}

/// Convolves a frame with `taps` directly (apply_link truncates to cp_len taps).
fn convolve(x: &[Complex64], taps: &[Complex64]) -> Vec<Complex64> {
    let mut y = vec![Complex64::new(0.0, 0.0); x.len() + taps.len() - 1];
    for (l, h) in taps.iter().enumerate() {
        for (n, v) in x.iter().enumerate() {
            y[n + l] += h * v;
        }
    }
    y
}

#[test]
fn delay_spread_beyond_cyclic_prefix_causes_interference() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let frame = modulate_frame(&random_bits(&mut rng, p.bits_per_frame()), &p, 7).unwrap();
    let errors_with_last_tap_at = |delay: usize| {
        let mut taps = vec![Complex64::new(0.0, 0.0); delay + 1];
        taps[0] = Complex64::new(1.0, 0.0);
        taps[delay] = Complex64::new(0.0, 0.9);
        let rx = convolve(&frame.tx_samples, &taps);
        let known = spectrum_of_taps(&taps, p.n_fft);
        let out = demodulate(&rx, 0, &p, 7, &ChannelEstimator::Known(known)).unwrap();
        count_bit_errors(&out.bits, &frame.bits)
    };
    // A delay spread of cp_len samples is still absorbed by the prefix.
    assert_eq!(errors_with_last_tap_at(p.cp_len), 0);
    assert!(errors_with_last_tap_at(p.cp_len + 1) > 0);
}

#[test]
fn truncation_reports_discarded_energy() {
    let p = params();
    let mut taps = vec![Complex64::new(0.0, 0.0); p.n_fft];
    taps[0] = Complex64::new(1.0, 0.0);
    taps[100] = Complex64::new(1.0, 0.0);
    let ir = impulse_response(&spectrum_of_taps(&taps, p.n_fft), &p).unwrap();
    assert!((ir.discarded_fraction - 0.5).abs() < 1e-12);
    assert_eq!(ir.taps.len(), p.cp_len);
}

#[test]
fn erased_carriers_decide_reproducibly() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let frame = modulate_frame(&random_bits(&mut rng, p.bits_per_frame()), &p, 8).unwrap();
    let mut h = vec![Complex64::new(1.0, 0.0); p.n_fft];
    h[p.bin_of(5)] = Complex64::new(0.0, 0.0);
    let a = demodulate(&frame.tx_samples, 0, &p, 8, &ChannelEstimator::Known(h.clone())).unwrap();
    let b = demodulate(&frame.tx_samples, 0, &p, 8, &ChannelEstimator::Known(h)).unwrap();
    assert_eq!(a.bits, b.bits);
    let erased: Vec<usize> = (0..p.n_active).filter(|&k| a.estimate.erased[k]).collect();
    assert_eq!(erased, vec![p.n_active / 2 + 4]);
}

#[test]
fn data_aided_estimation_matches_preamble_on_clean_link() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let frame = modulate_frame(&random_bits(&mut rng, p.bits_per_frame()), &p, 9).unwrap();
    let out = demodulate(&frame.tx_samples, 0, &p, 9, &ChannelEstimator::DataAided).unwrap();
    assert_eq!(out.bits, frame.bits);
    assert!(out.estimate.h.iter().all(|h| (h - 1.0).norm() < 1e-12));
}

#[test]
fn clean_run_link_has_no_errors() {
    let p = params();
    let cond = LinkCondition { sample_delay: 20, ..LinkCondition::ideal(&p) };
    let run = run_link(20_000, &p, &cond, &LinkOptions::default(), &mut ChaCha8Rng::seed_from_u64(15)).unwrap();
    assert_eq!(run.frames, 4);
    assert_eq!(run.report.bits_total, 4 * 6080);
    assert_eq!(run.report.bits_error, 0);
    assert!(!run.report.statistically_valid);
    assert_eq!(run.constellation.len(), 2 * p.n_active);
}

#[test]
fn ber_report_validity_rule() {
    assert!(!BerReport::new(1000, 99).statistically_valid);
    let r = BerReport::new(1000, 100);
    assert!(r.statistically_valid);
    assert_eq!(r.ber, 0.1);
    assert_eq!(r.merge(&BerReport::new(1000, 0)).ber, 0.05);
}

#[test]
fn iq_export_interleaves_f32() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.iq");
    write_iq(&path, &[Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.25)]).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    let values: Vec<f32> = bytes.chunks(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    assert_eq!(values, vec![1.0, -2.0, 0.5, 0.25]);
}

#[test]
fn invalid_conditions_are_rejected() {
    let p = params();
    let frame = modulate_frame(&vec![false; p.bits_per_frame()], &p, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let short = LinkCondition { h_des_k: vec![Complex64::new(1.0, 0.0); 10], ..LinkCondition::ideal(&p) };
    assert!(apply_link(&frame, &short, &p, &mut rng).is_err());
    let nan = LinkCondition { snr_db: f64::NAN, ..LinkCondition::ideal(&p) };
    assert!(apply_link(&frame, &nan, &p, &mut rng).is_err());
    assert!(run_link(0, &p, &LinkCondition::ideal(&p), &LinkOptions::default(), &mut rng).is_err());
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
    #[test]
    fn loopback_is_bit_exact(seed in proptest::prelude::any::<u64>()) {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frame = modulate_frame(&random_bits(&mut rng, p.bits_per_frame()), &p, seed).unwrap();
        let out = demodulate(&frame.tx_samples, 0, &p, seed, &ChannelEstimator::Preamble).unwrap();
        proptest::prop_assert_eq!(out.bits, frame.bits);
    }
}
