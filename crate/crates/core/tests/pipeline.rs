use std::f64::consts::TAU;

use mbmpss::evaluation::{compare, mix_at_snr, output_snr, SnrReport};
use mbmpss::noise::estimate_noise;
use mbmpss::spectral::{fft, segment, to_mag_phase};
use mbmpss::synth::{speech_surrogate, white_noise, SurrogateParams};
use mbmpss::wav::{read_wav, write_wav};
use mbmpss::{enhance_with, Algorithm, EnhancerConfig, Error, Execution, NoiseProfile, TimeSignal};
use proptest::prelude::*;

/// Noise-only lead-in followed by a steady tone at bin 20 plus the same noise.
fn tone_in_noise(noise_std: f64, seed: u64) -> (TimeSignal, TimeSignal) {
    let fs = 8000;
    let len = 256 * 40;
    let lead = 256 * 6;
    let clean: Vec<f64> = (0..len)
        .map(|i| if i < lead { 0.0 } else { 0.5 * (TAU * 20.0 * i as f64 / 256.0).sin() })
        .collect();
    let noise = white_noise(fs, len, noise_std, seed);
    let noisy = clean.iter().zip(noise.samples()).map(|(c, n)| c + n).collect();
    (TimeSignal::new(clean, fs).unwrap(), TimeSignal::new(noisy, fs).unwrap())
}

#[test]
fn magnitude_subtraction_improves_tone_snr() {
    let (clean, noisy) = tone_in_noise(0.2, 5);
    let before = output_snr(&clean, &noisy).unwrap();
    for algorithm in [Algorithm::Mss, Algorithm::Mbmss] {
        let out = enhance_with(&noisy, &EnhancerConfig::new(algorithm), Execution::Parallel).unwrap();
        assert_eq!(out.len(), noisy.len());
        let after = output_snr(&clean, &out).unwrap();
        assert!(after > before + 3.0, "{algorithm}: {before:.2} -> {after:.2} dB");
    }
}

#[test]
fn every_algorithm_preserves_length_and_rate() {
    let (_, noisy) = tone_in_noise(0.1, 1);
    let trimmed = TimeSignal::new(noisy.samples()[..noisy.len() - 77].to_vec(), 16000).unwrap();
    for algorithm in Algorithm::ALL {
        let out = enhance_with(&trimmed, &EnhancerConfig::new(algorithm), Execution::Sequential).unwrap();
        assert_eq!(out.len(), trimmed.len());
        assert_eq!(out.sample_rate(), 16000);
        assert!(out.samples().iter().all(|s| s.is_finite()));
    }
}

#[test]
fn sequential_and_parallel_agree_bit_for_bit() {
    let (_, noisy) = tone_in_noise(0.1, 2);
    for algorithm in Algorithm::ALL {
        let mut config = EnhancerConfig::new(algorithm);
        config.noise_update_weight = 0.1;
        let a = enhance_with(&noisy, &config, Execution::Sequential).unwrap();
        let b = enhance_with(&noisy, &config, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn input_shorter_than_noise_lead_is_rejected() {
    let signal = white_noise(8000, 256 * 5 - 1, 0.1, 0);
    let err = enhance_with(&signal, &EnhancerConfig::default(), Execution::Parallel).unwrap_err();
    assert!(matches!(err, Error::SignalTooShort { .. } | Error::InsufficientNoiseFrames { .. }), "{err}");
}

#[test]
fn estimated_profile_survives_a_file_round_trip() {
    let noise = white_noise(8000, 256 * 5, 0.1, 9);
    let spectra: Vec<_> = segment(&noise, 256)
        .unwrap()
        .iter()
        .map(|f| to_mag_phase(&fft(f).unwrap()))
        .collect();
    let profile = estimate_noise(&spectra, 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("noise.txt");
    profile.save(&path).unwrap();
    assert_eq!(NoiseProfile::load(&path).unwrap(), profile);
}

#[test]
fn wav_round_trip_of_enhanced_output() {
    let (_, noisy) = tone_in_noise(0.1, 3);
    let out = enhance_with(&noisy, &EnhancerConfig::default(), Execution::Parallel).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.wav");
    write_wav(&out, &path).unwrap();
    let back = read_wav(&path).unwrap();
    assert_eq!(back.sample_rate, 8000);
    assert_eq!(back.bit_depth, 16);
    for (a, b) in out.samples().iter().zip(back.samples.samples()) {
        assert!((a.clamp(-1.0, 1.0) - b).abs() <= 1.0 / 32768.0);
    }
}

#[test]
fn compare_report_is_complete_and_round_trips() {
    let clean = speech_surrogate(&SurrogateParams { duration_s: 1.0, ..Default::default() });
    let noise = white_noise(8000, 4000, 0.1, 42);
    let levels = [-3.0, 0.0, 3.0, 8.0, 10.0];
    let report = compare(&clean, &noise, "white", &levels, &EnhancerConfig::default(), Execution::Parallel).unwrap();
    assert_eq!(report.rows.len(), 20);
    for (i, row) in report.rows.iter().enumerate() {
        assert_eq!(row.input_snr_db, levels[i / 4]);
        assert_eq!(row.algorithm, Algorithm::ALL[i % 4].to_string());
    }
    let csv = report.to_csv_string().unwrap();
    assert_eq!(SnrReport::read_csv(csv.as_bytes()).unwrap(), report);

    let sequential = compare(&clean, &noise, "white", &levels, &EnhancerConfig::default(), Execution::Sequential).unwrap();
    assert_eq!(sequential, report);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mixing_hits_the_target(snr in -10.0f64..20.0, seed in 0u64..1000) {
        let clean = speech_surrogate(&SurrogateParams { duration_s: 0.5, seed, ..Default::default() });
        let noise = white_noise(8000, 1500, 1.0, seed);
        let mix = mix_at_snr(&clean, &noise, snr).unwrap();
        let residual: Vec<f64> = mix.samples().iter().zip(clean.samples()).map(|(m, c)| m - c).collect();
        let residual = TimeSignal::new(residual, 8000).unwrap();
        let measured = 10.0 * (clean.power() / residual.power()).log10();
        prop_assert!((measured - snr).abs() < 0.01);
    }

    #[test]
    fn enhancement_never_produces_non_finite_samples(seed in 0u64..1000, std in 0.0f64..0.5, alg in 0usize..4) {
        let noisy = white_noise(8000, 256 * 8, std, seed);
        let out = enhance_with(&noisy, &EnhancerConfig::new(Algorithm::ALL[alg]), Execution::Sequential).unwrap();
        prop_assert!(out.samples().iter().all(|s| s.is_finite()));
    }
}
