//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS/FAIL line with the measured numbers.

use std::time::Instant;

use gustless::detector::{
    spectral_centroid, ssc_indicator, CoherenceConfig, DetectorState, SscConfig,
};
use gustless::dsp::{stft, FramingConfig};
use gustless::eval::{
    calibrate, default_calibration_grid, log_spectral_distance, replay_thresholds, scene_evidence,
};
use gustless::io::stream::{run_batch, run_stream};
use gustless::nn::{model_loss, model_loss_and_gradient, NnModel, OutputUnits, TrainSettings};
use gustless::suppressor::{
    attentive_reconstruct, train, AttentiveRegion, ContextSpec, SuppressorModel, TrainingPair,
};
use gustless::synth::{
    derive_seed, mix_scene, standard_corpus, Gust, SceneSpec, WindLevel,
};
use gustless::MultiChannelAudio;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS_SEED: u64 = 0xACCE_1234;
const SCENE_SECONDS: f64 = 10.0;

fn framing() -> FramingConfig {
    FramingConfig::new(16000).unwrap()
}

/// Detector settings after calibration on the low-level corpus; the sigma
/// and thresholds come out of `calibrate` in criterion 1 and are pinned
/// here for the criteria that reuse them.
fn calibrated() -> (SscConfig, CoherenceConfig) {
    (
        SscConfig {
            transform_sigma: 0.65,
            threshold: 0.58,
            ..SscConfig::default()
        },
        CoherenceConfig {
            threshold: 0.88,
            ..CoherenceConfig::default()
        },
    )
}

fn corpus_balanced_accuracy(
    corpus: &[gustless::LabeledScene],
    ssc: &SscConfig,
    coherence: &CoherenceConfig,
) -> f64 {
    let framing = framing();
    let evidences: Vec<_> = corpus
        .iter()
        .map(|s| scene_evidence(s, &framing, ssc, coherence).unwrap())
        .collect();
    let report = replay_thresholds(
        &evidences,
        corpus,
        ssc.transform_sigma,
        ssc.threshold,
        coherence.threshold,
    );
    report.balanced_accuracy()
}

#[test]
fn criterion_1_detection_accuracy_after_calibration() {
    let started = Instant::now();
    let framing = framing();
    let base = SscConfig::default();
    let base_coh = CoherenceConfig::default();

    let low = standard_corpus(WindLevel::Low, 50, SCENE_SECONDS, 16000, CORPUS_SEED).unwrap();
    let outcome = calibrate(&default_calibration_grid(), &low, &framing, &base, &base_coh).unwrap();
    let ssc = SscConfig {
        transform_sigma: outcome.transform_sigma,
        threshold: outcome.ssc_threshold,
        ..base
    };
    let coherence = CoherenceConfig {
        threshold: outcome.mc_threshold,
        ..base_coh
    };
    let ba_low = outcome.balanced_accuracy;

    let high = standard_corpus(WindLevel::High, 50, SCENE_SECONDS, 16000, CORPUS_SEED).unwrap();
    let ba_high = corpus_balanced_accuracy(&high, &ssc, &coherence);

    let elapsed = started.elapsed();
    let pass = ba_low >= 0.90 && ba_high >= 0.99 && elapsed.as_secs_f64() < 180.0;
    println!(
        "{} criterion 1: balanced accuracy low {ba_low:.4} (>= 0.90), high {ba_high:.4} (>= 0.99), \
         calibrated (ssc {}, mc {}, sigma {}), runtime {:.1} s (< 180 s)",
        if pass { "PASS" } else { "FAIL" },
        outcome.ssc_threshold,
        outcome.mc_threshold,
        outcome.transform_sigma,
        elapsed.as_secs_f64()
    );
    assert!(ba_low >= 0.90, "low-level balanced accuracy {ba_low}");
    assert!(ba_high >= 0.99, "high-level balanced accuracy {ba_high}");
    assert!(elapsed.as_secs_f64() < 180.0, "took {elapsed:?}");
}

#[test]
fn criterion_2_occlusion_robustness() {
    let (ssc, coherence) = calibrated();
    let high = standard_corpus(WindLevel::High, 50, SCENE_SECONDS, 16000, CORPUS_SEED).unwrap();
    let ba_high = corpus_balanced_accuracy(&high, &ssc, &coherence);

    let occluded: Vec<_> = high
        .iter()
        .map(|scene| {
            let mut s = scene.clone();
            for v in s.audio.channel_mut(1).iter_mut() {
                *v = 0.0;
            }
            s
        })
        .collect();
    let ba_occluded = corpus_balanced_accuracy(&occluded, &ssc, &coherence);

    let degradation = ba_high - ba_occluded;
    let pass = degradation <= 0.05;
    println!(
        "{} criterion 2: occlusion degradation {degradation:.4} (<= 0.05), \
         two-channel {ba_high:.4} vs occluded {ba_occluded:.4}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(degradation <= 0.05, "degradation {degradation}");
}

#[test]
fn criterion_3_suppression_quality() {
    let started = Instant::now();
    let framing = framing();
    let region = AttentiveRegion::default();
    let context = ContextSpec::default();

    // Training corpus: 16 scenes x 20 s = 320 s >= 5 minutes of pairs at
    // the evaluation level, alternating steady and gusty wind.
    let mut pairs = Vec::new();
    for i in 0..16u64 {
        let seed = derive_seed(CORPUS_SEED, 0x7261_494E + i);
        let gusts = if i % 2 == 0 {
            vec![Gust {
                start_s: 0.0,
                end_s: 20.0,
                ramp_ms: 100.0,
            }]
        } else {
            vec![
                Gust {
                    start_s: 2.0,
                    end_s: 9.0,
                    ramp_ms: 150.0,
                },
                Gust {
                    start_s: 12.0,
                    end_s: 18.0,
                    ramp_ms: 150.0,
                },
            ]
        };
        let scene = mix_scene(
            &SceneSpec::new(20.0, 16000, WindLevel::Medium, seed).with_gusts(gusts),
        )
        .unwrap();
        let noisy = stft(&scene.audio, &framing).unwrap();
        let clean = stft(&scene.clean, &framing).unwrap();
        pairs.push(TrainingPair::new(noisy, clean).unwrap());
    }
    let settings = TrainSettings {
        max_iters: 60,
        rel_tolerance: 1e-6,
        seed: 42,
        frame_stride: 2,
        ..TrainSettings::default()
    };
    let (model, report) = train(&pairs, &context, &region, 150, &settings).unwrap();
    assert!(report.final_loss < report.initial_loss);

    // 20 held-out scenes at medium, disjoint seeds.
    let attentive = region.attentive_bins(&framing).unwrap();
    let band = Some((0, attentive - 1));
    let mut improvements = Vec::new();
    let mut worst_full_delta = f64::NEG_INFINITY;
    for i in 0..20u64 {
        let seed = derive_seed(CORPUS_SEED, 0xE7A1 + i);
        let gusts = vec![Gust {
            start_s: 0.0,
            end_s: SCENE_SECONDS,
            ramp_ms: 100.0,
        }];
        let scene = mix_scene(
            &SceneSpec::new(SCENE_SECONDS, 16000, WindLevel::Medium, seed).with_gusts(gusts),
        )
        .unwrap();
        let noisy = stft(&scene.audio, &framing).unwrap();
        let clean = stft(&scene.clean, &framing).unwrap();
        let recon = attentive_reconstruct(&model, &noisy).unwrap();
        let in_noisy = log_spectral_distance(&noisy, &clean, band).unwrap();
        let in_recon = log_spectral_distance(&recon, &clean, band).unwrap();
        let full_noisy = log_spectral_distance(&noisy, &clean, None).unwrap();
        let full_recon = log_spectral_distance(&recon, &clean, None).unwrap();
        improvements.push(1.0 - in_recon / in_noisy);
        worst_full_delta = worst_full_delta.max(full_recon - full_noisy);
    }
    let mean_improvement = improvements.iter().sum::<f64>() / improvements.len() as f64;
    let elapsed = started.elapsed();
    let pass =
        mean_improvement >= 0.30 && worst_full_delta <= 1.0 && elapsed.as_secs_f64() < 300.0;
    println!(
        "{} criterion 3: mean in-band LSD improvement {:.1}% (>= 30%), worst full-band delta \
         {worst_full_delta:+.3} dB (<= +1 dB), trained on {} samples from 320 s of pairs, \
         runtime {:.1} s (< 300 s)",
        if pass { "PASS" } else { "FAIL" },
        mean_improvement * 100.0,
        report.samples,
        elapsed.as_secs_f64()
    );
    assert!(
        mean_improvement >= 0.30,
        "mean improvement {mean_improvement}"
    );
    assert!(worst_full_delta <= 1.0, "full-band delta {worst_full_delta}");
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
}

#[test]
fn criterion_4_pass_through_exactness() {
    let mut checked_frames = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    for (model_seed, f_a) in [(1u64, 300.0), (2, 500.0), (3, 800.0), (4, 500.0)] {
        let framing = framing();
        let region = AttentiveRegion { f_a_hz: f_a };
        let context = ContextSpec::default();
        let attentive = region.attentive_bins(&framing).unwrap();
        let input = context.input_dim(framing.bins());
        let mut mrng = ChaCha8Rng::seed_from_u64(model_seed);
        let model = SuppressorModel {
            nn: NnModel {
                w1: Array2::from_shape_fn((40, input), |_| (mrng.random::<f64>() - 0.5) * 0.1),
                b1: Array1::zeros(40),
                w2: Array2::from_shape_fn((attentive, 40), |_| {
                    (mrng.random::<f64>() - 0.5) * 0.1
                }),
                b2: Array1::from_elem(attentive, -4.0),
                norm_mean: Array1::zeros(input),
                norm_std: Array1::ones(input),
                output_units: OutputUnits::LogPower,
            },
            framing,
            region,
            context,
        };
        let frames = 250;
        let mut channels = Vec::new();
        for _ in 0..2 {
            let mut spec = gustless::dsp::Spectrogram::zeros(frames, framing.bins());
            for t in 0..frames {
                for x in spec.frame_mut(t) {
                    *x = Complex64::new(
                        (rng.random::<f64>() - 0.5) * 2.0,
                        (rng.random::<f64>() - 0.5) * 2.0,
                    );
                }
            }
            channels.push(spec);
        }
        let noisy = gustless::StftGrid { channels, framing };
        let recon = attentive_reconstruct(&model, &noisy).unwrap();
        for t in 0..frames {
            let src = noisy.channel(0).frame(t);
            let dst = recon.channel(0).frame(t);
            for mu in attentive..framing.bins() {
                assert_eq!(
                    src[mu].re.to_bits(),
                    dst[mu].re.to_bits(),
                    "frame {t} bin {mu} re differs"
                );
                assert_eq!(
                    src[mu].im.to_bits(),
                    dst[mu].im.to_bits(),
                    "frame {t} bin {mu} im differs"
                );
            }
            checked_frames += 1;
        }
    }
    let pass = checked_frames >= 1000;
    println!(
        "{} criterion 4: pass-through bins bit-identical on {checked_frames} random frames \
         (>= 1000), zero tolerance",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(checked_frames >= 1000);
}

#[test]
fn criterion_5_numerical_suites() {
    // STFT round-trip on random signals.
    let framing = framing();
    let mut rng = ChaCha8Rng::seed_from_u64(0x57F7);
    let samples: Vec<f64> = (0..16000).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let audio = MultiChannelAudio::mono(samples.clone(), 16000).unwrap();
    let grid = stft(&audio, &framing).unwrap();
    let back = gustless::istft(&grid).unwrap();
    let peak = samples.iter().fold(0.0f64, |a, &s| a.max(s.abs()));
    let frame = framing.frame_len();
    let covered = (grid.num_frames() - 1) * framing.hop() + frame;
    let mut round_trip = 0.0f64;
    for (i, (b, s)) in back.channel(0).iter().zip(&samples).enumerate() {
        if i >= frame && i < covered - frame {
            round_trip = round_trip.max((b - s).abs() / peak);
        }
    }

    // Parseval per frame, one-sided with bin doubling.
    let window = gustless::dsp::hann_window(frame);
    let mut parseval = 0.0f64;
    for t in 0..grid.num_frames() {
        let windowed: Vec<f64> = samples[t * framing.hop()..t * framing.hop() + frame]
            .iter()
            .zip(&window)
            .map(|(s, w)| s * w)
            .collect();
        let time_energy: f64 = windowed.iter().map(|s| s * s).sum();
        let bins = grid.channel(0).frame(t);
        let mut spec_energy = bins[0].norm_sqr() + bins[bins.len() - 1].norm_sqr();
        for x in &bins[1..bins.len() - 1] {
            spec_energy += 2.0 * x.norm_sqr();
        }
        spec_energy /= framing.fft_size as f64;
        parseval = parseval.max((time_energy - spec_energy).abs() / time_energy.max(1e-30));
    }

    // Gradients against central finite differences, 20 random draws.
    let mut grad_worst = 0.0f64;
    for draw in 0..20u64 {
        let mut drng = ChaCha8Rng::seed_from_u64(0x6AD0 + draw);
        let (m, di, dh, do_) = (6, 8, 5, 3);
        let z = Array2::from_shape_fn((m, di), |_| drng.random::<f64>() * 2.0 - 1.0);
        let t = Array2::from_shape_fn((m, do_), |_| drng.random::<f64>() * 2.0 - 1.0);
        let mut model = NnModel {
            w1: Array2::from_shape_fn((dh, di), |_| drng.random::<f64>() - 0.5),
            b1: Array1::from_shape_fn(dh, |i| 0.1 * i as f64 - 0.2),
            w2: Array2::from_shape_fn((do_, dh), |_| drng.random::<f64>() - 0.5),
            b2: Array1::from_shape_fn(do_, |i| 0.05 * i as f64),
            norm_mean: Array1::zeros(di),
            norm_std: Array1::ones(di),
            output_units: OutputUnits::LogPower,
        };
        let (_, analytic) = model_loss_and_gradient(&model, &z, &t);
        let eps = 1e-5;
        let mut diff_sq = 0.0;
        let mut norm_sq = 0.0;
        macro_rules! probe_block {
            ($field:ident, $grad:expr) => {
                for i in 0..model.$field.len() {
                    let base = model.$field.as_slice().unwrap()[i];
                    model.$field.as_slice_mut().unwrap()[i] = base + eps;
                    let fp = model_loss(&model, &z, &t);
                    model.$field.as_slice_mut().unwrap()[i] = base - eps;
                    let fm = model_loss(&model, &z, &t);
                    model.$field.as_slice_mut().unwrap()[i] = base;
                    let numeric = (fp - fm) / (2.0 * eps);
                    let a = $grad.as_slice().unwrap()[i];
                    diff_sq += (a - numeric) * (a - numeric);
                    norm_sq += numeric * numeric;
                }
            };
        }
        probe_block!(w1, analytic.w1);
        probe_block!(b1, analytic.b1);
        probe_block!(w2, analytic.w2);
        probe_block!(b2, analytic.b2);
        grad_worst = grad_worst.max(diff_sq.sqrt() / norm_sq.sqrt().max(1e-300));
    }

    // Cauchy-Schwarz over 1e5 random PSD updates.
    let bins = 16;
    let mut state = DetectorState::new(bins, 2, 8, 8);
    let mut cs_worst = f64::NEG_INFINITY;
    let mut crng = ChaCha8Rng::seed_from_u64(0xCA0C);
    for _ in 0..100_000 {
        let a: Vec<Complex64> = (0..bins)
            .map(|_| Complex64::new(crng.random::<f64>() * 4.0 - 2.0, crng.random::<f64>() * 4.0 - 2.0))
            .collect();
        let b: Vec<Complex64> = (0..bins)
            .map(|_| Complex64::new(crng.random::<f64>() * 4.0 - 2.0, crng.random::<f64>() * 4.0 - 2.0))
            .collect();
        state.psd_update(&a, &b, 0.8);
        for mu in 0..bins {
            let (p11, p22, p12) = state.psd_at(mu);
            cs_worst = cs_worst.max(p12.norm_sqr() - p11 * p22);
        }
    }

    let pass =
        round_trip < 1e-6 && parseval < 1e-6 && grad_worst < 1e-4 && cs_worst <= 1e-9;
    println!(
        "{} criterion 5: round-trip {round_trip:.2e} (< 1e-6), Parseval {parseval:.2e} (< 1e-6), \
         gradient error {grad_worst:.2e} (< 1e-4, 20 draws), Cauchy-Schwarz excess {cs_worst:.2e} \
         (<= 1e-9, 1e5 updates)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(round_trip < 1e-6);
    assert!(parseval < 1e-6);
    assert!(grad_worst < 1e-4);
    assert!(cs_worst <= 1e-9);
}

#[test]
fn criterion_6_determinism_and_equivalence() {
    // Fixed-seed scenes are bit-identical.
    let spec = SceneSpec::new(5.0, 16000, WindLevel::Medium, 31).with_gusts(vec![Gust {
        start_s: 1.0,
        end_s: 4.0,
        ramp_ms: 120.0,
    }]);
    let scene_a = mix_scene(&spec).unwrap();
    let scene_b = mix_scene(&spec).unwrap();
    let scenes_identical = scene_a.audio == scene_b.audio && scene_a.clean == scene_b.clean;

    // Fixed-seed models are bit-identical.
    let framing = framing();
    let noisy = stft(&scene_a.audio, &framing).unwrap();
    let clean = stft(&scene_a.clean, &framing).unwrap();
    let pairs = vec![TrainingPair::new(noisy, clean).unwrap()];
    let settings = TrainSettings {
        max_iters: 8,
        seed: 11,
        frame_stride: 4,
        ..TrainSettings::default()
    };
    let (model_a, _) = train(
        &pairs,
        &ContextSpec::default(),
        &AttentiveRegion::default(),
        16,
        &settings,
    )
    .unwrap();
    let (model_b, _) = train(
        &pairs,
        &ContextSpec::default(),
        &AttentiveRegion::default(),
        16,
        &settings,
    )
    .unwrap();
    let models_identical = model_a == model_b;

    // Stream and batch decisions agree exactly on 10 random scenes.
    let (ssc, coherence) = calibrated();
    let mut equivalent = true;
    for i in 0..10u64 {
        let seed = derive_seed(0xD1CE, i);
        let level = match i % 3 {
            0 => WindLevel::Low,
            1 => WindLevel::Medium,
            _ => WindLevel::High,
        };
        let secs = 4.0 + (i % 4) as f64 * 0.85;
        let scene = mix_scene(
            &SceneSpec::new(secs, 16000, level, seed).with_gusts(vec![Gust {
                start_s: 0.2 * secs,
                end_s: 0.8 * secs,
                ramp_ms: 120.0,
            }]),
        )
        .unwrap();
        let stream = run_stream(&scene.audio, &framing, &ssc, &coherence, None).unwrap();
        let batch = run_batch(&scene.audio, &framing, &ssc, &coherence, None).unwrap();
        equivalent &= stream.decisions.len() == batch.decisions.len();
        for (a, b) in stream.decisions.iter().zip(&batch.decisions) {
            equivalent &= a.wind_present == b.wind_present
                && a.ssc_score.to_bits() == b.ssc_score.to_bits()
                && a.mc_score.to_bits() == b.mc_score.to_bits()
                && a.warmup == b.warmup
                && a.partial == b.partial;
        }
    }

    let pass = scenes_identical && models_identical && equivalent;
    println!(
        "{} criterion 6: fixed-seed scenes bit-identical: {scenes_identical}, models \
         bit-identical: {models_identical}, stream/batch decisions exact on 10 scenes: {equivalent}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(scenes_identical);
    assert!(models_identical);
    assert!(equivalent);
}

#[test]
fn criterion_7_closed_form_examples() {
    // ssc_indicator: centroid 25 over mu2 = 100.
    let indicator = ssc_indicator(25.0, 100);
    // spectral centroid: power 1 at bin 0, power 3 at bin 100 -> 75.
    let mut power = vec![0.0; 101];
    power[0] = 1.0;
    power[100] = 3.0;
    let centroid = spectral_centroid(&power, 0, 100).unwrap();

    // One-step PSD from zero state with unit spectra and alpha = 0.8.
    let mut state = DetectorState::new(4, 2, 8, 8);
    let ones = vec![Complex64::new(1.0, 0.0); 4];
    state.psd_update(&ones, &ones, 0.8);
    let (p11, p22, p12) = state.psd_at(2);

    // Identical converged channels: MC = 1 within 1e-6.
    let mut conv = DetectorState::new(8, 2, 8, 8);
    let x: Vec<Complex64> = (0..8)
        .map(|i| Complex64::new(0.4 + 0.1 * i as f64, -0.3 * i as f64))
        .collect();
    for _ in 0..300 {
        conv.psd_update(&x, &x, 0.8);
    }
    let (mc, silent) = conv.coherence_mc((1, 7));

    let pass = indicator == 0.75
        && centroid == 75.0
        && (p11 - 0.2).abs() < 1e-15
        && (p22 - 0.2).abs() < 1e-15
        && (p12.re - 0.2).abs() < 1e-15
        && p12.im == 0.0
        && (mc - 1.0).abs() < 1e-6
        && !silent;
    println!(
        "{} criterion 7: indicator(25, 100) = {indicator} (0.75 exact), centroid(1@0, 3@100) = \
         {centroid} (75 exact), one-step PSD = ({p11}, {p22}, {p12}) (0.2 exact), converged MC = \
         {mc} (1 within 1e-6)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert_eq!(indicator, 0.75);
    assert_eq!(centroid, 75.0);
    assert!((p11 - 0.2).abs() < 1e-15);
    assert!((p22 - 0.2).abs() < 1e-15);
    assert!((p12.re - 0.2).abs() < 1e-15 && p12.im == 0.0);
    assert!((mc - 1.0).abs() < 1e-6 && !silent);
}

#[test]
fn soft_real_time_guard() {
    // Median per-chunk wall time must sit well under the 200 ms chunk
    // duration on a desktop build.
    let scene = mix_scene(
        &SceneSpec::new(30.0, 16000, WindLevel::Medium, 77).with_gusts(vec![Gust {
            start_s: 5.0,
            end_s: 25.0,
            ramp_ms: 150.0,
        }]),
    )
    .unwrap();
    let framing = framing();
    let (ssc, coherence) = calibrated();
    let out = run_stream(&scene.audio, &framing, &ssc, &coherence, None).unwrap();
    let mut times: Vec<f64> = out
        .chunk_times
        .iter()
        .map(|t| t.as_secs_f64() * 1000.0)
        .collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = times[times.len() / 2];
    let pass = median < framing.chunk_ms as f64;
    println!(
        "{} real-time guard: median chunk time {median:.3} ms (< {} ms budget) over {} chunks",
        if pass { "PASS" } else { "FAIL" },
        framing.chunk_ms,
        times.len()
    );
    assert!(median < framing.chunk_ms as f64);
}
