//! Trained-model behavior oracles for the suppressor.

use gustless::dsp::{stft, FramingConfig, Spectrogram};
use gustless::eval::log_spectral_distance;
use gustless::nn::{mse_on, TrainSettings};
use gustless::suppressor::{
    attentive_reconstruct, build_context, build_training_batch, train, AttentiveRegion,
    ContextSpec, TrainingPair,
};
use gustless::synth::{derive_seed, mix_scene, Gust, SceneSpec, WindLevel};
use gustless::StftGrid;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn framing() -> FramingConfig {
    FramingConfig::new(16000).unwrap()
}

fn windy_scene(seed: u64, secs: f64) -> gustless::LabeledScene {
    mix_scene(
        &SceneSpec::new(secs, 16000, WindLevel::Medium, seed).with_gusts(vec![Gust {
            start_s: 0.0,
            end_s: secs,
            ramp_ms: 100.0,
        }]),
    )
    .unwrap()
}

fn quick_model(seeds: std::ops::Range<u64>, level_seed: u64) -> gustless::SuppressorModel {
    let framing = framing();
    let mut pairs = Vec::new();
    for i in seeds {
        let scene = windy_scene(derive_seed(level_seed, i), 8.0);
        pairs.push(
            TrainingPair::new(
                stft(&scene.audio, &framing).unwrap(),
                stft(&scene.clean, &framing).unwrap(),
            )
            .unwrap(),
        );
    }
    let settings = TrainSettings {
        max_iters: 30,
        rel_tolerance: 1e-6,
        seed: 3,
        frame_stride: 2,
        ..TrainSettings::default()
    };
    train(
        &pairs,
        &ContextSpec::default(),
        &AttentiveRegion::default(),
        150,
        &settings,
    )
    .unwrap()
    .0
}

/// A wind-trained model must leave clean speech nearly untouched: on a
/// no-wind scene the full-band distance to clean stays within 2 dB of the
/// noisy input's own distance.
#[test]
fn near_transparency_on_clean_speech() {
    let framing = framing();
    let model = quick_model(0..5, 0xA11CE);
    let scene = mix_scene(&SceneSpec::new(8.0, 16000, WindLevel::None, 314159)).unwrap();
    let noisy = stft(&scene.audio, &framing).unwrap();
    let clean = stft(&scene.clean, &framing).unwrap();
    let recon = attentive_reconstruct(&model, &noisy).unwrap();
    let baseline = log_spectral_distance(&noisy, &clean, None).unwrap();
    let after = log_spectral_distance(&recon, &clean, None).unwrap();
    assert!(
        after <= baseline + 2.0,
        "full-band LSD rose from {baseline:.3} to {after:.3} dB on clean speech"
    );
}

/// Suppression on a wind scene strictly improves the attentive band and
/// never worsens the full band beyond 1 dB.
#[test]
fn wind_scene_improves_in_band() {
    let framing = framing();
    let region = AttentiveRegion::default();
    let model = quick_model(10..15, 0xB0B);
    let scene = windy_scene(271828, 8.0);
    let noisy = stft(&scene.audio, &framing).unwrap();
    let clean = stft(&scene.clean, &framing).unwrap();
    let recon = attentive_reconstruct(&model, &noisy).unwrap();
    let attentive = region.attentive_bins(&framing).unwrap();
    let band = Some((0, attentive - 1));
    let in_noisy = log_spectral_distance(&noisy, &clean, band).unwrap();
    let in_recon = log_spectral_distance(&recon, &clean, band).unwrap();
    assert!(
        in_recon < in_noisy,
        "in-band LSD did not improve: {in_noisy:.3} -> {in_recon:.3} dB"
    );
    let full_noisy = log_spectral_distance(&noisy, &clean, None).unwrap();
    let full_recon = log_spectral_distance(&recon, &clean, None).unwrap();
    assert!(full_recon <= full_noisy + 1.0);
}

/// Training on clean-equals-noisy pairs must beat the constant-mean
/// predictor on held-out clean data (the map approximates identity).
#[test]
fn no_wind_training_beats_mean_predictor() {
    let framing = framing();
    let context = ContextSpec::default();
    let region = AttentiveRegion::default();
    let mut pairs = Vec::new();
    for i in 0..4u64 {
        let scene = mix_scene(&SceneSpec::new(6.0, 16000, WindLevel::None, 5000 + i)).unwrap();
        // Duplicate the clean channel so noisy == clean on channel 1.
        let clean_grid = stft(&scene.clean, &framing).unwrap();
        let two_ch = StftGrid {
            channels: vec![clean_grid.channels[0].clone(), clean_grid.channels[0].clone()],
            framing,
        };
        pairs.push(TrainingPair::new(two_ch, clean_grid).unwrap());
    }
    let settings = TrainSettings {
        max_iters: 40,
        rel_tolerance: 1e-7,
        seed: 17,
        frame_stride: 2,
        ..TrainSettings::default()
    };
    let (model, report) = train(&pairs, &context, &region, 80, &settings).unwrap();
    assert!(report.final_loss < report.initial_loss);

    // Held-out scene, same construction.
    let held = mix_scene(&SceneSpec::new(6.0, 16000, WindLevel::None, 9999)).unwrap();
    let clean_grid = stft(&held.clean, &framing).unwrap();
    let two_ch = StftGrid {
        channels: vec![clean_grid.channels[0].clone(), clean_grid.channels[0].clone()],
        framing,
    };
    let held_pair = TrainingPair::new(two_ch, clean_grid).unwrap();
    let batch = build_training_batch(&[held_pair], &context, &region, 1).unwrap();
    // Un-normalize the batch inputs back to raw features for mse_on.
    let mut raw = batch.inputs.clone();
    for mut row in raw.rows_mut() {
        for (x, (&m, &s)) in row
            .iter_mut()
            .zip(batch.norm_mean.iter().zip(batch.norm_std.iter()))
        {
            *x = *x * s + m;
        }
    }
    let model_mse = mse_on(&model.nn, &raw, &batch.targets).unwrap();

    let n = batch.targets.nrows() as f64;
    let mean = batch.targets.sum_axis(ndarray::Axis(0)) / n;
    let mean_mse = batch
        .targets
        .rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .zip(mean.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .sum::<f64>()
        / (n * batch.targets.ncols() as f64);
    assert!(
        model_mse < mean_mse,
        "model MSE {model_mse:.4} not below mean-predictor MSE {mean_mse:.4}"
    );
}

/// A ten-frame toy pair overfits to near zero training error.
#[test]
fn toy_pair_overfits() {
    let framing = framing();
    let context = ContextSpec::default();
    let region = AttentiveRegion::default();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut random_grid = |channels: usize| {
        let specs = (0..channels)
            .map(|_| {
                let mut s = Spectrogram::zeros(10, framing.bins());
                for t in 0..10 {
                    for x in s.frame_mut(t) {
                        *x = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                    }
                }
                s
            })
            .collect();
        StftGrid {
            channels: specs,
            framing,
        }
    };
    let pair = TrainingPair::new(random_grid(2), random_grid(1)).unwrap();
    let settings = TrainSettings {
        max_iters: 500,
        rel_tolerance: 0.0,
        seed: 8,
        frame_stride: 1,
        ..TrainSettings::default()
    };
    let (_, report) = train(&[pair], &context, &region, 150, &settings).unwrap();
    assert!(
        report.final_loss < 1e-3,
        "toy training MSE stalled at {} after {} iterations",
        report.final_loss,
        report.iterations
    );
}

/// The detector's own coherence estimator separates speech-only spans from
/// wind-heavy spans inside one scene.
#[test]
fn coherence_separates_speech_from_wind_spans() {
    let framing = framing();
    let scene = mix_scene(
        &SceneSpec::new(10.0, 16000, WindLevel::High, 123).with_gusts(vec![Gust {
            start_s: 4.0,
            end_s: 9.0,
            ramp_ms: 100.0,
        }]),
    )
    .unwrap();
    let results = gustless::eval::scene_evidence(
        &scene,
        &framing,
        &gustless::detector::SscConfig::default(),
        &gustless::detector::CoherenceConfig::default(),
    )
    .unwrap();
    let mut speech_mc = Vec::new();
    let mut wind_mc = Vec::new();
    for (d, _) in &results {
        if d.warmup {
            continue;
        }
        let idx = d.chunk_index as usize;
        // Skip the transition neighborhood.
        let near_flip = (15..=22).contains(&idx) || (43..=49).contains(&idx);
        if near_flip {
            continue;
        }
        if scene.chunk_labels[idx] {
            wind_mc.push(d.mc_score);
        } else {
            speech_mc.push(d.mc_score);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(
        mean(&speech_mc) > mean(&wind_mc),
        "speech spans MC {:.3} not above wind spans MC {:.3}",
        mean(&speech_mc),
        mean(&wind_mc)
    );
}

/// Single-sample batch: context of a one-frame grid replicates everywhere.
#[test]
fn build_context_handles_single_frame_grids() {
    let framing = framing();
    let lp = gustless::dsp::log_power(&StftGrid {
        channels: vec![Spectrogram::zeros(1, framing.bins()); 2],
        framing,
    });
    let spec = ContextSpec::default();
    let ctx = build_context(&lp, 0, &spec);
    assert_eq!(ctx.len(), spec.input_dim(framing.bins()));
    let grad = Array2::from_shape_vec((1, ctx.len()), ctx).unwrap();
    assert!(grad.iter().all(|v| v.is_finite()));
}
