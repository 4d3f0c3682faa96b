//! End-to-end suppression: train a quick model, clean a wind-corrupted
//! scene, and measure how much closer the low band gets to the clean
//! speech.
//!
//! Run with: cargo run --release --example suppress_wind

use gustless::dsp::{stft, FramingConfig};
use gustless::eval::{log_spectral_distance, segmental_snr};
use gustless::io::wav::{write_wav, SampleFormat};
use gustless::nn::TrainSettings;
use gustless::suppressor::{
    attentive_reconstruct, suppress, train, AttentiveRegion, ContextSpec, TrainingPair,
};
use gustless::synth::{derive_seed, mix_scene, Gust, SceneSpec, WindLevel};

fn main() -> gustless::Result<()> {
    let framing = FramingConfig::new(16000)?;
    let region = AttentiveRegion::default();
    let context = ContextSpec::default();

    println!("training a quick model on 60 s of pairs...");
    let mut pairs = Vec::new();
    for i in 0..6u64 {
        let scene = mix_scene(
            &SceneSpec::new(10.0, 16000, WindLevel::Medium, derive_seed(11, i)).with_gusts(vec![
                Gust {
                    start_s: 0.0,
                    end_s: 10.0,
                    ramp_ms: 100.0,
                },
            ]),
        )?;
        pairs.push(TrainingPair::new(
            stft(&scene.audio, &framing)?,
            stft(&scene.clean, &framing)?,
        )?);
    }
    let settings = TrainSettings {
        max_iters: 30,
        rel_tolerance: 1e-6,
        seed: 5,
        frame_stride: 2,
        ..TrainSettings::default()
    };
    let (model, _) = train(&pairs, &context, &region, 150, &settings)?;

    // Held-out scene, unseen seed.
    let scene = mix_scene(
        &SceneSpec::new(10.0, 16000, WindLevel::Medium, 90210).with_gusts(vec![Gust {
            start_s: 0.0,
            end_s: 10.0,
            ramp_ms: 100.0,
        }]),
    )?;
    let noisy = stft(&scene.audio, &framing)?;
    let clean = stft(&scene.clean, &framing)?;
    let recon = attentive_reconstruct(&model, &noisy)?;

    let attentive = region.attentive_bins(&framing)?;
    let band = Some((0, attentive - 1));
    let in_noisy = log_spectral_distance(&noisy, &clean, band)?;
    let in_recon = log_spectral_distance(&recon, &clean, band)?;
    let full_noisy = log_spectral_distance(&noisy, &clean, None)?;
    let full_recon = log_spectral_distance(&recon, &clean, None)?;
    println!(
        "log-spectral distance to clean, below {} Hz: {:.2} dB noisy -> {:.2} dB reconstructed ({:.0}% lower)",
        region.f_a_hz,
        in_noisy,
        in_recon,
        (1.0 - in_recon / in_noisy) * 100.0
    );
    println!(
        "full band: {full_noisy:.2} dB -> {full_recon:.2} dB (bins above {} Hz pass through untouched)",
        region.f_a_hz
    );

    let cleaned = suppress(&scene.audio, &model)?;
    println!(
        "segmental SNR: {:.2} dB noisy -> {:.2} dB suppressed",
        segmental_snr(scene.clean.channel(0), scene.audio.channel(0), 256),
        segmental_snr(scene.clean.channel(0), cleaned.channel(0), 256),
    );

    let dir = std::env::temp_dir().join("gustless_suppress");
    std::fs::create_dir_all(&dir).expect("create output dir");
    write_wav(&scene.audio, dir.join("noisy.wav"), SampleFormat::Float32)?;
    write_wav(&cleaned, dir.join("suppressed.wav"), SampleFormat::Float32)?;
    write_wav(&scene.clean, dir.join("clean.wav"), SampleFormat::Float32)?;
    println!("wavs written under {}", dir.display());
    Ok(())
}
