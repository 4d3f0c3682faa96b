//! Train the attentive reconstruction network on synthetic pairs and save
//! the model container.
//!
//! Run with: cargo run --release --example train_suppressor

use gustless::dsp::{stft, FramingConfig};
use gustless::io::model::{load_model, save_model};
use gustless::nn::TrainSettings;
use gustless::suppressor::{train, AttentiveRegion, ContextSpec, TrainingPair};
use gustless::synth::{derive_seed, mix_scene, Gust, SceneSpec, WindLevel};

fn main() -> gustless::Result<()> {
    let framing = FramingConfig::new(16000)?;
    let region = AttentiveRegion::default(); // rewrite below 500 Hz
    let context = ContextSpec::default(); // r = 3 frames, 2 channels

    // A small corpus keeps this example quick; use more scenes (the
    // acceptance suite trains on 320 s) for a production model.
    println!("generating training pairs...");
    let mut pairs = Vec::new();
    for i in 0..6u64 {
        let spec = SceneSpec::new(10.0, 16000, WindLevel::Medium, derive_seed(7, i)).with_gusts(
            vec![Gust {
                start_s: if i % 2 == 0 { 0.0 } else { 3.0 },
                end_s: if i % 2 == 0 { 10.0 } else { 8.0 },
                ramp_ms: 150.0,
            }],
        );
        let scene = mix_scene(&spec)?;
        pairs.push(TrainingPair::new(
            stft(&scene.audio, &framing)?,
            stft(&scene.clean, &framing)?,
        )?);
    }

    let settings = TrainSettings {
        max_iters: 30,
        rel_tolerance: 1e-6,
        seed: 42,
        frame_stride: 2,
        ..TrainSettings::default()
    };
    println!(
        "training 150 hidden units on {} scenes ({} s of pairs)...",
        pairs.len(),
        pairs.len() * 10
    );
    let started = std::time::Instant::now();
    let (model, report) = train(&pairs, &context, &region, 150, &settings)?;
    println!(
        "done in {:.1} s: loss {:.3} -> {:.3} over {} iterations on {} samples",
        started.elapsed().as_secs_f64(),
        report.initial_loss,
        report.final_loss,
        report.iterations,
        report.samples,
    );

    let path = std::env::temp_dir().join("gustless_example.glsm");
    save_model(&model, &path)?;
    let reloaded = load_model(&path)?;
    assert_eq!(model, reloaded);
    println!(
        "model saved to {} ({} -> {} -> {} units) and reloaded bit-exact",
        path.display(),
        reloaded.nn.input_dim(),
        reloaded.nn.hidden_dim(),
        reloaded.nn.output_dim(),
    );
    Ok(())
}
