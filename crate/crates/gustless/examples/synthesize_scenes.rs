//! Generate labeled two-channel wind/speech scenes and export them.
//!
//! Run with: cargo run --release --example synthesize_scenes

use gustless::io::wav::{write_wav, SampleFormat};
use gustless::synth::{mix_scene, Gust, SceneSpec, WindLevel};

fn main() -> gustless::Result<()> {
    let out_dir = std::env::temp_dir().join("gustless_scenes");
    std::fs::create_dir_all(&out_dir).expect("create output dir");

    for (level, seed) in [
        (WindLevel::Low, 101u64),
        (WindLevel::Medium, 102),
        (WindLevel::High, 103),
    ] {
        let spec = SceneSpec::new(8.0, 16000, level, seed).with_gusts(vec![
            Gust {
                start_s: 1.0,
                end_s: 3.5,
                ramp_ms: 150.0,
            },
            Gust {
                start_s: 5.0,
                end_s: 7.5,
                ramp_ms: 150.0,
            },
        ]);
        let scene = mix_scene(&spec)?;

        let windy = scene.chunk_labels.iter().filter(|&&l| l).count();
        println!(
            "level {:<6} seed {seed}: {} chunks ({windy} windy), wind-to-speech {} dB, peak gain {:.3}",
            level.name(),
            scene.chunk_labels.len(),
            scene
                .achieved_ratio_db
                .map(|db| format!("{db:+.1}"))
                .unwrap_or_else(|| "n/a".into()),
            scene.applied_gain,
        );

        let mix_path = out_dir.join(format!("scene_{}.wav", level.name()));
        let clean_path = out_dir.join(format!("scene_{}_clean.wav", level.name()));
        write_wav(&scene.audio, &mix_path, SampleFormat::Float32)?;
        write_wav(&scene.clean, &clean_path, SampleFormat::Float32)?;
        println!("  wrote {} and {}", mix_path.display(), clean_path.display());
    }

    println!("\nScenes share the speech proxy layout: speech on both channels with a");
    println!("4-sample delay (coherent), wind independent per channel (incoherent).");
    Ok(())
}
