//! Chunked streaming replay: 200 ms chunks with carried detector state,
//! verified against the offline batch path.
//!
//! Run with: cargo run --release --example stream_chunks

use gustless::detector::{CoherenceConfig, SscConfig};
use gustless::dsp::FramingConfig;
use gustless::io::stream::{run_batch, run_stream};
use gustless::synth::{mix_scene, Gust, SceneSpec, WindLevel};

fn main() -> gustless::Result<()> {
    let framing = FramingConfig::new(16000)?;
    let ssc = SscConfig {
        transform_sigma: 0.65,
        threshold: 0.58,
        ..SscConfig::default()
    };
    let coherence = CoherenceConfig {
        threshold: 0.88,
        ..CoherenceConfig::default()
    };

    let scene = mix_scene(
        &SceneSpec::new(20.0, 16000, WindLevel::High, 555).with_gusts(vec![
            Gust {
                start_s: 3.0,
                end_s: 9.0,
                ramp_ms: 150.0,
            },
            Gust {
                start_s: 13.0,
                end_s: 18.0,
                ramp_ms: 150.0,
            },
        ]),
    )?;

    println!(
        "streaming {} s in {} ms chunks ({} frames per chunk)...",
        20,
        framing.chunk_ms,
        framing.frames_per_chunk()
    );
    let out = run_stream(&scene.audio, &framing, &ssc, &coherence, None)?;

    let mut line = String::new();
    for d in &out.decisions {
        line.push(if d.warmup {
            'w'
        } else if d.wind_present {
            'W'
        } else {
            '.'
        });
    }
    let mut truth = String::new();
    for &l in &scene.chunk_labels {
        truth.push(if l { 'W' } else { '.' });
    }
    println!("decisions: {line}");
    println!("truth:     {truth}");

    let mut times: Vec<f64> = out
        .chunk_times
        .iter()
        .map(|t| t.as_secs_f64() * 1000.0)
        .collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!(
        "per-chunk wall time: median {:.3} ms, p95 {:.3} ms, max {:.3} ms (budget {} ms)",
        times[times.len() / 2],
        times[(times.len() * 95) / 100],
        times.last().unwrap(),
        framing.chunk_ms,
    );

    // The chunked run reproduces the offline batch path exactly.
    let batch = run_batch(&scene.audio, &framing, &ssc, &coherence, None)?;
    let identical = out
        .decisions
        .iter()
        .zip(&batch.decisions)
        .all(|(a, b)| a.wind_present == b.wind_present && a.ssc_score == b.ssc_score);
    println!(
        "stream/batch equivalence: {} ({} chunks)",
        if identical { "exact" } else { "BROKEN" },
        out.decisions.len()
    );
    Ok(())
}
