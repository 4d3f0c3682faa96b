//! Per-chunk wind detection on a synthetic scene, with the decision
//! timeline printed against ground truth.
//!
//! Run with: cargo run --release --example detect_wind

use gustless::detector::{CoherenceConfig, SscConfig};
use gustless::dsp::FramingConfig;
use gustless::eval::{detection_metrics, scene_evidence};
use gustless::synth::{mix_scene, Gust, SceneSpec, WindLevel};

fn main() -> gustless::Result<()> {
    let framing = FramingConfig::new(16000)?;
    // Thresholds from `gustless calibrate` on the synthetic corpus.
    let ssc = SscConfig {
        transform_sigma: 0.65,
        threshold: 0.58,
        ..SscConfig::default()
    };
    let coherence = CoherenceConfig {
        threshold: 0.88,
        ..CoherenceConfig::default()
    };

    let spec = SceneSpec::new(12.0, 16000, WindLevel::Medium, 2024).with_gusts(vec![
        Gust {
            start_s: 2.0,
            end_s: 5.5,
            ramp_ms: 150.0,
        },
        Gust {
            start_s: 8.0,
            end_s: 11.0,
            ramp_ms: 150.0,
        },
    ]);
    let scene = mix_scene(&spec)?;

    let results = scene_evidence(&scene, &framing, &ssc, &coherence)?;
    println!("chunk  time      ssc    mc     decision  truth");
    for (d, _) in &results {
        let truth = scene.chunk_labels[d.chunk_index as usize];
        println!(
            "{:4}   {:5} ms  {:.3}  {:.3}  {:<8}  {}",
            d.chunk_index,
            d.chunk_index * 200,
            d.ssc_score,
            d.mc_score,
            if d.warmup {
                "warmup"
            } else if d.wind_present {
                "WIND"
            } else {
                "clear"
            },
            if truth { "wind" } else { "-" },
        );
    }

    let decisions: Vec<_> = results.iter().map(|(d, _)| *d).collect();
    let report = detection_metrics(&decisions, &scene.chunk_labels)?;
    println!(
        "\naccuracy {:.3}, balanced {:.3}, FPR {:.3}, FNR {:.3}; {}/{} gusts caught; {} warmup chunks excluded",
        report.accuracy(),
        report.balanced_accuracy(),
        report.false_positive_rate(),
        report.false_negative_rate(),
        report.gust_events_detected,
        report.gust_events,
        report.warmup_chunks,
    );
    Ok(())
}
