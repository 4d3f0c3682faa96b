//! Grid-search the detector thresholds on a labeled synthetic corpus.
//!
//! Run with: cargo run --release --example calibrate_detector

use gustless::detector::{CoherenceConfig, SscConfig};
use gustless::dsp::FramingConfig;
use gustless::eval::{calibrate, default_calibration_grid};
use gustless::synth::{standard_corpus, WindLevel};

fn main() -> gustless::Result<()> {
    let framing = FramingConfig::new(16000)?;
    let base_ssc = SscConfig::default();
    let base_coherence = CoherenceConfig::default();

    // Calibrate on the hardest condition: low wind (-5 dB to speech).
    println!("rendering a 25-scene corpus at wind level low...");
    let corpus = standard_corpus(WindLevel::Low, 25, 10.0, 16000, 0xCAFE)?;
    let grid = default_calibration_grid();
    println!(
        "searching {} grid points ({} ssc x {} mc x {} sigma)...",
        grid.ssc_thresholds.len() * grid.mc_thresholds.len() * grid.sigmas.len(),
        grid.ssc_thresholds.len(),
        grid.mc_thresholds.len(),
        grid.sigmas.len(),
    );
    let outcome = calibrate(&grid, &corpus, &framing, &base_ssc, &base_coherence)?;

    println!(
        "best: ssc_threshold {} / mc_threshold {} / sigma {}",
        outcome.ssc_threshold, outcome.mc_threshold, outcome.transform_sigma
    );
    let r = &outcome.report;
    println!(
        "balanced accuracy {:.4} (TPR {:.4}, TNR {:.4}), FPR {:.4}; {} chunks scored, {} warm-up excluded",
        outcome.balanced_accuracy,
        r.true_positive_rate(),
        r.true_negative_rate(),
        r.false_positive_rate(),
        r.scored_chunks(),
        r.warmup_chunks,
    );
    println!("\nconfig snippet to pin the result:");
    println!(
        "[ssc]\ntransform_sigma = {}\nthreshold = {}\n\n[coherence]\nthreshold = {}",
        outcome.transform_sigma, outcome.ssc_threshold, outcome.mc_threshold
    );
    Ok(())
}
