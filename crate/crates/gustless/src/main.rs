//! Thin command-line front end over the gustless library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gustless::dsp::stft;
use gustless::error::{Error, Result};
use gustless::eval::{
    calibrate, default_calibration_grid, detection_metrics, log_spectral_distance, scene_evidence,
    segmental_snr, DetectionSummary, ReconReport, ReconSummary,
};
use gustless::io::config::PipelineConfig;
use gustless::io::model::{load_model, save_model};
use gustless::io::stream::{run_batch, run_stream};
use gustless::io::trace::write_trace;
use gustless::io::wav::{read_wav, write_wav, SampleFormat};
use gustless::suppressor::{attentive_reconstruct, suppress, train, TrainingPair};
use gustless::synth::{mix_scene, standard_corpus, LabeledScene};

#[derive(Parser)]
#[command(
    name = "gustless",
    about = "Two-channel wind noise detection and attentive neural suppression",
    version
)]
struct Cli {
    /// Config file (key = value sections); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed override for anything randomized.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a labeled synthetic scene to WAV plus a label sidecar.
    Synth {
        /// Two-channel mixture output path.
        #[arg(long, default_value = "scene.wav")]
        out: PathBuf,
        /// Aligned clean-speech output path.
        #[arg(long)]
        clean: Option<PathBuf>,
        /// Label sidecar path (defaults to <out>.labels.txt).
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Detect wind per chunk in a WAV file.
    Detect {
        #[arg(long)]
        input: PathBuf,
        /// Decision trace CSV output.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Suppress wind in a WAV file with a trained model.
    Suppress {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "suppressed.wav")]
        out: PathBuf,
    },
    /// Train a reconstruction model on synthetic paired scenes.
    Train {
        /// Model output path.
        #[arg(long, default_value = "model.glsm")]
        out: PathBuf,
        /// Number of training scenes.
        #[arg(long, default_value_t = 16)]
        scenes: usize,
    },
    /// Score detection (and reconstruction, with a model) on a synthetic corpus.
    Eval {
        /// Number of scenes in the corpus.
        #[arg(long, default_value_t = 25)]
        scenes: usize,
        /// Optional model for reconstruction metrics.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Structured-text report output.
        #[arg(long)]
        report: Option<PathBuf>,
        /// CSV report output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Replay a WAV chunk by chunk, as a device would, with timing stats.
    Stream {
        #[arg(long)]
        input: PathBuf,
        /// Optional model: also reconstruct while streaming.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Reconstructed audio output (needs --model).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid-search detector thresholds on a synthetic corpus.
    Calibrate {
        #[arg(long, default_value_t = 25)]
        scenes: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(cli_config: &Option<PathBuf>, cli_seed: &Option<u64>) -> Result<PipelineConfig> {
    let mut cfg = match cli_config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli_seed {
        cfg.seed = *seed;
    }
    Ok(cfg)
}

fn write_labels(scene: &LabeledScene, path: &PathBuf) -> Result<()> {
    let mut text = String::new();
    match scene.achieved_ratio_db {
        Some(db) => text.push_str(&format!("achieved_ratio_db = {db}\n")),
        None => text.push_str("achieved_ratio_db = none\n"),
    }
    text.push_str(&format!("applied_gain = {}\n", scene.applied_gain));
    for (i, label) in scene.chunk_labels.iter().enumerate() {
        text.push_str(&format!("chunk {i} = {}\n", *label as u8));
    }
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn training_pairs(cfg: &PipelineConfig, scenes: usize) -> Result<Vec<TrainingPair>> {
    let mut pairs = Vec::with_capacity(scenes);
    for i in 0..scenes {
        let mut spec = cfg.synth.scene_spec(
            &cfg.framing,
            gustless::synth::derive_seed(cfg.seed, 0x54_5241_494E + i as u64),
        );
        // Alternate configured gusts with full-scene wind for coverage of
        // both transitions and steady noise.
        if i % 2 == 0 {
            spec.gusts = vec![gustless::synth::Gust {
                start_s: 0.0,
                end_s: spec.duration_s,
                ramp_ms: 100.0,
            }];
        }
        let scene = mix_scene(&spec)?;
        let noisy = stft(&scene.audio, &cfg.framing)?;
        let clean = stft(&scene.clean, &cfg.framing)?;
        pairs.push(TrainingPair::new(noisy, clean)?);
    }
    Ok(pairs)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli.config, &cli.seed)?;
    match cli.command {
        Command::Synth { out, clean, labels } => {
            let spec = cfg.synth.scene_spec(&cfg.framing, cfg.seed);
            let scene = mix_scene(&spec)?;
            write_wav(&scene.audio, &out, SampleFormat::Float32)?;
            if let Some(clean_path) = &clean {
                write_wav(&scene.clean, clean_path, SampleFormat::Float32)?;
            }
            let labels_path = labels.unwrap_or_else(|| {
                let mut p = out.as_os_str().to_owned();
                p.push(".labels.txt");
                PathBuf::from(p)
            });
            write_labels(&scene, &labels_path)?;
            println!(
                "wrote {} ({} chunks, {} windy), labels in {}",
                out.display(),
                scene.chunk_labels.len(),
                scene.chunk_labels.iter().filter(|&&l| l).count(),
                labels_path.display()
            );
            Ok(())
        }
        Command::Detect { input, trace } => {
            let audio = read_wav(&input)?;
            let out = run_batch(&audio, &cfg.framing, &cfg.ssc, &cfg.coherence, None)?;
            for d in &out.decisions {
                println!(
                    "chunk {:4}  t = {:6} ms  ssc = {:.3}  mc = {:.3}  {}{}",
                    d.chunk_index,
                    d.chunk_index * cfg.framing.chunk_ms as u64,
                    d.ssc_score,
                    d.mc_score,
                    if d.warmup {
                        "warmup"
                    } else if d.wind_present {
                        "WIND"
                    } else {
                        "clear"
                    },
                    if d.partial { " (partial)" } else { "" }
                );
            }
            let windy = out.decisions.iter().filter(|d| d.wind_present).count();
            println!("{windy} of {} chunks flagged windy", out.decisions.len());
            if let Some(path) = trace {
                write_trace(&out.decisions, &cfg.framing, &path)?;
                println!("trace written to {}", path.display());
            }
            Ok(())
        }
        Command::Suppress { input, model, out } => {
            let audio = read_wav(&input)?;
            let model = load_model(&model)?;
            let cleaned = suppress(&audio, &model)?;
            write_wav(&cleaned, &out, SampleFormat::Float32)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Train { out, scenes } => {
            let pairs = training_pairs(&cfg, scenes)?;
            let seconds = scenes as f64 * cfg.synth.duration_s;
            println!(
                "training on {scenes} scenes ({seconds:.0} s of paired audio), hidden = {}",
                cfg.train.hidden
            );
            let settings = cfg.train.settings(cfg.seed);
            let (model, report) = train(
                &pairs,
                &cfg.context,
                &cfg.region,
                cfg.train.hidden,
                &settings,
            )?;
            println!(
                "loss {:.4} -> {:.4} over {} iterations ({} samples)",
                report.initial_loss, report.final_loss, report.iterations, report.samples
            );
            save_model(&model, &out)?;
            println!("model saved to {}", out.display());
            Ok(())
        }
        Command::Eval {
            scenes,
            model,
            report,
            csv,
        } => {
            let corpus = standard_corpus(
                cfg.synth.wind_level,
                scenes,
                cfg.synth.duration_s,
                cfg.framing.sample_rate,
                cfg.seed,
            )?;
            let mut summary = DetectionSummary::default();
            for (i, scene) in corpus.iter().enumerate() {
                let results = scene_evidence(scene, &cfg.framing, &cfg.ssc, &cfg.coherence)?;
                let decisions: Vec<_> = results.iter().map(|(d, _)| *d).collect();
                let r = detection_metrics(&decisions, &scene.chunk_labels)?;
                summary.push(format!("{i}"), r);
            }
            let agg = &summary.aggregate;
            println!(
                "detection on {} scenes at level {}: accuracy {:.4}, balanced {:.4}, FPR {:.4}, FNR {:.4} ({} warmup chunks excluded, {}/{} gusts caught)",
                corpus.len(),
                cfg.synth.wind_level.name(),
                agg.accuracy(),
                agg.balanced_accuracy(),
                agg.false_positive_rate(),
                agg.false_negative_rate(),
                agg.warmup_chunks,
                agg.gust_events_detected,
                agg.gust_events
            );
            let mut recon_summary = ReconSummary::default();
            if let Some(model_path) = &model {
                let model = load_model(model_path)?;
                let attentive = model.region.attentive_bins(&model.framing)?;
                let band = Some((0, attentive - 1));
                for (i, scene) in corpus.iter().enumerate() {
                    if scene.chunk_labels.iter().all(|&l| !l) {
                        continue;
                    }
                    let noisy = stft(&scene.audio, &cfg.framing)?;
                    let clean = stft(&scene.clean, &cfg.framing)?;
                    let recon = attentive_reconstruct(&model, &noisy)?;
                    let cleaned = suppress(&scene.audio, &model)?;
                    recon_summary.push(
                        format!("{i}"),
                        ReconReport {
                            in_band_lsd_noisy: log_spectral_distance(&noisy, &clean, band)?,
                            in_band_lsd_recon: log_spectral_distance(&recon, &clean, band)?,
                            full_band_lsd_noisy: log_spectral_distance(&noisy, &clean, None)?,
                            full_band_lsd_recon: log_spectral_distance(&recon, &clean, None)?,
                            seg_snr_noisy_db: segmental_snr(
                                scene.clean.channel(0),
                                scene.audio.channel(0),
                                cfg.framing.frame_len(),
                            ),
                            seg_snr_recon_db: segmental_snr(
                                scene.clean.channel(0),
                                cleaned.channel(0),
                                cfg.framing.frame_len(),
                            ),
                        },
                    );
                }
                if let Some(mean) = recon_summary.mean() {
                    println!(
                        "reconstruction over {} windy scenes: in-band LSD {:.2} -> {:.2} dB ({:.0}% lower), full-band {:.2} -> {:.2} dB, segSNR gain {:+.2} dB",
                        recon_summary.per_scene.len(),
                        mean.in_band_lsd_noisy,
                        mean.in_band_lsd_recon,
                        mean.in_band_improvement() * 100.0,
                        mean.full_band_lsd_noisy,
                        mean.full_band_lsd_recon,
                        mean.seg_snr_gain_db()
                    );
                }
            }
            if let Some(path) = report {
                let mut text = summary.to_text();
                text.push_str(&recon_summary.to_text());
                std::fs::write(&path, text).map_err(|e| Error::Io {
                    path: path.display().to_string(),
                    source: e,
                })?;
                println!("report written to {}", path.display());
            }
            if let Some(path) = csv {
                let mut text = summary.to_csv();
                if !recon_summary.per_scene.is_empty() {
                    text.push('\n');
                    text.push_str(&recon_summary.to_csv());
                }
                std::fs::write(&path, text).map_err(|e| Error::Io {
                    path: path.display().to_string(),
                    source: e,
                })?;
                println!("csv written to {}", path.display());
            }
            Ok(())
        }
        Command::Stream {
            input,
            model,
            trace,
            out,
        } => {
            let audio = read_wav(&input)?;
            let loaded = match &model {
                Some(p) => Some(load_model(p)?),
                None => None,
            };
            let result = run_stream(
                &audio,
                &cfg.framing,
                &cfg.ssc,
                &cfg.coherence,
                loaded.as_ref(),
            )?;
            let windy = result.decisions.iter().filter(|d| d.wind_present).count();
            let mut times_ms: Vec<f64> = result
                .chunk_times
                .iter()
                .map(|t| t.as_secs_f64() * 1000.0)
                .collect();
            times_ms.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = times_ms
                .get(times_ms.len() / 2)
                .copied()
                .unwrap_or_default();
            let worst = times_ms.last().copied().unwrap_or_default();
            println!(
                "{} chunks, {windy} windy; per-chunk wall time median {median:.3} ms, max {worst:.3} ms (budget {} ms)",
                result.decisions.len(),
                cfg.framing.chunk_ms
            );
            if let Some(path) = trace {
                write_trace(&result.decisions, &cfg.framing, &path)?;
                println!("trace written to {}", path.display());
            }
            if let (Some(path), Some(recon)) = (&out, &result.audio) {
                write_wav(recon, path, SampleFormat::Float32)?;
                println!("reconstructed audio written to {}", path.display());
            }
            Ok(())
        }
        Command::Calibrate { scenes } => {
            let corpus = standard_corpus(
                cfg.synth.wind_level,
                scenes,
                cfg.synth.duration_s,
                cfg.framing.sample_rate,
                cfg.seed,
            )?;
            let outcome = calibrate(
                &default_calibration_grid(),
                &corpus,
                &cfg.framing,
                &cfg.ssc,
                &cfg.coherence,
            )?;
            println!(
                "best: ssc_threshold = {}, mc_threshold = {}, transform_sigma = {} (balanced accuracy {:.4}, FPR {:.4})",
                outcome.ssc_threshold,
                outcome.mc_threshold,
                outcome.transform_sigma,
                outcome.balanced_accuracy,
                outcome.report.false_positive_rate()
            );
            println!("\n# config snippet:\n[ssc]\ntransform_sigma = {}\nthreshold = {}\n\n[coherence]\nthreshold = {}",
                outcome.transform_sigma, outcome.ssc_threshold, outcome.mc_threshold);
            Ok(())
        }
    }
}
