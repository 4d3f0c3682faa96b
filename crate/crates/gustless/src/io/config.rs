//! Flat key = value config files with section headers.
//!
//! Every tunable of the pipeline lives here with its shipped default;
//! unknown sections or keys are hard errors so device-specific tuning is
//! always explicit. Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::path::Path;

use crate::detector::{CoherenceConfig, SscConfig};
use crate::dsp::FramingConfig;
use crate::error::{Error, Result};
use crate::nn::{Optimizer, TrainSettings};
use crate::suppressor::{AttentiveRegion, ContextSpec};
use crate::synth::{Gust, SceneSpec, SpeechKind, WindLevel};

/// Training block: network width plus optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub hidden: usize,
    pub max_iters: usize,
    pub rel_tolerance: f64,
    pub frame_stride: usize,
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: 150,
            max_iters: 200,
            rel_tolerance: 1e-7,
            frame_stride: 1,
            optimizer: Optimizer::ConjugateGradient,
        }
    }
}

impl TrainConfig {
    pub fn settings(&self, seed: u64) -> TrainSettings {
        TrainSettings {
            max_iters: self.max_iters,
            rel_tolerance: self.rel_tolerance,
            seed,
            optimizer: self.optimizer,
            frame_stride: self.frame_stride,
        }
    }
}

/// Scene-synthesis block.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub duration_s: f64,
    pub wind_level: WindLevel,
    pub gusts: Vec<Gust>,
    pub speech: SpeechKind,
    pub inter_channel_delay: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            duration_s: 10.0,
            wind_level: WindLevel::Medium,
            gusts: vec![Gust {
                start_s: 1.0,
                end_s: 9.0,
                ramp_ms: 150.0,
            }],
            speech: SpeechKind::HarmonicVoiceProxy,
            inter_channel_delay: 4,
        }
    }
}

impl SynthConfig {
    pub fn scene_spec(&self, framing: &FramingConfig, seed: u64) -> SceneSpec {
        SceneSpec {
            duration_s: self.duration_s,
            sample_rate: framing.sample_rate,
            wind_level: self.wind_level,
            gusts: self.gusts.clone(),
            speech: self.speech.clone(),
            seed,
            inter_channel_delay: self.inter_channel_delay,
            chunk_ms: framing.chunk_ms,
            hop_ms: framing.hop_ms,
        }
    }
}

/// All pipeline tunables, cross-validated at load.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub framing: FramingConfig,
    pub ssc: SscConfig,
    pub coherence: CoherenceConfig,
    pub region: AttentiveRegion,
    pub context: ContextSpec,
    pub train: TrainConfig,
    pub synth: SynthConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            framing: FramingConfig::new(16000).expect("default framing is valid"),
            ssc: SscConfig::default(),
            coherence: CoherenceConfig::default(),
            region: AttentiveRegion::default(),
            context: ContextSpec::default(),
            train: TrainConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Cross-field consistency beyond per-struct validation.
    pub fn validate(&self) -> Result<()> {
        self.framing.validate()?;
        self.ssc.validate()?;
        self.coherence.validate()?;
        self.context.validate()?;
        let bins = self.framing.bins();
        if self.ssc.mu1 >= self.ssc.mu2_effective(bins) {
            return Err(Error::InvalidConfig(format!(
                "ssc band [{}, {}] collapses at {bins} bins",
                self.ssc.mu1, self.ssc.mu2
            )));
        }
        self.coherence.band_bins(self.framing.bin_hz(), bins)?;
        self.region.attentive_bins(&self.framing)?;
        if self.context.channels < 2 {
            return Err(Error::InvalidConfig(
                "context must cover at least 2 channels".into(),
            ));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses config text over the defaults. Unknown keys are hard errors.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut framing_raw: BTreeMap<String, String> = BTreeMap::new();
        let mut section = String::new();

        let err = |line: usize, message: String| Error::ConfigParse {
            path: origin.to_string(),
            line,
            message,
        };

        for (idx, raw_line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(lineno, "unterminated section header".into()))?;
                section = name.trim().to_string();
                match section.as_str() {
                    "pipeline" | "framing" | "ssc" | "coherence" | "region" | "context"
                    | "train" | "synth" => {}
                    other => return Err(err(lineno, format!("unknown section [{other}]"))),
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(lineno, format!("expected key = value, got \"{line}\"")))?;
            let key = key.trim();
            let value = value.trim();
            let parse_f64 = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| err(lineno, format!("\"{v}\" is not a number")))
            };
            let parse_u64 = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| err(lineno, format!("\"{v}\" is not an integer")))
            };
            let parse_usize = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| err(lineno, format!("\"{v}\" is not an integer")))
            };
            match (section.as_str(), key) {
                ("pipeline", "seed") => cfg.seed = parse_u64(value)?,
                ("framing", "sample_rate" | "frame_ms" | "hop_ms" | "chunk_ms" | "fft_size") => {
                    framing_raw.insert(key.to_string(), value.to_string());
                }
                ("ssc", "mu1") => cfg.ssc.mu1 = parse_usize(value)?,
                ("ssc", "mu2") => cfg.ssc.mu2 = parse_usize(value)?,
                ("ssc", "smooth_ms") => cfg.ssc.smooth_ms = parse_u64(value)? as u32,
                ("ssc", "transform_sigma") => cfg.ssc.transform_sigma = parse_f64(value)?,
                ("ssc", "threshold") => cfg.ssc.threshold = parse_f64(value)?,
                ("coherence", "alpha_s") => cfg.coherence.alpha_s = parse_f64(value)?,
                ("coherence", "threshold") => cfg.coherence.threshold = parse_f64(value)?,
                ("coherence", "band_low_hz") => cfg.coherence.band_low_hz = parse_f64(value)?,
                ("coherence", "band_high_hz") => cfg.coherence.band_high_hz = parse_f64(value)?,
                ("coherence", "smooth_ms") => cfg.coherence.smooth_ms = parse_u64(value)? as u32,
                ("region", "f_a_hz") => cfg.region.f_a_hz = parse_f64(value)?,
                ("context", "r") => cfg.context.r = parse_usize(value)?,
                ("context", "channels") => cfg.context.channels = parse_usize(value)?,
                ("train", "hidden") => cfg.train.hidden = parse_usize(value)?,
                ("train", "max_iters") => cfg.train.max_iters = parse_usize(value)?,
                ("train", "rel_tolerance") => cfg.train.rel_tolerance = parse_f64(value)?,
                ("train", "frame_stride") => cfg.train.frame_stride = parse_usize(value)?,
                ("train", "optimizer") => {
                    cfg.train.optimizer = match value {
                        "cg" => Optimizer::ConjugateGradient,
                        "gd" => Optimizer::GradientDescent,
                        other => {
                            return Err(err(
                                lineno,
                                format!("unknown optimizer \"{other}\" (want cg|gd)"),
                            ))
                        }
                    }
                }
                ("synth", "duration_s") => cfg.synth.duration_s = parse_f64(value)?,
                ("synth", "wind_level") => {
                    cfg.synth.wind_level = WindLevel::parse(value)
                        .map_err(|e| err(lineno, e.to_string()))?
                }
                ("synth", "gusts") => {
                    cfg.synth.gusts = parse_gusts(value)
                        .map_err(|message| err(lineno, message))?
                }
                ("synth", "speech") => {
                    cfg.synth.speech = if value == "proxy" {
                        SpeechKind::HarmonicVoiceProxy
                    } else {
                        SpeechKind::WavFile(value.into())
                    }
                }
                ("synth", "inter_channel_delay") => {
                    cfg.synth.inter_channel_delay = parse_usize(value)?
                }
                ("", k) => return Err(err(lineno, format!("key \"{k}\" before any section"))),
                (s, k) => return Err(err(lineno, format!("unknown key \"{k}\" in section [{s}]"))),
            }
        }

        if !framing_raw.is_empty() {
            let get_u32 = |key: &str, default: u32| -> Result<u32> {
                match framing_raw.get(key) {
                    None => Ok(default),
                    Some(v) => v.parse::<u32>().map_err(|_| Error::ConfigParse {
                        path: origin.to_string(),
                        line: 0,
                        message: format!("framing {key} \"{v}\" is not an integer"),
                    }),
                }
            };
            let sample_rate = get_u32("sample_rate", cfg.framing.sample_rate)?;
            let frame_ms = get_u32("frame_ms", cfg.framing.frame_ms)?;
            let hop_ms = get_u32("hop_ms", cfg.framing.hop_ms)?;
            let chunk_ms = get_u32("chunk_ms", cfg.framing.chunk_ms)?;
            let fft_size = match framing_raw.get("fft_size") {
                None => {
                    ((sample_rate as usize * frame_ms as usize) / 1000).next_power_of_two()
                }
                Some(v) => v.parse::<usize>().map_err(|_| Error::ConfigParse {
                    path: origin.to_string(),
                    line: 0,
                    message: format!("framing fft_size \"{v}\" is not an integer"),
                })?,
            };
            cfg.framing =
                FramingConfig::with_params(sample_rate, frame_ms, hop_ms, chunk_ms, fft_size)?;
        }

        cfg.validate()?;
        Ok(cfg)
    }

    /// Renders the config back as text, every key explicit.
    pub fn to_text(&self) -> String {
        let gusts = self
            .synth
            .gusts
            .iter()
            .map(|g| format!("{}:{}:{}", g.start_s, g.end_s, g.ramp_ms))
            .collect::<Vec<_>>()
            .join(", ");
        let speech = match &self.synth.speech {
            SpeechKind::HarmonicVoiceProxy => "proxy".to_string(),
            SpeechKind::WavFile(p) => p.display().to_string(),
        };
        format!(
            "[pipeline]\nseed = {}\n\n[framing]\nsample_rate = {}\nframe_ms = {}\nhop_ms = {}\nchunk_ms = {}\nfft_size = {}\n\n\
             [ssc]\nmu1 = {}\nmu2 = {}\nsmooth_ms = {}\ntransform_sigma = {}\nthreshold = {}\n\n\
             [coherence]\nalpha_s = {}\nthreshold = {}\nband_low_hz = {}\nband_high_hz = {}\nsmooth_ms = {}\n\n\
             [region]\nf_a_hz = {}\n\n[context]\nr = {}\nchannels = {}\n\n\
             [train]\nhidden = {}\nmax_iters = {}\nrel_tolerance = {}\nframe_stride = {}\noptimizer = {}\n\n\
             [synth]\nduration_s = {}\nwind_level = {}\ngusts = {}\nspeech = {}\ninter_channel_delay = {}\n",
            self.seed,
            self.framing.sample_rate,
            self.framing.frame_ms,
            self.framing.hop_ms,
            self.framing.chunk_ms,
            self.framing.fft_size,
            self.ssc.mu1,
            self.ssc.mu2,
            self.ssc.smooth_ms,
            self.ssc.transform_sigma,
            self.ssc.threshold,
            self.coherence.alpha_s,
            self.coherence.threshold,
            self.coherence.band_low_hz,
            self.coherence.band_high_hz,
            self.coherence.smooth_ms,
            self.region.f_a_hz,
            self.context.r,
            self.context.channels,
            self.train.hidden,
            self.train.max_iters,
            self.train.rel_tolerance,
            self.train.frame_stride,
            match self.train.optimizer {
                Optimizer::ConjugateGradient => "cg",
                Optimizer::GradientDescent => "gd",
            },
            self.synth.duration_s,
            self.synth.wind_level.name(),
            gusts,
            speech,
            self.synth.inter_channel_delay,
        )
    }
}

/// Parses `start:end:ramp_ms` triples separated by commas; empty means no
/// gusts.
fn parse_gusts(value: &str) -> std::result::Result<Vec<Gust>, String> {
    let mut gusts = Vec::new();
    for part in value.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let fields: Vec<&str> = part.split(':').collect();
        if fields.len() != 3 {
            return Err(format!(
                "gust \"{part}\" must be start:end:ramp_ms"
            ));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("\"{s}\" is not a number"))
        };
        gusts.push(Gust {
            start_s: parse(fields[0])?,
            end_s: parse(fields[1])?,
            ramp_ms: parse(fields[2])?,
        });
    }
    Ok(gusts)
}
