//! Deterministic two-channel scene synthesis: low-frequency wind, a harmonic
//! voice proxy, gust envelopes and labeled mixtures for evaluation.
//!
//! Speech is placed on both channels with a small integer-sample delay (high
//! coherence); wind is generated independently per channel (low coherence).
//! Level ladders and spectral targets here are calibration constants of this
//! toolkit, not measured device values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio::MultiChannelAudio;
use crate::error::{Error, Result};
use crate::io::wav;

/// Wind-to-speech power ratio ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindLevel {
    None,
    /// -5 dB wind-to-speech.
    Low,
    /// 0 dB wind-to-speech.
    Medium,
    /// +10 dB wind-to-speech.
    High,
}

impl WindLevel {
    /// Wind-to-speech power ratio in dB; `None` for no wind at all.
    pub fn ratio_db(self) -> Option<f64> {
        match self {
            WindLevel::None => None,
            WindLevel::Low => Some(-5.0),
            WindLevel::Medium => Some(0.0),
            WindLevel::High => Some(10.0),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(WindLevel::None),
            "low" => Ok(WindLevel::Low),
            "medium" => Ok(WindLevel::Medium),
            "high" => Ok(WindLevel::High),
            _ => Err(Error::InvalidConfig(format!(
                "unknown wind level \"{s}\" (want none|low|medium|high)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WindLevel::None => "none",
            WindLevel::Low => "low",
            WindLevel::Medium => "medium",
            WindLevel::High => "high",
        }
    }
}

/// One wind gust: full strength between `start_s + ramp` and `end_s - ramp`,
/// linear ramps on both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gust {
    pub start_s: f64,
    pub end_s: f64,
    pub ramp_ms: f64,
}

/// Where the clean speech signal comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SpeechKind {
    /// Synthetic harmonic voice proxy.
    HarmonicVoiceProxy,
    /// Mono (or first channel of a) WAV file at the scene sample rate.
    WavFile(std::path::PathBuf),
}

/// Recipe for one labeled scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub duration_s: f64,
    pub sample_rate: u32,
    pub wind_level: WindLevel,
    pub gusts: Vec<Gust>,
    pub speech: SpeechKind,
    pub seed: u64,
    /// Speech delay on channel 2 in samples.
    pub inter_channel_delay: usize,
    /// Chunk length used to derive per-chunk truth labels.
    pub chunk_ms: u32,
    /// Analysis hop the labels must align with: a trailing fragment shorter
    /// than one hop yields no analysis frame and so no labeled chunk.
    pub hop_ms: u32,
}

impl SceneSpec {
    pub fn new(duration_s: f64, sample_rate: u32, wind_level: WindLevel, seed: u64) -> Self {
        Self {
            duration_s,
            sample_rate,
            wind_level,
            gusts: vec![],
            speech: SpeechKind::HarmonicVoiceProxy,
            seed,
            inter_channel_delay: 4,
            chunk_ms: 200,
            hop_ms: 8,
        }
    }

    pub fn with_gusts(mut self, gusts: Vec<Gust>) -> Self {
        self.gusts = gusts;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.duration_s <= 0.0 {
            return Err(Error::InvalidInput("scene duration must be > 0".into()));
        }
        if self.sample_rate == 0 {
            return Err(Error::InvalidInput("sample rate must be positive".into()));
        }
        if self.chunk_ms == 0 || self.hop_ms == 0 || !self.chunk_ms.is_multiple_of(self.hop_ms) {
            return Err(Error::InvalidInput(format!(
                "labels need hop ({} ms) dividing chunk ({} ms)",
                self.hop_ms, self.chunk_ms
            )));
        }
        for g in &self.gusts {
            if !(g.start_s >= 0.0 && g.start_s < g.end_s && g.end_s <= self.duration_s) {
                return Err(Error::InvalidInput(format!(
                    "gust [{}, {}] s falls outside the {} s scene",
                    g.start_s, g.end_s, self.duration_s
                )));
            }
            if g.ramp_ms < 0.0 || g.ramp_ms / 1000.0 * 2.0 > g.end_s - g.start_s {
                return Err(Error::InvalidInput(format!(
                    "gust ramps ({} ms) longer than the gust itself",
                    g.ramp_ms
                )));
            }
        }
        Ok(())
    }
}

/// A rendered scene with aligned clean speech and per-chunk wind truth.
#[derive(Debug, Clone)]
pub struct LabeledScene {
    /// Two-channel mixture.
    pub audio: MultiChannelAudio,
    /// Clean speech aligned with channel 1.
    pub clean: MultiChannelAudio,
    /// True where the gust envelope exceeds half amplitude in the chunk.
    pub chunk_labels: Vec<bool>,
    /// Wind-to-speech power ratio actually realized over active spans.
    pub achieved_ratio_db: Option<f64>,
    /// Attenuation applied to keep the mix at or below full scale.
    pub applied_gain: f64,
}

/// Generator constants. The spectral shape target (most power below 300 Hz)
/// and the syllable design are what the rest of the toolkit is calibrated
/// against; changing them invalidates calibrated thresholds.
pub const WIND_LOWPASS_CUTOFF_HZ: f64 = 80.0;
pub const WIND_LOWPASS_STAGES: usize = 1;
pub const SYLLABLE_RATE_HZ: f64 = 4.0;
pub const SYLLABLE_FLOOR: f64 = 0.05;
pub const PROXY_F0_RANGE_HZ: (f64, f64) = (120.0, 220.0);
pub const PROXY_TOP_HZ: f64 = 4000.0;
/// -6 dBFS peak for the voice proxy.
pub const PROXY_PEAK: f64 = 0.501187233627272;

/// Splitmix-style seed derivation so every sub-generator gets an independent
/// stream from one scene seed.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Low-frequency-dominated noise, independent across channels, unit RMS.
pub fn gen_wind(
    duration_s: f64,
    sample_rate: u32,
    seed: u64,
    channels: usize,
) -> Result<MultiChannelAudio> {
    if duration_s <= 0.0 {
        return Err(Error::InvalidInput("wind duration must be > 0".into()));
    }
    let len = (duration_s * sample_rate as f64).round() as usize;
    let a = (-2.0 * std::f64::consts::PI * WIND_LOWPASS_CUTOFF_HZ / sample_rate as f64).exp();
    let mut chans = Vec::with_capacity(channels);
    for ch in 0..channels {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x5749_4E44 + ch as u64));
        let mut states = [0.0f64; WIND_LOWPASS_STAGES];
        let mut samples = Vec::with_capacity(len);
        for _ in 0..len {
            let mut v = rng.random::<f64>() * 2.0 - 1.0;
            for s in states.iter_mut() {
                *s = a * *s + (1.0 - a) * v;
                v = *s;
            }
            samples.push(v);
        }
        let rms = (samples.iter().map(|s| s * s).sum::<f64>() / len as f64).sqrt();
        if rms > 0.0 {
            for s in &mut samples {
                *s /= rms;
            }
        }
        chans.push(samples);
    }
    MultiChannelAudio::new(chans, sample_rate)
}

/// Harmonic voice proxy: per-syllable fundamental drawn from
/// [`PROXY_F0_RANGE_HZ`], harmonics up to [`PROXY_TOP_HZ`] with power
/// falling as 1/h, raised-cosine syllable envelope at 4 Hz, peak at -6 dBFS.
pub fn gen_speech_proxy(duration_s: f64, sample_rate: u32, seed: u64) -> Result<MultiChannelAudio> {
    if duration_s <= 0.0 {
        return Err(Error::InvalidInput("speech duration must be > 0".into()));
    }
    let len = (duration_s * sample_rate as f64).round() as usize;
    let dt = 1.0 / sample_rate as f64;
    let syllable = (sample_rate as f64 / SYLLABLE_RATE_HZ).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x564F_4943_4553));
    let mut samples = Vec::with_capacity(len);
    let mut phase = 0.0f64;
    let mut f0 = 0.0f64;
    let mut n_harm = 0usize;
    let two_pi = 2.0 * std::f64::consts::PI;
    for n in 0..len {
        if n % syllable == 0 {
            let (lo, hi) = PROXY_F0_RANGE_HZ;
            f0 = lo + rng.random::<f64>() * (hi - lo);
            n_harm = (PROXY_TOP_HZ / f0).floor() as usize;
        }
        let t_in_syllable = (n % syllable) as f64 * dt;
        let env = SYLLABLE_FLOOR
            + (1.0 - SYLLABLE_FLOOR)
                * 0.5
                * (1.0 - (two_pi * SYLLABLE_RATE_HZ * t_in_syllable).cos());
        let mut v = 0.0;
        for h in 1..=n_harm {
            v += (h as f64 * phase).sin() / (h as f64).sqrt();
        }
        samples.push(env * v);
        phase += two_pi * f0 * dt;
        if phase > two_pi {
            phase -= two_pi;
        }
    }
    let peak = samples.iter().fold(0.0f64, |acc, &s| acc.max(s.abs()));
    if peak > 0.0 {
        for s in &mut samples {
            *s *= PROXY_PEAK / peak;
        }
    }
    MultiChannelAudio::mono(samples, sample_rate)
}

/// Gust envelope value at sample `n`.
fn envelope_at(gusts: &[Gust], t: f64) -> f64 {
    let mut g = 0.0f64;
    for gust in gusts {
        let ramp = gust.ramp_ms / 1000.0;
        let v = if t < gust.start_s || t > gust.end_s {
            0.0
        } else if ramp > 0.0 && t < gust.start_s + ramp {
            (t - gust.start_s) / ramp
        } else if ramp > 0.0 && t > gust.end_s - ramp {
            (gust.end_s - t) / ramp
        } else {
            1.0
        };
        g = g.max(v);
    }
    g
}

fn load_speech(spec: &SceneSpec, len: usize) -> Result<Vec<f64>> {
    match &spec.speech {
        SpeechKind::HarmonicVoiceProxy => Ok(gen_speech_proxy(
            spec.duration_s,
            spec.sample_rate,
            derive_seed(spec.seed, 1),
        )?
        .channel(0)
        .to_vec()),
        SpeechKind::WavFile(path) => {
            let audio = wav::read_wav(path)?;
            if audio.sample_rate() != spec.sample_rate {
                return Err(Error::InvalidInput(format!(
                    "speech wav is {} Hz but the scene wants {} Hz",
                    audio.sample_rate(),
                    spec.sample_rate
                )));
            }
            if audio.len() < len {
                return Err(Error::InvalidInput(format!(
                    "speech wav holds {} samples, scene needs {len}",
                    audio.len()
                )));
            }
            Ok(audio.channel(0)[..len].to_vec())
        }
    }
}

/// Renders a labeled two-channel scene from its recipe.
///
/// Channel k is `delay_k(speech) + gain * envelope * wind_k`, with the wind
/// gain chosen so the wind-to-speech power ratio measured over gust-active
/// samples (envelope >= 1/2) matches the requested level exactly.
pub fn mix_scene(spec: &SceneSpec) -> Result<LabeledScene> {
    spec.validate()?;
    let sr = spec.sample_rate;
    let len = (spec.duration_s * sr as f64).round() as usize;
    let speech = load_speech(spec, len)?;

    let mut channels = vec![vec![0.0f64; len], vec![0.0f64; len]];
    let delay = spec.inter_channel_delay;
    for n in 0..len {
        channels[0][n] = speech[n];
        channels[1][n] = if n >= delay { speech[n - delay] } else { 0.0 };
    }

    let envelope: Vec<f64> = (0..len)
        .map(|n| envelope_at(&spec.gusts, n as f64 / sr as f64))
        .collect();
    let active: Vec<usize> = (0..len).filter(|&n| envelope[n] >= 0.5).collect();

    let mut achieved_ratio_db = None;
    if let (Some(ratio_db), false) = (spec.wind_level.ratio_db(), active.is_empty()) {
        let wind = gen_wind(spec.duration_s, sr, derive_seed(spec.seed, 2), 2)?;
        let speech_power: f64 =
            active.iter().map(|&n| speech[n] * speech[n]).sum::<f64>() / active.len() as f64;
        let wind_power: f64 = active
            .iter()
            .map(|&n| {
                let e0 = envelope[n] * wind.channel(0)[n];
                let e1 = envelope[n] * wind.channel(1)[n];
                (e0 * e0 + e1 * e1) / 2.0
            })
            .sum::<f64>()
            / active.len() as f64;
        if speech_power > 0.0 && wind_power > 0.0 {
            let gain = (10.0f64.powf(ratio_db / 10.0) * speech_power / wind_power).sqrt();
            for n in 0..len {
                channels[0][n] += gain * envelope[n] * wind.channel(0)[n];
                channels[1][n] += gain * envelope[n] * wind.channel(1)[n];
            }
            achieved_ratio_db = Some(
                10.0 * (gain * gain * wind_power / speech_power).log10(),
            );
        }
    }

    let chunk_samples = (sr as usize * spec.chunk_ms as usize) / 1000;
    let hop_samples = (sr as usize * spec.hop_ms as usize) / 1000;
    let frames_per_chunk = (spec.chunk_ms / spec.hop_ms) as usize;
    // One label per chunk the streaming analyzer will actually emit.
    let chunk_count = (len / hop_samples.max(1)).div_ceil(frames_per_chunk);
    let chunk_labels: Vec<bool> = (0..chunk_count)
        .map(|c| {
            let start = c * chunk_samples;
            let end = ((c + 1) * chunk_samples).min(len);
            spec.wind_level != WindLevel::None
                && envelope[start..end].iter().any(|&g| g > 0.5)
        })
        .collect();

    let mut audio = MultiChannelAudio::new(channels, sr)?;
    let mut clean = MultiChannelAudio::mono(speech, sr)?;
    let peak = audio.peak();
    let applied_gain = if peak > 1.0 { 1.0 / peak } else { 1.0 };
    if applied_gain != 1.0 {
        audio.scale(applied_gain);
        clean.scale(applied_gain);
    }

    Ok(LabeledScene {
        audio,
        clean,
        chunk_labels,
        achieved_ratio_db,
        applied_gain,
    })
}

/// Standard labeled corpus for evaluation and calibration: per 25 scenes,
/// 12 carry a full-length gust, 11 carry no wind at all, and 2 carry one
/// mid-scene gust with ramps (transition behavior). Scene seeds derive from
/// `base_seed` so the whole corpus is reproducible.
pub fn standard_corpus_specs(
    level: WindLevel,
    scenes: usize,
    duration_s: f64,
    sample_rate: u32,
    base_seed: u64,
) -> Vec<SceneSpec> {
    (0..scenes)
        .map(|i| {
            let seed = derive_seed(base_seed, 0x5343_454E_4553 + i as u64);
            let kind = i % 25;
            if kind < 12 {
                SceneSpec::new(duration_s, sample_rate, level, seed).with_gusts(vec![Gust {
                    start_s: 0.0,
                    end_s: duration_s,
                    ramp_ms: 100.0,
                }])
            } else if kind < 23 {
                SceneSpec::new(duration_s, sample_rate, WindLevel::None, seed)
            } else {
                SceneSpec::new(duration_s, sample_rate, level, seed).with_gusts(vec![Gust {
                    start_s: 0.35 * duration_s,
                    end_s: 0.72 * duration_s,
                    ramp_ms: 150.0,
                }])
            }
        })
        .collect()
}

/// Renders [`standard_corpus_specs`].
pub fn standard_corpus(
    level: WindLevel,
    scenes: usize,
    duration_s: f64,
    sample_rate: u32,
    base_seed: u64,
) -> Result<Vec<LabeledScene>> {
    standard_corpus_specs(level, scenes, duration_s, sample_rate, base_seed)
        .iter()
        .map(mix_scene)
        .collect()
}
