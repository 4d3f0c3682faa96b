//! Attentive reconstruction: the network rewrites only the spectral bins
//! below the frequency-attention threshold; everything above passes through
//! bit-exact from the reference channel, and the noisy phase is reused on
//! every bin.

use ndarray::Array2;
use num_complex::Complex64;

use crate::audio::MultiChannelAudio;
use crate::dsp::{istft, log_power, stft, FramingConfig, LogPowerGrid, Spectrogram, StftGrid};
use crate::error::{Error, Result};
use crate::nn::{train_on_batch, NnModel, OutputUnits, TrainBatch, TrainReport, TrainSettings};

/// Frequency-attention threshold: bins with center frequency below `f_a_hz`
/// are reconstructed, the rest are left untouched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttentiveRegion {
    pub f_a_hz: f64,
}

impl Default for AttentiveRegion {
    fn default() -> Self {
        Self { f_a_hz: 500.0 }
    }
}

impl AttentiveRegion {
    /// Number of attentive bins (`mu * bin_hz < f_a`) for a framing.
    pub fn attentive_bins(&self, framing: &FramingConfig) -> Result<usize> {
        let nyquist = framing.sample_rate as f64 / 2.0;
        if !(self.f_a_hz > 0.0 && self.f_a_hz < nyquist) {
            return Err(Error::InvalidConfig(format!(
                "f_a = {} Hz must lie strictly between 0 and Nyquist ({nyquist} Hz)",
                self.f_a_hz
            )));
        }
        let count = (0..framing.bins())
            .take_while(|&mu| (mu as f64) * framing.bin_hz() < self.f_a_hz)
            .count();
        if count == 0 {
            return Err(Error::InvalidConfig(format!(
                "f_a = {} Hz selects no bins at {} Hz per bin",
                self.f_a_hz,
                framing.bin_hz()
            )));
        }
        Ok(count)
    }
}

/// Context expansion: `2r + 1` neighboring frames per channel concatenated
/// into one network input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextSpec {
    pub r: usize,
    pub channels: usize,
}

impl Default for ContextSpec {
    fn default() -> Self {
        Self { r: 3, channels: 2 }
    }
}

impl ContextSpec {
    pub fn input_dim(&self, bins: usize) -> usize {
        self.channels * (2 * self.r + 1) * bins
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels == 0 {
            return Err(Error::InvalidConfig("context needs >= 1 channel".into()));
        }
        Ok(())
    }
}

/// Frame-synchronous noisy/clean grids for training.
#[derive(Debug, Clone)]
pub struct TrainingPair {
    pub noisy: StftGrid,
    pub clean: StftGrid,
}

impl TrainingPair {
    pub fn new(noisy: StftGrid, clean: StftGrid) -> Result<Self> {
        if noisy.framing != clean.framing || noisy.num_frames() != clean.num_frames() {
            return Err(Error::FramingMismatch(format!(
                "noisy {} frames vs clean {} frames",
                noisy.num_frames(),
                clean.num_frames()
            )));
        }
        if clean.num_channels() != 1 {
            return Err(Error::InvalidInput(
                "clean target must be single-channel".into(),
            ));
        }
        Ok(Self { noisy, clean })
    }
}

/// A trained network bundled with the framing and layout it was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct SuppressorModel {
    pub nn: NnModel,
    pub framing: FramingConfig,
    pub region: AttentiveRegion,
    pub context: ContextSpec,
}

impl SuppressorModel {
    /// Cross-checks the network shapes against framing, context and region.
    pub fn validate(&self) -> Result<()> {
        self.nn.validate()?;
        self.framing.validate()?;
        self.context.validate()?;
        let bins = self.framing.bins();
        let want_in = self.context.input_dim(bins);
        if self.nn.input_dim() != want_in {
            return Err(Error::ModelMismatch(format!(
                "network input {} but context layout wants {want_in}",
                self.nn.input_dim()
            )));
        }
        let want_out = self.region.attentive_bins(&self.framing)?;
        if self.nn.output_dim() != want_out {
            return Err(Error::ModelMismatch(format!(
                "network output {} but attentive region holds {want_out} bins",
                self.nn.output_dim()
            )));
        }
        Ok(())
    }
}

/// Concatenates the `2r + 1` log-power frames around `t` for every channel,
/// replicating the nearest valid frame past the edges.
pub fn build_context(logpower: &LogPowerGrid, t: usize, spec: &ContextSpec) -> Vec<f64> {
    let frames = logpower.num_frames();
    let bins = logpower.channels[0].bins();
    let mut out = Vec::with_capacity(spec.input_dim(bins));
    for ch in 0..spec.channels {
        let grid = &logpower.channels[ch];
        for dt in -(spec.r as isize)..=(spec.r as isize) {
            let idx = (t as isize + dt).clamp(0, frames as isize - 1) as usize;
            out.extend_from_slice(grid.frame(idx));
        }
    }
    out
}

/// Assembles the (inputs, targets) matrices for a set of pairs.
///
/// Targets are clean log-power restricted to attentive bins; inputs carry
/// the full spectrum context. Every `frame_stride`-th frame is kept.
pub fn build_training_batch(
    pairs: &[TrainingPair],
    spec: &ContextSpec,
    region: &AttentiveRegion,
    frame_stride: usize,
) -> Result<TrainBatch> {
    if pairs.is_empty() {
        return Err(Error::Training("no training pairs".into()));
    }
    let stride = frame_stride.max(1);
    let framing = pairs[0].noisy.framing;
    let attentive = region.attentive_bins(&framing)?;
    let bins = framing.bins();
    let input_dim = spec.input_dim(bins);
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    let mut rows = 0usize;
    for pair in pairs {
        if pair.noisy.framing != framing {
            return Err(Error::FramingMismatch(
                "training pairs disagree on framing".into(),
            ));
        }
        if pair.noisy.num_channels() < spec.channels {
            return Err(Error::InvalidInput(format!(
                "pair has {} channels, context wants {}",
                pair.noisy.num_channels(),
                spec.channels
            )));
        }
        let noisy_lp = log_power(&pair.noisy);
        let clean_lp = log_power(&pair.clean);
        let frames = pair.noisy.num_frames();
        let mut t = 0;
        while t < frames {
            inputs.extend_from_slice(&build_context(&noisy_lp, t, spec));
            targets.extend_from_slice(&clean_lp.channels[0].frame(t)[..attentive]);
            rows += 1;
            t += stride;
        }
    }
    let inputs = Array2::from_shape_vec((rows, input_dim), inputs)
        .expect("row-major assembly matches dims");
    let targets =
        Array2::from_shape_vec((rows, attentive), targets).expect("row-major assembly matches dims");
    TrainBatch::new(inputs, targets)
}

/// Trains the reconstruction network on frame-synchronous pairs.
///
/// Minimizes mean squared error between predicted and clean log-power on
/// the attentive bins.
pub fn train(
    pairs: &[TrainingPair],
    spec: &ContextSpec,
    region: &AttentiveRegion,
    hidden_dim: usize,
    settings: &TrainSettings,
) -> Result<(SuppressorModel, TrainReport)> {
    if pairs.is_empty() {
        return Err(Error::Training("no training pairs".into()));
    }
    spec.validate()?;
    let framing = pairs[0].noisy.framing;
    let batch = build_training_batch(pairs, spec, region, settings.frame_stride)?;
    let (nn, report) = train_on_batch(&batch, hidden_dim, settings)?;
    let model = SuppressorModel {
        nn,
        framing,
        region: *region,
        context: *spec,
    };
    model.validate()?;
    Ok((model, report))
}

/// Rewrites one frame: attentive bins get network magnitudes with the
/// reference channel's phase (never amplified above the noisy input); the
/// rest is the reference frame verbatim.
pub fn reconstruct_frame(
    model: &SuppressorModel,
    context: &[f64],
    reference: &[Complex64],
    out: &mut [Complex64],
) -> Result<()> {
    let attentive = model.region.attentive_bins(&model.framing)?;
    let y = model.nn.forward(context)?;
    for (mu, (dst, src)) in out.iter_mut().zip(reference.iter()).enumerate() {
        if mu < attentive {
            let predicted = match model.nn.output_units {
                OutputUnits::LogPower => (y[mu] / 2.0).exp(),
                OutputUnits::LogMagnitude => y[mu].exp(),
            };
            let input_mag = src.norm();
            let mag = predicted.min(input_mag);
            *dst = if input_mag > 0.0 {
                src * (mag / input_mag)
            } else {
                Complex64::new(mag, 0.0)
            };
        } else {
            *dst = *src;
        }
    }
    Ok(())
}

/// Rewrites the attentive bins of a noisy grid with network predictions.
///
/// For attentive bins the magnitude comes from the network output (clamped
/// so a bin is never amplified above its noisy input) and the phase from
/// the reference channel (channel 1). All other bins are copied bit-exact
/// from the reference channel.
pub fn attentive_reconstruct(model: &SuppressorModel, noisy: &StftGrid) -> Result<StftGrid> {
    model.validate()?;
    if noisy.framing != model.framing {
        return Err(Error::FramingMismatch(
            "grid framing does not match the model".into(),
        ));
    }
    if noisy.num_channels() < model.context.channels {
        return Err(Error::InvalidInput(format!(
            "grid has {} channels, model wants {}",
            noisy.num_channels(),
            model.context.channels
        )));
    }
    let frames = noisy.num_frames();
    let bins = noisy.bins();
    let logpower = log_power(noisy);
    let reference = noisy.channel(0);
    let mut out = Spectrogram::zeros(frames, bins);
    for t in 0..frames {
        let context = build_context(&logpower, t, &model.context);
        reconstruct_frame(model, &context, reference.frame(t), out.frame_mut(t))?;
    }
    Ok(StftGrid {
        channels: vec![out],
        framing: noisy.framing,
    })
}

/// Full suppression pipeline: STFT, per-frame reconstruction, inverse STFT.
/// Returns a single channel of the same length as the input.
pub fn suppress(audio: &MultiChannelAudio, model: &SuppressorModel) -> Result<MultiChannelAudio> {
    if audio.num_channels() < 2 {
        return Err(Error::InvalidInput(
            "suppression requires at least 2 channels".into(),
        ));
    }
    let grid = stft(audio, &model.framing)?;
    let recon = attentive_reconstruct(model, &grid)?;
    let rebuilt = istft(&recon)?;
    // Match the input length: the analysis never covers the trailing
    // sub-hop remainder, which stays silent.
    let mut samples = rebuilt.channel(0).to_vec();
    samples.resize(audio.len(), 0.0);
    MultiChannelAudio::mono(samples, audio.sample_rate())
}
