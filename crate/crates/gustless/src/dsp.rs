//! Framing, windowed STFT/ISTFT and log-power features.
//!
//! Analysis uses a periodic Hann window; synthesis uses the matching window
//! normalized so that overlap-add reconstructs interior samples exactly at
//! the configured overlap. Spectra are one-sided and phase is always kept.

use num_complex::Complex64;
use realfft::RealFftPlanner;

use crate::audio::MultiChannelAudio;
use crate::error::{Error, Result};

/// Floor added to spectral power before taking the log, so features stay
/// finite on digital silence.
pub const LOG_POWER_FLOOR: f64 = 1e-12;

/// Frame/hop/chunk geometry plus FFT size, all validated together.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FramingConfig {
    pub sample_rate: u32,
    pub frame_ms: u32,
    pub hop_ms: u32,
    pub chunk_ms: u32,
    pub fft_size: usize,
}

impl FramingConfig {
    /// Default framing: 16 ms frames, 8 ms hop, 200 ms chunks, FFT size the
    /// next power of two at or above the frame length.
    pub fn new(sample_rate: u32) -> Result<Self> {
        let frame_ms = 16;
        let frame_len = frame_samples(sample_rate, frame_ms)?;
        Self::with_params(sample_rate, frame_ms, 8, 200, frame_len.next_power_of_two())
    }

    pub fn with_params(
        sample_rate: u32,
        frame_ms: u32,
        hop_ms: u32,
        chunk_ms: u32,
        fft_size: usize,
    ) -> Result<Self> {
        let cfg = Self {
            sample_rate,
            frame_ms,
            hop_ms,
            chunk_ms,
            fft_size,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_rate == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        if self.hop_ms == 0 || self.frame_ms == 0 || self.chunk_ms == 0 {
            return Err(Error::InvalidConfig(
                "frame, hop and chunk lengths must be positive".into(),
            ));
        }
        if !self.frame_ms.is_multiple_of(self.hop_ms) {
            return Err(Error::InvalidConfig(format!(
                "hop ({} ms) must divide frame ({} ms)",
                self.hop_ms, self.frame_ms
            )));
        }
        if self.hop_ms == self.frame_ms {
            return Err(Error::InvalidConfig(
                "frames must overlap: hop must be shorter than the frame".into(),
            ));
        }
        if !self.chunk_ms.is_multiple_of(self.hop_ms) {
            return Err(Error::InvalidConfig(format!(
                "hop ({} ms) must divide chunk ({} ms)",
                self.hop_ms, self.chunk_ms
            )));
        }
        let frame = frame_samples(self.sample_rate, self.frame_ms)?;
        frame_samples(self.sample_rate, self.hop_ms)?;
        if !self.fft_size.is_power_of_two() || self.fft_size < frame {
            return Err(Error::InvalidConfig(format!(
                "fft_size must be a power of two >= frame length ({frame}), got {}",
                self.fft_size
            )));
        }
        Ok(())
    }

    /// Frame length in samples.
    pub fn frame_len(&self) -> usize {
        (self.sample_rate as usize * self.frame_ms as usize) / 1000
    }

    /// Hop length in samples.
    pub fn hop(&self) -> usize {
        (self.sample_rate as usize * self.hop_ms as usize) / 1000
    }

    /// Chunk length in samples.
    pub fn chunk_len(&self) -> usize {
        (self.sample_rate as usize * self.chunk_ms as usize) / 1000
    }

    /// Frames per chunk (25 for the default 200 ms / 8 ms geometry).
    pub fn frames_per_chunk(&self) -> usize {
        (self.chunk_ms / self.hop_ms) as usize
    }

    /// One-sided bin count.
    pub fn bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Width of one frequency bin in Hz.
    pub fn bin_hz(&self) -> f64 {
        self.sample_rate as f64 / self.fft_size as f64
    }

    /// Number of frames a signal of `len` samples yields.
    pub fn num_frames(&self, len: usize) -> usize {
        if len < self.frame_len() {
            0
        } else {
            (len - self.frame_len()) / self.hop() + 1
        }
    }
}

fn frame_samples(sample_rate: u32, ms: u32) -> Result<usize> {
    let num = sample_rate as usize * ms as usize;
    if !num.is_multiple_of(1000) {
        return Err(Error::InvalidConfig(format!(
            "{ms} ms is not a whole number of samples at {sample_rate} Hz"
        )));
    }
    Ok(num / 1000)
}

/// One channel's complex short-time spectrum, frames-by-bins row major.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    frames: usize,
    bins: usize,
    data: Vec<Complex64>,
}

impl Spectrogram {
    pub fn zeros(frames: usize, bins: usize) -> Self {
        Self {
            frames,
            bins,
            data: vec![Complex64::new(0.0, 0.0); frames * bins],
        }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn frame(&self, t: usize) -> &[Complex64] {
        &self.data[t * self.bins..(t + 1) * self.bins]
    }

    pub fn frame_mut(&mut self, t: usize) -> &mut [Complex64] {
        &mut self.data[t * self.bins..(t + 1) * self.bins]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }
}

/// Complex short-time spectra for every channel plus framing metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct StftGrid {
    pub channels: Vec<Spectrogram>,
    pub framing: FramingConfig,
}

impl StftGrid {
    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn num_frames(&self) -> usize {
        self.channels.first().map_or(0, |c| c.frames())
    }

    pub fn bins(&self) -> usize {
        self.framing.bins()
    }

    pub fn bin_hz(&self) -> f64 {
        self.framing.bin_hz()
    }

    pub fn channel(&self, idx: usize) -> &Spectrogram {
        &self.channels[idx]
    }

    fn check_same_framing(&self, other: &StftGrid) -> Result<()> {
        if self.framing != other.framing || self.num_frames() != other.num_frames() {
            return Err(Error::FramingMismatch(format!(
                "{:?} x {} frames vs {:?} x {} frames",
                self.framing,
                self.num_frames(),
                other.framing,
                other.num_frames()
            )));
        }
        Ok(())
    }
}

/// One channel's real-valued grid (log-power features), frames-by-bins.
#[derive(Debug, Clone, PartialEq)]
pub struct RealGrid {
    frames: usize,
    bins: usize,
    data: Vec<f64>,
}

impl RealGrid {
    pub fn zeros(frames: usize, bins: usize) -> Self {
        Self {
            frames,
            bins,
            data: vec![0.0; frames * bins],
        }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.bins..(t + 1) * self.bins]
    }

    pub fn frame_mut(&mut self, t: usize) -> &mut [f64] {
        &mut self.data[t * self.bins..(t + 1) * self.bins]
    }
}

/// Log-power grids for every channel.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPowerGrid {
    pub channels: Vec<RealGrid>,
    pub framing: FramingConfig,
}

impl LogPowerGrid {
    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn num_frames(&self) -> usize {
        self.channels.first().map_or(0, |c| c.frames())
    }
}

/// Periodic Hann window of length `n`.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos()))
        .collect()
}

/// Synthesis window matching `analysis` so that overlap-add at `hop` sums
/// analysis*synthesis to exactly one on interior samples.
pub fn synthesis_window(analysis: &[f64], hop: usize) -> Vec<f64> {
    let frame = analysis.len();
    let steps = frame / hop;
    (0..frame)
        .map(|n| {
            let residue = n % hop;
            let denom: f64 = (0..steps).map(|j| analysis[residue + j * hop].powi(2)).sum();
            analysis[n] / denom
        })
        .collect()
}

/// Reusable STFT/ISTFT engine: windows plus FFT plans for one framing.
pub struct StftProcessor {
    cfg: FramingConfig,
    analysis: Vec<f64>,
    synthesis: Vec<f64>,
    forward: std::sync::Arc<dyn realfft::RealToComplex<f64>>,
    inverse: std::sync::Arc<dyn realfft::ComplexToReal<f64>>,
}

impl StftProcessor {
    pub fn new(cfg: FramingConfig) -> Result<Self> {
        cfg.validate()?;
        let analysis = hann_window(cfg.frame_len());
        let synthesis = synthesis_window(&analysis, cfg.hop());
        let mut planner = RealFftPlanner::<f64>::new();
        Ok(Self {
            cfg,
            analysis,
            synthesis,
            forward: planner.plan_fft_forward(cfg.fft_size),
            inverse: planner.plan_fft_inverse(cfg.fft_size),
        })
    }

    pub fn config(&self) -> &FramingConfig {
        &self.cfg
    }

    /// Transforms one frame of samples (length `frame_len`) into one-sided
    /// complex bins.
    pub fn analyze_frame(&self, samples: &[f64], out: &mut [Complex64]) {
        debug_assert_eq!(samples.len(), self.cfg.frame_len());
        debug_assert_eq!(out.len(), self.cfg.bins());
        let mut buf = vec![0.0; self.cfg.fft_size];
        for (b, (s, w)) in buf.iter_mut().zip(samples.iter().zip(&self.analysis)) {
            *b = s * w;
        }
        self.forward
            .process(&mut buf, out)
            .expect("fft buffer sizes are fixed by construction");
    }

    /// Inverse-transforms one frame of bins and overlap-adds the windowed
    /// result into `out[offset..offset + frame_len]`.
    pub fn synthesize_frame(&self, bins: &[Complex64], out: &mut [f64], offset: usize) {
        debug_assert_eq!(bins.len(), self.cfg.bins());
        let mut spec = bins.to_vec();
        // One-sided spectra of real signals carry zero imaginary parts at DC
        // and Nyquist; rounding in upstream edits can leave dust there.
        spec[0].im = 0.0;
        let nyq = spec.len() - 1;
        spec[nyq].im = 0.0;
        let mut time = vec![0.0; self.cfg.fft_size];
        self.inverse
            .process(&mut spec, &mut time)
            .expect("fft buffer sizes are fixed by construction");
        let scale = 1.0 / self.cfg.fft_size as f64;
        for n in 0..self.cfg.frame_len() {
            out[offset + n] += time[n] * scale * self.synthesis[n];
        }
    }
}

/// Windowed one-sided STFT of every channel.
///
/// Fails if the audio is shorter than one frame.
pub fn stft(audio: &MultiChannelAudio, cfg: &FramingConfig) -> Result<StftGrid> {
    cfg.validate()?;
    if audio.sample_rate() != cfg.sample_rate {
        return Err(Error::FramingMismatch(format!(
            "audio at {} Hz, framing expects {} Hz",
            audio.sample_rate(),
            cfg.sample_rate
        )));
    }
    let frame = cfg.frame_len();
    if audio.len() < frame {
        return Err(Error::AudioTooShort {
            got: audio.len(),
            need: frame,
        });
    }
    let proc = StftProcessor::new(*cfg)?;
    let frames = cfg.num_frames(audio.len());
    let hop = cfg.hop();
    let mut channels = Vec::with_capacity(audio.num_channels());
    for ch in 0..audio.num_channels() {
        let samples = audio.channel(ch);
        let mut spec = Spectrogram::zeros(frames, cfg.bins());
        for t in 0..frames {
            proc.analyze_frame(&samples[t * hop..t * hop + frame], spec.frame_mut(t));
        }
        channels.push(spec);
    }
    Ok(StftGrid {
        channels,
        framing: *cfg,
    })
}

/// Overlap-add reconstruction of every channel.
///
/// Interior samples reproduce the analyzed signal exactly; the first and last
/// partial-overlap regions are attenuated by the window taper.
pub fn istft(grid: &StftGrid) -> Result<MultiChannelAudio> {
    istft_with_phase(grid, None)
}

/// Like [`istft`], but when `phase_source` is given, each bin combines the
/// magnitude of `grid` with the phase of `phase_source` (per channel; a
/// single-channel grid may borrow phase from any one channel source).
pub fn istft_with_phase(grid: &StftGrid, phase_source: Option<&StftGrid>) -> Result<MultiChannelAudio> {
    let cfg = &grid.framing;
    cfg.validate()?;
    if let Some(ph) = phase_source {
        grid.check_same_framing(ph)?;
        if ph.num_channels() != grid.num_channels() {
            return Err(Error::FramingMismatch(format!(
                "phase source has {} channels, grid has {}",
                ph.num_channels(),
                grid.num_channels()
            )));
        }
    }
    let proc = StftProcessor::new(*cfg)?;
    let frames = grid.num_frames();
    let hop = cfg.hop();
    let out_len = if frames == 0 {
        0
    } else {
        (frames - 1) * hop + cfg.frame_len()
    };
    let mut channels = Vec::with_capacity(grid.num_channels());
    for ch in 0..grid.num_channels() {
        let spec = grid.channel(ch);
        let mut out = vec![0.0; out_len];
        let mut merged = vec![Complex64::new(0.0, 0.0); cfg.bins()];
        for t in 0..frames {
            let bins = match phase_source {
                None => spec.frame(t),
                Some(ph) => {
                    let src = ph.channel(ch).frame(t);
                    for (m, (g, p)) in merged.iter_mut().zip(spec.frame(t).iter().zip(src)) {
                        let mag = g.norm();
                        let pn = p.norm();
                        *m = if pn > 0.0 {
                            p * (mag / pn)
                        } else {
                            Complex64::new(mag, 0.0)
                        };
                    }
                    &merged[..]
                }
            };
            proc.synthesize_frame(bins, &mut out, t * hop);
        }
        channels.push(out);
    }
    MultiChannelAudio::new(channels, cfg.sample_rate)
}

/// STFT with `frame_len - hop` zeros prepended, so that frames group evenly
/// into chunks: every chunk of audio (the first included) yields exactly
/// `chunk_ms / hop_ms` frames and frame group `k` covers chunk `k`'s samples.
pub fn stft_chunk_aligned(audio: &MultiChannelAudio, cfg: &FramingConfig) -> Result<StftGrid> {
    cfg.validate()?;
    let pad = cfg.frame_len() - cfg.hop();
    let padded = MultiChannelAudio::new(
        audio
            .channels()
            .iter()
            .map(|c| {
                let mut v = vec![0.0; pad + c.len()];
                v[pad..].copy_from_slice(c);
                v
            })
            .collect(),
        audio.sample_rate(),
    )?;
    stft(&padded, cfg)
}

/// Log-power features `ln(|X|^2 + floor)` for every channel.
pub fn log_power(grid: &StftGrid) -> LogPowerGrid {
    let channels = grid
        .channels
        .iter()
        .map(|spec| {
            let mut rg = RealGrid::zeros(spec.frames(), spec.bins());
            for t in 0..spec.frames() {
                let src = spec.frame(t);
                for (dst, x) in rg.frame_mut(t).iter_mut().zip(src) {
                    *dst = (x.norm_sqr() + LOG_POWER_FLOOR).ln();
                }
            }
            rg
        })
        .collect();
    LogPowerGrid {
        channels,
        framing: grid.framing,
    }
}
