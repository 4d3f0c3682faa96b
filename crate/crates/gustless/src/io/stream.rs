//! Chunked streaming harness.
//!
//! Replays audio through the detector (and optionally the suppressor) in
//! fixed chunks with carried state, the way a device would. The stream is
//! aligned so every chunk contributes exactly `chunk_ms / hop_ms` frames;
//! output decisions and reconstructed audio match the offline batch path
//! exactly, apart from the documented boundary fades of overlap-add.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use crate::audio::MultiChannelAudio;
use crate::detector::{ChunkEvidence, CoherenceConfig, SscConfig, WindDecision, WindDetector};
use crate::dsp::{
    istft, stft_chunk_aligned, FramingConfig, StftProcessor, LOG_POWER_FLOOR,
};
use crate::error::{Error, Result};
use crate::suppressor::{attentive_reconstruct, reconstruct_frame, SuppressorModel};

/// Iterator over consecutive chunk sample ranges; never drops or duplicates
/// a sample, and yields a final partial range when the length is not an
/// exact multiple.
pub struct ChunkStream {
    len: usize,
    chunk_len: usize,
    pos: usize,
}

impl ChunkStream {
    pub fn new(len: usize, chunk_len: usize) -> Self {
        Self {
            len,
            chunk_len: chunk_len.max(1),
            pos: 0,
        }
    }
}

impl Iterator for ChunkStream {
    type Item = std::ops::Range<usize>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.pos >= self.len {
            return None;
        }
        let end = (self.pos + self.chunk_len).min(self.len);
        let range = self.pos..end;
        self.pos = end;
        Some(range)
    }
}

/// Everything a stream run produces.
#[derive(Debug, Clone)]
pub struct StreamOutput {
    pub decisions: Vec<WindDecision>,
    pub evidence: Vec<ChunkEvidence>,
    /// Reconstructed single-channel audio, present when a model was given.
    pub audio: Option<MultiChannelAudio>,
    /// Wall time spent processing each chunk.
    pub chunk_times: Vec<Duration>,
}

struct PendingFrame {
    index: usize,
    reference: Vec<Complex64>,
}

/// Incremental chunk processor carrying detector state and overlap tails.
pub struct StreamProcessor<'m> {
    framing: FramingConfig,
    detector: WindDetector,
    model: Option<&'m SuppressorModel>,
    stft: StftProcessor,
    channels: usize,
    // Rolling sample window of the zero-prepended signal.
    buf: Vec<Vec<f64>>,
    buf_base: usize,
    received: usize,
    next_frame: usize,
    evidence: ChunkEvidence,
    // Reconstruction state.
    logpower: VecDeque<(usize, Vec<Vec<f64>>)>,
    pending: VecDeque<PendingFrame>,
    ola: Vec<f64>,
    ola_base: usize,
    out: Vec<f64>,
}

impl<'m> StreamProcessor<'m> {
    pub fn new(
        framing: FramingConfig,
        ssc: SscConfig,
        coherence: CoherenceConfig,
        channels: usize,
        model: Option<&'m SuppressorModel>,
    ) -> Result<Self> {
        if channels < 2 {
            return Err(Error::InvalidInput(
                "streaming detection requires at least 2 channels".into(),
            ));
        }
        if let Some(m) = model {
            m.validate()?;
            if m.framing != framing {
                return Err(Error::ModelMismatch(
                    "model framing differs from the stream framing".into(),
                ));
            }
            if m.context.channels > channels {
                return Err(Error::ModelMismatch(format!(
                    "model wants {} channels, stream carries {channels}",
                    m.context.channels
                )));
            }
        }
        let pad = framing.frame_len() - framing.hop();
        Ok(Self {
            framing,
            detector: WindDetector::with_channels(framing, ssc, coherence, channels)?,
            model,
            stft: StftProcessor::new(framing)?,
            channels,
            buf: vec![vec![0.0; pad]; channels],
            buf_base: 0,
            received: 0,
            next_frame: 0,
            evidence: ChunkEvidence::default(),
            logpower: VecDeque::new(),
            pending: VecDeque::new(),
            ola: Vec::new(),
            ola_base: 0,
            out: Vec::new(),
        })
    }

    /// Feeds one chunk of samples (all channels) and returns the decisions
    /// (with their evidence) that completed during it.
    pub fn feed(&mut self, chunk: &[&[f64]]) -> Result<Vec<(WindDecision, ChunkEvidence)>> {
        if chunk.len() != self.channels {
            return Err(Error::InvalidInput(format!(
                "chunk has {} channels, stream expects {}",
                chunk.len(),
                self.channels
            )));
        }
        let n = chunk[0].len();
        if chunk.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidInput(
                "chunk channels differ in length".into(),
            ));
        }
        for (buf, ch) in self.buf.iter_mut().zip(chunk) {
            buf.extend_from_slice(ch);
        }
        self.received += n;
        self.drain_frames(None)?;
        let mut decisions = Vec::new();
        while self.evidence.ssc_smoothed.len() >= self.framing.frames_per_chunk() {
            let per = self.framing.frames_per_chunk();
            let rest_ssc = self.evidence.ssc_smoothed.split_off(per);
            let rest_mc = self.evidence.mc_smoothed.split_off(per);
            let full = std::mem::replace(
                &mut self.evidence,
                ChunkEvidence {
                    ssc_smoothed: rest_ssc,
                    mc_smoothed: rest_mc,
                },
            );
            decisions.push(self.detector.finish_chunk(full));
        }
        Ok(decisions)
    }

    /// Flushes trailing state: the final partial chunk (if any), the tail
    /// of the reconstruction, and length-matching against the total input.
    #[allow(clippy::type_complexity)]
    pub fn finish(
        mut self,
    ) -> Result<(Vec<(WindDecision, ChunkEvidence)>, Option<MultiChannelAudio>)> {
        let total_frames = self.next_frame;
        self.drain_frames(Some(total_frames))?;
        let mut decisions = Vec::new();
        if !self.evidence.ssc_smoothed.is_empty() {
            let evidence = std::mem::take(&mut self.evidence);
            decisions.push(self.detector.finish_chunk(evidence));
        }
        let audio = if self.model.is_some() {
            let covered = self.ola_base + self.ola.len();
            self.emit_up_to(covered);
            let mut samples = std::mem::take(&mut self.out);
            samples.resize(self.received, 0.0);
            Some(MultiChannelAudio::mono(samples, self.framing.sample_rate)?)
        } else {
            None
        };
        Ok((decisions, audio))
    }

    /// Evidence accumulated for the chunk currently in flight.
    pub fn pending_frames(&self) -> usize {
        self.evidence.ssc_smoothed.len()
    }

    fn drain_frames(&mut self, total_frames: Option<usize>) -> Result<()> {
        let frame_len = self.framing.frame_len();
        let hop = self.framing.hop();
        let padded_len = self.received + (frame_len - hop);
        while self.next_frame * hop + frame_len <= padded_len {
            let t = self.next_frame;
            let start = t * hop - self.buf_base;
            let mut spectra: Vec<Vec<Complex64>> = Vec::with_capacity(self.channels);
            for ch in 0..self.channels {
                let mut bins = vec![Complex64::new(0.0, 0.0); self.framing.bins()];
                self.stft
                    .analyze_frame(&self.buf[ch][start..start + frame_len], &mut bins);
                spectra.push(bins);
            }
            let refs: Vec<&[Complex64]> = spectra.iter().map(|s| s.as_slice()).collect();
            let (ssc_v, mc_v) = self.detector.push_frame(&refs);
            self.evidence.ssc_smoothed.push(ssc_v);
            self.evidence.mc_smoothed.push(mc_v);

            if let Some(model) = self.model {
                let lp: Vec<Vec<f64>> = spectra[..model.context.channels]
                    .iter()
                    .map(|bins| {
                        bins.iter()
                            .map(|x| (x.norm_sqr() + LOG_POWER_FLOOR).ln())
                            .collect()
                    })
                    .collect();
                self.logpower.push_back((t, lp));
                self.pending.push_back(PendingFrame {
                    index: t,
                    reference: spectra[0].clone(),
                });
                self.reconstruct_ready(t, None)?;
            }
            self.next_frame += 1;

            // Drop consumed samples, keeping the overlap tail.
            let keep_from = (self.next_frame * hop).saturating_sub(self.buf_base);
            if keep_from > 4 * frame_len {
                for buf in &mut self.buf {
                    buf.drain(..keep_from);
                }
                self.buf_base += keep_from;
            }
        }
        if let Some(total) = total_frames {
            self.reconstruct_ready(usize::MAX, Some(total))?;
        }
        Ok(())
    }

    /// Runs the network on every pending frame whose context window is
    /// complete (or clamped by the known end of stream).
    fn reconstruct_ready(&mut self, latest: usize, total_frames: Option<usize>) -> Result<()> {
        let Some(model) = self.model else {
            return Ok(());
        };
        let r = model.context.r;
        let hop = self.framing.hop();
        let frame_len = self.framing.frame_len();
        while let Some(front) = self.pending.front() {
            let t = front.index;
            let ready = match total_frames {
                Some(_) => true,
                None => latest != usize::MAX && latest >= t + r,
            };
            if !ready {
                break;
            }
            let last = match total_frames {
                Some(total) => total.saturating_sub(1),
                None => latest,
            };
            let bins = self.framing.bins();
            let mut context = Vec::with_capacity(model.context.input_dim(bins));
            for ch in 0..model.context.channels {
                for dt in -(r as isize)..=(r as isize) {
                    let idx = (t as isize + dt).clamp(0, last as isize) as usize;
                    let (_, lp) = self
                        .logpower
                        .iter()
                        .find(|(i, _)| *i == idx)
                        .expect("context frame retained in window");
                    context.extend_from_slice(&lp[ch]);
                }
            }
            let frame = self.pending.pop_front().expect("front checked");
            let mut recon = vec![Complex64::new(0.0, 0.0); bins];
            reconstruct_frame(model, &context, &frame.reference, &mut recon)?;

            let start = t * hop;
            let needed = start + frame_len - self.ola_base;
            if self.ola.len() < needed {
                self.ola.resize(needed, 0.0);
            }
            self.stft
                .synthesize_frame(&recon, &mut self.ola, start - self.ola_base);
            // Samples before the next frame's start are final.
            self.emit_up_to(start + hop);
            // Frames below t + 1 - r are no longer reachable by any context.
            let min_keep = (t + 1).saturating_sub(r);
            while self
                .logpower
                .front()
                .is_some_and(|(i, _)| *i < min_keep)
            {
                self.logpower.pop_front();
            }
        }
        Ok(())
    }

    /// Moves finalized overlap-add samples into the output, unpadding.
    fn emit_up_to(&mut self, padded_end: usize) {
        let pad = self.framing.frame_len() - self.framing.hop();
        let end = padded_end.min(self.ola_base + self.ola.len());
        if end <= self.ola_base {
            return;
        }
        let base = self.ola_base;
        for (i, value) in self.ola.drain(..end - base).enumerate() {
            if base + i >= pad {
                self.out.push(value);
            }
        }
        self.ola_base = end;
    }
}

/// Streams audio chunk by chunk through detection (and suppression when a
/// model is given), recording per-chunk wall time.
pub fn run_stream(
    audio: &MultiChannelAudio,
    framing: &FramingConfig,
    ssc: &SscConfig,
    coherence: &CoherenceConfig,
    model: Option<&SuppressorModel>,
) -> Result<StreamOutput> {
    if audio.len() < framing.hop() {
        return Ok(StreamOutput {
            decisions: vec![],
            evidence: vec![],
            audio: model.map(|_| {
                MultiChannelAudio::mono(vec![0.0; audio.len()], audio.sample_rate())
                    .expect("mono buffer")
            }),
            chunk_times: vec![],
        });
    }
    let mut proc = StreamProcessor::new(*framing, *ssc, *coherence, audio.num_channels(), model)?;
    let mut completed = Vec::new();
    let mut chunk_times = Vec::new();
    for range in ChunkStream::new(audio.len(), framing.chunk_len()) {
        let started = Instant::now();
        let slices: Vec<&[f64]> = audio
            .channels()
            .iter()
            .map(|c| &c[range.clone()])
            .collect();
        completed.extend(proc.feed(&slices)?);
        chunk_times.push(started.elapsed());
    }
    let started = Instant::now();
    let (tail, recon) = proc.finish()?;
    if !tail.is_empty() {
        if let Some(last) = chunk_times.last_mut() {
            *last += started.elapsed();
        }
    }
    completed.extend(tail);
    let (decisions, evidence): (Vec<_>, Vec<_>) = completed.into_iter().unzip();
    Ok(StreamOutput {
        decisions,
        evidence,
        audio: recon,
        chunk_times,
    })
}

/// Offline reference: the same pipeline computed on whole grids at once.
/// Streamed runs must reproduce this output exactly.
pub fn run_batch(
    audio: &MultiChannelAudio,
    framing: &FramingConfig,
    ssc: &SscConfig,
    coherence: &CoherenceConfig,
    model: Option<&SuppressorModel>,
) -> Result<StreamOutput> {
    if audio.len() < framing.hop() {
        return Ok(StreamOutput {
            decisions: vec![],
            evidence: vec![],
            audio: model.map(|_| {
                MultiChannelAudio::mono(vec![0.0; audio.len()], audio.sample_rate())
                    .expect("mono buffer")
            }),
            chunk_times: vec![],
        });
    }
    let grid = stft_chunk_aligned(audio, framing)?;
    let mut detector =
        WindDetector::with_channels(*framing, *ssc, *coherence, audio.num_channels())?;
    let results = detector.process_grid(&grid)?;
    let (decisions, evidence): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let audio_out = match model {
        None => None,
        Some(m) => {
            let recon = attentive_reconstruct(m, &grid)?;
            let rebuilt = istft(&recon)?;
            let pad = framing.frame_len() - framing.hop();
            let mut samples = rebuilt.channel(0)[pad.min(rebuilt.len())..].to_vec();
            samples.resize(audio.len(), 0.0);
            Some(MultiChannelAudio::mono(samples, audio.sample_rate())?)
        }
    };
    Ok(StreamOutput {
        decisions,
        evidence,
        audio: audio_out,
        chunk_times: vec![],
    })
}
