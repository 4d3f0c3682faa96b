//! Per-chunk wind detection from spectral sub-band centroids and
//! dual-channel coherence.
//!
//! Each frame contributes a centroid-based wind indicator per channel
//! (smoothed, squashed to [0,1), maxed across channels) and a band-averaged
//! magnitude-of-coherence score (smoothed). A chunk is classified as windy
//! when the centroid evidence is high *and* coherence is low, with a
//! two-chunk hysteresis so decisions do not flicker on gust boundaries.

use num_complex::Complex64;

use crate::dsp::{FramingConfig, StftGrid};
use crate::error::{Error, Result};

/// Auto/cross PSD magnitudes below this are treated as silence and excluded
/// from coherence averaging.
pub const APSD_FLOOR: f64 = 1e-18;

/// Spectral sub-band centroid settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SscConfig {
    /// Lower bin of the centroid sub-band.
    pub mu1: usize,
    /// Upper bin of the centroid sub-band (clamped to the grid's bin count).
    pub mu2: usize,
    /// Moving-average window for the raw indicator stream.
    pub smooth_ms: u32,
    /// Width of the squashing transform.
    pub transform_sigma: f64,
    /// Decision threshold on the transformed score.
    pub threshold: f64,
}

impl Default for SscConfig {
    fn default() -> Self {
        Self {
            mu1: 0,
            mu2: 100,
            smooth_ms: 500,
            transform_sigma: 0.35,
            threshold: 0.6,
        }
    }
}

impl SscConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mu1 >= self.mu2 {
            return Err(Error::InvalidConfig(format!(
                "ssc band requires mu1 < mu2, got [{}, {}]",
                self.mu1, self.mu2
            )));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidConfig(
                "ssc threshold must lie in (0, 1)".into(),
            ));
        }
        if self.transform_sigma <= 0.0 {
            return Err(Error::InvalidConfig("transform sigma must be > 0".into()));
        }
        if self.smooth_ms == 0 {
            return Err(Error::InvalidConfig("ssc smooth_ms must be > 0".into()));
        }
        Ok(())
    }

    /// Effective upper bin for a grid with `bins` one-sided bins.
    pub fn mu2_effective(&self, bins: usize) -> usize {
        self.mu2.min(bins - 1)
    }
}

/// Coherence feature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceConfig {
    /// Recursive PSD smoothing constant.
    pub alpha_s: f64,
    /// Decision threshold on the smoothed magnitude-of-coherence score.
    pub threshold: f64,
    /// Lower edge of the averaging band in Hz.
    pub band_low_hz: f64,
    /// Upper edge of the averaging band in Hz.
    pub band_high_hz: f64,
    /// Moving-average window for the band-averaged score.
    pub smooth_ms: u32,
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        Self {
            alpha_s: 0.8,
            threshold: 0.4,
            band_low_hz: 100.0,
            band_high_hz: 800.0,
            smooth_ms: 500,
        }
    }
}

impl CoherenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_s > 0.0 && self.alpha_s < 1.0) {
            return Err(Error::InvalidConfig("alpha_s must lie in (0, 1)".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidConfig(
                "coherence threshold must lie in (0, 1)".into(),
            ));
        }
        if self.band_low_hz < 0.0 || self.band_low_hz >= self.band_high_hz {
            return Err(Error::InvalidConfig(format!(
                "coherence band [{}, {}] Hz is empty",
                self.band_low_hz, self.band_high_hz
            )));
        }
        if self.smooth_ms == 0 {
            return Err(Error::InvalidConfig(
                "coherence smooth_ms must be > 0".into(),
            ));
        }
        Ok(())
    }

    /// Bin range `[low, high]` (inclusive) covered by the averaging band.
    pub fn band_bins(&self, bin_hz: f64, bins: usize) -> Result<(usize, usize)> {
        let low = (self.band_low_hz / bin_hz).ceil() as usize;
        let high = ((self.band_high_hz / bin_hz).floor() as usize).min(bins - 1);
        if low > high {
            return Err(Error::InvalidConfig(format!(
                "coherence band [{}, {}] Hz covers no bins at {bin_hz} Hz/bin",
                self.band_low_hz, self.band_high_hz
            )));
        }
        Ok((low, high))
    }
}

/// Power-weighted mean bin index over `[mu1, mu2]`.
///
/// `power` holds per-bin power for one frame. An all-zero band is reported
/// as [`Error::SilentBand`]; callers map that to "no wind evidence".
pub fn spectral_centroid(power: &[f64], mu1: usize, mu2: usize) -> Result<f64> {
    debug_assert!(mu1 < mu2 && mu2 < power.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for (mu, &p) in power.iter().enumerate().take(mu2 + 1).skip(mu1) {
        num += p * mu as f64;
        den += p;
    }
    if den <= 0.0 {
        return Err(Error::SilentBand { mu1, mu2 });
    }
    Ok(num / den)
}

/// Wind indicator: normalized distance of the centroid from the sub-band
/// top. 1 means all energy at DC, 0 means energy at the band edge.
pub fn ssc_indicator(centroid: f64, mu2: usize) -> f64 {
    (mu2 as f64 - centroid) / mu2 as f64
}

/// Squashes a smoothed indicator into [0, 1): `1 - exp(-v^2 / (2 sigma^2))`.
pub fn squash_indicator(v: f64, sigma: f64) -> f64 {
    1.0 - (-v * v / (2.0 * sigma * sigma)).exp()
}

/// Element-wise max across channels; robust to one occluded channel.
pub fn channel_max(scores: &[f64]) -> f64 {
    scores.iter().copied().fold(0.0f64, f64::max)
}

/// Raw conjunctive rule: wind when centroid evidence is at or above its
/// threshold and coherence is at or below its threshold.
pub fn classify_raw(ssc_score: f64, mc_score: f64, ssc_threshold: f64, mc_threshold: f64) -> bool {
    ssc_score >= ssc_threshold && mc_score <= mc_threshold
}

/// Fixed-capacity ring buffer with a mean over current contents.
#[derive(Debug, Clone)]
struct Ring {
    buf: Vec<f64>,
    head: usize,
    len: usize,
}

impl Ring {
    fn new(cap: usize) -> Self {
        Self {
            buf: vec![0.0; cap.max(1)],
            head: 0,
            len: 0,
        }
    }

    fn push(&mut self, v: f64) {
        let cap = self.buf.len();
        if self.len == cap {
            self.buf[self.head] = v;
            self.head = (self.head + 1) % cap;
        } else {
            self.buf[(self.head + self.len) % cap] = v;
            self.len += 1;
        }
    }

    fn mean(&self) -> f64 {
        if self.len == 0 {
            return 0.0;
        }
        // Summing in storage order keeps replays bit-identical.
        let mut sum = 0.0;
        for i in 0..self.len {
            sum += self.buf[(self.head + i) % self.buf.len()];
        }
        sum / self.len as f64
    }

    #[cfg(test)]
    fn len(&self) -> usize {
        self.len
    }

    #[cfg(test)]
    fn capacity(&self) -> usize {
        self.buf.len()
    }
}

/// Two-chunk decision hysteresis: the held decision flips only after two
/// consecutive chunks agree on the opposite verdict.
#[derive(Debug, Clone, Copy, Default)]
pub struct Hysteresis {
    last: bool,
    run: u32,
}

impl Hysteresis {
    pub fn update(&mut self, raw: bool) -> bool {
        if raw == self.last {
            self.run = 0;
        } else {
            self.run += 1;
            if self.run >= 2 {
                self.last = raw;
                self.run = 0;
            }
        }
        self.last
    }
}

/// Recursive PSD accumulators and smoothing state; persists across chunks.
#[derive(Debug, Clone)]
pub struct DetectorState {
    psd11: Vec<f64>,
    psd22: Vec<f64>,
    psd12: Vec<Complex64>,
    ssc_rings: Vec<Ring>,
    mc_ring: Ring,
    hysteresis: Hysteresis,
    frames_seen: u64,
}

impl DetectorState {
    pub fn new(bins: usize, channels: usize, ssc_window: usize, mc_window: usize) -> Self {
        Self {
            psd11: vec![0.0; bins],
            psd22: vec![0.0; bins],
            psd12: vec![Complex64::new(0.0, 0.0); bins],
            ssc_rings: (0..channels).map(|_| Ring::new(ssc_window)).collect(),
            mc_ring: Ring::new(mc_window),
            hysteresis: Hysteresis::default(),
            frames_seen: 0,
        }
    }

    /// One recursive smoothed-periodogram step over a two-channel frame:
    /// `phi <- alpha * phi + (1 - alpha) * X_i * conj(X_j)` per bin.
    pub fn psd_update(&mut self, x1: &[Complex64], x2: &[Complex64], alpha_s: f64) {
        debug_assert_eq!(x1.len(), self.psd11.len());
        debug_assert_eq!(x2.len(), self.psd11.len());
        let a = alpha_s;
        let b = 1.0 - alpha_s;
        for mu in 0..self.psd11.len() {
            self.psd11[mu] = a * self.psd11[mu] + b * x1[mu].norm_sqr();
            self.psd22[mu] = a * self.psd22[mu] + b * x2[mu].norm_sqr();
            self.psd12[mu] = a * self.psd12[mu] + b * x1[mu] * x2[mu].conj();
        }
    }

    /// Per-bin magnitude of coherence averaged over `band` (inclusive).
    ///
    /// Bins whose auto-PSDs sit below [`APSD_FLOOR`] are excluded; when every
    /// bin is excluded the score is 0 and the silent flag is set.
    pub fn coherence_mc(&self, band: (usize, usize)) -> (f64, bool) {
        let mut sum = 0.0;
        let mut count = 0usize;
        for mu in band.0..=band.1 {
            let denom = self.psd11[mu] * self.psd22[mu];
            if self.psd11[mu] <= APSD_FLOOR || self.psd22[mu] <= APSD_FLOOR {
                continue;
            }
            let mc = (self.psd12[mu].norm() / denom.sqrt()).clamp(0.0, 1.0);
            sum += mc;
            count += 1;
        }
        if count == 0 {
            (0.0, true)
        } else {
            (sum / count as f64, false)
        }
    }

    /// Cross/auto PSD triple at one bin, for invariant checks.
    pub fn psd_at(&self, mu: usize) -> (f64, f64, Complex64) {
        (self.psd11[mu], self.psd22[mu], self.psd12[mu])
    }

    pub fn bins(&self) -> usize {
        self.psd11.len()
    }

    /// Advances the two-chunk hysteresis and returns the held decision.
    fn update_decision(&mut self, raw: bool) -> bool {
        self.hysteresis.update(raw)
    }
}

/// Per-chunk verdict with the scores that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindDecision {
    pub chunk_index: u64,
    pub wind_present: bool,
    /// Mean transformed-and-maxed centroid score over the chunk, in [0, 1].
    pub ssc_score: f64,
    /// Mean smoothed magnitude-of-coherence over the chunk, in [0, 1].
    pub mc_score: f64,
    /// Frame index range `[start, end)` covered by the chunk.
    pub frame_span: (u64, u64),
    /// Decision suppressed because smoothing had not yet converged.
    pub warmup: bool,
    /// Chunk held fewer frames than the configured chunk length.
    pub partial: bool,
}

/// Per-frame evidence kept alongside decisions so threshold sweeps can be
/// replayed without re-running the front end.
#[derive(Debug, Clone, Default)]
pub struct ChunkEvidence {
    /// Smoothed raw indicator (pre-squash), maxed across channels, per frame.
    pub ssc_smoothed: Vec<f64>,
    /// Smoothed band-averaged magnitude of coherence per frame.
    pub mc_smoothed: Vec<f64>,
}

/// Streaming detector: feed it frames (grouped into chunks); it carries the
/// recursive state. One instance per stream, processed in order.
#[derive(Debug, Clone)]
pub struct WindDetector {
    framing: FramingConfig,
    ssc: SscConfig,
    coherence: CoherenceConfig,
    mu2_eff: usize,
    band: (usize, usize),
    state: DetectorState,
    next_chunk: u64,
    warm_chunks: u64,
}

impl WindDetector {
    pub fn new(framing: FramingConfig, ssc: SscConfig, coherence: CoherenceConfig) -> Result<Self> {
        Self::with_channels(framing, ssc, coherence, 2)
    }

    pub fn with_channels(
        framing: FramingConfig,
        ssc: SscConfig,
        coherence: CoherenceConfig,
        channels: usize,
    ) -> Result<Self> {
        framing.validate()?;
        ssc.validate()?;
        coherence.validate()?;
        if channels < 2 {
            return Err(Error::InvalidInput(
                "wind detection requires at least 2 channels".into(),
            ));
        }
        let bins = framing.bins();
        let mu2_eff = ssc.mu2_effective(bins);
        if ssc.mu1 >= mu2_eff {
            return Err(Error::InvalidConfig(format!(
                "ssc band [{}, {}] collapses at {} bins",
                ssc.mu1, ssc.mu2, bins
            )));
        }
        let band = coherence.band_bins(framing.bin_hz(), bins)?;
        let ssc_window = smoothing_frames(ssc.smooth_ms, framing.hop_ms);
        let mc_window = smoothing_frames(coherence.smooth_ms, framing.hop_ms);
        let warm_ms = ssc.smooth_ms.max(coherence.smooth_ms) as u64;
        Ok(Self {
            framing,
            ssc,
            coherence,
            mu2_eff,
            band,
            state: DetectorState::new(bins, channels, ssc_window, mc_window),
            next_chunk: 0,
            warm_chunks: warm_ms.div_ceil(framing.chunk_ms as u64),
        })
    }

    pub fn framing(&self) -> &FramingConfig {
        &self.framing
    }

    pub fn state(&self) -> &DetectorState {
        &self.state
    }

    pub fn ssc_config(&self) -> &SscConfig {
        &self.ssc
    }

    pub fn coherence_config(&self) -> &CoherenceConfig {
        &self.coherence
    }

    /// Number of leading chunks whose decisions are suppressed.
    pub fn warm_chunks(&self) -> u64 {
        self.warm_chunks
    }

    /// Processes one frame (all channels) and returns the smoothed evidence:
    /// `(ssc_smoothed_max, mc_smoothed)`. Coherence uses the first two
    /// channels; the centroid max runs over all of them.
    pub fn push_frame(&mut self, frames: &[&[Complex64]]) -> (f64, f64) {
        let mut smoothed_max = 0.0f64;
        for (ch, frame) in frames.iter().enumerate() {
            let power: Vec<f64> = frame[self.ssc.mu1..=self.mu2_eff]
                .iter()
                .map(|x| x.norm_sqr())
                .collect();
            let shifted = spectral_centroid(&power, 0, self.mu2_eff - self.ssc.mu1)
                .map(|c| c + self.ssc.mu1 as f64);
            // Silence carries no wind evidence.
            let indicator = match shifted {
                Ok(centroid) => ssc_indicator(centroid, self.mu2_eff),
                Err(_) => 0.0,
            };
            self.state.ssc_rings[ch].push(indicator);
            smoothed_max = smoothed_max.max(self.state.ssc_rings[ch].mean());
        }
        self.state.psd_update(frames[0], frames[1], self.coherence.alpha_s);
        let (mc, _silent) = self.state.coherence_mc(self.band);
        self.state.mc_ring.push(mc);
        self.state.frames_seen += 1;
        (smoothed_max, self.state.mc_ring.mean())
    }

    /// Processes the next chunk of frames from a grid slice and returns the
    /// decision plus the per-frame evidence it was built from.
    pub fn process_chunk(
        &mut self,
        grid: &StftGrid,
        frame_range: std::ops::Range<usize>,
    ) -> Result<(WindDecision, ChunkEvidence)> {
        if grid.num_channels() < 2 {
            return Err(Error::InvalidInput(
                "wind detection requires at least 2 channels".into(),
            ));
        }
        if grid.bins() != self.state.bins() {
            return Err(Error::FramingMismatch(format!(
                "grid has {} bins, detector expects {}",
                grid.bins(),
                self.state.bins()
            )));
        }
        let mut evidence = ChunkEvidence::default();
        for t in frame_range.clone() {
            let frames: Vec<&[Complex64]> =
                grid.channels.iter().map(|c| c.frame(t)).collect();
            let (ssc_v, mc_v) = self.push_frame(&frames);
            evidence.ssc_smoothed.push(ssc_v);
            evidence.mc_smoothed.push(mc_v);
        }
        Ok(self.finish_chunk(evidence))
    }

    /// Closes the current chunk: derives its scores from the collected
    /// evidence, advances the hysteresis, and stamps warm-up.
    pub fn finish_chunk(&mut self, evidence: ChunkEvidence) -> (WindDecision, ChunkEvidence) {
        let global_start = self.next_chunk * self.framing.frames_per_chunk() as u64;
        let n = evidence.ssc_smoothed.len().max(1) as f64;
        let ssc_score = evidence
            .ssc_smoothed
            .iter()
            .map(|&v| squash_indicator(v, self.ssc.transform_sigma))
            .sum::<f64>()
            / n;
        let mc_score = evidence.mc_smoothed.iter().sum::<f64>() / n;
        let raw = classify_raw(ssc_score, mc_score, self.ssc.threshold, self.coherence.threshold);
        let held = self.state.update_decision(raw);
        let warmup = self.next_chunk < self.warm_chunks;
        let decision = WindDecision {
            chunk_index: self.next_chunk,
            wind_present: if warmup { false } else { held },
            ssc_score,
            mc_score,
            frame_span: (global_start, global_start + evidence.ssc_smoothed.len() as u64),
            warmup,
            partial: evidence.ssc_smoothed.len() < self.framing.frames_per_chunk(),
        };
        self.next_chunk += 1;
        (decision, evidence)
    }

    /// Batch path: consumes a whole grid in chunk-sized frame groups
    /// (a trailing partial chunk is processed and flagged).
    pub fn process_grid(&mut self, grid: &StftGrid) -> Result<Vec<(WindDecision, ChunkEvidence)>> {
        let per = self.framing.frames_per_chunk();
        let total = grid.num_frames();
        let mut out = Vec::new();
        let mut start = 0;
        while start < total {
            let end = (start + per).min(total);
            out.push(self.process_chunk(grid, start..end)?);
            start = end;
        }
        Ok(out)
    }
}

/// Moving-average window length in frames for a smoothing span in ms.
pub fn smoothing_frames(smooth_ms: u32, hop_ms: u32) -> usize {
    ((smooth_ms as f64 / hop_ms as f64).round() as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centroid_point_masses() {
        let mut p = vec![0.0; 129];
        p[100] = 2.5;
        assert_eq!(spectral_centroid(&p, 0, 100).unwrap(), 100.0);
        let uniform = vec![1.0; 101];
        assert!((spectral_centroid(&uniform, 0, 100).unwrap() - 50.0).abs() < 1e-12);
        let mut two = vec![0.0; 101];
        two[0] = 1.0;
        two[100] = 3.0;
        assert_eq!(spectral_centroid(&two, 0, 100).unwrap(), 75.0);
    }

    #[test]
    fn centroid_silent_band_is_an_error() {
        let p = vec![0.0; 101];
        assert!(matches!(
            spectral_centroid(&p, 0, 100),
            Err(Error::SilentBand { mu1: 0, mu2: 100 })
        ));
    }

    #[test]
    fn indicator_endpoints_and_midpoint() {
        assert_eq!(ssc_indicator(100.0, 100), 0.0);
        assert_eq!(ssc_indicator(0.0, 100), 1.0);
        assert_eq!(ssc_indicator(25.0, 100), 0.75);
    }

    #[test]
    fn squash_closed_forms() {
        assert_eq!(squash_indicator(0.0, 0.35), 0.0);
        assert!(squash_indicator(100.0, 0.35) > 0.999999);
        let at_sigma = squash_indicator(0.35, 0.35);
        assert!((at_sigma - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        assert!((at_sigma - 0.3935).abs() < 1e-4);
    }

    #[test]
    fn channel_max_cases() {
        assert_eq!(channel_max(&[0.2, 0.9]), 0.9);
        assert_eq!(channel_max(&[0.0, 0.7]), 0.7);
        assert_eq!(channel_max(&[0.4]), 0.4);
    }

    #[test]
    fn classify_conjunction() {
        assert!(classify_raw(0.9, 0.1, 0.6, 0.4));
        assert!(!classify_raw(0.9, 0.9, 0.6, 0.4));
        assert!(!classify_raw(0.3, 0.1, 0.6, 0.4));
    }

    #[test]
    fn psd_one_step_from_zero() {
        let mut state = DetectorState::new(4, 2, 8, 8);
        let ones = vec![Complex64::new(1.0, 0.0); 4];
        state.psd_update(&ones, &ones, 0.8);
        for mu in 0..4 {
            let (p11, p22, p12) = state.psd_at(mu);
            assert!((p11 - 0.2).abs() < 1e-15);
            assert!((p22 - 0.2).abs() < 1e-15);
            assert!((p12.re - 0.2).abs() < 1e-15 && p12.im.abs() < 1e-15);
        }
    }

    #[test]
    fn psd_converges_geometrically() {
        let mut state = DetectorState::new(1, 2, 8, 8);
        let x = vec![Complex64::new(0.7, -0.4)];
        for _ in 0..50 {
            state.psd_update(&x, &x, 0.8);
        }
        let expected = x[0].norm_sqr();
        let (p11, _, _) = state.psd_at(0);
        let err = (p11 - expected).abs() / expected;
        assert!(err < 0.8f64.powi(50) + 1e-12, "error {err}");
    }

    #[test]
    fn psd_cross_decays_when_one_channel_is_zero() {
        let mut state = DetectorState::new(1, 2, 8, 8);
        let x = vec![Complex64::new(1.0, 0.0)];
        let z = vec![Complex64::new(0.0, 0.0)];
        state.psd_update(&x, &x, 0.8);
        let (_, _, before) = state.psd_at(0);
        for _ in 0..40 {
            state.psd_update(&x, &z, 0.8);
        }
        let (_, _, after) = state.psd_at(0);
        assert!(after.norm() < before.norm() * 1e-3);
    }

    #[test]
    fn coherence_identical_and_sign_flipped_channels() {
        let mut state = DetectorState::new(8, 2, 8, 8);
        let x: Vec<Complex64> = (0..8)
            .map(|i| Complex64::new(0.3 + i as f64 * 0.1, -0.2 * i as f64))
            .collect();
        let neg: Vec<Complex64> = x.iter().map(|v| -v).collect();
        for _ in 0..200 {
            state.psd_update(&x, &x, 0.8);
        }
        let (mc, silent) = state.coherence_mc((1, 7));
        assert!(!silent);
        assert!((mc - 1.0).abs() < 1e-6);

        let mut state2 = DetectorState::new(8, 2, 8, 8);
        for _ in 0..200 {
            state2.psd_update(&x, &neg, 0.8);
        }
        let (mc2, _) = state2.coherence_mc((1, 7));
        assert!((mc2 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn coherence_all_silent_flags() {
        let state = DetectorState::new(8, 2, 8, 8);
        let (mc, silent) = state.coherence_mc((0, 7));
        assert_eq!(mc, 0.0);
        assert!(silent);
    }

    #[test]
    fn hysteresis_needs_two_agreeing_chunks() {
        let mut state = DetectorState::new(1, 2, 1, 1);
        assert!(!state.update_decision(true));
        assert!(state.update_decision(true));
        assert!(state.update_decision(true));
        // One dissenting chunk does not flip back.
        assert!(state.update_decision(false));
        assert!(state.update_decision(true));
        // Two in a row do.
        assert!(state.update_decision(false));
        assert!(!state.update_decision(false));
    }

    #[test]
    fn ring_never_exceeds_capacity_and_averages() {
        let mut r = Ring::new(4);
        for i in 0..10 {
            r.push(i as f64);
            assert!(r.len() <= r.capacity());
        }
        // Holds 6, 7, 8, 9.
        assert!((r.mean() - 7.5).abs() < 1e-12);
    }

    #[test]
    fn identical_channels_beat_independent_ones() {
        use rand::{Rng, SeedableRng};
        let mut wins = 0;
        for trial in 0..100u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xC0FFEE ^ trial);
            let mut same = DetectorState::new(16, 2, 8, 8);
            let mut indep = DetectorState::new(16, 2, 8, 8);
            let mut sum_same = 0.0;
            let mut sum_indep = 0.0;
            for _ in 0..200 {
                let a: Vec<Complex64> = (0..16)
                    .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                    .collect();
                let b: Vec<Complex64> = (0..16)
                    .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                    .collect();
                same.psd_update(&a, &a, 0.8);
                indep.psd_update(&a, &b, 0.8);
                sum_same += same.coherence_mc((0, 15)).0;
                sum_indep += indep.coherence_mc((0, 15)).0;
            }
            if sum_same > sum_indep {
                wins += 1;
            }
        }
        assert!(wins >= 99, "identical channels won only {wins}/100 trials");
    }
}
