//! Time-domain multi-channel audio buffers.

use crate::error::{Error, Result};

/// Maximum number of channels the toolkit handles.
pub const MAX_CHANNELS: usize = 8;

/// Equal-length sample sequences, one per channel, with a sample rate.
///
/// Samples are dimensionless amplitudes nominally in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiChannelAudio {
    channels: Vec<Vec<f64>>,
    sample_rate: u32,
}

impl MultiChannelAudio {
    /// Builds a buffer from per-channel sample vectors.
    ///
    /// All channels must have the same length and the channel count must be
    /// between 1 and [`MAX_CHANNELS`].
    pub fn new(channels: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        if channels.is_empty() || channels.len() > MAX_CHANNELS {
            return Err(Error::InvalidInput(format!(
                "channel count must be 1..={MAX_CHANNELS}, got {}",
                channels.len()
            )));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidInput("sample rate must be positive".into()));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::InvalidInput(
                "all channels must have the same length".into(),
            ));
        }
        Ok(Self {
            channels,
            sample_rate,
        })
    }

    /// Single-channel convenience constructor.
    pub fn mono(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        Self::new(vec![samples], sample_rate)
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, idx: usize) -> &[f64] {
        &self.channels[idx]
    }

    pub fn channel_mut(&mut self, idx: usize) -> &mut Vec<f64> {
        &mut self.channels[idx]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    /// Largest absolute sample value across all channels.
    pub fn peak(&self) -> f64 {
        self.channels
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |acc, &s| acc.max(s.abs()))
    }

    /// Scales every sample in place.
    pub fn scale(&mut self, gain: f64) {
        for ch in &mut self.channels {
            for s in ch.iter_mut() {
                *s *= gain;
            }
        }
    }

    /// Returns a copy restricted to the sample range `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        let end = end.min(self.len());
        if start > end {
            return Err(Error::InvalidInput(format!(
                "slice start {start} past end {end}"
            )));
        }
        Self::new(
            self.channels
                .iter()
                .map(|c| c[start..end].to_vec())
                .collect(),
            self.sample_rate,
        )
    }
}
