//! Streaming wind-noise detection and suppression for two-channel audio.
//!
//! Detection combines low-frequency spectral-centroid evidence with
//! dual-microphone coherence; suppression rewrites only the wind-dominated
//! low band of the spectrum with a small neural network and leaves the rest
//! of the signal untouched. See the `examples/` directory for runnable
//! end-to-end walkthroughs of each capability.

pub mod audio;
pub mod detector;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod io;
pub mod nn;
pub mod suppressor;
pub mod synth;

pub use audio::MultiChannelAudio;
pub use detector::{CoherenceConfig, SscConfig, WindDecision, WindDetector};
pub use dsp::{istft, istft_with_phase, log_power, stft, FramingConfig, LogPowerGrid, StftGrid};
pub use error::{Error, Result};
pub use suppressor::{AttentiveRegion, ContextSpec, SuppressorModel, TrainingPair};
pub use synth::{LabeledScene, SceneSpec, WindLevel};

#[cfg(test)]
mod concurrency {
    //! The pipeline types hold no shared mutable state: grids, models and
    //! detector state move freely between threads (one stream per state).

    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn pipeline_values_are_send_and_sync() {
        assert_send_sync::<crate::MultiChannelAudio>();
        assert_send_sync::<crate::StftGrid>();
        assert_send_sync::<crate::LogPowerGrid>();
        assert_send_sync::<crate::detector::DetectorState>();
        assert_send_sync::<crate::WindDetector>();
        assert_send_sync::<crate::SuppressorModel>();
        assert_send_sync::<crate::LabeledScene>();
    }
}
