//! File formats and the streaming harness: WAV audio, config files,
//! decision traces, model containers and chunked replay.

pub mod config;
pub mod model;
pub mod stream;
pub mod trace;
pub mod wav;
