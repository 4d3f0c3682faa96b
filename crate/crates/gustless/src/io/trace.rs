//! Decision trace CSV.
//!
//! Columns: `chunk_index, t_start_ms, ssc_score, mc_score, wind`, followed
//! by `warmup` and `partial` flags (partial final chunks are flagged rather
//! than dropped).

use std::io::Write;
use std::path::Path;

use crate::detector::WindDecision;
use crate::dsp::FramingConfig;
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "chunk_index,t_start_ms,ssc_score,mc_score,wind,warmup,partial";

/// Renders decisions as CSV text.
pub fn trace_to_csv(decisions: &[WindDecision], framing: &FramingConfig) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for d in decisions {
        let t_start_ms = d.chunk_index * framing.chunk_ms as u64;
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            d.chunk_index,
            t_start_ms,
            d.ssc_score,
            d.mc_score,
            d.wind_present as u8,
            d.warmup as u8,
            d.partial as u8
        ));
    }
    out
}

pub fn write_trace(
    decisions: &[WindDecision],
    framing: &FramingConfig,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let text = trace_to_csv(decisions, framing);
    let mut file = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    file.write_all(text.as_bytes()).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(())
}
