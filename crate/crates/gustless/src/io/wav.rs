//! RIFF/WAVE reading and writing.
//!
//! Supports PCM 16-bit and IEEE float 32-bit, 1-8 channels. Samples are
//! normalized to [-1, 1] on read (16-bit full scale 32767 maps to
//! 32767/32768). Float writing is the bit-exact inverse of float reading;
//! 16-bit writing quantizes by plain truncation toward zero, no dither.

use std::io::Write;
use std::path::Path;

use crate::audio::{MultiChannelAudio, MAX_CHANNELS};
use crate::error::{Error, Result};

/// Sample encodings the writer can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    /// IEEE float 32-bit (format tag 3).
    Float32,
    /// PCM signed 16-bit (format tag 1).
    Pcm16,
}

struct Fmt {
    format_tag: u16,
    channels: u16,
    sample_rate: u32,
    block_align: u16,
    bits: u16,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn bad(offset: usize, message: impl Into<String>) -> Error {
    Error::WavFormat {
        offset: offset as u64,
        message: message.into(),
    }
}

fn tag(bytes: &[u8], offset: usize) -> Result<[u8; 4]> {
    bytes
        .get(offset..offset + 4)
        .and_then(|s| s.try_into().ok())
        .ok_or_else(|| bad(offset, "file ends inside a chunk header"))
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|s| u32::from_le_bytes(s.try_into().unwrap()))
        .ok_or_else(|| bad(offset, "file ends inside a 32-bit field"))
}

fn read_u16(bytes: &[u8], offset: usize) -> Result<u16> {
    bytes
        .get(offset..offset + 2)
        .map(|s| u16::from_le_bytes(s.try_into().unwrap()))
        .ok_or_else(|| bad(offset, "file ends inside a 16-bit field"))
}

/// Reads a WAV file into normalized multi-channel audio.
pub fn read_wav(path: impl AsRef<Path>) -> Result<MultiChannelAudio> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    decode_wav(&bytes)
}

/// Decodes WAV bytes; exposed separately so tests can exercise malformed
/// input without touching the filesystem.
pub fn decode_wav(bytes: &[u8]) -> Result<MultiChannelAudio> {
    if &tag(bytes, 0)? != b"RIFF" {
        return Err(bad(0, "missing \"RIFF\" chunk id"));
    }
    if &tag(bytes, 8)? != b"WAVE" {
        return Err(bad(8, "missing \"WAVE\" form type"));
    }
    let mut fmt: Option<Fmt> = None;
    let mut data: Option<(usize, usize)> = None;
    let mut offset = 12;
    while offset + 8 <= bytes.len() {
        let id = tag(bytes, offset)?;
        let size = read_u32(bytes, offset + 4)? as usize;
        let payload = offset + 8;
        if payload + size > bytes.len() {
            return Err(bad(
                offset,
                format!(
                    "chunk \"{}\" claims {size} bytes but file ends early",
                    String::from_utf8_lossy(&id)
                ),
            ));
        }
        match &id {
            b"fmt " => {
                if size < 16 {
                    return Err(bad(payload, "\"fmt \" chunk shorter than 16 bytes"));
                }
                fmt = Some(Fmt {
                    format_tag: read_u16(bytes, payload)?,
                    channels: read_u16(bytes, payload + 2)?,
                    sample_rate: read_u32(bytes, payload + 4)?,
                    block_align: read_u16(bytes, payload + 12)?,
                    bits: read_u16(bytes, payload + 14)?,
                });
            }
            b"data" => {
                data = Some((payload, size));
            }
            _ => {}
        }
        offset = payload + size + (size & 1);
    }
    let fmt = fmt.ok_or_else(|| bad(bytes.len(), "missing \"fmt \" chunk"))?;
    let (data_off, data_len) = data.ok_or_else(|| bad(bytes.len(), "missing \"data\" chunk"))?;

    if fmt.channels == 0 || fmt.channels as usize > MAX_CHANNELS {
        return Err(bad(
            data_off,
            format!("unsupported channel count {}", fmt.channels),
        ));
    }
    let channels = fmt.channels as usize;
    let bytes_per_sample = match (fmt.format_tag, fmt.bits) {
        (1, 16) => 2,
        (3, 32) => 4,
        _ => {
            return Err(bad(
                data_off,
                format!(
                    "unsupported codec: format tag {} with {} bits (want PCM16 or float32)",
                    fmt.format_tag, fmt.bits
                ),
            ))
        }
    };
    let frame_bytes = bytes_per_sample * channels;
    if fmt.block_align as usize != frame_bytes {
        return Err(bad(
            data_off,
            format!(
                "block align {} disagrees with {} channels of {}-byte samples",
                fmt.block_align, channels, bytes_per_sample
            ),
        ));
    }
    if !data_len.is_multiple_of(frame_bytes) {
        return Err(bad(
            data_off,
            format!("data length {data_len} is not a whole number of sample frames"),
        ));
    }
    let frames = data_len / frame_bytes;
    let mut out = vec![Vec::with_capacity(frames); channels];
    let payload = &bytes[data_off..data_off + data_len];
    match bytes_per_sample {
        2 => {
            for (i, raw) in payload.chunks_exact(2).enumerate() {
                let s = i16::from_le_bytes(raw.try_into().unwrap());
                out[i % channels].push(s as f64 / 32768.0);
            }
        }
        _ => {
            for (i, raw) in payload.chunks_exact(4).enumerate() {
                let s = f32::from_le_bytes(raw.try_into().unwrap());
                out[i % channels].push(s as f64);
            }
        }
    }
    MultiChannelAudio::new(out, fmt.sample_rate)
}

/// Writes audio as a WAV file in the given sample format.
pub fn write_wav(audio: &MultiChannelAudio, path: impl AsRef<Path>, format: SampleFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_wav(audio, format);
    let mut file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(&bytes).map_err(|e| io_err(path, e))?;
    Ok(())
}

/// Encodes audio as WAV bytes.
pub fn encode_wav(audio: &MultiChannelAudio, format: SampleFormat) -> Vec<u8> {
    let channels = audio.num_channels() as u16;
    let (format_tag, bytes_per_sample) = match format {
        SampleFormat::Float32 => (3u16, 4usize),
        SampleFormat::Pcm16 => (1u16, 2usize),
    };
    let block_align = channels as usize * bytes_per_sample;
    let data_len = audio.len() * block_align;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&format_tag.to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&audio.sample_rate().to_le_bytes());
    let byte_rate = audio.sample_rate() as usize * block_align;
    out.extend_from_slice(&(byte_rate as u32).to_le_bytes());
    out.extend_from_slice(&(block_align as u16).to_le_bytes());
    out.extend_from_slice(&((bytes_per_sample * 8) as u16).to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for i in 0..audio.len() {
        for ch in 0..audio.num_channels() {
            let s = audio.channel(ch)[i];
            match format {
                SampleFormat::Float32 => out.extend_from_slice(&(s as f32).to_le_bytes()),
                SampleFormat::Pcm16 => {
                    // Truncation toward zero, no dither.
                    let q = (s * 32768.0).trunc().clamp(-32768.0, 32767.0) as i16;
                    out.extend_from_slice(&q.to_le_bytes());
                }
            }
        }
    }
    out
}
