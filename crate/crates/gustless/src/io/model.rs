//! Versioned binary model container.
//!
//! Little-endian throughout; all floats are 64-bit. The loader rejects any
//! layout that disagrees with the framing, context and attentive region it
//! carries.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::dsp::FramingConfig;
use crate::error::{Error, Result};
use crate::nn::{NnModel, OutputUnits};
use crate::suppressor::{AttentiveRegion, ContextSpec, SuppressorModel};

const MAGIC: &[u8; 4] = b"GLSM";
const VERSION: u32 = 1;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::ModelFormat(format!(
                "file ends at byte {} while reading {n} bytes at offset {}",
                self.bytes.len(),
                self.pos
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64_vec(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

/// Serializes a model to bytes.
pub fn encode_model(model: &SuppressorModel) -> Result<Vec<u8>> {
    model.validate()?;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let f = &model.framing;
    for v in [f.sample_rate, f.frame_ms, f.hop_ms, f.chunk_ms, f.fft_size as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&model.region.f_a_hz.to_le_bytes());
    out.extend_from_slice(&(model.context.r as u32).to_le_bytes());
    out.extend_from_slice(&(model.context.channels as u32).to_le_bytes());
    out.push(match model.nn.output_units {
        OutputUnits::LogPower => 0,
        OutputUnits::LogMagnitude => 1,
    });
    let nn = &model.nn;
    for v in [
        nn.input_dim() as u32,
        nn.hidden_dim() as u32,
        nn.output_dim() as u32,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let mut write_all = |vals: &mut dyn Iterator<Item = f64>| {
        for v in vals {
            out.extend_from_slice(&v.to_le_bytes());
        }
    };
    write_all(&mut nn.norm_mean.iter().copied());
    write_all(&mut nn.norm_std.iter().copied());
    write_all(&mut nn.w1.iter().copied());
    write_all(&mut nn.b1.iter().copied());
    write_all(&mut nn.w2.iter().copied());
    write_all(&mut nn.b2.iter().copied());
    Ok(out)
}

/// Parses a model from bytes, validating the whole layout.
pub fn decode_model(bytes: &[u8]) -> Result<SuppressorModel> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::ModelFormat("bad magic, not a model file".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported version {version} (want {VERSION})"
        )));
    }
    let sample_rate = r.u32()?;
    let frame_ms = r.u32()?;
    let hop_ms = r.u32()?;
    let chunk_ms = r.u32()?;
    let fft_size = r.u32()? as usize;
    let framing = FramingConfig::with_params(sample_rate, frame_ms, hop_ms, chunk_ms, fft_size)?;
    let f_a_hz = r.f64()?;
    let ctx_r = r.u32()? as usize;
    let channels = r.u32()? as usize;
    let output_units = match r.u8()? {
        0 => OutputUnits::LogPower,
        1 => OutputUnits::LogMagnitude,
        other => {
            return Err(Error::ModelFormat(format!(
                "unknown output units tag {other}"
            )))
        }
    };
    let input = r.u32()? as usize;
    let hidden = r.u32()? as usize;
    let output = r.u32()? as usize;
    let norm_mean = Array1::from_vec(r.f64_vec(input)?);
    let norm_std = Array1::from_vec(r.f64_vec(input)?);
    let w1 = Array2::from_shape_vec((hidden, input), r.f64_vec(hidden * input)?)
        .expect("shape matches read count");
    let b1 = Array1::from_vec(r.f64_vec(hidden)?);
    let w2 = Array2::from_shape_vec((output, hidden), r.f64_vec(output * hidden)?)
        .expect("shape matches read count");
    let b2 = Array1::from_vec(r.f64_vec(output)?);
    if r.pos != bytes.len() {
        return Err(Error::ModelFormat(format!(
            "{} trailing bytes after model payload",
            bytes.len() - r.pos
        )));
    }
    let model = SuppressorModel {
        nn: NnModel {
            w1,
            b1,
            w2,
            b2,
            norm_mean,
            norm_std,
            output_units,
        },
        framing,
        region: AttentiveRegion { f_a_hz },
        context: ContextSpec {
            r: ctx_r,
            channels,
        },
    };
    model
        .validate()
        .map_err(|e| Error::ModelFormat(format!("layout rejected: {e}")))?;
    Ok(model)
}

pub fn save_model(model: &SuppressorModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_model(model)?;
    let mut file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(&bytes).map_err(|e| io_err(path, e))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SuppressorModel> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .map_err(|e| io_err(path, e))?
        .read_to_end(&mut bytes)
        .map_err(|e| io_err(path, e))?;
    decode_model(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_model() -> SuppressorModel {
        let framing = FramingConfig::new(16000).unwrap();
        let region = AttentiveRegion::default();
        let context = ContextSpec::default();
        let attentive = region.attentive_bins(&framing).unwrap();
        let input = context.input_dim(framing.bins());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        SuppressorModel {
            nn: NnModel {
                w1: Array2::from_shape_fn((9, input), |_| rng.random::<f64>() - 0.5),
                b1: Array1::from_shape_fn(9, |i| i as f64),
                w2: Array2::from_shape_fn((attentive, 9), |_| rng.random::<f64>() - 0.5),
                b2: Array1::from_shape_fn(attentive, |i| -(i as f64)),
                norm_mean: Array1::from_elem(input, -8.5),
                norm_std: Array1::from_elem(input, 3.25),
                output_units: OutputUnits::LogPower,
            },
            framing,
            region,
            context,
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let model = sample_model();
        let bytes = encode_model(&model).unwrap();
        let back = decode_model(&bytes).unwrap();
        assert_eq!(model, back);
        assert_eq!(bytes, encode_model(&back).unwrap());
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        let mut bytes = encode_model(&sample_model()).unwrap();
        bytes[0] = b'X';
        assert!(matches!(decode_model(&bytes), Err(Error::ModelFormat(_))));
        let mut bytes = encode_model(&sample_model()).unwrap();
        bytes[4] = 9;
        assert!(matches!(decode_model(&bytes), Err(Error::ModelFormat(_))));
    }

    #[test]
    fn rejects_truncation_and_trailing_garbage() {
        let bytes = encode_model(&sample_model()).unwrap();
        assert!(decode_model(&bytes[..bytes.len() - 3]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(decode_model(&long).is_err());
    }

    #[test]
    fn rejects_layout_mismatch() {
        // Claim r = 2: the input dim no longer matches the context layout.
        let mut bytes = encode_model(&sample_model()).unwrap();
        let r_offset = 4 + 4 + 5 * 4 + 8;
        bytes[r_offset..r_offset + 4].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(decode_model(&bytes), Err(Error::ModelFormat(_))));
    }
}
