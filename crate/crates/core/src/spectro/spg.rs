//! `SPG1` spectrogram files.
//!
//! Layout, all little-endian:
//!
//! | bytes | field |
//! |-------|-------|
//! | 4     | magic `SPG1` |
//! | 4     | `u32` time frames |
//! | 4     | `u32` frequency bins |
//! | 8     | `f64` sample rate |
//! | 4     | `u32` hop |
//! | 4·T·F | `f32` values, time-major |

use std::fs;
use std::path::Path;

use super::{Geometry, Spectrogram};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SPG1";
const HEADER_LEN: usize = 24;

pub fn encode(s: &Spectrogram) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * s.values().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(s.frames() as u32).to_le_bytes());
    out.extend_from_slice(&(s.bins() as u32).to_le_bytes());
    out.extend_from_slice(&s.geometry().sample_rate_hz().to_le_bytes());
    out.extend_from_slice(&s.geometry().hop_samples().to_le_bytes());
    for v in s.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Spectrogram> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing SPG1 header".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let frames = u32_at(4) as usize;
    let bins = u32_at(8) as usize;
    let sample_rate_hz = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let hop_samples = u32_at(20);
    let expected = frames
        .checked_mul(bins)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::Format("SPG1 dimensions overflow".into()))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != expected {
        return Err(Error::Format(format!(
            "SPG1 body holds {} bytes, header implies {expected}",
            body.len()
        )));
    }
    let values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Spectrogram::new(
        values,
        frames,
        bins,
        Geometry::Raw {
            sample_rate_hz,
            hop_samples,
        },
    )
    .map_err(|e| Error::Format(e.to_string()))
}

pub fn write(path: impl AsRef<Path>, s: &Spectrogram) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(s)).map_err(|e| Error::io(path, e))
}

pub fn read(path: impl AsRef<Path>) -> Result<Spectrogram> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
