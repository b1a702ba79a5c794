//! Waveforms, resampling and magnitude time-frequency transforms.

mod cqt;
mod resample;
pub mod spg;
mod stft;
pub mod wav;

pub use cqt::{compute_cqt, compute_cqt_with, CqtKernel, CqtParams};
pub use resample::{resample, Resampler};
pub use stft::{compute_stft_magnitude, StftParams, WindowKind};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mono PCM signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f32>,
    sample_rate_hz: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f32>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at {i}")));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn silence(len: usize, sample_rate_hz: u32) -> Self {
        Self::new(vec![0.0; len], sample_rate_hz).expect("positive rate")
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Samples `[start, start + len)`, clamped to the signal.
    pub fn slice(&self, start: usize, len: usize) -> Waveform {
        let s = start.min(self.samples.len());
        let e = (start + len).min(self.samples.len());
        Waveform {
            samples: self.samples[s..e].to_vec(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    /// Replace the samples, keeping the rate. Non-finite values are rejected.
    pub fn with_samples(&self, samples: Vec<f32>) -> Result<Waveform> {
        Waveform::new(samples, self.sample_rate_hz)
    }

    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }

    pub fn peak(&self) -> f32 {
        self.samples.iter().fold(0.0f32, |m, s| m.max(s.abs()))
    }
}

pub(crate) fn rms(x: &[f32]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let e: f64 = x.iter().map(|&s| (s as f64) * (s as f64)).sum();
    (e / x.len() as f64).sqrt()
}

/// Axis description carried alongside spectrogram values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    Cqt(CqtParams),
    Stft(StftParams),
    /// Geometry recovered from an SPG1 file, which only stores rate and hop.
    Raw { sample_rate_hz: f64, hop_samples: u32 },
}

impl Geometry {
    pub fn sample_rate_hz(&self) -> f64 {
        match self {
            Geometry::Cqt(p) => p.sample_rate_hz as f64,
            Geometry::Stft(p) => p.sample_rate_hz as f64,
            Geometry::Raw { sample_rate_hz, .. } => *sample_rate_hz,
        }
    }

    pub fn hop_samples(&self) -> u32 {
        match self {
            Geometry::Cqt(p) => p.hop_samples,
            Geometry::Stft(p) => p.hop_samples,
            Geometry::Raw { hop_samples, .. } => *hop_samples,
        }
    }
}

/// Dense non-negative magnitude matrix, `frames x bins`, stored time-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    values: Vec<f32>,
    frames: usize,
    bins: usize,
    geometry: Geometry,
    source_id: String,
}

impl Spectrogram {
    pub fn new(values: Vec<f32>, frames: usize, bins: usize, geometry: Geometry) -> Result<Self> {
        if frames == 0 || bins == 0 {
            return Err(Error::invalid("spectrogram dimensions must be positive"));
        }
        if values.len() != frames * bins {
            return Err(Error::invalid(format!(
                "expected {} values for {frames}x{bins}, got {}",
                frames * bins,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(format!(
                "value at ({}, {}) is negative or non-finite",
                i / bins,
                i % bins
            )));
        }
        Ok(Self {
            values,
            frames,
            bins,
            geometry,
            source_id: String::new(),
        })
    }

    /// Build from nested rows, `rows[t][f]`. Handy for fixtures.
    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let frames = rows.len();
        let bins = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != bins) {
            return Err(Error::invalid("ragged rows"));
        }
        let values = rows.iter().flatten().copied().collect();
        Self::new(values, frames, bins, Geometry::Raw { sample_rate_hz: 1.0, hop_samples: 1 })
    }

    pub fn zeros(frames: usize, bins: usize, geometry: Geometry) -> Result<Self> {
        Self::new(vec![0.0; frames * bins], frames, bins, geometry)
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = id.into();
        self
    }

    /// Same geometry and source id, new values.
    pub fn with_values(&self, values: Vec<f32>) -> Result<Self> {
        let mut s = Spectrogram::new(values, self.frames, self.bins, self.geometry.clone())?;
        s.source_id.clone_from(&self.source_id);
        Ok(s)
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.frames, self.bins)
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    #[inline]
    pub fn get(&self, t: usize, f: usize) -> f32 {
        self.values[t * self.bins + f]
    }

    pub fn frame(&self, t: usize) -> &[f32] {
        &self.values[t * self.bins..(t + 1) * self.bins]
    }

    pub fn max_value(&self) -> f32 {
        self.values.iter().fold(0.0f32, |m, &v| m.max(v))
    }

    pub fn count_nonzero(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    pub(crate) fn check_same_shape(&self, other: &Spectrogram) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::invalid(format!(
                "shape mismatch: {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }
}
