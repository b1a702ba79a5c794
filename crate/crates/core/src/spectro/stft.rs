use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{Geometry, Spectrogram, Waveform};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Hann,
    Rectangular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StftParams {
    pub window_len: u32,
    pub hop_samples: u32,
    pub window_kind: WindowKind,
    pub sample_rate_hz: u32,
}

impl StftParams {
    fn validate(&self) -> Result<()> {
        if self.window_len == 0 || self.hop_samples == 0 || self.sample_rate_hz == 0 {
            return Err(Error::invalid("STFT parameters must be positive"));
        }
        if self.hop_samples > self.window_len {
            return Err(Error::invalid("hop must not exceed the window length"));
        }
        Ok(())
    }

    fn window(&self) -> Vec<f64> {
        let n = self.window_len as usize;
        match self.window_kind {
            WindowKind::Rectangular => vec![1.0; n],
            WindowKind::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
        }
    }
}

/// One-sided STFT magnitude; frame `m` covers samples `[m*hop, m*hop + window_len)`.
pub fn compute_stft_magnitude(w: &Waveform, params: &StftParams) -> Result<Spectrogram> {
    params.validate()?;
    if w.sample_rate_hz() != params.sample_rate_hz {
        return Err(Error::invalid("waveform rate does not match STFT rate"));
    }
    let n = params.window_len as usize;
    let hop = params.hop_samples as usize;
    if w.len() < n {
        return Err(Error::invalid(format!(
            "signal of {} samples is shorter than the {n}-sample window",
            w.len()
        )));
    }
    let frames = 1 + (w.len() - n) / hop;
    let bins = n / 2 + 1;
    let window = params.window();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    let mut values = Vec::with_capacity(frames * bins);
    for m in 0..frames {
        let seg = &w.samples()[m * hop..m * hop + n];
        for ((b, &s), &wv) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex::new(s as f64 * wv, 0.0);
        }
        fft.process(&mut buf);
        values.extend(buf[..bins].iter().map(|c| c.norm() as f32));
    }
    Spectrogram::new(values, frames, bins, Geometry::Stft(params.clone()))
}
