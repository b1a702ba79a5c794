//! Constant-Q transform by direct kernel evaluation.
//!
//! Each bin `k` owns a Hann-windowed complex exponential at
//! `f_min * 2^(k / bins_per_octave)` whose length is `ceil(Q * fs / f_k)`
//! with `Q = 1 / (2^(1/bins_per_octave) - 1)`. Frame `m` is centred on sample
//! `m * hop`; samples outside the signal are zero. The kernel is normalised
//! by its window sum, so a unit-amplitude sinusoid at a bin centre reads 0.5.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Geometry, Spectrogram, Waveform};
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqtParams {
    pub f_min_hz: f64,
    pub bins_per_octave: u32,
    pub n_bins: u32,
    pub hop_samples: u32,
    pub sample_rate_hz: u32,
}

impl Default for CqtParams {
    /// 5512 Hz, hop 64, 117 bins: a 10 s clip maps to 862 x 117.
    fn default() -> Self {
        Self {
            f_min_hz: 30.0,
            bins_per_octave: 18,
            n_bins: 117,
            hop_samples: 64,
            sample_rate_hz: 5512,
        }
    }
}

impl CqtParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_min_hz.is_finite() && self.f_min_hz > 0.0) {
            return Err(Error::invalid("f_min must be positive"));
        }
        if self.bins_per_octave == 0 || self.n_bins == 0 || self.hop_samples == 0 {
            return Err(Error::invalid(
                "bins_per_octave, n_bins and hop must be positive",
            ));
        }
        if self.sample_rate_hz == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        let top = self.frequency_unchecked(self.n_bins as usize - 1);
        let nyquist = self.sample_rate_hz as f64 / 2.0;
        if top >= nyquist {
            return Err(Error::invalid(format!(
                "top bin {top:.1} Hz is not below Nyquist {nyquist:.1} Hz"
            )));
        }
        Ok(())
    }

    /// Same frequency axis at another sample rate, hop scaled to keep the frame rate.
    pub fn at_rate(&self, sample_rate_hz: u32) -> CqtParams {
        let hop = (self.hop_samples as f64 * sample_rate_hz as f64 / self.sample_rate_hz as f64)
            .round()
            .max(1.0) as u32;
        CqtParams {
            sample_rate_hz,
            hop_samples: hop,
            ..self.clone()
        }
    }

    pub fn q_factor(&self) -> f64 {
        1.0 / (2f64.powf(1.0 / self.bins_per_octave as f64) - 1.0)
    }

    fn frequency_unchecked(&self, k: usize) -> f64 {
        self.f_min_hz * 2f64.powf(k as f64 / self.bins_per_octave as f64)
    }

    /// Centre frequency of bin `k`.
    pub fn center_frequency(&self, k: usize) -> Result<f64> {
        if k >= self.n_bins as usize {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.n_bins as usize,
            });
        }
        Ok(self.frequency_unchecked(k))
    }

    /// Window length in samples for bin `k`.
    pub fn window_len(&self, k: usize) -> usize {
        (self.q_factor() * self.sample_rate_hz as f64 / self.frequency_unchecked(k)).ceil() as usize
    }

    /// Number of frames for a signal of `len` samples.
    pub fn frame_count(&self, len: usize) -> usize {
        len.div_ceil(self.hop_samples as usize)
    }
}

struct BinKernel {
    /// Offset of the first tap relative to the frame centre.
    offset: isize,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// Precomputed filterbank; reuse it across signals with the same parameters.
pub struct CqtKernel {
    params: CqtParams,
    bins: Vec<BinKernel>,
    max_len: usize,
}

impl CqtKernel {
    pub fn new(params: &CqtParams) -> Result<Self> {
        params.validate()?;
        let fs = params.sample_rate_hz as f64;
        let bins: Vec<BinKernel> = (0..params.n_bins as usize)
            .map(|k| {
                let n = params.window_len(k);
                let f = params.frequency_unchecked(k);
                let half = (n / 2) as isize;
                let win: Vec<f64> = (0..n)
                    .map(|i| 0.5 - 0.5 * (2.0 * PI * (i as f64 + 0.5) / n as f64).cos())
                    .collect();
                let norm: f64 = win.iter().sum();
                let mut re = Vec::with_capacity(n);
                let mut im = Vec::with_capacity(n);
                for (i, w) in win.iter().enumerate() {
                    let phase = -2.0 * PI * f * (i as isize - half) as f64 / fs;
                    re.push(w * phase.cos() / norm);
                    im.push(w * phase.sin() / norm);
                }
                BinKernel {
                    offset: -half,
                    re,
                    im,
                }
            })
            .collect();
        let max_len = bins.iter().map(|b| b.re.len()).max().unwrap_or(0);
        Ok(Self {
            params: params.clone(),
            bins,
            max_len,
        })
    }

    pub fn params(&self) -> &CqtParams {
        &self.params
    }

    /// Longest (lowest-bin) analysis window.
    pub fn max_window_len(&self) -> usize {
        self.max_len
    }

    pub fn transform(&self, w: &Waveform, exec: Execution) -> Result<Spectrogram> {
        let p = &self.params;
        if w.sample_rate_hz() != p.sample_rate_hz {
            return Err(Error::invalid(format!(
                "waveform rate {} Hz does not match CQT rate {} Hz",
                w.sample_rate_hz(),
                p.sample_rate_hz
            )));
        }
        if w.len() < self.max_len {
            return Err(Error::invalid(format!(
                "signal of {} samples is shorter than the {}-sample window at f_min",
                w.len(),
                self.max_len
            )));
        }
        let pad = self.max_len;
        let mut padded = vec![0.0f64; w.len() + 2 * pad];
        for (d, s) in padded[pad..].iter_mut().zip(w.samples()) {
            *d = *s as f64;
        }
        let n_bins = p.n_bins as usize;
        let frames = p.frame_count(w.len());
        let hop = p.hop_samples as usize;
        let mut values = vec![0.0f32; frames * n_bins];
        exec.for_each_chunk(&mut values, n_bins, |m, row| {
            let centre = (m * hop + pad) as isize;
            for (out, b) in row.iter_mut().zip(&self.bins) {
                let start = (centre + b.offset) as usize;
                let seg = &padded[start..start + b.re.len()];
                let (re, im) = dot2(seg, &b.re, &b.im);
                *out = (re * re + im * im).sqrt() as f32;
            }
        });
        Spectrogram::new(values, frames, n_bins, Geometry::Cqt(p.clone()))
    }
}

/// `(x . a, x . b)` with independent partial sums so the loop vectorises.
#[inline]
fn dot2(x: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut sa = [0.0f64; 4];
    let mut sb = [0.0f64; 4];
    let xc = x.chunks_exact(4);
    let ac = a.chunks_exact(4);
    let bc = b.chunks_exact(4);
    let (xr, ar, br) = (xc.remainder(), ac.remainder(), bc.remainder());
    for ((x4, a4), b4) in xc.zip(ac).zip(bc) {
        for j in 0..4 {
            sa[j] += x4[j] * a4[j];
            sb[j] += x4[j] * b4[j];
        }
    }
    let mut ra = (sa[0] + sa[1]) + (sa[2] + sa[3]);
    let mut rb = (sb[0] + sb[1]) + (sb[2] + sb[3]);
    for ((x, a), b) in xr.iter().zip(ar).zip(br) {
        ra += x * a;
        rb += x * b;
    }
    (ra, rb)
}

/// Magnitude CQT with the default execution mode.
pub fn compute_cqt(w: &Waveform, params: &CqtParams) -> Result<Spectrogram> {
    compute_cqt_with(w, params, Execution::default())
}

pub fn compute_cqt_with(w: &Waveform, params: &CqtParams, exec: Execution) -> Result<Spectrogram> {
    CqtKernel::new(params)?.transform(w, exec)
}
