use std::f64::consts::PI;

use rand::seq::index;
use rand::Rng;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectro::Waveform;

const DIRECT_CONVOLUTION_MAX_TAPS: usize = 128;

fn convolve_direct(x: &[f32], h: &[f32]) -> Vec<f64> {
    let mut y = vec![0.0f64; x.len()];
    for (n, out) in y.iter_mut().enumerate() {
        let mut acc = 0.0f64;
        for (k, &hk) in h.iter().enumerate().take(n + 1) {
            acc += hk as f64 * x[n - k] as f64;
        }
        *out = acc;
    }
    y
}

fn convolve_fft(x: &[f32], h: &[f32]) -> Vec<f64> {
    let n = (x.len() + h.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let load = |s: &[f32]| {
        let mut b = vec![Complex::new(0.0, 0.0); n];
        for (d, &v) in b.iter_mut().zip(s) {
            d.re = v as f64;
        }
        b
    };
    let mut a = load(x);
    let mut b = load(h);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (u, v) in a.iter_mut().zip(&b) {
        *u *= v;
    }
    inv.process(&mut a);
    a[..x.len()].iter().map(|c| c.re / n as f64).collect()
}

/// Linear convolution truncated to `len(x)`, rescaled to the input peak.
pub fn convolve_ir(x: &Waveform, h: &Waveform) -> Result<Waveform> {
    if x.sample_rate_hz() != h.sample_rate_hz() {
        return Err(Error::invalid(format!(
            "impulse response at {} Hz, signal at {} Hz",
            h.sample_rate_hz(),
            x.sample_rate_hz()
        )));
    }
    if h.is_empty() {
        return Err(Error::invalid("empty impulse response"));
    }
    let y = if h.len() <= DIRECT_CONVOLUTION_MAX_TAPS {
        convolve_direct(x.samples(), h.samples())
    } else {
        convolve_fft(x.samples(), h.samples())
    };
    let peak_in = x.peak() as f64;
    let peak_out = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if peak_out > 0.0 { peak_in / peak_out } else { 0.0 };
    x.with_samples(y.iter().map(|v| (v * scale) as f32).collect())
}

/// Gain applied to noise of RMS `noise_rms` so that the mix has the target SNR.
pub fn noise_gain_for_snr(signal_rms: f64, noise_rms: f64, snr_db: f64) -> f64 {
    signal_rms / (noise_rms * 10f64.powf(snr_db / 20.0))
}

/// `10 log10(|x|^2 / |y - x|^2)`
pub fn measured_snr_db(clean: &Waveform, mixed: &Waveform) -> f64 {
    let ps: f64 = clean.samples().iter().map(|&v| (v as f64).powi(2)).sum();
    let pn: f64 = clean
        .samples()
        .iter()
        .zip(mixed.samples())
        .map(|(&a, &b)| (b as f64 - a as f64).powi(2))
        .sum();
    10.0 * (ps / pn).log10()
}

/// Mix in noise at `snr_db`. A random window of `noise` is used; shorter
/// noise is looped. Returns the mix and the noise offset used.
pub fn add_noise_at_snr<R: Rng + ?Sized>(
    x: &Waveform,
    noise: &Waveform,
    snr_db: f64,
    rng: &mut R,
) -> Result<(Waveform, usize)> {
    if !snr_db.is_finite() {
        return Err(Error::invalid("target SNR must be finite"));
    }
    if x.sample_rate_hz() != noise.sample_rate_hz() {
        return Err(Error::invalid("noise and signal sample rates differ"));
    }
    let sig_rms = x.rms();
    if sig_rms == 0.0 {
        return Err(Error::invalid("SNR is undefined for a silent signal"));
    }
    if noise.is_empty() {
        return Err(Error::invalid("empty noise"));
    }
    let offset = if noise.len() > x.len() {
        rng.random_range(0..=noise.len() - x.len())
    } else {
        0
    };
    let ns = noise.samples();
    let seg: Vec<f32> = (0..x.len()).map(|i| ns[(offset + i) % ns.len()]).collect();
    let n_rms = crate::spectro::rms(&seg);
    if n_rms == 0.0 {
        return Err(Error::invalid("selected noise window is silent"));
    }
    let g = noise_gain_for_snr(sig_rms, n_rms, snr_db);
    let y = x
        .samples()
        .iter()
        .zip(&seg)
        .map(|(&s, &n)| (s as f64 + g * n as f64) as f32)
        .collect();
    Ok((x.with_samples(y)?, offset))
}

/// Scale by `10^(gain_db / 20)` then hard-clip to [-1, 1].
pub fn apply_gain(x: &Waveform, gain_db: f64) -> Result<Waveform> {
    if !gain_db.is_finite() {
        return Err(Error::invalid("gain must be finite"));
    }
    let g = 10f64.powf(gain_db / 20.0);
    x.with_samples(
        x.samples()
            .iter()
            .map(|&s| ((s as f64 * g) as f32).clamp(-1.0, 1.0))
            .collect(),
    )
}

/// Zero exactly `floor(fraction * len)` distinct, uniformly chosen samples.
pub fn sample_dropout<R: Rng + ?Sized>(x: &Waveform, fraction: f64, rng: &mut R) -> Result<Waveform> {
    if !(0.0..=0.01).contains(&fraction) {
        return Err(Error::Range(format!("dropout fraction {fraction} outside [0, 0.01]")));
    }
    let k = (fraction * x.len() as f64).floor() as usize;
    let mut s = x.samples().to_vec();
    for i in index::sample(rng, s.len(), k) {
        s[i] = 0.0;
    }
    x.with_samples(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    Lowpass,
    Highpass,
}

/// Single-pole filter from the bilinear transform with frequency prewarping,
/// `K = tan(pi fc / fs)`:
///
/// * lowpass  `b0 = b1 = K / (1 + K)`
/// * highpass `b0 = 1 / (1 + K)`, `b1 = -b0`
/// * both     `a1 = (K - 1) / (K + 1)`
///
/// with `y[n] = b0 x[n] + b1 x[n-1] - a1 y[n-1]`; the gain at `fc` is -3.01 dB.
pub fn first_order_filter(x: &Waveform, kind: FilterKind, cutoff_hz: f64) -> Result<Waveform> {
    let fs = x.sample_rate_hz() as f64;
    if !(cutoff_hz > 0.0 && cutoff_hz < fs / 2.0) {
        return Err(Error::Range(format!(
            "cutoff {cutoff_hz} Hz outside (0, {}) Hz",
            fs / 2.0
        )));
    }
    let k = (PI * cutoff_hz / fs).tan();
    let a1 = (k - 1.0) / (k + 1.0);
    let (b0, b1) = match kind {
        FilterKind::Lowpass => (k / (1.0 + k), k / (1.0 + k)),
        FilterKind::Highpass => (1.0 / (1.0 + k), -1.0 / (1.0 + k)),
    };
    let (mut x1, mut y1) = (0.0f64, 0.0f64);
    let out = x
        .samples()
        .iter()
        .map(|&s| {
            let s = s as f64;
            let y = b0 * s + b1 * x1 - a1 * y1;
            x1 = s;
            y1 = y;
            y as f32
        })
        .collect();
    x.with_samples(out)
}
