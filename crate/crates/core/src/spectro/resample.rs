//! Band-limited resampling with a Kaiser-windowed sinc.
//!
//! The kernel spans 64 periods of the lower of the two rates (32 each side)
//! with cutoff at 0.9 of the lower Nyquist and Kaiser beta 8.6. Each output
//! sample is divided by the sum of the taps that fell inside the signal, so
//! constant signals are reproduced exactly, edges included.
//!
//! When the reduced rate ratio `L/M` has `L <= 4096` the taps are tabulated
//! per phase (polyphase); otherwise they are evaluated from a dense table.

use std::f64::consts::PI;

use super::Waveform;
use crate::error::{Error, Result};

const HALF_TAPS_AT_LOWER_RATE: f64 = 32.0;
const CUTOFF_FRACTION: f64 = 0.9;
const KAISER_BETA: f64 = 8.6;
const MAX_PHASES: u64 = 4096;

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Reusable resampler between two fixed rates.
pub struct Resampler {
    from_hz: u32,
    to_hz: u32,
    /// Kernel half-width in input samples.
    half_width: f64,
    /// Normalised cutoff in cycles per input sample.
    cutoff: f64,
    i0_beta: f64,
    up: u64,
    down: u64,
    /// taps per phase, `2 * reach` each, first tap at `base - reach + 1`.
    reach: usize,
    phases: Option<Vec<Vec<f64>>>,
}

impl Resampler {
    pub fn new(from_hz: u32, to_hz: u32) -> Result<Self> {
        if from_hz == 0 || to_hz == 0 {
            return Err(Error::invalid("sample rates must be positive"));
        }
        let lower = from_hz.min(to_hz) as f64;
        let half_width = HALF_TAPS_AT_LOWER_RATE * from_hz as f64 / lower;
        let cutoff = CUTOFF_FRACTION * (lower / 2.0) / from_hz as f64;
        let g = gcd(from_hz as u64, to_hz as u64);
        let up = to_hz as u64 / g;
        let down = from_hz as u64 / g;
        let reach = half_width.ceil() as usize + 1;
        let mut r = Self {
            from_hz,
            to_hz,
            half_width,
            cutoff,
            i0_beta: bessel_i0(KAISER_BETA),
            up,
            down,
            reach,
            phases: None,
        };
        if up <= MAX_PHASES && from_hz != to_hz {
            let phases = (0..up)
                .map(|p| {
                    let frac = p as f64 / up as f64;
                    (0..2 * reach)
                        .map(|j| r.tap(j as f64 - (reach as f64 - 1.0) - frac))
                        .collect()
                })
                .collect();
            r.phases = Some(phases);
        }
        Ok(r)
    }

    /// Kernel value at offset `d` input samples from the output position.
    fn tap(&self, d: f64) -> f64 {
        let x = d / self.half_width;
        if x.abs() >= 1.0 {
            return 0.0;
        }
        let arg = 2.0 * self.cutoff * d;
        let sinc = if arg.abs() < 1e-12 {
            1.0
        } else {
            (PI * arg).sin() / (PI * arg)
        };
        let win = bessel_i0(KAISER_BETA * (1.0 - x * x).sqrt()) / self.i0_beta;
        sinc * win
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        ((input_len as u128 * self.to_hz as u128 + self.from_hz as u128 / 2) / self.from_hz as u128) as usize
    }

    pub fn process(&self, w: &Waveform) -> Result<Waveform> {
        if w.sample_rate_hz() != self.from_hz {
            return Err(Error::invalid(format!(
                "resampler expects {} Hz input, got {} Hz",
                self.from_hz,
                w.sample_rate_hz()
            )));
        }
        if self.from_hz == self.to_hz {
            return Ok(w.clone());
        }
        let x: Vec<f64> = w.samples().iter().map(|&s| s as f64).collect();
        let out_len = self.output_len(x.len());
        let reach = self.reach as i64;
        let n = x.len() as i64;
        let mut out = Vec::with_capacity(out_len);
        for j in 0..out_len as u64 {
            let num = j * self.down;
            let base = (num / self.up) as i64;
            let phase = (num % self.up) as usize;
            let first = base - reach + 1;
            let (mut acc, mut wsum) = (0.0f64, 0.0f64);
            match &self.phases {
                Some(ph) => {
                    let taps = &ph[phase];
                    if first >= 0 && first + 2 * reach <= n {
                        let seg = &x[first as usize..(first + 2 * reach) as usize];
                        for (s, t) in seg.iter().zip(taps) {
                            acc += s * t;
                            wsum += t;
                        }
                    } else {
                        for (k, t) in taps.iter().enumerate() {
                            let i = first + k as i64;
                            if (0..n).contains(&i) {
                                acc += x[i as usize] * t;
                                wsum += t;
                            }
                        }
                    }
                }
                None => {
                    let pos = base as f64 + phase as f64 / self.up as f64;
                    for i in first.max(0)..(first + 2 * reach).min(n) {
                        let t = self.tap(i as f64 - pos);
                        acc += x[i as usize] * t;
                        wsum += t;
                    }
                }
            }
            out.push(if wsum.abs() > 1e-12 { (acc / wsum) as f32 } else { 0.0 });
        }
        Waveform::new(out, self.to_hz)
    }
}

pub fn resample(w: &Waveform, target_rate_hz: u32) -> Result<Waveform> {
    if target_rate_hz == 0 {
        return Err(Error::invalid("target rate must be positive"));
    }
    if target_rate_hz == w.sample_rate_hz() {
        return Ok(w.clone());
    }
    Resampler::new(w.sample_rate_hz(), target_rate_hz)?.process(w)
}
