//! Brute-force reference implementations shared by the integration tests.
//! Each one follows the textbook definition directly and ignores speed.

#![allow(dead_code)]

use std::collections::BTreeSet;

use peakfp::spectro::{Geometry, Spectrogram};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn raw_geometry() -> Geometry {
    Geometry::Raw { sample_rate_hz: 5512.0, hop_samples: 64 }
}

/// Values drawn from `rng.random::<f32>()` (multiples of 2^-24) raised to
/// the `power`; `zero_frac` of the cells are zeroed.
pub fn random_spectrogram(frames: usize, bins: usize, seed: u64, zero_frac: f64) -> Spectrogram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..frames * bins)
        .map(|_| {
            let x: f32 = rng.random();
            if rng.random_bool(zero_frac) {
                0.0
            } else {
                x
            }
        })
        .collect();
    Spectrogram::new(v, frames, bins, raw_geometry()).unwrap()
}

/// Spectrogram with few distinct levels so that plateaus are common.
pub fn quantized_spectrogram(frames: usize, bins: usize, seed: u64, levels: u32) -> Spectrogram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..frames * bins).map(|_| rng.random_range(0..levels) as f32 / levels as f32).collect();
    Spectrogram::new(v, frames, bins, raw_geometry()).unwrap()
}

pub fn stage1_oracle(s: &Spectrogram, wt: usize, wf: usize) -> Vec<f32> {
    let (frames, bins) = s.shape();
    let (ht, hf) = (wt as i64 / 2, wf as i64 / 2);
    let mut out = Vec::new();
    for t in 0..frames as i64 {
        for f in 0..bins as i64 {
            let mut sum = 0.0f64;
            let mut n = 0usize;
            for dt in -ht..=ht {
                for df in -hf..=hf {
                    let (a, b) = (t + dt, f + df);
                    if a >= 0 && b >= 0 && a < frames as i64 && b < bins as i64 {
                        sum += s.get(a as usize, b as usize) as f64;
                        n += 1;
                    }
                }
            }
            let x = s.get(t as usize, f as usize) as f64;
            out.push((x - sum / n as f64).max(0.0) as f32);
        }
    }
    out
}

pub fn stage2_oracle(s: &Spectrogram, slab: usize, bpo: usize, c: f64) -> Vec<f32> {
    let (frames, bins) = s.shape();
    let mut out = vec![0.0f32; frames * bins];
    for t in 0..frames {
        for f in 0..bins {
            let (ts, fs) = (t / slab * slab, f / bpo * bpo);
            let mut vals = Vec::new();
            for a in ts..(ts + slab).min(frames) {
                for b in fs..(fs + bpo).min(bins) {
                    vals.push(s.get(a, b) as f64);
                }
            }
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
            let x = s.get(t, f);
            if c == f64::NEG_INFINITY || x as f64 >= mean + c * var.sqrt() {
                out[t * bins + f] = x;
            }
        }
    }
    out
}

/// Neighbourhood maxima: `>=` every neighbour, `> eps`, and no equal
/// neighbour that comes earlier in `(t, f)` order.
pub fn stage3_oracle(s: &Spectrogram, tau: usize, rho: usize, eps: f32) -> BTreeSet<(u32, u32)> {
    let (frames, bins) = s.shape();
    let mut out = BTreeSet::new();
    for t in 0..frames {
        for f in 0..bins {
            let v = s.get(t, f);
            if v <= eps {
                continue;
            }
            let mut ok = true;
            for a in t.saturating_sub(tau)..=(t + tau).min(frames - 1) {
                for b in f.saturating_sub(rho)..=(f + rho).min(bins - 1) {
                    let u = s.get(a, b);
                    if u > v || (u == v && (a, b) < (t, f)) {
                        ok = false;
                    }
                }
            }
            if ok {
                out.insert((t as u32, f as u32));
            }
        }
    }
    out
}

/// Top `cap` of each (slab, band) cell by magnitude, ties by position.
pub fn stage4_oracle(
    peaks: &[(u32, u32, f32)],
    slab: usize,
    bpo: usize,
    cap: usize,
) -> BTreeSet<(u32, u32)> {
    let mut out = BTreeSet::new();
    for &(t, f, m) in peaks {
        let cell = (t as usize / slab, f as usize / bpo);
        let better = peaks
            .iter()
            .filter(|&&(t2, f2, m2)| {
                (t2 as usize / slab, f2 as usize / bpo) == cell && (m2 > m || (m2 == m && (t2, f2) < (t, f)))
            })
            .count();
        if better < cap {
            out.insert((t, f));
        }
    }
    out
}

/// Exhaustive window scan: returns (tp, fp, tp_ref, fn).
pub fn prf_oracle(
    pred: &BTreeSet<(usize, usize)>,
    reference: &BTreeSet<(usize, usize)>,
    tol: usize,
) -> (usize, usize, usize, usize) {
    let near = |a: &(usize, usize), b: &(usize, usize)| a.0.abs_diff(b.0) <= tol && a.1.abs_diff(b.1) <= tol;
    let tp = pred.iter().filter(|p| reference.iter().any(|r| near(p, r))).count();
    let tp_ref = reference.iter().filter(|r| pred.iter().any(|p| near(p, r))).count();
    (tp, pred.len() - tp, tp_ref, reference.len() - tp_ref)
}

pub fn random_coords(rng: &mut impl Rng, rows: usize, cols: usize, n: usize) -> BTreeSet<(usize, usize)> {
    (0..n).map(|_| (rng.random_range(0..rows), rng.random_range(0..cols))).collect()
}

pub fn convolve_oracle(x: &[f64], h: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|n| (0..h.len()).filter(|&k| k <= n).map(|k| h[k] * x[n - k]).sum())
        .collect()
}

pub fn lp_oracle(a: &[f32], b: &[f32], p: i32) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| ((x as f64 - y as f64).abs()).powi(p)).sum()
}

/// Continuous confusion sums, written out case by case.
pub fn tversky_oracle(pred: &[f32], gt: &[f32], alpha: f64, beta: f64) -> f64 {
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut fn_ = 0.0;
    for i in 0..pred.len() {
        let (p, g) = (pred[i] as f64, gt[i] as f64);
        if p > 0.0 && g > 0.0 {
            tp += p * g;
        } else if p > 0.0 {
            fp += p;
        } else if g > 0.0 {
            fn_ += g;
        }
    }
    if tp + fp + fn_ == 0.0 {
        return 1.0;
    }
    tp / (tp + alpha * fp + beta * fn_)
}

pub fn rms(x: &[f32]) -> f64 {
    (x.iter().map(|&v| (v as f64).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn sine(freq: f64, secs: f64, rate: u32, amp: f64) -> peakfp::spectro::Waveform {
    let n = (secs * rate as f64).round() as usize;
    peakfp::spectro::Waveform::new(
        (0..n).map(|i| (amp * (std::f64::consts::TAU * freq * i as f64 / rate as f64).sin()) as f32).collect(),
        rate,
    )
    .unwrap()
}
