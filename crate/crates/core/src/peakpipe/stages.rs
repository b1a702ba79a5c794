use super::{Peak, PeakPickingParams, PeakSet, StageParams};
use crate::error::{Error, Result};
use crate::spectro::Spectrogram;

/// `max(0, X - local_mean(X))` over a centred window, truncated at the edges.
pub fn stage1_salience(s: &Spectrogram, p: &StageParams) -> Result<Spectrogram> {
    p.validate()?;
    let (frames, bins) = s.shape();
    let (wt, wf) = p.salience_window;
    if wt > frames || wf > bins {
        return Err(Error::invalid(format!(
            "salience window {wt}x{wf} larger than spectrogram {frames}x{bins}"
        )));
    }
    let (ht, hf) = (wt / 2, wf / 2);
    // summed-area table with a zero border row and column
    let stride = bins + 1;
    let mut sat = vec![0.0f64; (frames + 1) * stride];
    for t in 0..frames {
        let mut row = 0.0f64;
        for f in 0..bins {
            row += s.get(t, f) as f64;
            sat[(t + 1) * stride + f + 1] = sat[t * stride + f + 1] + row;
        }
    }
    let mut out = Vec::with_capacity(frames * bins);
    for t in 0..frames {
        let (t0, t1) = (t.saturating_sub(ht), (t + ht + 1).min(frames));
        for f in 0..bins {
            let (f0, f1) = (f.saturating_sub(hf), (f + hf + 1).min(bins));
            let sum = sat[t1 * stride + f1] - sat[t0 * stride + f1] - sat[t1 * stride + f0]
                + sat[t0 * stride + f0];
            let mean = sum / ((t1 - t0) * (f1 - f0)) as f64;
            out.push((s.get(t, f) as f64 - mean).max(0.0) as f32);
        }
    }
    s.with_values(out)
}

/// Octave bands are `bins_per_octave` consecutive bins starting at bin 0; the
/// last band and the last time slab may be shorter.
pub fn stage2_octave_energy(
    s: &Spectrogram,
    p: &StageParams,
    bins_per_octave: usize,
) -> Result<Spectrogram> {
    p.validate()?;
    let (frames, bins) = s.shape();
    if bins_per_octave == 0 || bins < bins_per_octave {
        return Err(Error::invalid(format!(
            "{bins} bins cannot hold an octave of {bins_per_octave}"
        )));
    }
    let keep_all = p.octave_c == f64::NEG_INFINITY;
    let mut out = vec![0.0f32; frames * bins];
    for t0 in (0..frames).step_by(p.time_slab_frames) {
        let t1 = (t0 + p.time_slab_frames).min(frames);
        for f0 in (0..bins).step_by(bins_per_octave) {
            let f1 = (f0 + bins_per_octave).min(bins);
            let cells = || (t0..t1).flat_map(move |t| (f0..f1).map(move |f| (t, f)));
            let threshold = if keep_all {
                f64::NEG_INFINITY
            } else {
                let n = ((t1 - t0) * (f1 - f0)) as f64;
                let mean = cells().map(|(t, f)| s.get(t, f) as f64).sum::<f64>() / n;
                let var = cells()
                    .map(|(t, f)| (s.get(t, f) as f64 - mean).powi(2))
                    .sum::<f64>()
                    / n;
                mean + p.octave_c * var.sqrt()
            };
            for (t, f) in cells() {
                let x = s.get(t, f);
                if x as f64 >= threshold {
                    out[t * bins + f] = x;
                }
            }
        }
    }
    s.with_values(out)
}

/// Sliding max over `[i - h, i + h]` with truncation, along a strided axis.
fn running_max(src: &[f32], len: usize, stride: usize, h: usize, dst: &mut [f32]) {
    for i in 0..len {
        let lo = i.saturating_sub(h);
        let hi = (i + h + 1).min(len);
        let mut m = f32::NEG_INFINITY;
        for j in lo..hi {
            m = m.max(src[j * stride]);
        }
        dst[i * stride] = m;
    }
}

/// Cell `(n0, k0)` is a peak when it is >= every cell of its truncated
/// `(2*time_half+1) x (2*freq_half+1)` neighbourhood, strictly above the
/// silence threshold, and no lexicographically smaller neighbour has the
/// same value.
pub fn stage3_extract_peaks(s: &Spectrogram, p: &PeakPickingParams) -> Result<PeakSet> {
    p.validate()?;
    let (frames, bins) = s.shape();
    let (ht, hf) = (p.time_half, p.freq_half);
    let x = s.values();

    let mut row_max = vec![0.0f32; x.len()];
    for t in 0..frames {
        running_max(&x[t * bins..], bins, 1, hf, &mut row_max[t * bins..]);
    }
    let mut local_max = vec![0.0f32; x.len()];
    for f in 0..bins {
        running_max(&row_max[f..], frames, bins, ht, &mut local_max[f..]);
    }

    let mut peaks = Vec::new();
    for t in 0..frames {
        for f in 0..bins {
            let v = x[t * bins + f];
            if v <= p.silence_threshold || v < local_max[t * bins + f] {
                continue;
            }
            // plateau: an equal neighbour earlier in (t, f) order wins
            let shadowed = (t.saturating_sub(ht)..=t).any(|n| {
                let k_hi = if n == t { f } else { (f + hf + 1).min(bins) };
                (f.saturating_sub(hf)..k_hi).any(|k| x[n * bins + k] == v)
            });
            if !shadowed {
                peaks.push(Peak {
                    t: t as u32,
                    f: f as u32,
                    magnitude: v,
                });
            }
        }
    }
    Ok(PeakSet::from_sorted_unchecked(peaks, (frames, bins)))
}

/// Keep the `density_cap` largest peaks of every (time slab, octave band)
/// cell; equal magnitudes resolve by `(t, f)`.
pub fn stage4_filter_peaks(
    ps: &PeakSet,
    p: &StageParams,
    bins_per_octave: usize,
) -> Result<PeakSet> {
    p.validate()?;
    if bins_per_octave == 0 {
        return Err(Error::invalid("bins per octave must be positive"));
    }
    let cell = |pk: &Peak| (pk.t as usize / p.time_slab_frames, pk.f as usize / bins_per_octave);
    let mut ranked: Vec<&Peak> = ps.iter().collect();
    ranked.sort_by(|a, b| {
        cell(a)
            .cmp(&cell(b))
            .then(b.magnitude.total_cmp(&a.magnitude))
            .then(a.coord().cmp(&b.coord()))
    });
    let mut kept = Vec::with_capacity(ranked.len());
    let mut run = 0usize;
    for (i, pk) in ranked.iter().enumerate() {
        if i > 0 && cell(ranked[i - 1]) == cell(pk) {
            run += 1;
        } else {
            run = 0;
        }
        if run < p.density_cap {
            kept.push(**pk);
        }
    }
    kept.sort_by_key(Peak::coord);
    Ok(PeakSet::from_sorted_unchecked(kept, ps.shape()))
}
