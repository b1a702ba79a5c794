//! Seeded synthetic "music": harmonic melody, pads, bass and percussion.
//! Every track is a pure function of its seed, so corpora never need to be
//! stored.

use std::f64::consts::TAU;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::spectro::{wav, Waveform};

struct Note {
    start: f64,
    dur: f64,
    midi: f64,
    amp: f64,
    partials: [f64; 4],
    decay: f64,
}

fn midi_hz(m: f64) -> f64 {
    440.0 * 2f64.powf((m - 69.0) / 12.0)
}

fn render_note(buf: &mut [f64], fs: f64, n: &Note) {
    let start = (n.start * fs) as usize;
    let release = 0.03;
    let len = ((n.dur + release) * fs) as usize;
    let f0 = midi_hz(n.midi);
    let attack = 0.01 * fs;
    for (h, &pa) in n.partials.iter().enumerate() {
        let f = f0 * (h + 1) as f64;
        if pa == 0.0 || f >= fs / 2.0 {
            continue;
        }
        // phasor recurrence instead of a sin per sample
        let (dr, di) = ((TAU * f / fs).cos(), (TAU * f / fs).sin());
        let (mut re, mut im) = (1.0f64, 0.0f64);
        for i in 0..len {
            let Some(out) = buf.get_mut(start + i) else { break };
            let t = i as f64 / fs;
            let mut env = (-(t / n.decay)).exp();
            if (i as f64) < attack {
                env *= i as f64 / attack;
            }
            if t > n.dur {
                env *= 1.0 - (t - n.dur) / release;
            }
            *out += n.amp * pa * env * im;
            let nr = re * dr - im * di;
            im = re * di + im * dr;
            re = nr;
        }
    }
}

/// Render `duration_secs` of synthetic music at `sample_rate_hz`, peak 0.8.
pub fn synth_track(seed: u64, duration_secs: f64, sample_rate_hz: u32) -> Result<Waveform> {
    if !(duration_secs > 0.0 && duration_secs.is_finite()) || sample_rate_hz == 0 {
        return Err(Error::invalid("synthetic track needs a positive duration and rate"));
    }
    let fs = sample_rate_hz as f64;
    let n = (duration_secs * fs).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bpm = rng.random_range(90.0..150.0);
    let step = 30.0 / bpm;
    let root = rng.random_range(0..12) as f64;
    let scale: [f64; 7] = if rng.random_bool(0.5) {
        [0.0, 2.0, 4.0, 5.0, 7.0, 9.0, 11.0]
    } else {
        [0.0, 2.0, 3.0, 5.0, 7.0, 8.0, 10.0]
    };
    let pick = |rng: &mut ChaCha8Rng, lo: i32, hi: i32| -> f64 {
        loop {
            let m = rng.random_range(lo..=hi) as f64;
            if scale.contains(&((m - root).rem_euclid(12.0))) {
                return m;
            }
        }
    };
    let mut notes = Vec::new();
    let steps = (duration_secs / step).ceil() as usize;
    for s in 0..steps {
        let t = s as f64 * step;
        if rng.random_bool(0.8) {
            let partials = [1.0, rng.random_range(0.2..0.7), rng.random_range(0.1..0.5), rng.random_range(0.0..0.3)];
            notes.push(Note {
                start: t,
                dur: step * rng.random_range(1..=3) as f64,
                midi: pick(&mut rng, 55, 86),
                amp: rng.random_range(0.2..0.5),
                partials,
                decay: rng.random_range(0.15..0.5),
            });
        }
        if s % 2 == 0 {
            notes.push(Note {
                start: t,
                dur: step * 2.0,
                midi: pick(&mut rng, 33, 50),
                amp: rng.random_range(0.2..0.35),
                partials: [1.0, 0.6, 0.3, 0.1],
                decay: 0.4,
            });
        }
        if s % 8 == 0 {
            for _ in 0..rng.random_range(2..=3) {
                notes.push(Note {
                    start: t,
                    dur: step * 8.0,
                    midi: pick(&mut rng, 48, 72),
                    amp: rng.random_range(0.05..0.12),
                    partials: [1.0, 0.4, 0.2, 0.0],
                    decay: 2.0,
                });
            }
        }
    }
    let mut buf = vec![0.0f64; n];
    for note in &notes {
        render_note(&mut buf, fs, note);
    }
    for s in (0..steps).step_by(2) {
        let start = (s as f64 * step * fs) as usize;
        let amp = rng.random_range(0.05..0.15);
        for i in 0..(0.08 * fs) as usize {
            let Some(out) = buf.get_mut(start + i) else { break };
            *out += amp * rng.random_range(-1.0..1.0) * (-(i as f64) / (0.02 * fs)).exp();
        }
    }
    let peak = buf.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let g = if peak > 0.0 { 0.8 / peak } else { 0.0 };
    Waveform::new(buf.into_iter().map(|v| (v * g) as f32).collect(), sample_rate_hz)
}

/// A fixed-size collection of synthetic tracks addressed by index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthCorpus {
    pub n_tracks: usize,
    pub duration_secs: f64,
    pub sample_rate_hz: u32,
    pub seed: u64,
}

impl SynthCorpus {
    pub fn new(n_tracks: usize, duration_secs: f64, seed: u64) -> Self {
        SynthCorpus { n_tracks, duration_secs, sample_rate_hz: 44100, seed }
    }

    pub fn track_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64)
    }

    pub fn title(&self, i: usize) -> String {
        format!("synth_{i:04}")
    }

    pub fn track(&self, i: usize) -> Result<Waveform> {
        if i >= self.n_tracks {
            return Err(Error::IndexOutOfRange { index: i, len: self.n_tracks });
        }
        synth_track(self.track_seed(i), self.duration_secs, self.sample_rate_hz)
    }

    /// Write every track as `<title>.wav`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for i in 0..self.n_tracks {
            wav::write_wav(dir.join(format!("{}.wav", self.title(i))), &self.track(i)?)?;
        }
        Ok(())
    }
}
