use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectro::{resample, wav, Waveform};

/// Where noise or impulse responses come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "type", content = "path")]
pub enum CorpusRef {
    #[default]
    None,
    Synthetic,
    Directory(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseColor {
    White,
    Pink,
    Brown,
}

impl NoiseColor {
    pub const ALL: [NoiseColor; 3] = [NoiseColor::White, NoiseColor::Pink, NoiseColor::Brown];

    pub fn name(self) -> &'static str {
        match self {
            NoiseColor::White => "white",
            NoiseColor::Pink => "pink",
            NoiseColor::Brown => "brown",
        }
    }
}

/// Colored Gaussian noise scaled to RMS 0.1.
pub fn synthetic_noise<R: Rng + ?Sized>(rng: &mut R, len: usize, rate: u32, color: NoiseColor) -> Result<Waveform> {
    let mut white = || -> f64 { StandardNormal.sample(rng) };
    let mut out = Vec::with_capacity(len);
    match color {
        NoiseColor::White => out.extend((0..len).map(|_| white())),
        NoiseColor::Pink => {
            // Kellet's economy filter
            let (mut b0, mut b1, mut b2) = (0.0f64, 0.0f64, 0.0f64);
            for _ in 0..len {
                let w = white();
                b0 = 0.99765 * b0 + w * 0.0990460;
                b1 = 0.96300 * b1 + w * 0.2965164;
                b2 = 0.57000 * b2 + w * 1.0526913;
                out.push(b0 + b1 + b2 + w * 0.1848);
            }
        }
        NoiseColor::Brown => {
            let mut y = 0.0f64;
            for _ in 0..len {
                y = 0.998 * y + white();
                out.push(y);
            }
        }
    }
    let rms = (out.iter().map(|v| v * v).sum::<f64>() / len.max(1) as f64).sqrt();
    let scale = if rms > 0.0 { 0.1 / rms } else { 0.0 };
    Waveform::new(out.into_iter().map(|v| (v * scale) as f32).collect(), rate)
}

/// Direct path followed by an exponentially decaying Gaussian tail.
pub fn synthetic_ir<R: Rng + ?Sized>(rng: &mut R, rate: u32, rt60_secs: f64) -> Result<Waveform> {
    if !(rt60_secs > 0.0 && rt60_secs.is_finite()) {
        return Err(Error::invalid("RT60 must be positive"));
    }
    let len = ((rt60_secs * rate as f64).ceil() as usize).max(2);
    let predelay = (0.005 * rate as f64) as usize;
    // 60 dB of amplitude decay over rt60
    let k = 6.907755278982137 / (rt60_secs * rate as f64);
    let mut h = vec![0.0f32; len];
    h[0] = 1.0;
    for (i, v) in h.iter_mut().enumerate().skip(predelay.max(1)) {
        let n: f64 = StandardNormal.sample(rng);
        *v = (0.4 * n * (-k * i as f64).exp()) as f32;
    }
    Waveform::new(h, rate)
}

fn load_wav_dir(dir: &Path) -> Result<Vec<(String, Waveform)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|s| s.to_str()).is_some_and(|s| s.eq_ignore_ascii_case("wav")))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, wav::read_wav(&p)?))
        })
        .collect()
}

enum Source {
    Synthetic,
    Files(Vec<(String, Waveform)>),
}

/// A read-only pool of noise or impulse-response recordings.
pub struct Corpus {
    source: Source,
}

/// One draw from a corpus.
#[derive(Debug, Clone)]
pub struct CorpusItem {
    pub name: String,
    pub audio: Waveform,
}

impl Corpus {
    pub fn synthetic() -> Self {
        Corpus { source: Source::Synthetic }
    }

    pub fn from_waveforms(items: Vec<(String, Waveform)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::Config("corpus has no recordings".into()));
        }
        Ok(Corpus { source: Source::Files(items) })
    }

    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let items = load_wav_dir(dir)?;
        if items.is_empty() {
            return Err(Error::Config(format!("no .wav files in {}", dir.display())));
        }
        Ok(Corpus { source: Source::Files(items) })
    }

    /// `None` for [`CorpusRef::None`].
    pub fn open(r: &CorpusRef) -> Result<Option<Self>> {
        match r {
            CorpusRef::None => Ok(None),
            CorpusRef::Synthetic => Ok(Some(Corpus::synthetic())),
            CorpusRef::Directory(p) => Corpus::from_dir(p).map(Some),
        }
    }

    pub fn is_synthetic(&self) -> bool {
        matches!(self.source, Source::Synthetic)
    }

    pub fn len(&self) -> usize {
        match &self.source {
            Source::Synthetic => NoiseColor::ALL.len(),
            Source::Files(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn pick_file<R: Rng + ?Sized>(v: &[(String, Waveform)], rng: &mut R, rate: u32) -> Result<CorpusItem> {
        let (name, w) = &v[rng.random_range(0..v.len())];
        Ok(CorpusItem { name: name.clone(), audio: resample(w, rate)? })
    }

    /// Noise of at least `len` samples when synthetic; files are returned whole.
    pub fn draw_noise<R: Rng + ?Sized>(&self, rng: &mut R, len: usize, rate: u32) -> Result<CorpusItem> {
        match &self.source {
            Source::Synthetic => {
                let color = NoiseColor::ALL[rng.random_range(0..NoiseColor::ALL.len())];
                let extra = rate as usize;
                Ok(CorpusItem {
                    name: format!("synthetic:{}", color.name()),
                    audio: synthetic_noise(rng, len + extra, rate, color)?,
                })
            }
            Source::Files(v) => Corpus::pick_file(v, rng, rate),
        }
    }

    pub fn draw_ir<R: Rng + ?Sized>(&self, rng: &mut R, rate: u32) -> Result<CorpusItem> {
        match &self.source {
            Source::Synthetic => {
                let rt60 = rng.random_range(0.15..0.6);
                Ok(CorpusItem {
                    name: format!("synthetic:rt60={rt60:.3}"),
                    audio: synthetic_ir(rng, rate, rt60)?,
                })
            }
            Source::Files(v) => Corpus::pick_file(v, rng, rate),
        }
    }
}

impl std::fmt::Debug for Corpus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.source {
            Source::Synthetic => f.write_str("Corpus(synthetic)"),
            Source::Files(v) => write!(f, "Corpus({} files)", v.len()),
        }
    }
}
