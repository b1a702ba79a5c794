//! Spectrogram denoisers placed in front of the peak pipeline.
//!
//! The classical baselines estimate a stationary per-bin floor as a low
//! percentile of each frequency bin over time, so no silent lead-in is needed.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectro::{spg, Spectrogram};

pub trait Denoiser: Send + Sync {
    /// Output keeps the input shape and is non-negative.
    fn denoise(&self, s: &Spectrogram) -> Result<Spectrogram>;

    fn name(&self) -> String;
}

/// Per-bin magnitude floor.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseFloorEstimate(pub Vec<f64>);

impl NoiseFloorEstimate {
    /// `q`-th percentile (linear interpolation) of each bin over time.
    pub fn percentile(s: &Spectrogram, q: f64) -> Self {
        let mut col = Vec::with_capacity(s.frames());
        let floor = (0..s.bins())
            .map(|k| {
                col.clear();
                col.extend((0..s.frames()).map(|t| s.get(t, k) as f64));
                col.sort_by(f64::total_cmp);
                let pos = q / 100.0 * (col.len() - 1) as f64;
                let lo = pos.floor() as usize;
                let hi = pos.ceil() as usize;
                col[lo] + (col[hi] - col[lo]) * (pos - lo as f64)
            })
            .collect();
        NoiseFloorEstimate(floor)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityDenoiser;

impl Denoiser for IdentityDenoiser {
    fn denoise(&self, s: &Spectrogram) -> Result<Spectrogram> {
        Ok(s.clone())
    }

    fn name(&self) -> String {
        "none".into()
    }
}

pub fn identity_denoiser() -> IdentityDenoiser {
    IdentityDenoiser
}

/// `max(X - over_subtract * N(k), floor * X)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSubtraction {
    pub percentile: f64,
    pub over_subtract: f64,
    pub floor: f64,
}

impl Default for SpectralSubtraction {
    fn default() -> Self {
        Self { percentile: 30.0, over_subtract: 2.0, floor: 0.05 }
    }
}

pub fn spectral_subtraction_denoiser(percentile: f64, over_subtract: f64, floor: f64) -> Result<SpectralSubtraction> {
    if !(percentile > 0.0 && percentile < 100.0) {
        return Err(Error::invalid("percentile must lie in (0, 100)"));
    }
    if !(over_subtract >= 1.0 && over_subtract.is_finite()) {
        return Err(Error::invalid("over-subtraction factor must be >= 1"));
    }
    if !(0.0..1.0).contains(&floor) {
        return Err(Error::invalid("spectral floor must lie in [0, 1)"));
    }
    Ok(SpectralSubtraction { percentile, over_subtract, floor })
}

impl Denoiser for SpectralSubtraction {
    fn denoise(&self, s: &Spectrogram) -> Result<Spectrogram> {
        let noise = NoiseFloorEstimate::percentile(s, self.percentile);
        let bins = s.bins();
        let out = s
            .values()
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let x = x as f64;
                (x - self.over_subtract * noise.0[i % bins]).max(self.floor * x) as f32
            })
            .collect();
        s.with_values(out)
    }

    fn name(&self) -> String {
        "specsub".into()
    }
}

/// `G = max(1 - N(k)^2 / X^2, min_gain)`, output `G * X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WienerGain {
    pub percentile: f64,
    pub min_gain: f64,
}

impl Default for WienerGain {
    fn default() -> Self {
        Self { percentile: 10.0, min_gain: 0.05 }
    }
}

pub fn wiener_gain_denoiser(percentile: f64, min_gain: f64) -> Result<WienerGain> {
    if !(percentile > 0.0 && percentile < 100.0) {
        return Err(Error::invalid("percentile must lie in (0, 100)"));
    }
    if !(0.0..1.0).contains(&min_gain) {
        return Err(Error::invalid("minimum gain must lie in [0, 1)"));
    }
    Ok(WienerGain { percentile, min_gain })
}

impl WienerGain {
    pub fn apply_with_floor(&self, s: &Spectrogram, noise: &NoiseFloorEstimate) -> Result<Spectrogram> {
        if noise.0.len() != s.bins() {
            return Err(Error::invalid("noise floor length differs from bin count"));
        }
        let bins = s.bins();
        let out = s
            .values()
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                if x <= 0.0 {
                    return 0.0;
                }
                let x = x as f64;
                let n = noise.0[i % bins];
                let g = (1.0 - n * n / (x * x)).max(self.min_gain);
                (g * x) as f32
            })
            .collect();
        s.with_values(out)
    }
}

impl Denoiser for WienerGain {
    fn denoise(&self, s: &Spectrogram) -> Result<Spectrogram> {
        self.apply_with_floor(s, &NoiseFloorEstimate::percentile(s, self.percentile))
    }

    fn name(&self) -> String {
        "wiener".into()
    }
}

/// Looks up `<dir>/<source_id>.spg`, produced by an external model.
#[derive(Debug, Clone)]
pub struct FileBacked {
    dir: PathBuf,
}

pub fn file_backed_denoiser(dir: impl AsRef<Path>) -> Result<FileBacked> {
    let dir = dir.as_ref().to_path_buf();
    if !dir.is_dir() {
        return Err(Error::Config(format!("{} is not a directory", dir.display())));
    }
    Ok(FileBacked { dir })
}

impl Denoiser for FileBacked {
    fn denoise(&self, s: &Spectrogram) -> Result<Spectrogram> {
        if s.source_id().is_empty() {
            return Err(Error::Lookup("spectrogram has no source id".into()));
        }
        let path = self.dir.join(format!("{}.spg", s.source_id()));
        if !path.is_file() {
            return Err(Error::Lookup(format!("no stored spectrogram for `{}`", s.source_id())));
        }
        let stored = spg::read(&path)?;
        if stored.shape() != s.shape() {
            return Err(Error::Format(format!(
                "{} has shape {:?}, expected {:?}",
                path.display(),
                stored.shape(),
                s.shape()
            )));
        }
        s.with_values(stored.into_values())
    }

    fn name(&self) -> String {
        format!("file:{}", self.dir.display())
    }
}

/// Serializable denoiser selection: `none`, `specsub`, `wiener`, `file:<dir>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum DenoiserSpec {
    None,
    SpecSub(SpectralSubtraction),
    Wiener(WienerGain),
    File(PathBuf),
}

impl DenoiserSpec {
    pub fn build(&self) -> Result<Box<dyn Denoiser>> {
        Ok(match self {
            DenoiserSpec::None => Box::new(IdentityDenoiser),
            DenoiserSpec::SpecSub(p) => Box::new(spectral_subtraction_denoiser(p.percentile, p.over_subtract, p.floor)?),
            DenoiserSpec::Wiener(p) => Box::new(wiener_gain_denoiser(p.percentile, p.min_gain)?),
            DenoiserSpec::File(dir) => Box::new(file_backed_denoiser(dir)?),
        })
    }

    /// Label used in reports.
    pub fn label(&self) -> String {
        String::from(self.clone())
    }
}

impl FromStr for DenoiserSpec {
    type Err = Error;

    /// Parameters ride along as `specsub:q,lambda,floor` or `wiener:q,min_gain`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, args) = s.split_once(':').unwrap_or((s, ""));
        let nums = || -> Result<Vec<f64>> {
            args.split(',')
                .filter(|a| !a.is_empty())
                .map(|a| a.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad denoiser argument `{a}`"))))
                .collect()
        };
        match head {
            "none" | "identity" => Ok(DenoiserSpec::None),
            "specsub" => match nums()?.as_slice() {
                [] => Ok(DenoiserSpec::SpecSub(SpectralSubtraction::default())),
                [q, l, f] => Ok(DenoiserSpec::SpecSub(spectral_subtraction_denoiser(*q, *l, *f)?)),
                _ => Err(Error::Config("specsub takes `q,lambda,floor`".into())),
            },
            "wiener" => match nums()?.as_slice() {
                [] => Ok(DenoiserSpec::Wiener(WienerGain::default())),
                [q, g] => Ok(DenoiserSpec::Wiener(wiener_gain_denoiser(*q, *g)?)),
                _ => Err(Error::Config("wiener takes `q,min_gain`".into())),
            },
            "file" if !args.is_empty() => Ok(DenoiserSpec::File(PathBuf::from(args))),
            _ => Err(Error::Config(format!("unknown denoiser `{s}`"))),
        }
    }
}

impl From<DenoiserSpec> for String {
    fn from(d: DenoiserSpec) -> String {
        match d {
            DenoiserSpec::None => "none".into(),
            DenoiserSpec::SpecSub(p) if p == SpectralSubtraction::default() => "specsub".into(),
            DenoiserSpec::SpecSub(p) => format!("specsub:{},{},{}", p.percentile, p.over_subtract, p.floor),
            DenoiserSpec::Wiener(p) if p == WienerGain::default() => "wiener".into(),
            DenoiserSpec::Wiener(p) => format!("wiener:{},{}", p.percentile, p.min_gain),
            DenoiserSpec::File(dir) => format!("file:{}", dir.display()),
        }
    }
}

impl TryFrom<String> for DenoiserSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}
