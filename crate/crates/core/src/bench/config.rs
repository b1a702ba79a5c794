use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::augment::{builtin_pipeline, AugmentationSpec, CorpusRef, BUILTIN_EVALUATION_PIPELINES};
use crate::denoise::DenoiserSpec;
use crate::error::{Error, Result};
use crate::fingerprint::FingerprintConfig;
use crate::fpindex::QueryParams;
use crate::metrics::TverskyParams;

use super::Split;

/// Corpus generated on the fly when no corpus directory is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticCorpusConfig {
    pub n_tracks: usize,
    pub duration_secs: f64,
    pub seed: u64,
}

impl Default for SyntheticCorpusConfig {
    fn default() -> Self {
        SyntheticCorpusConfig { n_tracks: 100, duration_secs: 30.0, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Directory of WAV tracks; the synthetic corpus is used when absent.
    pub corpus_dir: Option<PathBuf>,
    pub synthetic: SyntheticCorpusConfig,
    /// Directories of noise and impulse-response WAVs; synthetic when absent.
    pub noise_dir: Option<PathBuf>,
    pub ir_dir: Option<PathBuf>,
    pub pipelines: Vec<String>,
    /// Denoisers to compare; `none` is always evaluated as well.
    pub denoisers: Vec<DenoiserSpec>,
    pub segment_secs: f64,
    /// train / val / test fractions
    pub splits: [f64; 3],
    /// Split whose segments are augmented and evaluated; all when absent.
    pub eval_split: Option<Split>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub fingerprint: FingerprintConfig,
    /// Rate at which augmentation runs.
    pub augment_rate_hz: u32,
    pub peak_tolerance: usize,
    pub tversky: TverskyParams,
    pub query: QueryParams,
    pub query_secs: f64,
    pub queries_per_track: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            corpus_dir: None,
            synthetic: SyntheticCorpusConfig::default(),
            noise_dir: None,
            ir_dir: None,
            pipelines: BUILTIN_EVALUATION_PIPELINES.iter().map(|s| s.to_string()).collect(),
            denoisers: vec![DenoiserSpec::None],
            segment_secs: 10.0,
            splits: [0.8, 0.1, 0.1],
            eval_split: Some(Split::Test),
            seed: 0,
            output_dir: PathBuf::from("out"),
            fingerprint: FingerprintConfig::default(),
            augment_rate_hz: 44100,
            peak_tolerance: 1,
            tversky: TverskyParams::reference(),
            query: QueryParams::default(),
            query_secs: 10.0,
            queries_per_track: 10,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.splits.iter().any(|r| !(*r >= 0.0)) || (self.splits.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split ratios {:?} must be non-negative and sum to 1", self.splits)));
        }
        if !(self.segment_secs > 0.0 && self.segment_secs.is_finite()) {
            return Err(Error::Config("segment length must be positive".into()));
        }
        if !(self.query_secs > 0.0 && self.query_secs.is_finite()) {
            return Err(Error::Config("query length must be positive".into()));
        }
        for d in [&self.corpus_dir, &self.noise_dir, &self.ir_dir].into_iter().flatten() {
            if !d.is_dir() {
                return Err(Error::Config(format!("{} is not a directory", d.display())));
            }
        }
        for p in &self.pipelines {
            if builtin_pipeline(p).is_none() {
                return Err(Error::Config(format!("unknown pipeline '{p}'")));
            }
        }
        if self.augment_rate_hz == 0 {
            return Err(Error::Config("augmentation rate must be positive".into()));
        }
        self.tversky.validate()?;
        self.fingerprint.validate()
    }

    fn corpus_ref(dir: &Option<PathBuf>) -> CorpusRef {
        match dir {
            Some(d) => CorpusRef::Directory(d.clone()),
            None => CorpusRef::Synthetic,
        }
    }

    /// A built-in pipeline bound to this experiment's corpora and seed.
    pub fn pipeline(&self, name: &str) -> Result<AugmentationSpec> {
        let spec = builtin_pipeline(name).ok_or_else(|| Error::Config(format!("unknown pipeline '{name}'")))?;
        Ok(spec
            .clone()
            .with_seed(self.seed)
            .with_corpora(Self::corpus_ref(&self.noise_dir), Self::corpus_ref(&self.ir_dir)))
    }

    /// `none` first, then the configured denoisers without repeats.
    pub fn denoiser_set(&self) -> Vec<DenoiserSpec> {
        let mut out = vec![DenoiserSpec::None];
        for d in &self.denoisers {
            if !out.contains(d) {
                out.push(d.clone());
            }
        }
        out
    }
}
