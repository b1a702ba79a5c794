//! Waveform to landmarks: resample, CQT, optional denoiser, peak pipeline,
//! landmark hashing.

use serde::{Deserialize, Serialize};

use crate::denoise::{Denoiser, IdentityDenoiser};
use crate::error::Result;
use crate::exec::Execution;
use crate::landmark::{extract_landmarks, Landmark, LandmarkConfig};
use crate::peakpipe::{run_pipeline, PipelineConfig, PipelineOutput};
use crate::spectro::{resample, CqtKernel, CqtParams, Spectrogram, Waveform};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FingerprintConfig {
    pub cqt: CqtParams,
    pub pipeline: PipelineConfig,
    pub landmarks: LandmarkConfig,
}

impl FingerprintConfig {
    pub fn validate(&self) -> Result<()> {
        self.cqt.validate()?;
        self.pipeline.validate()
    }
}

#[derive(Debug, Clone)]
pub struct Fingerprint {
    /// Spectrogram after the denoiser.
    pub spectrogram: Spectrogram,
    pub stages: PipelineOutput,
    pub landmarks: Vec<Landmark>,
}

pub struct Fingerprinter {
    cfg: FingerprintConfig,
    kernel: CqtKernel,
    denoiser: Box<dyn Denoiser>,
    exec: Execution,
}

impl Fingerprinter {
    pub fn new(cfg: FingerprintConfig) -> Result<Self> {
        cfg.validate()?;
        let kernel = CqtKernel::new(&cfg.cqt)?;
        Ok(Fingerprinter { cfg, kernel, denoiser: Box::new(IdentityDenoiser), exec: Execution::default() })
    }

    pub fn with_denoiser(mut self, d: Box<dyn Denoiser>) -> Self {
        self.denoiser = d;
        self
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn config(&self) -> &FingerprintConfig {
        &self.cfg
    }

    pub fn denoiser_name(&self) -> String {
        self.denoiser.name()
    }

    /// Shortest input, in seconds, that the CQT accepts.
    pub fn min_duration_secs(&self) -> f64 {
        self.kernel.max_window_len() as f64 / self.cfg.cqt.sample_rate_hz as f64
    }

    /// CQT at the configured analysis rate, before denoising.
    pub fn spectrogram(&self, w: &Waveform) -> Result<Spectrogram> {
        let w = resample(w, self.cfg.cqt.sample_rate_hz)?;
        self.kernel.transform(&w, self.exec)
    }

    pub fn from_spectrogram(&self, s: &Spectrogram) -> Result<Fingerprint> {
        let spectrogram = self.denoiser.denoise(s)?;
        let stages = run_pipeline(&spectrogram, &self.cfg.pipeline)?;
        let landmarks = extract_landmarks(&stages.final_peaks, &self.cfg.landmarks);
        Ok(Fingerprint { spectrogram, stages, landmarks })
    }

    pub fn fingerprint(&self, w: &Waveform) -> Result<Fingerprint> {
        self.from_spectrogram(&self.spectrogram(w)?)
    }

    pub fn landmarks(&self, w: &Waveform) -> Result<Vec<Landmark>> {
        Ok(self.fingerprint(w)?.landmarks)
    }
}

impl std::fmt::Debug for Fingerprinter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fingerprinter")
            .field("cfg", &self.cfg)
            .field("denoiser", &self.denoiser.name())
            .field("exec", &self.exec)
            .finish()
    }
}
