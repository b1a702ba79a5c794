//! Staged spectral-peak pipeline.
//!
//! 1. salience: subtract the local mean and clamp at zero;
//! 2. octave energy: per (time slab, octave band) keep cells at or above
//!    `mean + c * std`, zero the rest;
//! 3. peak extraction: neighbourhood maxima;
//! 4. peak filtering: keep at most `density_cap` peaks per (slab, band) cell.
//!
//! Stage 2 and stage 3 are the intermediate features used for metrics.

mod peaks;
mod stages;

pub use peaks::{Peak, PeakMask, PeakSet};
pub use stages::{
    stage1_salience, stage2_octave_energy, stage3_extract_peaks, stage4_filter_peaks,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectro::Spectrogram;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakPickingParams {
    /// Time half-window, frames.
    pub time_half: usize,
    /// Frequency half-window, bins.
    pub freq_half: usize,
    /// Cells must be strictly above this to be peaks.
    pub silence_threshold: f32,
}

impl PeakPickingParams {
    pub fn validate(&self) -> Result<()> {
        if self.time_half < 1 || self.freq_half < 1 {
            return Err(Error::invalid("peak half-windows must be at least 1"));
        }
        if !(self.silence_threshold >= 0.0 && self.silence_threshold.is_finite()) {
            return Err(Error::invalid("silence threshold must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageParams {
    /// Full (time, freq) extent of the salience window; both odd.
    pub salience_window: (usize, usize),
    /// Multiplier on the band standard deviation. `-inf` keeps every cell.
    pub octave_c: f64,
    pub density_cap: usize,
    pub time_slab_frames: usize,
}

impl Default for StageParams {
    fn default() -> Self {
        Self {
            salience_window: (31, 13),
            octave_c: 1.0,
            density_cap: 3,
            // one second at 5512 Hz / hop 64
            time_slab_frames: 86,
        }
    }
}

impl StageParams {
    pub fn validate(&self) -> Result<()> {
        let (wt, wf) = self.salience_window;
        if wt == 0 || wf == 0 || wt % 2 == 0 || wf % 2 == 0 {
            return Err(Error::invalid("salience window sides must be odd and positive"));
        }
        if self.density_cap < 1 || self.time_slab_frames < 1 {
            return Err(Error::invalid("density cap and slab length must be positive"));
        }
        if self.octave_c.is_nan() || self.octave_c == f64::INFINITY {
            return Err(Error::invalid("octave c must be a number below +inf"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub stages: StageParams,
    pub time_half: usize,
    pub freq_half: usize,
    /// Stage-3 silence threshold as a fraction of the stage-2 maximum.
    pub relative_silence: f32,
    pub bins_per_octave: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            stages: StageParams::default(),
            time_half: 3,
            freq_half: 3,
            relative_silence: 1e-6,
            bins_per_octave: 18,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.stages.validate()?;
        if self.bins_per_octave == 0 {
            return Err(Error::invalid("bins per octave must be positive"));
        }
        if !(self.relative_silence >= 0.0 && self.relative_silence.is_finite()) {
            return Err(Error::invalid("relative silence must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn picking_for(&self, stage2: &Spectrogram) -> PeakPickingParams {
        PeakPickingParams {
            time_half: self.time_half,
            freq_half: self.freq_half,
            silence_threshold: self.relative_silence * stage2.max_value(),
        }
    }
}

/// Every stage output of one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub stage1: Spectrogram,
    pub stage2: Spectrogram,
    pub stage3: PeakSet,
    pub final_peaks: PeakSet,
}

pub fn run_pipeline(s: &Spectrogram, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let stage1 = stage1_salience(s, &cfg.stages)?;
    let stage2 = stage2_octave_energy(&stage1, &cfg.stages, cfg.bins_per_octave)?;
    let stage3 = stage3_extract_peaks(&stage2, &cfg.picking_for(&stage2))?;
    let final_peaks = stage4_filter_peaks(&stage3, &cfg.stages, cfg.bins_per_octave)?;
    Ok(PipelineOutput {
        stage1,
        stage2,
        stage3,
        final_peaks,
    })
}
