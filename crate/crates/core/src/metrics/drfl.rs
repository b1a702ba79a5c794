use serde::{Deserialize, Serialize};

use super::tversky::{focal_tversky_loss, tversky_components, TverskyParams};
use crate::error::Result;
use crate::peakpipe::{
    stage1_salience, stage2_octave_energy, stage3_extract_peaks, PipelineConfig,
};
use crate::spectro::Spectrogram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrflStage {
    Salience = 1,
    OctaveEnergy = 2,
    Peaks = 3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrflBase {
    /// Summed absolute difference.
    L1,
    FocalTversky(TverskyParams),
}

fn features(s: &Spectrogram, stage: DrflStage, cfg: &PipelineConfig) -> Result<Spectrogram> {
    let s1 = stage1_salience(s, &cfg.stages)?;
    if stage == DrflStage::Salience {
        return Ok(s1);
    }
    let s2 = stage2_octave_energy(&s1, &cfg.stages, cfg.bins_per_octave)?;
    if stage == DrflStage::OctaveEnergy {
        return Ok(s2);
    }
    let peaks = stage3_extract_peaks(&s2, &cfg.picking_for(&s2))?;
    peaks.magnitude_map(s.geometry().clone())
}

/// Distance between pipeline features of `pred` and `clean` at `stage`.
/// Stage 3 compares magnitude-at-peak maps. Forward value only.
pub fn drfl_distance(
    pred: &Spectrogram,
    clean: &Spectrogram,
    stage: DrflStage,
    base: DrflBase,
    cfg: &PipelineConfig,
) -> Result<f64> {
    pred.check_same_shape(clean)?;
    cfg.validate()?;
    let fp = features(pred, stage, cfg)?;
    let fc = features(clean, stage, cfg)?;
    match base {
        DrflBase::L1 => Ok(super::lp_distance(&fp, &fc, 1)?.total),
        DrflBase::FocalTversky(p) => focal_tversky_loss(&tversky_components(&fp, &fc)?, &p),
    }
}
