//! Spectrogram distances, image-quality scores, tolerance-window peak
//! metrics, the continuous Tversky family and the stage-feature distance.

mod drfl;
mod image;
mod peaks;
mod tversky;

pub use drfl::{drfl_distance, DrflBase, DrflStage};
pub use image::{dssim, lp_distance, psnr, ssim, LpDistance, Psnr, PsnrMode, SsimParams, SsimWindow};
pub use peaks::{peak_prf, PeakMetricReport};
pub use tversky::{
    focal_tversky_loss, tversky_components, tversky_components_slices, tversky_index,
    tversky_loss, TverskyComponents, TverskyParams,
};
