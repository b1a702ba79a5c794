//! Orchestration of the robustness benchmark: segmentation, paired
//! augmentation, metric reports and identification rates.

mod config;
mod evaluate;
mod identify;
mod segment;
mod store;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use config::{ExperimentConfig, SyntheticCorpusConfig};
pub use evaluate::{cmd_evaluate, pair_metrics, ItemRecord, Report, ReportRow, REPORT_METRICS};
pub use identify::{
    build_index, cmd_identify_bench, cmd_index, identify_bench, index_path, AccuracyRow, CurvePoint, IdentifyReport,
    QueryRecord,
};
pub use segment::{
    assign_splits, cmd_segment, open_corpus, segment_corpus, Manifest, SegmentEntry, TrackEntry, TrackProvider,
    WavDirCorpus,
};
pub use store::{cmd_augment, PairEntry, PairStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

pub(crate) fn write_text(path: &Path, s: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    write_text(path, &s)
}
