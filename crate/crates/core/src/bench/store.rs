use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::augment::{augment, log_to_json_lines, Corpora};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fingerprint::Fingerprinter;
use crate::spectro::{resample, spg, Spectrogram};

use super::{write_json, ExperimentConfig, Manifest, SegmentEntry, TrackProvider};

/// File names are relative to the store directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub segment_id: String,
    pub track_id: u32,
    pub clean: String,
    pub noisy: String,
    pub log: String,
    pub n_transforms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStore {
    pub pipeline: String,
    pub seed: u64,
    pub pairs: Vec<PairEntry>,
}

impl PairStore {
    pub fn dir(cfg: &ExperimentConfig, pipeline: &str) -> PathBuf {
        cfg.output_dir.join("store").join(pipeline)
    }

    pub fn load(cfg: &ExperimentConfig, pipeline: &str) -> Result<Self> {
        let path = Self::dir(cfg, pipeline).join("store.json");
        if !path.is_file() {
            return Err(Error::Config(format!("no paired store for '{pipeline}' at {}", path.display())));
        }
        let s = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&s)?)
    }

    /// Clean and noisy spectrograms of one pair, tagged with the segment id.
    pub fn read_pair(&self, dir: &Path, p: &PairEntry) -> Result<(Spectrogram, Spectrogram)> {
        let clean = spg::read(dir.join(&p.clean))?.with_source_id(p.segment_id.clone());
        let noisy = spg::read(dir.join(&p.noisy))?.with_source_id(p.segment_id.clone());
        if clean.shape() != noisy.shape() {
            return Err(Error::Format(format!("pair {} has mismatched shapes", p.segment_id)));
        }
        Ok((clean, noisy))
    }
}

/// Augment every evaluated segment with each pipeline and store clean/noisy
/// CQT pairs plus transform logs.
pub fn cmd_augment(
    cfg: &ExperimentConfig,
    corpus: &dyn TrackProvider,
    manifest: &Manifest,
    pipelines: &[String],
    exec: Execution,
) -> Result<Vec<PairStore>> {
    cfg.validate()?;
    let specs = pipelines.iter().map(|p| cfg.pipeline(p)).collect::<Result<Vec<_>>>()?;
    let corpora = specs.iter().map(Corpora::open).collect::<Result<Vec<_>>>()?;
    let inner = if exec.is_parallel() { Execution::Sequential } else { exec };
    let fp = Fingerprinter::new(cfg.fingerprint.clone())?.with_execution(inner);
    for p in pipelines {
        let d = PairStore::dir(cfg, p);
        std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }

    let mut by_track: BTreeMap<u32, Vec<&SegmentEntry>> = BTreeMap::new();
    for s in manifest.segments_in(cfg.eval_split) {
        by_track.entry(s.track_id).or_default().push(s);
    }
    let groups: Vec<(u32, Vec<&SegmentEntry>)> = by_track.into_iter().collect();

    let per_track = exec.map(&groups, |(track_id, segs)| -> Result<Vec<Vec<PairEntry>>> {
        let w = corpus.load(*track_id as usize)?;
        let mut rows = vec![Vec::new(); specs.len()];
        for s in segs {
            let x = resample(&w.slice(s.start_sample, s.len_samples), cfg.augment_rate_hz)?;
            let clean = fp.spectrogram(&x)?;
            let clean_name = format!("{}.clean.spg", s.segment_id);
            for (k, (spec, corp)) in specs.iter().zip(&corpora).enumerate() {
                let dir = PairStore::dir(cfg, &spec.name);
                let (y, log) = augment(&x, spec, corp, s.ordinal)?;
                let noisy = fp.spectrogram(&y)?;
                let noisy_name = format!("{}.noisy.spg", s.segment_id);
                let log_name = format!("{}.log.jsonl", s.segment_id);
                spg::write(dir.join(&clean_name), &clean)?;
                spg::write(dir.join(&noisy_name), &noisy)?;
                let log_path = dir.join(&log_name);
                std::fs::write(&log_path, log_to_json_lines(&log)?).map_err(|e| Error::io(&log_path, e))?;
                rows[k].push(PairEntry {
                    segment_id: s.segment_id.clone(),
                    track_id: s.track_id,
                    clean: clean_name.clone(),
                    noisy: noisy_name,
                    log: log_name,
                    n_transforms: log.len(),
                });
            }
        }
        Ok(rows)
    });

    let mut stores: Vec<PairStore> = pipelines
        .iter()
        .map(|p| PairStore { pipeline: p.clone(), seed: cfg.seed, pairs: Vec::new() })
        .collect();
    for rows in per_track {
        for (store, r) in stores.iter_mut().zip(rows?) {
            store.pairs.extend(r);
        }
    }
    for s in &stores {
        write_json(&PairStore::dir(cfg, &s.pipeline).join("store.json"), s)?;
    }
    Ok(stores)
}
