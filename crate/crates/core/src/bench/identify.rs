use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::augment::{augment, item_rng, Corpora};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fingerprint::Fingerprinter;
use crate::fpindex::{FingerprintIndex, IdentifyParams, IndexBuilder, TrackMeta};
use crate::spectro::resample;

use super::{write_json, write_text, ExperimentConfig, TrackProvider};

const QUERY_STREAM_SALT: u64 = 0x5155_4552_5953_5452;

pub fn index_path(cfg: &ExperimentConfig) -> std::path::PathBuf {
    cfg.output_dir.join("index.fpx")
}

/// Fingerprint every clean track; track ids are corpus positions.
pub fn build_index(corpus: &dyn TrackProvider, fp: &Fingerprinter, exec: Execution) -> Result<FingerprintIndex> {
    if corpus.is_empty() {
        return Err(Error::Config("empty corpus".into()));
    }
    let per_track = exec.map_range(corpus.len(), |i| -> Result<_> {
        let w = corpus.load(i)?;
        Ok((TrackMeta { title: corpus.title(i), duration_secs: w.duration_secs() }, fp.landmarks(&w)?))
    });
    let mut b = IndexBuilder::new();
    for (i, r) in per_track.into_iter().enumerate() {
        let (meta, lms) = r?;
        b.index_track(i as u32, meta, &lms)?;
    }
    Ok(b.freeze())
}

/// Build the index over the clean corpus and save it as `index.fpx`.
pub fn cmd_index(cfg: &ExperimentConfig, corpus: &dyn TrackProvider, exec: Execution) -> Result<FingerprintIndex> {
    cfg.validate()?;
    let inner = if exec.is_parallel() { Execution::Sequential } else { exec };
    let fp = Fingerprinter::new(cfg.fingerprint.clone())?.with_execution(inner);
    let idx = build_index(corpus, &fp, exec)?;
    let path = index_path(cfg);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    idx.save(&path)?;
    Ok(idx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub pipeline: String,
    pub denoiser: String,
    pub track_id: u32,
    pub query: usize,
    pub start_secs: f64,
    /// Sampled background-noise SNR, when noise was added.
    pub snr_db: Option<f64>,
    pub predicted: Option<u32>,
    pub score: u32,
    pub offset_frames: Option<i64>,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub pipeline: String,
    pub denoiser: String,
    pub n_queries: usize,
    pub n_correct: usize,
    pub accuracy: f64,
    pub min_votes: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub pipeline: String,
    pub denoiser: String,
    /// Lower edge of a 1 dB bin.
    pub snr_db: i64,
    pub n_queries: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifyReport {
    pub rows: Vec<AccuracyRow>,
    pub curve: Vec<CurvePoint>,
    pub queries: Vec<QueryRecord>,
}

impl IdentifyReport {
    pub fn accuracy(&self, pipeline: &str, denoiser: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.pipeline == pipeline && r.denoiser == denoiser).map(|r| r.accuracy)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("pipeline,denoiser,n_queries,n_correct,accuracy,min_votes\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.pipeline, r.denoiser, r.n_queries, r.n_correct, r.accuracy, r.min_votes
            ));
        }
        s
    }

    pub fn curve_csv(&self) -> String {
        let mut s = String::from("pipeline,denoiser,snr_db,n_queries,accuracy\n");
        for c in &self.curve {
            s.push_str(&format!("{},{},{},{},{}\n", c.pipeline, c.denoiser, c.snr_db, c.n_queries, c.accuracy));
        }
        s
    }
}

/// Identification benchmark over the corpus without writing files.
pub fn identify_bench(
    cfg: &ExperimentConfig,
    corpus: &dyn TrackProvider,
    index: &FingerprintIndex,
    exec: Execution,
) -> Result<IdentifyReport> {
    cfg.validate()?;
    let mut conditions = vec!["none".to_string()];
    for p in &cfg.pipelines {
        if !conditions.contains(p) {
            conditions.push(p.clone());
        }
    }
    let specs = conditions.iter().map(|p| cfg.pipeline(p)).collect::<Result<Vec<_>>>()?;
    let corpora = specs.iter().map(Corpora::open).collect::<Result<Vec<_>>>()?;
    let inner = if exec.is_parallel() { Execution::Sequential } else { exec };
    let denoisers = cfg
        .denoiser_set()
        .into_iter()
        .map(|d| {
            let fp = Fingerprinter::new(cfg.fingerprint.clone())?.with_denoiser(d.build()?).with_execution(inner);
            Ok((d.label(), fp))
        })
        .collect::<Result<Vec<_>>>()?;
    let params = IdentifyParams { query: cfg.query, ..IdentifyParams::default() };
    let qpt = cfg.queries_per_track;

    let per_track = exec.map_range(corpus.len(), |i| -> Result<Vec<QueryRecord>> {
        let w = resample(&corpus.load(i)?, cfg.augment_rate_hz)?;
        let qlen = ((cfg.query_secs * cfg.augment_rate_hz as f64).round() as usize).min(w.len());
        let mut out = Vec::new();
        for q in 0..qpt {
            let ordinal = (i * qpt + q) as u64;
            let start = item_rng(cfg.seed ^ QUERY_STREAM_SALT, ordinal).random_range(0..=w.len() - qlen);
            let x = w.slice(start, qlen);
            for (spec, corp) in specs.iter().zip(&corpora) {
                let (y, log) = augment(&x, spec, corp, ordinal)?;
                let snr_db = log.iter().find_map(|t| t.params.get("snr_db").copied());
                for (label, fp) in &denoisers {
                    let r = index.identify(&y, fp, &params)?;
                    let predicted = r.matched_track();
                    out.push(QueryRecord {
                        pipeline: spec.name.clone(),
                        denoiser: label.clone(),
                        track_id: i as u32,
                        query: q,
                        start_secs: start as f64 / cfg.augment_rate_hz as f64,
                        snr_db,
                        predicted,
                        score: r.top.map_or(0, |m| m.score),
                        offset_frames: r.top.map(|m| m.offset_frames),
                        correct: predicted == Some(i as u32),
                    });
                }
            }
        }
        Ok(out)
    });
    let mut queries = Vec::new();
    for r in per_track {
        queries.extend(r?);
    }

    let mut rows = Vec::new();
    let mut curve = Vec::new();
    for spec in &specs {
        for (label, _) in &denoisers {
            let sel: Vec<&QueryRecord> =
                queries.iter().filter(|q| q.pipeline == spec.name && &q.denoiser == label).collect();
            let n_correct = sel.iter().filter(|q| q.correct).count();
            rows.push(AccuracyRow {
                pipeline: spec.name.clone(),
                denoiser: label.clone(),
                n_queries: sel.len(),
                n_correct,
                accuracy: if sel.is_empty() { 0.0 } else { n_correct as f64 / sel.len() as f64 },
                min_votes: cfg.query.min_votes,
            });
            let mut bins: BTreeMap<i64, (usize, usize)> = BTreeMap::new();
            for q in &sel {
                if let Some(snr) = q.snr_db {
                    let e = bins.entry(snr.floor() as i64).or_default();
                    e.0 += 1;
                    e.1 += q.correct as usize;
                }
            }
            curve.extend(bins.into_iter().map(|(snr_db, (n, c))| CurvePoint {
                pipeline: spec.name.clone(),
                denoiser: label.clone(),
                snr_db,
                n_queries: n,
                accuracy: c as f64 / n as f64,
            }));
        }
    }
    Ok(IdentifyReport { rows, curve, queries })
}

/// Run the benchmark against the saved index and write `identify.csv`,
/// `identify_curve.csv` and `identify.json`.
pub fn cmd_identify_bench(cfg: &ExperimentConfig, corpus: &dyn TrackProvider, exec: Execution) -> Result<IdentifyReport> {
    let path = index_path(cfg);
    if !path.is_file() {
        return Err(Error::Config(format!("no index at {}; run `index` first", path.display())));
    }
    let index = FingerprintIndex::load(&path)?;
    let report = identify_bench(cfg, corpus, &index, exec)?;
    write_text(&cfg.output_dir.join("identify.csv"), &report.to_csv())?;
    write_text(&cfg.output_dir.join("identify_curve.csv"), &report.curve_csv())?;
    write_json(&cfg.output_dir.join("identify.json"), &report)?;
    Ok(report)
}
