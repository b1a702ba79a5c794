use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectro::{wav, Waveform};
use crate::synth::SynthCorpus;

use super::{write_json, ExperimentConfig, Split};

/// Random access to the tracks of a corpus.
pub trait TrackProvider: Send + Sync {
    fn len(&self) -> usize;

    fn title(&self, i: usize) -> String;

    fn load(&self, i: usize) -> Result<Waveform>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl TrackProvider for SynthCorpus {
    fn len(&self) -> usize {
        self.n_tracks
    }

    fn title(&self, i: usize) -> String {
        SynthCorpus::title(self, i)
    }

    fn load(&self, i: usize) -> Result<Waveform> {
        self.track(i)
    }
}

/// WAV files of a directory in file-name order.
#[derive(Debug, Clone)]
pub struct WavDirCorpus {
    paths: Vec<PathBuf>,
}

impl WavDirCorpus {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().and_then(|s| s.to_str()).is_some_and(|s| s.eq_ignore_ascii_case("wav")))
            .collect();
        paths.sort();
        Ok(WavDirCorpus { paths })
    }
}

impl TrackProvider for WavDirCorpus {
    fn len(&self) -> usize {
        self.paths.len()
    }

    fn title(&self, i: usize) -> String {
        self.paths[i].file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    }

    fn load(&self, i: usize) -> Result<Waveform> {
        wav::read_wav(&self.paths[i])
    }
}

/// The corpus named by the config.
pub fn open_corpus(cfg: &ExperimentConfig) -> Result<Box<dyn TrackProvider>> {
    Ok(match &cfg.corpus_dir {
        Some(d) => Box::new(WavDirCorpus::open(d)?),
        None => {
            let s = cfg.synthetic;
            Box::new(SynthCorpus::new(s.n_tracks, s.duration_secs, s.seed))
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackEntry {
    pub track_id: u32,
    pub title: String,
    pub duration_secs: f64,
    pub sample_rate_hz: u32,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentEntry {
    pub segment_id: String,
    pub track_id: u32,
    /// Position within the track, in samples at the track's own rate.
    pub start_sample: usize,
    pub len_samples: usize,
    pub split: Split,
    /// Global position; also the augmentation item seed.
    pub ordinal: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub segment_secs: f64,
    pub tracks: Vec<TrackEntry>,
    pub segments: Vec<SegmentEntry>,
    /// Segments dropped because they were digitally silent.
    pub silent_segments: Vec<String>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&s)?)
    }

    pub fn segments_in(&self, split: Option<Split>) -> impl Iterator<Item = &SegmentEntry> {
        self.segments.iter().filter(move |s| split.is_none_or(|sp| s.split == sp))
    }
}

/// Track-level split: a seeded shuffle, then contiguous runs of
/// `round(r * n)` tracks for train and val; test takes the rest.
pub fn assign_splits(n: usize, ratios: [f64; 3], seed: u64) -> Vec<Split> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((ratios[0] * n as f64).round() as usize).min(n);
    let n_val = ((ratios[1] * n as f64).round() as usize).min(n - n_train);
    let mut out = vec![Split::Test; n];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = if rank < n_train {
            Split::Train
        } else if rank < n_train + n_val {
            Split::Val
        } else {
            Split::Test
        };
    }
    out
}

pub fn segment_corpus(cfg: &ExperimentConfig, corpus: &dyn TrackProvider) -> Result<Manifest> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::Config("empty corpus".into()));
    }
    let splits = assign_splits(corpus.len(), cfg.splits, cfg.seed);
    let mut m = Manifest {
        seed: cfg.seed,
        segment_secs: cfg.segment_secs,
        tracks: Vec::with_capacity(corpus.len()),
        segments: Vec::new(),
        silent_segments: Vec::new(),
    };
    let mut ordinal = 0u64;
    for (i, &split) in splits.iter().enumerate() {
        let w = corpus.load(i)?;
        let track_id = i as u32;
        let seg_len = (cfg.segment_secs * w.sample_rate_hz() as f64).round() as usize;
        m.tracks.push(TrackEntry {
            track_id,
            title: corpus.title(i),
            duration_secs: w.duration_secs(),
            sample_rate_hz: w.sample_rate_hz(),
            split,
        });
        for k in 0..w.len() / seg_len.max(1) {
            let segment_id = format!("t{track_id:05}_s{k:03}");
            let start = k * seg_len;
            if w.slice(start, seg_len).peak() == 0.0 {
                m.silent_segments.push(segment_id);
                continue;
            }
            m.segments.push(SegmentEntry { segment_id, track_id, start_sample: start, len_samples: seg_len, split, ordinal });
            ordinal += 1;
        }
    }
    Ok(m)
}

/// Segment the corpus and write `manifest.json` to the output directory.
pub fn cmd_segment(cfg: &ExperimentConfig, corpus: &dyn TrackProvider) -> Result<Manifest> {
    let m = segment_corpus(cfg, corpus)?;
    write_json(&cfg.output_dir.join("manifest.json"), &m)?;
    Ok(m)
}
