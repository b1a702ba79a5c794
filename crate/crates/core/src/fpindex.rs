//! Inverted index from packed landmark keys to track postings, with
//! time-offset voting.
//!
//! Building goes through [`IndexBuilder`]; [`IndexBuilder::freeze`] yields an
//! immutable [`FingerprintIndex`] that can be queried from many threads.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fingerprint::Fingerprinter;
use crate::landmark::Landmark;
use crate::spectro::Waveform;

const MAGIC: &[u8; 4] = b"FPX1";
const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Posting {
    pub track_id: u32,
    pub anchor_t: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackMeta {
    pub title: String,
    pub duration_secs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub track_id: u32,
    pub score: u32,
    /// `posting.anchor_t - query.anchor_t` at the winning bin.
    pub offset_frames: i64,
    pub matched: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryParams {
    pub min_votes: u32,
    /// Also count each vote in the bins one frame either side.
    pub smear: bool,
}

impl Default for QueryParams {
    fn default() -> Self {
        QueryParams { min_votes: 5, smear: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentifyParams {
    pub query: QueryParams,
    pub min_query_secs: f64,
}

impl Default for IdentifyParams {
    fn default() -> Self {
        IdentifyParams { query: QueryParams::default(), min_query_secs: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    /// Best candidate; `None` when no query key hit the index.
    pub top: Option<MatchResult>,
    pub query_landmarks: usize,
}

impl Identification {
    pub fn is_match(&self) -> bool {
        self.top.is_some_and(|m| m.matched)
    }

    pub fn matched_track(&self) -> Option<u32> {
        self.top.filter(|m| m.matched).map(|m| m.track_id)
    }
}

#[derive(Debug, Default)]
pub struct IndexBuilder {
    catalog: BTreeMap<u32, TrackMeta>,
    buckets: HashMap<u64, Vec<Posting>>,
}

impl IndexBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn index_track(&mut self, track_id: u32, meta: TrackMeta, landmarks: &[Landmark]) -> Result<()> {
        if self.catalog.contains_key(&track_id) {
            return Err(Error::Conflict(track_id));
        }
        self.catalog.insert(track_id, meta);
        for l in landmarks {
            self.buckets.entry(l.key.0).or_default().push(Posting { track_id, anchor_t: l.anchor_t });
        }
        Ok(())
    }

    pub fn freeze(self) -> FingerprintIndex {
        let mut keys: Vec<u64> = self.buckets.keys().copied().collect();
        keys.sort_unstable();
        let mut buckets = self.buckets;
        let mut postings = Vec::with_capacity(buckets.values().map(Vec::len).sum());
        let mut ranges = HashMap::with_capacity(keys.len());
        for k in &keys {
            let mut v = buckets.remove(k).unwrap_or_default();
            v.sort_unstable();
            ranges.insert(*k, (postings.len() as u32, v.len() as u32));
            postings.extend(v);
        }
        FingerprintIndex { catalog: self.catalog, keys, ranges, postings }
    }
}

/// Immutable, query-only index.
#[derive(Debug, Clone, Default)]
pub struct FingerprintIndex {
    catalog: BTreeMap<u32, TrackMeta>,
    keys: Vec<u64>,
    ranges: HashMap<u64, (u32, u32)>,
    postings: Vec<Posting>,
}

impl PartialEq for FingerprintIndex {
    fn eq(&self, other: &Self) -> bool {
        self.catalog == other.catalog
            && self.keys == other.keys
            && self.keys.iter().all(|k| self.postings(*k) == other.postings(*k))
    }
}

impl FingerprintIndex {
    pub fn catalog(&self) -> &BTreeMap<u32, TrackMeta> {
        &self.catalog
    }

    pub fn n_tracks(&self) -> usize {
        self.catalog.len()
    }

    pub fn n_keys(&self) -> usize {
        self.keys.len()
    }

    pub fn n_postings(&self) -> usize {
        self.postings.len()
    }

    /// Keys in ascending order.
    pub fn keys(&self) -> &[u64] {
        &self.keys
    }

    /// Postings under `key`, sorted by track then time.
    pub fn postings(&self, key: u64) -> &[Posting] {
        match self.ranges.get(&key) {
            Some(&(start, len)) => &self.postings[start as usize..(start + len) as usize],
            None => &[],
        }
    }

    /// Candidates ranked by score (descending), then track id.
    pub fn query(&self, landmarks: &[Landmark], params: &QueryParams) -> Vec<MatchResult> {
        let mut votes: Vec<(u32, i64)> = Vec::new();
        for l in landmarks {
            for p in self.postings(l.key.0) {
                votes.push((p.track_id, p.anchor_t as i64 - l.anchor_t as i64));
            }
        }
        votes.sort_unstable();
        let mut out = Vec::new();
        let mut i = 0;
        while i < votes.len() {
            let track = votes[i].0;
            let mut j = i;
            while j < votes.len() && votes[j].0 == track {
                j += 1;
            }
            // run-length histogram over sorted offsets
            let mut hist: Vec<(i64, u32)> = Vec::new();
            for &(_, o) in &votes[i..j] {
                match hist.last_mut() {
                    Some((lo, c)) if *lo == o => *c += 1,
                    _ => hist.push((o, 1)),
                }
            }
            let (score, offset) = best_bin(&hist, params.smear);
            out.push(MatchResult { track_id: track, score, offset_frames: offset, matched: score >= params.min_votes });
            i = j;
        }
        out.sort_by(|a, b| b.score.cmp(&a.score).then(a.track_id.cmp(&b.track_id)));
        out
    }

    pub fn identify(&self, w: &Waveform, fp: &Fingerprinter, params: &IdentifyParams) -> Result<Identification> {
        let min = params.min_query_secs.max(fp.min_duration_secs());
        if w.duration_secs() < min {
            return Err(Error::invalid(format!(
                "query of {:.3} s is shorter than the {:.3} s minimum",
                w.duration_secs(),
                min
            )));
        }
        let lms = fp.landmarks(w)?;
        let top = self.query(&lms, &params.query).into_iter().next();
        Ok(Identification { top, query_landmarks: lms.len() })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(16 + self.postings.len() * 8 + self.keys.len() * 12);
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&VERSION.to_be_bytes());
        b.extend_from_slice(&(self.catalog.len() as u32).to_be_bytes());
        for (id, m) in &self.catalog {
            b.extend_from_slice(&id.to_be_bytes());
            b.extend_from_slice(&m.duration_secs.to_be_bytes());
            b.extend_from_slice(&(m.title.len() as u32).to_be_bytes());
            b.extend_from_slice(m.title.as_bytes());
        }
        b.extend_from_slice(&(self.keys.len() as u64).to_be_bytes());
        for &k in &self.keys {
            let ps = self.postings(k);
            b.extend_from_slice(&k.to_be_bytes());
            b.extend_from_slice(&(ps.len() as u32).to_be_bytes());
            for p in ps {
                b.extend_from_slice(&p.track_id.to_be_bytes());
                b.extend_from_slice(&p.anchor_t.to_be_bytes());
            }
        }
        let crc = crc32fast::hash(&b);
        b.extend_from_slice(&crc.to_be_bytes());
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() + 2 + 4 {
            return Err(Error::Format("index file truncated".into()));
        }
        let (body, trailer) = bytes.split_at(bytes.len() - 4);
        if &body[..4] != MAGIC {
            return Err(Error::Format("not an FPX1 index".into()));
        }
        let stored = u32::from_be_bytes(trailer.try_into().expect("4 bytes"));
        if crc32fast::hash(body) != stored {
            return Err(Error::Format("index checksum mismatch".into()));
        }
        let mut r = Reader { b: body, pos: 4 };
        let version = u16::from_be_bytes(r.take()?);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported index version {version}")));
        }
        let n_tracks = u32::from_be_bytes(r.take()?);
        let mut catalog = BTreeMap::new();
        for _ in 0..n_tracks {
            let id = u32::from_be_bytes(r.take()?);
            let duration_secs = f64::from_be_bytes(r.take()?);
            let len = u32::from_be_bytes(r.take()?) as usize;
            let title = String::from_utf8(r.bytes(len)?.to_vec())
                .map_err(|_| Error::Format("track title is not UTF-8".into()))?;
            if catalog.insert(id, TrackMeta { title, duration_secs }).is_some() {
                return Err(Error::Format(format!("track {id} listed twice")));
            }
        }
        let n_keys = u64::from_be_bytes(r.take()?);
        let mut b = IndexBuilder { catalog, buckets: HashMap::new() };
        let mut prev: Option<u64> = None;
        for _ in 0..n_keys {
            let key = u64::from_be_bytes(r.take()?);
            if prev.is_some_and(|p| p >= key) {
                return Err(Error::Format("index keys out of order".into()));
            }
            prev = Some(key);
            let n = u32::from_be_bytes(r.take()?) as usize;
            let mut v = Vec::with_capacity(n.min(r.remaining() / 8));
            for _ in 0..n {
                let track_id = u32::from_be_bytes(r.take()?);
                let anchor_t = u32::from_be_bytes(r.take()?);
                if !b.catalog.contains_key(&track_id) {
                    return Err(Error::Format(format!("posting for unknown track {track_id}")));
                }
                v.push(Posting { track_id, anchor_t });
            }
            b.buckets.insert(key, v);
        }
        if r.remaining() != 0 {
            return Err(Error::Format("trailing bytes in index".into()));
        }
        Ok(b.freeze())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

/// Highest (smeared) bin; ties go to the larger raw count, then the smaller offset.
fn best_bin(hist: &[(i64, u32)], smear: bool) -> (u32, i64) {
    let raw = |o: i64| -> u32 {
        hist.binary_search_by_key(&o, |h| h.0).map(|i| hist[i].1).unwrap_or(0)
    };
    let mut best = (0u32, 0u32, 0i64);
    let mut consider = |o: i64| {
        let r = raw(o);
        let s = if smear { raw(o - 1) + r + raw(o + 1) } else { r };
        if s > best.0 || (s == best.0 && (r > best.1 || (r == best.1 && o < best.2))) {
            best = (s, r, o);
        }
    };
    for &(o, _) in hist {
        consider(o);
        if smear {
            // a bin between two occupied neighbours can outscore both
            consider(o + 1);
        }
    }
    (best.0, best.2)
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::Format("index file truncated".into()));
        }
        let s = &self.b[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.bytes(N)?.try_into().expect("length checked"))
    }

    fn remaining(&self) -> usize {
        self.b.len() - self.pos
    }
}
