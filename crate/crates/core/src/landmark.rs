//! Triplet and quad landmarks built from a constellation map, and their
//! packed 64-bit index keys.
//!
//! Triplets store `(f1 - f2, f2 - f3, coarse f1, coarse f3, (t2 - t1) / (t3 - t1))`
//! plus the anchor `(t1, f1)` and span `t3 - t1`. Quads store the inner
//! points C, D normalised into the box spanned by root A and corner B.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::peakpipe::{Peak, PeakSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingWindow {
    pub dt_min: u32,
    pub dt_max: u32,
    pub df_max: u32,
}

impl Default for PairingWindow {
    fn default() -> Self {
        Self {
            dt_min: 5,
            dt_max: 90,
            df_max: 36,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandmarkKind {
    Triplet,
    Quad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkConfig {
    pub window: PairingWindow,
    pub fanout: usize,
    /// Bins per coarse frequency cell (a third of an octave by default).
    pub coarse_bins: u32,
    pub kinds: Vec<LandmarkKind>,
}

impl Default for LandmarkConfig {
    fn default() -> Self {
        Self {
            window: PairingWindow::default(),
            fanout: 8,
            coarse_bins: 6,
            kinds: vec![LandmarkKind::Triplet],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripletHash {
    pub df12: i32,
    pub df23: i32,
    pub f1_coarse: u32,
    pub f3_coarse: u32,
    pub time_ratio: f64,
    pub anchor_t: u32,
    pub anchor_f: u32,
    pub span: u32,
}

impl TripletHash {
    /// `None` unless `t1 < t2 < t3`.
    pub fn from_points(p1: (u32, u32), p2: (u32, u32), p3: (u32, u32), coarse_bins: u32) -> Option<Self> {
        let ((t1, f1), (t2, f2), (t3, f3)) = (p1, p2, p3);
        if !(t1 < t2 && t2 < t3) || coarse_bins == 0 {
            return None;
        }
        Some(Self {
            df12: f1 as i32 - f2 as i32,
            df23: f2 as i32 - f3 as i32,
            f1_coarse: f1 / coarse_bins,
            f3_coarse: f3 / coarse_bins,
            time_ratio: (t2 - t1) as f64 / (t3 - t1) as f64,
            anchor_t: t1,
            anchor_f: f1,
            span: t3 - t1,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadHash {
    pub cx: f64,
    pub cy: f64,
    pub dx: f64,
    pub dy: f64,
    pub anchor_t: u32,
    pub anchor_f: u32,
    pub span: u32,
}

impl QuadHash {
    /// `None` unless `t_A < t_C <= t_D < t_B`, `f_A != f_B` and C, D lie in
    /// the frequency range of the A-B box.
    pub fn from_points(a: (u32, u32), b: (u32, u32), c: (u32, u32), d: (u32, u32)) -> Option<Self> {
        let (ta, fa) = (a.0 as f64, a.1 as f64);
        let (tb, fb) = (b.0 as f64, b.1 as f64);
        if !(a.0 < c.0 && c.0 <= d.0 && d.0 < b.0) || a.1 == b.1 {
            return None;
        }
        let (lo, hi) = (a.1.min(b.1), a.1.max(b.1));
        if !(lo..=hi).contains(&c.1) || !(lo..=hi).contains(&d.1) {
            return None;
        }
        let nt = |t: u32| (t as f64 - ta) / (tb - ta);
        let nf = |f: u32| (f as f64 - fa) / (fb - fa);
        Some(Self {
            cx: nt(c.0),
            cy: nf(c.1),
            dx: nt(d.0),
            dy: nf(d.1),
            anchor_t: a.0,
            anchor_f: a.1,
            span: b.0 - a.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LandmarkHash {
    Triplet(TripletHash),
    Quad(QuadHash),
}

impl LandmarkHash {
    pub fn kind(&self) -> LandmarkKind {
        match self {
            LandmarkHash::Triplet(_) => LandmarkKind::Triplet,
            LandmarkHash::Quad(_) => LandmarkKind::Quad,
        }
    }

    pub fn anchor(&self) -> (u32, u32, u32) {
        match self {
            LandmarkHash::Triplet(h) => (h.anchor_t, h.anchor_f, h.span),
            LandmarkHash::Quad(h) => (h.anchor_t, h.anchor_f, h.span),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PackedKey(pub u64);

/// Bit widths of the packed fields.
///
/// Quad keys (bit 63 clear): `cx` in bits 24..32, `cy` 16..24, `dx` 8..16,
/// `dy` 0..8, bits 32..48 reserved (zero). Each coordinate maps to
/// `min(floor(v * 256), 255)`.
///
/// Triplet keys (bit 63 set): `df12` in bits 0..7 and `df23` in 7..14 as
/// 7-bit two's complement, coarse `f1` in 14..22, coarse `f3` in 22..30,
/// time ratio in 30..38 quantised like a quad coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quantization;

const TRIPLET_TAG: u64 = 1 << 63;

fn quantize_unit(v: f64, what: &str) -> Result<u64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Range(format!("{what} = {v} is outside [0, 1]")));
    }
    Ok(((v * 256.0).floor() as u64).min(255))
}

fn signed7(v: i32, what: &str) -> Result<u64> {
    if !(-64..=63).contains(&v) {
        return Err(Error::Range(format!("{what} = {v} does not fit 7 signed bits")));
    }
    Ok((v as u64) & 0x7f)
}

fn unsigned8(v: u32, what: &str) -> Result<u64> {
    if v > 255 {
        return Err(Error::Range(format!("{what} = {v} does not fit 8 bits")));
    }
    Ok(v as u64)
}

pub fn pack_key(h: &LandmarkHash, _q: Quantization) -> Result<PackedKey> {
    let key = match h {
        LandmarkHash::Quad(q) => {
            (quantize_unit(q.cx, "cx")? << 24)
                | (quantize_unit(q.cy, "cy")? << 16)
                | (quantize_unit(q.dx, "dx")? << 8)
                | quantize_unit(q.dy, "dy")?
        }
        LandmarkHash::Triplet(t) => {
            if !(t.time_ratio > 0.0 && t.time_ratio < 1.0) {
                return Err(Error::Range(format!("time ratio {} is outside (0, 1)", t.time_ratio)));
            }
            TRIPLET_TAG
                | signed7(t.df12, "df12")?
                | (signed7(t.df23, "df23")? << 7)
                | (unsigned8(t.f1_coarse, "coarse f1")? << 14)
                | (unsigned8(t.f3_coarse, "coarse f3")? << 22)
                | (quantize_unit(t.time_ratio, "time ratio")? << 30)
        }
    };
    Ok(PackedKey(key))
}

fn paired(a: &Peak, b: &Peak, w: &PairingWindow) -> bool {
    let dt = b.t.wrapping_sub(a.t);
    b.t > a.t && dt >= w.dt_min.max(1) && dt <= w.dt_max && a.f.abs_diff(b.f) <= w.df_max
}

/// Peaks after `peaks[i]` within `dt_max` frames.
fn horizon<'a>(peaks: &'a [Peak], i: usize, dt_max: u32) -> &'a [Peak] {
    let t = peaks[i].t;
    let end = peaks[i + 1..].partition_point(|p| p.t <= t.saturating_add(dt_max));
    &peaks[i + 1..i + 1 + end]
}

/// Triplets `t1 < t2 < t3` where consecutive peaks satisfy the pairing window
/// and `t3 - t1 <= dt_max`. Per anchor, the `fanout` candidates with the
/// shortest span are kept (ties by `t2`, `f2`, `f3`).
pub fn build_triplets(ps: &PeakSet, window: &PairingWindow, fanout: usize, coarse_bins: u32) -> Vec<TripletHash> {
    let peaks = ps.as_slice();
    let mut out = Vec::new();
    let mut cand: Vec<(u32, u32, u32, u32, usize, usize)> = Vec::new();
    for i in 0..peaks.len() {
        let p1 = &peaks[i];
        let near = horizon(peaks, i, window.dt_max);
        cand.clear();
        for (j, p2) in near.iter().enumerate() {
            if !paired(p1, p2, window) {
                continue;
            }
            for (l, p3) in near.iter().enumerate().skip(j + 1) {
                if paired(p2, p3, window) && p3.t - p1.t <= window.dt_max {
                    cand.push((p3.t - p1.t, p2.t, p2.f, p3.f, j, l));
                }
            }
        }
        cand.sort_unstable();
        for &(_, _, _, _, j, l) in cand.iter().take(fanout) {
            let (p2, p3) = (&near[j], &near[l]);
            if let Some(h) = TripletHash::from_points(p1.coord(), p2.coord(), p3.coord(), coarse_bins) {
                out.push(h);
            }
        }
    }
    out
}

/// Quads rooted at each peak A with corner B satisfying the pairing window
/// (and `f_B != f_A`); C and D are any peaks, possibly the same one, inside
/// the box with `t_A < t_C <= t_D < t_B`. Per anchor the `fanout` quads with
/// the shortest span are kept.
pub fn build_quads(ps: &PeakSet, window: &PairingWindow, fanout: usize) -> Vec<QuadHash> {
    let peaks = ps.as_slice();
    let mut out = Vec::new();
    let mut cand: Vec<(u32, (u32, u32), (u32, u32), (u32, u32))> = Vec::new();
    for i in 0..peaks.len() {
        let a = &peaks[i];
        let near = horizon(peaks, i, window.dt_max);
        cand.clear();
        for (bi, b) in near.iter().enumerate() {
            if !paired(a, b, window) || a.f == b.f {
                continue;
            }
            let (lo, hi) = (a.f.min(b.f), a.f.max(b.f));
            let inner: Vec<&Peak> = near[..bi]
                .iter()
                .filter(|p| p.t > a.t && p.t < b.t && (lo..=hi).contains(&p.f))
                .collect();
            for (ci, c) in inner.iter().enumerate() {
                for d in &inner[ci..] {
                    cand.push((b.t - a.t, b.coord(), c.coord(), d.coord()));
                }
            }
        }
        cand.sort_unstable();
        for &(_, b, c, d) in cand.iter().take(fanout) {
            if let Some(q) = QuadHash::from_points(a.coord(), b, c, d) {
                out.push(q);
            }
        }
    }
    out
}

/// An indexable landmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Landmark {
    pub kind: LandmarkKind,
    pub key: PackedKey,
    pub anchor_t: u32,
    pub anchor_f: u32,
    pub span: u32,
}

impl Landmark {
    pub fn from_hash(h: &LandmarkHash) -> Result<Self> {
        let (anchor_t, anchor_f, span) = h.anchor();
        Ok(Self {
            kind: h.kind(),
            key: pack_key(h, Quantization)?,
            anchor_t,
            anchor_f,
            span,
        })
    }
}

/// All configured landmark kinds for a peak set, packed. Hashes whose fields
/// fall outside the key ranges are skipped.
pub fn extract_landmarks(ps: &PeakSet, cfg: &LandmarkConfig) -> Vec<Landmark> {
    let mut out = Vec::new();
    for kind in &cfg.kinds {
        match kind {
            LandmarkKind::Triplet => out.extend(
                build_triplets(ps, &cfg.window, cfg.fanout, cfg.coarse_bins)
                    .into_iter()
                    .filter_map(|h| Landmark::from_hash(&LandmarkHash::Triplet(h)).ok()),
            ),
            LandmarkKind::Quad => out.extend(
                build_quads(ps, &cfg.window, cfg.fanout)
                    .into_iter()
                    .filter_map(|h| Landmark::from_hash(&LandmarkHash::Quad(h)).ok()),
            ),
        }
    }
    out
}

/// CSV dump: `kind,key_hex,anchor_t,anchor_f,span`.
pub fn landmarks_to_csv(lms: &[Landmark]) -> String {
    let mut s = String::from("kind,key_hex,anchor_t,anchor_f,span\n");
    for l in lms {
        let kind = match l.kind {
            LandmarkKind::Triplet => "triplet",
            LandmarkKind::Quad => "quad",
        };
        let _ = writeln!(s, "{kind},{:016x},{},{},{}", l.key.0, l.anchor_t, l.anchor_f, l.span);
    }
    s
}
