use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::spectro::{Geometry, Spectrogram};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub t: u32,
    pub f: u32,
    pub magnitude: f32,
}

impl Peak {
    pub fn coord(&self) -> (u32, u32) {
        (self.t, self.f)
    }
}

/// Constellation map: peaks sorted by `(t, f)`, unique coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakSet {
    peaks: Vec<Peak>,
    frames: usize,
    bins: usize,
}

impl PeakSet {
    pub fn new(mut peaks: Vec<Peak>, shape: (usize, usize)) -> Result<Self> {
        let (frames, bins) = shape;
        peaks.sort_by_key(Peak::coord);
        for w in peaks.windows(2) {
            if w[0].coord() == w[1].coord() {
                return Err(Error::invalid(format!("duplicate peak at {:?}", w[0].coord())));
            }
        }
        if let Some(p) = peaks
            .iter()
            .find(|p| p.t as usize >= frames || p.f as usize >= bins)
        {
            return Err(Error::invalid(format!(
                "peak {:?} outside shape {frames}x{bins}",
                p.coord()
            )));
        }
        Ok(Self { peaks, frames, bins })
    }

    pub fn empty(shape: (usize, usize)) -> Self {
        Self {
            peaks: Vec::new(),
            frames: shape.0,
            bins: shape.1,
        }
    }

    pub(crate) fn from_sorted_unchecked(peaks: Vec<Peak>, shape: (usize, usize)) -> Self {
        debug_assert!(peaks.windows(2).all(|w| w[0].coord() < w[1].coord()));
        Self {
            peaks,
            frames: shape.0,
            bins: shape.1,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.frames, self.bins)
    }

    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Peak> {
        self.peaks.iter()
    }

    pub fn as_slice(&self) -> &[Peak] {
        &self.peaks
    }

    pub fn contains(&self, t: u32, f: u32) -> bool {
        self.peaks.binary_search_by_key(&(t, f), Peak::coord).is_ok()
    }

    pub fn coords(&self) -> BTreeSet<(u32, u32)> {
        self.peaks.iter().map(Peak::coord).collect()
    }

    pub fn to_mask(&self) -> PeakMask {
        mask_from_peaks(self)
    }

    /// Spectrogram holding each peak's magnitude, zero elsewhere.
    pub fn magnitude_map(&self, geometry: Geometry) -> Result<Spectrogram> {
        let mut v = vec![0.0f32; self.frames * self.bins];
        for p in &self.peaks {
            v[p.t as usize * self.bins + p.f as usize] = p.magnitude;
        }
        Spectrogram::new(v, self.frames, self.bins, geometry)
    }

    /// CSV with header `t,f,mag`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,f,mag\n");
        for p in &self.peaks {
            let _ = writeln!(s, "{},{},{}", p.t, p.f, p.magnitude);
        }
        s
    }

    pub fn from_csv(text: &str, shape: (usize, usize)) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("t,f,mag") {
            return Err(Error::Format("peak CSV must start with `t,f,mag`".into()));
        }
        let mut peaks = Vec::new();
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = || Error::Format(format!("peak CSV line {}: `{line}`", n + 2));
            let mut it = line.split(',');
            let t = it.next().and_then(|v| v.trim().parse().ok()).ok_or_else(bad)?;
            let f = it.next().and_then(|v| v.trim().parse().ok()).ok_or_else(bad)?;
            let magnitude = it.next().and_then(|v| v.trim().parse().ok()).ok_or_else(bad)?;
            peaks.push(Peak { t, f, magnitude });
        }
        PeakSet::new(peaks, shape)
    }
}

/// Binary mask, `frames x bins`, time-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeakMask {
    cells: Vec<bool>,
    frames: usize,
    bins: usize,
}

impl PeakMask {
    pub fn from_coords(coords: impl IntoIterator<Item = (usize, usize)>, shape: (usize, usize)) -> Result<Self> {
        let (frames, bins) = shape;
        let mut cells = vec![false; frames * bins];
        for (t, f) in coords {
            if t >= frames || f >= bins {
                return Err(Error::invalid(format!("({t}, {f}) outside {frames}x{bins}")));
            }
            cells[t * bins + f] = true;
        }
        Ok(Self { cells, frames, bins })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.frames, self.bins)
    }

    #[inline]
    pub fn get(&self, t: usize, f: usize) -> bool {
        self.cells[t * self.bins + f]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn coords(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let bins = self.bins;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(move |(i, _)| (i / bins, i % bins))
    }

    /// 0/1 spectrogram for SPG1 export.
    pub fn to_spectrogram(&self, geometry: Geometry) -> Result<Spectrogram> {
        let v = self.cells.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect();
        Spectrogram::new(v, self.frames, self.bins, geometry)
    }

    /// Cells with value > 0 are set.
    pub fn from_spectrogram(s: &Spectrogram) -> Self {
        Self {
            cells: s.values().iter().map(|&v| v > 0.0).collect(),
            frames: s.frames(),
            bins: s.bins(),
        }
    }
}

pub fn mask_from_peaks(ps: &PeakSet) -> PeakMask {
    PeakMask::from_coords(ps.iter().map(|p| (p.t as usize, p.f as usize)), ps.shape())
        .expect("peak set coordinates are in shape")
}
