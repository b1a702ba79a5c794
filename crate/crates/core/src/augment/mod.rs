//! Waveform-domain degradations: speaker coloration, room reverberation,
//! background noise and a device chain, drawn from seeded parameter ranges.

mod corpus;
mod pipelines;
mod transforms;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectro::Waveform;

pub use corpus::{synthetic_ir, synthetic_noise, Corpus, CorpusItem, CorpusRef, NoiseColor};
pub use pipelines::{builtin_pipeline, builtin_pipelines, BUILTIN_EVALUATION_PIPELINES, TRAINING_PIPELINE};
pub use transforms::{
    add_noise_at_snr, apply_gain, convolve_ir, first_order_filter, measured_snr_db, noise_gain_for_snr,
    sample_dropout, FilterKind,
};

/// Closed interval sampled uniformly; `lo == hi` always yields `lo`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub lo: f64,
    pub hi: f64,
}

/// Target signal-to-noise range in dB.
pub type SnrRangeDb = ParamRange;

impl ParamRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let r = ParamRange { lo, hi };
        r.validate()?;
        Ok(r)
    }

    pub fn fixed(v: f64) -> Self {
        ParamRange { lo: v, hi: v }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo > self.hi {
            return Err(Error::Range(format!("bad range [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.random_range(self.lo..=self.hi)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformKind {
    /// First-order highpass standing in for a small loudspeaker.
    SpeakerFilter { cutoff_hz: ParamRange },
    IrConvolve,
    BackgroundNoise { snr_db: SnrRangeDb },
    Gain { gain_db: ParamRange },
    SampleDropout { fraction: ParamRange },
    DeviceLowpass { cutoff_hz: ParamRange },
    DeviceHighpass { cutoff_hz: ParamRange },
}

impl TransformKind {
    pub fn name(&self) -> &'static str {
        match self {
            TransformKind::SpeakerFilter { .. } => "speaker_filter",
            TransformKind::IrConvolve => "ir_convolve",
            TransformKind::BackgroundNoise { .. } => "background_noise",
            TransformKind::Gain { .. } => "gain",
            TransformKind::SampleDropout { .. } => "sample_dropout",
            TransformKind::DeviceLowpass { .. } => "device_lowpass",
            TransformKind::DeviceHighpass { .. } => "device_highpass",
        }
    }

    /// Position in the signal chain; specs must be non-decreasing in rank.
    pub fn rank(&self) -> u8 {
        match self {
            TransformKind::SpeakerFilter { .. } => 0,
            TransformKind::IrConvolve => 1,
            TransformKind::BackgroundNoise { .. } => 2,
            _ => 3,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            TransformKind::IrConvolve => Ok(()),
            TransformKind::BackgroundNoise { snr_db: r } | TransformKind::Gain { gain_db: r } => r.validate(),
            TransformKind::SampleDropout { fraction } => {
                fraction.validate()?;
                if fraction.lo < 0.0 || fraction.hi > 0.01 {
                    return Err(Error::Range("dropout fraction must lie in [0, 0.01]".into()));
                }
                Ok(())
            }
            TransformKind::SpeakerFilter { cutoff_hz }
            | TransformKind::DeviceLowpass { cutoff_hz }
            | TransformKind::DeviceHighpass { cutoff_hz } => {
                cutoff_hz.validate()?;
                if cutoff_hz.lo <= 0.0 {
                    return Err(Error::Range("filter cutoff must be positive".into()));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub probability: f64,
    #[serde(flatten)]
    pub kind: TransformKind,
}

impl TransformSpec {
    pub fn new(probability: f64, kind: TransformKind) -> Self {
        TransformSpec { probability, kind }
    }

    pub fn always(kind: TransformKind) -> Self {
        TransformSpec::new(1.0, kind)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(Error::Range(format!("probability {} outside [0, 1]", self.probability)));
        }
        self.kind.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationSpec {
    pub name: String,
    pub seed: u64,
    pub transforms: Vec<TransformSpec>,
    #[serde(default)]
    pub noise_corpus: CorpusRef,
    #[serde(default)]
    pub ir_corpus: CorpusRef,
}

impl AugmentationSpec {
    pub fn new(name: impl Into<String>, transforms: Vec<TransformSpec>) -> Self {
        AugmentationSpec {
            name: name.into(),
            seed: 0,
            transforms,
            noise_corpus: CorpusRef::Synthetic,
            ir_corpus: CorpusRef::Synthetic,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_corpora(mut self, noise: CorpusRef, ir: CorpusRef) -> Self {
        self.noise_corpus = noise;
        self.ir_corpus = ir;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut rank = 0u8;
        for t in &self.transforms {
            t.validate()?;
            if t.kind.rank() < rank {
                return Err(Error::Config(format!(
                    "{} placed after a later stage of the chain in '{}'",
                    t.kind.name(),
                    self.name
                )));
            }
            rank = t.kind.rank();
        }
        Ok(())
    }

    pub fn needs_noise(&self) -> bool {
        self.transforms
            .iter()
            .any(|t| t.probability > 0.0 && matches!(t.kind, TransformKind::BackgroundNoise { .. }))
    }

    pub fn needs_ir(&self) -> bool {
        self.transforms
            .iter()
            .any(|t| t.probability > 0.0 && matches!(t.kind, TransformKind::IrConvolve))
    }

    /// The background-noise SNR range, if any.
    pub fn snr_range(&self) -> Option<SnrRangeDb> {
        self.transforms.iter().find_map(|t| match t.kind {
            TransformKind::BackgroundNoise { snr_db } => Some(snr_db),
            _ => None,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: AugmentationSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Opened noise and impulse-response pools for a spec.
#[derive(Debug, Default)]
pub struct Corpora {
    pub noise: Option<Corpus>,
    pub ir: Option<Corpus>,
}

impl Corpora {
    pub fn synthetic() -> Self {
        Corpora { noise: Some(Corpus::synthetic()), ir: Some(Corpus::synthetic()) }
    }

    pub fn open(spec: &AugmentationSpec) -> Result<Self> {
        Ok(Corpora { noise: Corpus::open(&spec.noise_corpus)?, ir: Corpus::open(&spec.ir_corpus)? })
    }
}

/// One fired transform with the parameters that were drawn for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppliedTransform {
    pub kind: String,
    pub params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub source: Option<String>,
}

pub fn log_to_json_lines(log: &[AppliedTransform]) -> Result<String> {
    let mut s = String::new();
    for t in log {
        s.push_str(&serde_json::to_string(t)?);
        s.push('\n');
    }
    Ok(s)
}

/// The generator for one item: ChaCha8 keyed by `seed`, stream `item_seed`.
pub fn item_rng(seed: u64, item_seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(item_seed);
    rng
}

fn need<'a>(c: &'a Option<Corpus>, what: &str) -> Result<&'a Corpus> {
    c.as_ref().ok_or_else(|| Error::Config(format!("no {what} corpus configured")))
}

pub fn augment(
    x: &Waveform,
    spec: &AugmentationSpec,
    corpora: &Corpora,
    item_seed: u64,
) -> Result<(Waveform, Vec<AppliedTransform>)> {
    spec.validate()?;
    if spec.needs_noise() {
        need(&corpora.noise, "noise")?;
    }
    if spec.needs_ir() {
        need(&corpora.ir, "impulse-response")?;
    }
    let mut rng = item_rng(spec.seed, item_seed);
    let mut y = x.clone();
    let mut log = Vec::new();
    for t in &spec.transforms {
        let roll: f64 = rng.random();
        if roll >= t.probability {
            continue;
        }
        let mut params = BTreeMap::new();
        let mut source = None;
        y = match &t.kind {
            TransformKind::SpeakerFilter { cutoff_hz } | TransformKind::DeviceHighpass { cutoff_hz } => {
                let fc = cutoff_hz.sample(&mut rng);
                params.insert("cutoff_hz".into(), fc);
                first_order_filter(&y, FilterKind::Highpass, fc)?
            }
            TransformKind::DeviceLowpass { cutoff_hz } => {
                let fc = cutoff_hz.sample(&mut rng);
                params.insert("cutoff_hz".into(), fc);
                first_order_filter(&y, FilterKind::Lowpass, fc)?
            }
            TransformKind::IrConvolve => {
                let item = need(&corpora.ir, "impulse-response")?.draw_ir(&mut rng, y.sample_rate_hz())?;
                params.insert("ir_len".into(), item.audio.len() as f64);
                source = Some(item.name);
                convolve_ir(&y, &item.audio)?
            }
            TransformKind::BackgroundNoise { snr_db } => {
                let snr = snr_db.sample(&mut rng);
                let item = need(&corpora.noise, "noise")?.draw_noise(&mut rng, y.len(), y.sample_rate_hz())?;
                let (mixed, offset) = add_noise_at_snr(&y, &item.audio, snr, &mut rng)?;
                params.insert("snr_db".into(), snr);
                params.insert("noise_offset".into(), offset as f64);
                source = Some(item.name);
                mixed
            }
            TransformKind::Gain { gain_db } => {
                let g = gain_db.sample(&mut rng);
                params.insert("gain_db".into(), g);
                apply_gain(&y, g)?
            }
            TransformKind::SampleDropout { fraction } => {
                let f = fraction.sample(&mut rng);
                params.insert("fraction".into(), f);
                sample_dropout(&y, f, &mut rng)?
            }
        };
        log.push(AppliedTransform { kind: t.kind.name().to_string(), params, source });
    }
    Ok((y, log))
}
