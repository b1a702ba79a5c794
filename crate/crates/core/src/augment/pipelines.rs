use std::collections::BTreeMap;
use std::sync::OnceLock;

use super::{AugmentationSpec, ParamRange, TransformKind, TransformSpec};

/// Evaluation pipelines, ordered from mildest to harshest within each family.
pub const BUILTIN_EVALUATION_PIPELINES: [&str; 7] = [
    "bn_light",
    "bn_medium",
    "bn_hard",
    "reverb_only",
    "reverb_bn",
    "complete_light",
    "complete_hard",
];

pub const TRAINING_PIPELINE: &str = "train_hard";

fn r(lo: f64, hi: f64) -> ParamRange {
    ParamRange { lo, hi }
}

fn bn(lo: f64, hi: f64) -> TransformSpec {
    TransformSpec::always(TransformKind::BackgroundNoise { snr_db: r(lo, hi) })
}

fn full_chain(name: &str, snr: (f64, f64), gain: f64, dropout: f64, device_p: f64) -> AugmentationSpec {
    AugmentationSpec::new(
        name,
        vec![
            TransformSpec::always(TransformKind::SpeakerFilter { cutoff_hz: r(20.0, 150.0) }),
            TransformSpec::always(TransformKind::IrConvolve),
            bn(snr.0, snr.1),
            TransformSpec::always(TransformKind::Gain { gain_db: r(-gain, gain) }),
            TransformSpec::always(TransformKind::SampleDropout { fraction: r(0.0, dropout) }),
            TransformSpec::new(device_p, TransformKind::DeviceLowpass { cutoff_hz: r(4000.0, 16000.0) }),
            TransformSpec::new(device_p, TransformKind::DeviceHighpass { cutoff_hz: r(50.0, 300.0) }),
        ],
    )
}

fn build() -> BTreeMap<String, AugmentationSpec> {
    let specs = vec![
        AugmentationSpec::new("none", vec![]),
        AugmentationSpec::new("bn_light", vec![bn(5.0, 10.0)]),
        AugmentationSpec::new("bn_medium", vec![bn(0.0, 5.0)]),
        AugmentationSpec::new("bn_hard", vec![bn(-10.0, -5.0)]),
        AugmentationSpec::new("reverb_only", vec![TransformSpec::always(TransformKind::IrConvolve)]),
        AugmentationSpec::new(
            "reverb_bn",
            vec![TransformSpec::always(TransformKind::IrConvolve), bn(0.0, 5.0)],
        ),
        full_chain("complete_light", (5.0, 10.0), 2.0, 0.002, 0.5),
        full_chain("complete_hard", (-10.0, -5.0), 5.0, 0.01, 1.0),
        full_chain(TRAINING_PIPELINE, (-10.0, -5.0), 5.0, 0.01, 0.5),
    ];
    specs.into_iter().map(|s| (s.name.clone(), s)).collect()
}

fn table() -> &'static BTreeMap<String, AugmentationSpec> {
    static TABLE: OnceLock<BTreeMap<String, AugmentationSpec>> = OnceLock::new();
    TABLE.get_or_init(build)
}

/// Every named pipeline, including `"none"` (no transforms).
pub fn builtin_pipelines() -> BTreeMap<String, AugmentationSpec> {
    table().clone()
}

pub fn builtin_pipeline(name: &str) -> Option<&'static AugmentationSpec> {
    table().get(name)
}
