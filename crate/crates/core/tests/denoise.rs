mod common;

use common::*;
use peakfp::denoise::*;
use peakfp::fingerprint::{FingerprintConfig, Fingerprinter};
use peakfp::peakpipe::{run_pipeline, PipelineConfig};
use proptest::prelude::*;

fn all() -> Vec<Box<dyn Denoiser>> {
    ["none", "specsub", "specsub:50,1,0.1", "wiener", "wiener:20,0.2"]
        .iter()
        .map(|s| s.parse::<DenoiserSpec>().unwrap().build().unwrap())
        .collect()
}

#[test]
fn identity_is_bit_identical_inside_the_fingerprinter() {
    let s = random_spectrogram(300, 117, 4, 0.2);
    let direct = run_pipeline(&s, &PipelineConfig::default()).unwrap();
    let fp = Fingerprinter::new(FingerprintConfig::default()).unwrap().with_denoiser(Box::new(identity_denoiser()));
    let via = fp.from_spectrogram(&s).unwrap();
    assert_eq!(via.spectrogram, s);
    assert_eq!(via.stages, direct);
}

#[test]
fn spec_labels_round_trip() {
    for s in ["none", "specsub", "wiener", "file:/tmp/x"] {
        let d: DenoiserSpec = s.parse().unwrap();
        let back: DenoiserSpec = d.label().parse().unwrap();
        assert_eq!(back, d);
    }
    assert!("median".parse::<DenoiserSpec>().is_err());
    assert!("specsub:101,1,0".parse::<DenoiserSpec>().ok().and_then(|d| d.build().ok()).is_none());
}

#[test]
fn file_backed_reads_by_source_id() {
    let dir = tempfile::tempdir().unwrap();
    let s = random_spectrogram(20, 12, 1, 0.0).with_source_id("seg_a");
    let cleaned = random_spectrogram(20, 12, 2, 0.5);
    peakfp::spectro::spg::write(dir.path().join("seg_a.spg"), &cleaned).unwrap();
    let d = file_backed_denoiser(dir.path()).unwrap();
    assert_eq!(d.denoise(&s).unwrap().values(), cleaned.values());
    assert!(d.denoise(&s.clone().with_source_id("missing")).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shape_kept_and_output_non_negative(seed in 0u64..10_000, frames in 1usize..60, bins in 1usize..40) {
        let s = random_spectrogram(frames, bins, seed, 0.3);
        for d in all() {
            let out = d.denoise(&s).unwrap();
            prop_assert_eq!(out.shape(), s.shape());
            prop_assert_eq!(out.geometry(), s.geometry());
            prop_assert!(out.values().iter().all(|v| *v >= 0.0 && v.is_finite()));
        }
        prop_assert_eq!(identity_denoiser().denoise(&s).unwrap(), s);
    }
}
