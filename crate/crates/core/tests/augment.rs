mod common;

use common::*;
use peakfp::augment::*;
use peakfp::spectro::Waveform;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_wave(rng: &mut ChaCha8Rng, n: usize, rate: u32) -> Waveform {
    Waveform::new((0..n).map(|_| rng.random_range(-0.5f32..0.5)).collect(), rate).unwrap()
}

#[test]
fn convolution_matches_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (nx, nh) in [(32, 8), (500, 129), (3000, 700)] {
        let x = random_wave(&mut rng, nx, 8000);
        let h = random_wave(&mut rng, nh, 8000);
        let y = convolve_ir(&x, &h).unwrap();
        let xs: Vec<f64> = x.samples().iter().map(|&v| v as f64).collect();
        let hs: Vec<f64> = h.samples().iter().map(|&v| v as f64).collect();
        let o = convolve_oracle(&xs, &hs);
        let peak = o.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = x.peak() as f64 / peak;
        for (a, b) in y.samples().iter().zip(&o) {
            let b = b * scale;
            // outputs are f32; allow one rounding step on top of 1e-10
            assert!((*a as f64 - b).abs() <= 1e-10 + f32::EPSILON as f64 * b.abs(), "{nx}x{nh}");
        }
    }
}

#[test]
fn filter_minus_three_db_at_cutoff() {
    let fs = 44100;
    for kind in [FilterKind::Lowpass, FilterKind::Highpass] {
        for fc in [50.0, 150.0, 1000.0, 4000.0, 16000.0] {
            let x = sine(fc, 1.0, fs, 0.5);
            let y = first_order_filter(&x, kind, fc).unwrap();
            let skip = fs as usize / 5;
            let db = 20.0 * (rms(&y.samples()[skip..]) / rms(&x.samples()[skip..])).log10();
            assert!((db + 3.0103).abs() <= 0.5, "{kind:?} at {fc} Hz: {db} dB");
        }
    }
}

#[test]
fn augment_is_a_function_of_spec_and_item_seed() {
    let x = sine(440.0, 1.0, 44100, 0.4);
    let corpora = Corpora::synthetic();
    for (name, spec) in builtin_pipelines() {
        let spec = spec.with_seed(99);
        let a = augment(&x, &spec, &corpora, 5).unwrap();
        let b = augment(&x, &spec, &corpora, 5).unwrap();
        assert_eq!(a.0, b.0, "{name}");
        assert_eq!(a.1, b.1, "{name}");
        assert_eq!(a.0.len(), x.len());
    }
}

#[test]
fn directory_corpora_are_used() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    peakfp::spectro::wav::write_wav(dir.path().join("hum.wav"), &random_wave(&mut rng, 30000, 22050)).unwrap();
    let spec = AugmentationSpec::new(
        "dir",
        vec![TransformSpec::always(TransformKind::BackgroundNoise { snr_db: ParamRange::fixed(3.0) })],
    )
    .with_corpora(CorpusRef::Directory(dir.path().to_path_buf()), CorpusRef::None);
    let corpora = Corpora::open(&spec).unwrap();
    let x = sine(300.0, 0.5, 44100, 0.3);
    let (y, log) = augment(&x, &spec, &corpora, 0).unwrap();
    assert_eq!(log[0].source.as_deref(), Some("hum.wav"));
    assert!((measured_snr_db(&x, &y) - 3.0).abs() <= 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn snr_calibration(seed in 0u64..100_000, target in -10.0f64..10.0, longer in 0usize..2000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_wave(&mut rng, 4000, 8000);
        let n = random_wave(&mut rng, 4000 + longer, 8000);
        let (y, _) = add_noise_at_snr(&x, &n, target, &mut rng).unwrap();
        prop_assert!((measured_snr_db(&x, &y) - target).abs() <= 0.1);
    }

    #[test]
    fn dropout_never_adds_energy(seed in 0u64..100_000, frac in 0.0f64..=0.01) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_wave(&mut rng, 5000, 8000);
        let y = sample_dropout(&x, frac, &mut rng).unwrap();
        let e = |w: &Waveform| w.samples().iter().map(|&v| (v as f64).powi(2)).sum::<f64>();
        prop_assert!(e(&y) <= e(&x));
        let zeros = y.samples().iter().zip(x.samples()).filter(|(a, b)| **a == 0.0 && **b != 0.0).count();
        prop_assert_eq!(zeros, (frac * 5000.0).floor() as usize);
    }

    #[test]
    fn gain_scales_rms_before_clipping(seed in 0u64..100_000, g in -5.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // |x| <= 0.5 and +5 dB < 1.78x, so nothing clips
        let x = random_wave(&mut rng, 2000, 8000);
        let y = apply_gain(&x, g).unwrap();
        let ratio = y.rms() / x.rms();
        prop_assert!((ratio - 10f64.powf(g / 20.0)).abs() <= 1e-6);
    }

    #[test]
    fn delta_convolution_is_identity(seed in 0u64..100_000, d in 0usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_wave(&mut rng, 400, 8000);
        let mut h = vec![0.0f32; d + 1];
        h[d] = 1.0;
        let y = convolve_ir(&x, &Waveform::new(h, 8000).unwrap()).unwrap();
        let kept = &x.samples()[..400 - d];
        // truncation can drop the peak, so expect the kept part renormalized
        let scale = x.peak() as f64 / kept.iter().fold(0.0f64, |m, v| m.max(v.abs() as f64));
        prop_assert!(y.samples()[..d].iter().all(|&v| v == 0.0));
        for (a, b) in y.samples()[d..].iter().zip(kept) {
            prop_assert!((*a as f64 - *b as f64 * scale).abs() <= 1e-6);
        }
    }
}
