mod common;

use std::collections::BTreeSet;

use common::*;
use peakfp::peakpipe::*;
use peakfp::spectro::Spectrogram;
use proptest::prelude::*;

fn stage_params(wt: usize, wf: usize, c: f64, cap: usize, slab: usize) -> StageParams {
    StageParams { salience_window: (wt, wf), octave_c: c, density_cap: cap, time_slab_frames: slab }
}

fn picking(t: usize, f: usize, eps: f32) -> PeakPickingParams {
    PeakPickingParams { time_half: t, freq_half: f, silence_threshold: eps }
}

#[test]
fn stage1_matches_oracle() {
    for seed in 0..20 {
        let s = random_spectrogram(40, 30, seed, 0.2);
        for (wt, wf) in [(1, 1), (3, 5), (31, 13), (39, 29)] {
            let got = stage1_salience(&s, &stage_params(wt, wf, 1.0, 3, 10)).unwrap();
            assert_eq!(got.values(), stage1_oracle(&s, wt, wf).as_slice(), "seed {seed} window {wt}x{wf}");
        }
    }
}

#[test]
fn stage2_matches_oracle() {
    for seed in 0..20 {
        let s = random_spectrogram(45, 40, seed, 0.3);
        for (slab, bpo) in [(10, 18), (86, 12), (7, 40)] {
            for c in [f64::NEG_INFINITY, -0.5, 0.0, 1.0, 2.5] {
                let got = stage2_octave_energy(&s, &stage_params(3, 3, c, 3, slab), bpo).unwrap();
                assert_eq!(got.values(), stage2_oracle(&s, slab, bpo, c).as_slice(), "seed {seed} c {c}");
            }
        }
    }
}

#[test]
fn stage3_matches_oracle_with_plateaus() {
    for seed in 0..30 {
        let s = quantized_spectrogram(25, 20, seed, 4);
        for (tau, rho) in [(1, 1), (1, 3), (3, 2)] {
            for eps in [0.0, 0.3] {
                let got = stage3_extract_peaks(&s, &picking(tau, rho, eps)).unwrap();
                assert_eq!(got.coords(), stage3_oracle(&s, tau, rho, eps), "seed {seed}");
            }
        }
    }
}

#[test]
fn stage4_matches_oracle() {
    for seed in 0..20 {
        let s = quantized_spectrogram(60, 36, seed, 6);
        let peaks = stage3_extract_peaks(&s, &picking(1, 1, 0.0)).unwrap();
        let triples: Vec<(u32, u32, f32)> = peaks.iter().map(|p| (p.t, p.f, p.magnitude)).collect();
        for (cap, slab, bpo) in [(1, 10, 12), (3, 86, 18), (2, 7, 5)] {
            let got = stage4_filter_peaks(&peaks, &stage_params(3, 3, 1.0, cap, slab), bpo).unwrap();
            assert_eq!(got.coords(), stage4_oracle(&triples, slab, bpo, cap));
        }
    }
}

#[test]
fn constant_input_has_no_salience_and_no_peaks() {
    let s = Spectrogram::from_rows(&vec![vec![0.7f32; 20]; 40]).unwrap();
    let out = run_pipeline(&s, &PipelineConfig { stages: stage_params(5, 5, 1.0, 3, 10), ..Default::default() });
    let out = out.unwrap();
    assert_eq!(out.stage1.count_nonzero(), 0);
    assert!(out.stage3.is_empty());
}

fn pipeline_fixture(seed: u64) -> (Spectrogram, PipelineConfig) {
    let s = random_spectrogram(90, 40, seed, 0.1);
    let cfg = PipelineConfig {
        stages: stage_params(9, 5, 1.0, 3, 30),
        time_half: 2,
        freq_half: 2,
        relative_silence: 1e-6,
        bins_per_octave: 12,
    };
    (s, cfg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn subset_chain_and_determinism(seed in 0u64..10_000) {
        let (s, cfg) = pipeline_fixture(seed);
        let a = run_pipeline(&s, &cfg).unwrap();
        let b = run_pipeline(&s, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.final_peaks.coords().is_subset(&a.stage3.coords()));
        for (i, &v) in a.stage2.values().iter().enumerate() {
            prop_assert!(v == 0.0 || v == a.stage1.values()[i]);
        }
        for p in a.stage3.iter() {
            prop_assert!(a.stage2.get(p.t as usize, p.f as usize) > 0.0);
        }
    }

    #[test]
    fn sparsity_is_monotone_in_c(seed in 0u64..10_000, c0 in -2.0f64..2.0, dc in 0.0f64..2.0) {
        let s = random_spectrogram(50, 36, seed, 0.2);
        let nz = |c: f64| stage2_octave_energy(&s, &stage_params(3, 3, c, 3, 20), 12).unwrap().count_nonzero();
        prop_assert!(nz(c0 + dc) <= nz(c0));
        prop_assert!(nz(c0) <= nz(f64::NEG_INFINITY));
    }

    #[test]
    fn peak_locations_are_scale_invariant(seed in 0u64..10_000, k in 1u32..12) {
        // power-of-two scaling keeps every comparison exact
        let s = quantized_spectrogram(30, 24, seed, 5);
        let lambda = 2f32.powi(k as i32 - 6);
        let scaled = s.with_values(s.values().iter().map(|v| v * lambda).collect()).unwrap();
        let p = picking(2, 2, 0.0);
        prop_assert_eq!(
            stage3_extract_peaks(&s, &p).unwrap().coords(),
            stage3_extract_peaks(&scaled, &p).unwrap().coords()
        );
    }

    #[test]
    fn peaks_dominate_their_neighbourhood(seed in 0u64..10_000, tau in 1usize..4, rho in 1usize..4) {
        let s = random_spectrogram(30, 30, seed, 0.3);
        let peaks = stage3_extract_peaks(&s, &picking(tau, rho, 0.0)).unwrap();
        let set: BTreeSet<_> = peaks.coords();
        prop_assert_eq!(set, stage3_oracle(&s, tau, rho, 0.0));
    }

    #[test]
    fn csv_round_trip(seed in 0u64..10_000) {
        let s = random_spectrogram(20, 20, seed, 0.5);
        let peaks = stage3_extract_peaks(&s, &picking(1, 1, 0.0)).unwrap();
        prop_assert_eq!(PeakSet::from_csv(&peaks.to_csv(), s.shape()).unwrap(), peaks);
    }
}
