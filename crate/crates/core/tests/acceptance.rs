//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use peakfp::augment::*;
use peakfp::bench::*;
use peakfp::denoise::*;
use peakfp::fingerprint::{FingerprintConfig, Fingerprinter};
use peakfp::landmark::*;
use peakfp::metrics::*;
use peakfp::peakpipe::*;
use peakfp::spectro::{Spectrogram, Waveform};
use peakfp::synth::synth_track;
use peakfp::Execution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const C1_LIMIT: Duration = Duration::from_secs(10);
const C4_TOL_DB: f64 = 0.1;
const C5_LIMIT: Duration = Duration::from_secs(5);
const C6_DELTA_TOL: f64 = 1e-12;
const C6_CUTOFF_TOL_DB: f64 = 0.5;
const C7_CLEAN_MIN: f64 = 0.99;
const C7_MIN_QUERIES: usize = 100;
const C7_LIMIT: Duration = Duration::from_secs(15 * 60);
const C8_MIN_WIN_RATE: f64 = 0.8;
const C9_SYM_TOL: f64 = 1e-12;
// 0.1 is not representable in f32, so the squared error is 0.01 only to f32 rounding
const C9_PSNR_TOL_DB: f64 = 1e-6;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn c1_peak_oracle() -> Outcome {
    let start = Instant::now();
    let mut n = 0;
    for seed in 0..100 {
        // every fourth fixture is quantized so plateaus occur
        let s = if seed % 4 == 3 { quantized_spectrogram(50, 50, seed, 5) } else { random_spectrogram(50, 50, seed, 0.2) };
        for tau in 1..=3 {
            for rho in 1..=3 {
                let p = PeakPickingParams { time_half: tau, freq_half: rho, silence_threshold: 0.0 };
                let got = stage3_extract_peaks(&s, &p).map_err(|e| e.to_string())?.coords();
                ensure!(got == stage3_oracle(&s, tau, rho, 0.0), "seed {seed} tau {tau} rho {rho} differs");
                n += 1;
            }
        }
    }
    let el = start.elapsed();
    ensure!(el < C1_LIMIT, "took {el:?}");
    Ok(format!("{n} spectrograms x windows equal, {el:.2?}"))
}

fn c2_prf_oracle() -> Outcome {
    let shape = (30, 30);
    let m = |c: &std::collections::BTreeSet<(usize, usize)>| PeakMask::from_coords(c.iter().copied(), shape).unwrap();
    let single = |t, f| std::iter::once((t, f)).collect::<std::collections::BTreeSet<_>>();
    let r = peak_prf(&m(&single(6, 6)), &m(&single(5, 5)), 1).unwrap();
    ensure!(r.tp == 1 && r.fp == 0 && r.fn_count == 0, "(6,6) vs (5,5) not a hit: {r:?}");
    let r = peak_prf(&m(&single(7, 5)), &m(&single(5, 5)), 1).unwrap();
    ensure!(r.tp == 0 && r.fp == 1 && r.fn_count == 1, "(7,5) vs (5,5) counted as hit");

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..50 {
        let pred = random_coords(&mut rng, shape.0, shape.1, 10 + i);
        let reference = random_coords(&mut rng, shape.0, shape.1, 60 - i);
        let r = peak_prf(&m(&pred), &m(&reference), 1).unwrap();
        let o = prf_oracle(&pred, &reference, 1);
        ensure!((r.tp, r.fp, r.tp_ref, r.fn_count) == o, "pair {i}: {:?} vs oracle {o:?}", (r.tp, r.fp, r.tp_ref, r.fn_count));
    }
    Ok("50 random pairs and 3x3 window cases exact".into())
}

fn c3_tversky() -> Outcome {
    let half = TverskyParams::new(0.5, 0.5, 1.0).map_err(|e| e.to_string())?;
    for seed in 0..20 {
        let x = random_spectrogram(16, 16, seed, 0.5);
        let c = tversky_components(&x, &x).unwrap();
        ensure!(tversky_index(&c, &TverskyParams::reference()).unwrap() == 1.0, "TI(x,x) != 1 for seed {seed}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let pred: Vec<f32> = (0..100).map(|_| rng.random_bool(0.3) as u8 as f32).collect();
        let gt: Vec<f32> = (0..100).map(|_| rng.random_bool(0.3) as u8 as f32).collect();
        let count = |a: f32, b: f32| pred.iter().zip(&gt).filter(|(p, g)| **p == a && **g == b).count() as f64;
        let (tp, fp, fn_) = (count(1.0, 1.0), count(1.0, 0.0), count(0.0, 1.0));
        let c = tversky_components_slices(&pred, &gt).unwrap();
        let ti = tversky_index(&c, &half).unwrap();
        ensure!((ti - tp / (tp + 0.5 * fp + 0.5 * fn_)).abs() <= 1e-12, "binary TI {ti}");
        let g1 = TverskyParams::new(0.7, 0.3, 1.0).unwrap();
        let t1 = tversky_index(&c, &g1).unwrap();
        ensure!(focal_tversky_loss(&c, &g1).unwrap() == 1.0 - t1, "FTL(gamma=1) != 1 - TI");
    }
    let c = TverskyComponents { true_pos: 3.0, false_pos: 1.0, false_neg: 1.0 };
    let p = TverskyParams::new(0.5, 0.5, 0.75).unwrap();
    ensure!(tversky_index(&c, &p).unwrap() == 0.75, "TI fixture is not 0.75");
    let ftl = focal_tversky_loss(&c, &p).unwrap();
    ensure!((ftl - 0.25f64.powf(0.75)).abs() <= 1e-12, "FTL {ftl}");
    let r = TverskyParams::new(0.7, 0.3, 0.75);
    ensure!(r.is_ok() && r.unwrap() == TverskyParams::reference(), "reference parameters rejected");
    Ok(format!("identity, binary, focal and reference cases hold (FTL = {ftl:.6})"))
}

fn c4_snr() -> Outcome {
    let mut worst = 0.0f64;
    for pair in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + pair);
        let f = rng.random_range(100.0..3000.0);
        let x = sine(f, 1.0, 16000, rng.random_range(0.05..0.9));
        let color = [NoiseColor::White, NoiseColor::Pink, NoiseColor::Brown][pair as usize % 3];
        let len = 16000 + rng.random_range(0..8000);
        let n = synthetic_noise(&mut rng, len, 16000, color).unwrap();
        for target in [-10.0, -5.0, 0.0, 5.0, 10.0] {
            let (y, _) = add_noise_at_snr(&x, &n, target, &mut rng).map_err(|e| e.to_string())?;
            let err = (measured_snr_db(&x, &y) - target).abs();
            worst = worst.max(err);
            ensure!(err <= C4_TOL_DB, "pair {pair} target {target} dB off by {err}");
        }
    }
    Ok(format!("100 mixes, worst error {worst:.2e} dB"))
}

fn c5_landmarks() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_slack = f64::INFINITY;
    for i in 0..1000 {
        let t1 = rng.random_range(0..500u32);
        let t2 = t1 + rng.random_range(5..45u32);
        let t3 = t2 + rng.random_range(5..45u32);
        let f = |r: &mut ChaCha8Rng| r.random_range(0..80u32);
        let (f1, f2, f3) = (f(&mut rng), f(&mut rng), f(&mut rng));
        let k = rng.random_range(1..37u32);
        let a = TripletHash::from_points((t1, f1), (t2, f2), (t3, f3), 6).unwrap();
        let b = TripletHash::from_points((t1, f1 + k), (t2, f2 + k), (t3, f3 + k), 6).unwrap();
        ensure!(
            (a.df12, a.df23, a.time_ratio, a.span) == (b.df12, b.df23, b.time_ratio, b.span),
            "triplet fixture {i} changed under shift {k}"
        );
        for s in [0.8, 1.0, 1.2] {
            let sc = |t: u32| (t as f64 * s).round() as u32;
            let c = TripletHash::from_points((sc(t1), f1), (sc(t2), f2), (sc(t3), f3), 6).unwrap();
            let bound = 2.0 / c.span as f64;
            let d = (c.time_ratio - a.time_ratio).abs();
            worst_slack = worst_slack.min(bound - d);
            ensure!(d <= bound, "fixture {i} scale {s}: r moved {d} > {bound}");
        }

        let (ta, tb) = (t1, t1 + rng.random_range(10..90u32));
        let tc = rng.random_range(ta + 1..tb);
        let td = rng.random_range(tc..tb);
        let (fa, fb) = (rng.random_range(0..40u32), rng.random_range(41..80u32));
        let (fc, fd) = (rng.random_range(fa..=fb), rng.random_range(fa..=fb));
        let q = QuadHash::from_points((ta, fa), (tb, fb), (tc, fc), (td, fd)).unwrap();
        let qs = QuadHash::from_points((ta, fa + k), (tb, fb + k), (tc, fc + k), (td, fd + k)).unwrap();
        ensure!((q.cx, q.cy, q.dx, q.dy) == (qs.cx, qs.cy, qs.dx, qs.dy), "quad fixture {i} changed under shift {k}");
    }
    let el = start.elapsed();
    ensure!(el < C5_LIMIT, "took {el:?}");
    Ok(format!("1000 fixtures, smallest slack to 2/span {worst_slack:.4}, {el:.2?}"))
}

fn c6_convolution_filters() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for taps in [1usize, 300] {
        let x: Vec<f32> = (0..4000).map(|_| rng.random_range(-0.8f32..0.8)).collect();
        let x = Waveform::new(x, 16000).unwrap();
        let mut h = vec![0.0f32; taps];
        h[0] = 1.0;
        let y = convolve_ir(&x, &Waveform::new(h, 16000).unwrap()).map_err(|e| e.to_string())?;
        let err = y.samples().iter().zip(x.samples()).fold(0.0f64, |m, (a, b)| m.max((*a as f64 - *b as f64).abs()));
        ensure!(y.len() == x.len() && err <= C6_DELTA_TOL, "delta of {taps} taps: error {err}");
    }
    let mut worst = 0.0f64;
    for kind in [FilterKind::Lowpass, FilterKind::Highpass] {
        for fc in [30.0, 100.0, 300.0, 1000.0, 4000.0, 12000.0] {
            let x = sine(fc, 1.0, 44100, 0.5);
            let y = first_order_filter(&x, kind, fc).map_err(|e| e.to_string())?;
            let skip = 44100 / 4;
            let db = 20.0 * (rms(&y.samples()[skip..]) / rms(&x.samples()[skip..])).log10();
            let err = (db + 3.0103).abs();
            worst = worst.max(err);
            ensure!(err <= C6_CUTOFF_TOL_DB, "{kind:?} at {fc} Hz measured {db:.3} dB");
        }
    }
    Ok(format!("delta exact on direct and FFT paths, worst cutoff error {worst:.3} dB"))
}

fn c7_identification() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = ExperimentConfig::default();
    cfg.synthetic = SyntheticCorpusConfig { n_tracks: 100, duration_secs: 20.0, seed: 7 };
    cfg.pipelines = vec!["bn_light".into(), "bn_medium".into(), "bn_hard".into()];
    cfg.query_secs = 10.0;
    cfg.queries_per_track = 1;
    cfg.output_dir = dir.path().to_path_buf();
    let corpus = open_corpus(&cfg).map_err(|e| e.to_string())?;
    let fp = Fingerprinter::new(cfg.fingerprint.clone()).unwrap().with_execution(Execution::Sequential);
    let index = build_index(corpus.as_ref(), &fp, Execution::Parallel).map_err(|e| e.to_string())?;
    let rep = identify_bench(&cfg, corpus.as_ref(), &index, Execution::Parallel).map_err(|e| e.to_string())?;
    let row = |p: &str| rep.rows.iter().find(|r| r.pipeline == p && r.denoiser == "none").cloned();
    let mut acc = Vec::new();
    for p in ["none", "bn_light", "bn_medium", "bn_hard"] {
        let r = row(p).ok_or(format!("no row for {p}"))?;
        ensure!(r.n_queries >= C7_MIN_QUERIES, "{p}: only {} queries", r.n_queries);
        acc.push(r.accuracy);
    }
    let summary = format!(
        "{} tracks, top-1 clean {:.3} light {:.3} medium {:.3} hard {:.3}",
        index.n_tracks(),
        acc[0],
        acc[1],
        acc[2],
        acc[3]
    );
    ensure!(index.n_tracks() == 100, "{summary}");
    ensure!(acc[0] >= C7_CLEAN_MIN, "clean below {C7_CLEAN_MIN}: {summary}");
    ensure!(acc[1] >= acc[2] && acc[2] >= acc[3], "not monotone: {summary}");
    let el = start.elapsed();
    ensure!(el < C7_LIMIT, "took {el:?}: {summary}");
    Ok(format!("{summary}, {el:.1?}"))
}

fn c8_denoiser() -> Outcome {
    let fp = Fingerprinter::new(FingerprintConfig::default()).unwrap();
    let fid = Fingerprinter::new(FingerprintConfig::default()).unwrap().with_denoiser(Box::new(identity_denoiser()));
    let fss = Fingerprinter::new(FingerprintConfig::default())
        .unwrap()
        .with_denoiser(Box::new(SpectralSubtraction::default()));
    let (mut wins, mut sum_id, mut sum_ss) = (0usize, 0.0, 0.0);
    for i in 0..50u64 {
        let x = synth_track(1000 + i, 10.0, 44100).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(i);
        let n = synthetic_noise(&mut rng, x.len(), 44100, NoiseColor::White).unwrap();
        let (y, _) = add_noise_at_snr(&x, &n, 0.0, &mut rng).unwrap();
        let reference = fp.fingerprint(&x).unwrap().stages.stage3.to_mask();
        let noisy = fp.spectrogram(&y).unwrap();
        let direct = run_pipeline(&noisy, &FingerprintConfig::default().pipeline).unwrap();
        let ident = fid.from_spectrogram(&noisy).unwrap().stages;
        ensure!(ident == direct, "fixture {i}: identity denoiser output differs from the bare pipeline");
        let ss = fss.from_spectrogram(&noisy).unwrap().stages;
        let p_id = peak_prf(&ident.stage3.to_mask(), &reference, 1).unwrap().precision;
        let p_ss = peak_prf(&ss.stage3.to_mask(), &reference, 1).unwrap().precision;
        wins += (p_ss >= p_id) as usize;
        sum_id += p_id;
        sum_ss += p_ss;
    }
    let rate = wins as f64 / 50.0;
    let summary = format!(
        "specsub >= identity on {wins}/50, mean precision {:.3} -> {:.3}, identity bit-identical",
        sum_id / 50.0,
        sum_ss / 50.0
    );
    ensure!(rate >= C8_MIN_WIN_RATE, "{summary}");
    Ok(summary)
}

fn c9_image_metrics() -> Outcome {
    let params = SsimParams::standard(1.0);
    let mut worst_dssim = (f64::INFINITY, f64::NEG_INFINITY);
    for seed in 0..100 {
        let a = random_spectrogram(32, 24, seed, 0.3);
        let b = random_spectrogram(32, 24, seed + 1000, 0.3);
        let aa = ssim(&a, &a, &params).unwrap();
        ensure!((aa - 1.0).abs() <= C9_SYM_TOL, "ssim(x,x) = {aa}");
        let (ab, ba) = (ssim(&a, &b, &params).unwrap(), ssim(&b, &a, &params).unwrap());
        ensure!((ab - ba).abs() <= C9_SYM_TOL, "asymmetric: {ab} vs {ba}");
        let d = dssim(&a, &b, &params).unwrap();
        ensure!((0.0..=1.0).contains(&d), "dssim {d}");
        worst_dssim = (worst_dssim.0.min(d), worst_dssim.1.max(d));
    }
    let a = Spectrogram::from_rows(&vec![vec![0.0f32; 8]; 8]).unwrap();
    let b = Spectrogram::from_rows(&vec![vec![0.1f32; 8]; 8]).unwrap();
    let p = psnr(&a, &b, 1.0, PsnrMode::StandardMse).unwrap();
    ensure!(!p.infinite && (p.db - 20.0).abs() <= C9_PSNR_TOL_DB, "psnr {}", p.db);
    Ok(format!("dssim in [{:.3}, {:.3}], psnr {:.7} dB", worst_dssim.0, worst_dssim.1, p.db))
}

fn c10_reproducibility() -> Outcome {
    fn run(out: &Path, exec: Execution) -> peakfp::Result<()> {
        let mut cfg = ExperimentConfig::default();
        cfg.synthetic = SyntheticCorpusConfig { n_tracks: 4, duration_secs: 12.0, seed: 10 };
        cfg.segment_secs = 4.0;
        cfg.eval_split = None;
        cfg.pipelines = vec!["bn_medium".into(), "complete_light".into(), "complete_hard".into()];
        cfg.denoisers = vec![DenoiserSpec::SpecSub(SpectralSubtraction::default())];
        cfg.seed = 42;
        cfg.output_dir = out.to_path_buf();
        let corpus = open_corpus(&cfg)?;
        let m = cmd_segment(&cfg, corpus.as_ref())?;
        cmd_augment(&cfg, corpus.as_ref(), &m, &cfg.pipelines, exec)?;
        cmd_evaluate(&cfg, exec)?;
        Ok(())
    }
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    run(a.path(), Execution::Sequential).map_err(|e| e.to_string())?;
    run(b.path(), Execution::Parallel).map_err(|e| e.to_string())?;
    let mut bytes = 0;
    for f in ["report.csv", "report.json", "manifest.json"] {
        let x = std::fs::read(a.path().join(f)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.path().join(f)).map_err(|e| e.to_string())?;
        ensure!(x == y, "{f} differs between runs");
        bytes += x.len();
    }
    Ok(format!("report.csv, report.json and manifest.json identical ({bytes} bytes)"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("peak-extraction oracle equivalence", c1_peak_oracle),
        ("tolerance-metric oracle equivalence", c2_prf_oracle),
        ("Tversky suite", c3_tversky),
        ("SNR calibration", c4_snr),
        ("landmark invariance", c5_landmarks),
        ("convolution and filter calibration", c6_convolution_filters),
        ("identification desk benchmark", c7_identification),
        ("denoiser directional check", c8_denoiser),
        ("SSIM/DSSIM/PSNR", c9_image_metrics),
        ("end-to-end reproducibility", c10_reproducibility),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(msg) => println!("criterion {n:>2} PASS  {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {msg}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
