use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use peakfp::augment::builtin_pipelines;
use peakfp::bench::{self, ExperimentConfig, Manifest};
use peakfp::denoise::DenoiserSpec;
use peakfp::fingerprint::Fingerprinter;
use peakfp::fpindex::{FingerprintIndex, IdentifyParams};
use peakfp::landmark::landmarks_to_csv;
use peakfp::spectro::{spg, wav};
use peakfp::synth::SynthCorpus;
use peakfp::Execution;

#[derive(Parser)]
#[command(name = "peakfp", version, about = "Spectral-peak fingerprinting and noise-robustness benchmark")]
struct Cli {
    /// Experiment configuration (JSON); defaults are used for missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Denoiser to evaluate besides `none` (repeatable): none, specsub[:q,l,floor], wiener[:q,g], file:<dir>.
    #[arg(long, global = true)]
    denoiser: Vec<DenoiserSpec>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split the corpus into segments and write manifest.json.
    Segment,
    /// Write clean/noisy CQT pairs for the given pipelines (default: all configured).
    Augment {
        #[arg(long)]
        pipeline: Vec<String>,
    },
    /// Fingerprint the clean corpus into index.fpx.
    Index,
    /// Compute metric reports over the stored pairs.
    Evaluate,
    /// Top-1 identification accuracy under each pipeline.
    IdentifyBench,
    /// Identify one recording against the index.
    Identify {
        wav: PathBuf,
        #[arg(long)]
        index: Option<PathBuf>,
    },
    /// Dump the CQT, peaks and landmarks of a recording.
    Export {
        wav: PathBuf,
        #[arg(long, default_value = "export")]
        out: PathBuf,
    },
    /// Render a synthetic music corpus as WAV files.
    SynthCorpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        tracks: usize,
        #[arg(long, default_value_t = 30.0)]
        duration: f64,
    },
    /// Print the built-in augmentation pipelines as JSON.
    Pipelines,
    /// Print the effective configuration as JSON.
    Config,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if !cli.denoiser.is_empty() {
        cfg.denoisers = cli.denoiser.clone();
    }
    if let Some(d) = &cli.output_dir {
        cfg.output_dir = d.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_manifest(cfg: &ExperimentConfig) -> Result<Manifest> {
    let path = cfg.output_dir.join("manifest.json");
    if !path.is_file() {
        bail!("no manifest at {}; run `segment` first", path.display());
    }
    Ok(Manifest::load(&path)?)
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn export(cfg: &ExperimentConfig, input: &Path, out: &Path, exec: Execution) -> Result<()> {
    let fp = Fingerprinter::new(cfg.fingerprint.clone())?.with_execution(exec);
    let w = wav::read_wav(input)?;
    let f = fp.fingerprint(&w)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    spg::write(out.join("cqt.spg"), &f.spectrogram)?;
    spg::write(out.join("stage2.spg"), &f.stages.stage2)?;
    std::fs::write(out.join("stage3_peaks.csv"), f.stages.stage3.to_csv())?;
    std::fs::write(out.join("final_peaks.csv"), f.stages.final_peaks.to_csv())?;
    std::fs::write(out.join("landmarks.csv"), landmarks_to_csv(&f.landmarks))?;
    println!(
        "{} frames x {} bins, {} stage-3 peaks, {} final peaks, {} landmarks -> {}",
        f.spectrogram.frames(),
        f.spectrogram.bins(),
        f.stages.stage3.len(),
        f.stages.final_peaks.len(),
        f.landmarks.len(),
        out.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            bail!("--jobs must be at least 1");
        }
        peakfp::exec::set_jobs(j).map_err(anyhow::Error::msg)?;
    }
    let exec = if cli.jobs == Some(1) { Execution::Sequential } else { Execution::Parallel };
    match &cli.command {
        Command::Pipelines => return print_json(&builtin_pipelines()),
        Command::SynthCorpus { out, tracks, duration } => {
            let c = SynthCorpus::new(*tracks, *duration, cli.seed.unwrap_or(1));
            c.write_dir(out)?;
            println!("wrote {} tracks to {}", tracks, out.display());
            return Ok(());
        }
        _ => {}
    }
    let cfg = load_config(&cli)?;
    match cli.command {
        Command::Config => print_json(&cfg)?,
        Command::Segment => {
            let corpus = bench::open_corpus(&cfg)?;
            let m = bench::cmd_segment(&cfg, corpus.as_ref())?;
            println!(
                "{} tracks, {} segments ({} silent skipped) -> {}",
                m.tracks.len(),
                m.segments.len(),
                m.silent_segments.len(),
                cfg.output_dir.join("manifest.json").display()
            );
        }
        Command::Augment { pipeline } => {
            let corpus = bench::open_corpus(&cfg)?;
            let manifest = load_manifest(&cfg)?;
            let names = if pipeline.is_empty() { cfg.pipelines.clone() } else { pipeline };
            for s in bench::cmd_augment(&cfg, corpus.as_ref(), &manifest, &names, exec)? {
                println!("{}: {} pairs", s.pipeline, s.pairs.len());
            }
        }
        Command::Index => {
            let corpus = bench::open_corpus(&cfg)?;
            let idx = bench::cmd_index(&cfg, corpus.as_ref(), exec)?;
            println!(
                "{} tracks, {} keys, {} postings -> {}",
                idx.n_tracks(),
                idx.n_keys(),
                idx.n_postings(),
                bench::index_path(&cfg).display()
            );
        }
        Command::Evaluate => {
            let r = bench::cmd_evaluate(&cfg, exec)?;
            print!("{}", r.to_csv());
        }
        Command::IdentifyBench => {
            let corpus = bench::open_corpus(&cfg)?;
            let r = bench::cmd_identify_bench(&cfg, corpus.as_ref(), exec)?;
            print!("{}", r.to_csv());
        }
        Command::Identify { wav: input, index } => {
            let path = index.unwrap_or_else(|| bench::index_path(&cfg));
            let idx = FingerprintIndex::load(&path).with_context(|| format!("loading {}", path.display()))?;
            let denoiser = cfg.denoisers.first().cloned().unwrap_or(DenoiserSpec::None);
            let fp = Fingerprinter::new(cfg.fingerprint.clone())?.with_denoiser(denoiser.build()?).with_execution(exec);
            let w = wav::read_wav(&input)?;
            let params = IdentifyParams { query: cfg.query, ..IdentifyParams::default() };
            let r = idx.identify(&w, &fp, &params)?;
            let title = r.top.and_then(|m| idx.catalog().get(&m.track_id)).map(|m| m.title.clone());
            print_json(&serde_json::json!({
                "matched": r.is_match(),
                "track_id": r.top.map(|m| m.track_id),
                "title": title,
                "score": r.top.map(|m| m.score),
                "offset_frames": r.top.map(|m| m.offset_frames),
                "query_landmarks": r.query_landmarks,
            }))?;
        }
        Command::Export { wav: input, out } => export(&cfg, &input, &out, exec)?,
        Command::Pipelines | Command::SynthCorpus { .. } => unreachable!(),
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
