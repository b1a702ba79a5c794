use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fingerprint::Fingerprinter;
use crate::metrics::{
    dssim, focal_tversky_loss, lp_distance, peak_prf, psnr, ssim, tversky_components, tversky_index, PsnrMode,
    SsimParams,
};
use crate::peakpipe::{run_pipeline, PipelineOutput};
use crate::spectro::Spectrogram;

use super::{write_json, write_text, ExperimentConfig, PairStore};

/// `(stage, metric)` in report order.
pub const REPORT_METRICS: [(&str, &str); 12] = [
    ("stage2", "psnr_db"),
    ("stage2", "l1"),
    ("stage2", "ssim"),
    ("stage2", "dssim"),
    ("stage2", "tversky"),
    ("stage2", "ftl"),
    ("stage3", "precision"),
    ("stage3", "recall"),
    ("stage3", "f1"),
    ("final", "precision"),
    ("final", "recall"),
    ("final", "f1"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub pipeline: String,
    pub denoiser: String,
    pub stage: String,
    pub metric: String,
    /// Mean over finite items; `None` when every item is infinite.
    pub value: Option<f64>,
    pub infinite: bool,
    pub n_items: usize,
    pub n_infinite: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub pipeline: String,
    pub denoiser: String,
    pub segment_id: String,
    /// In [`REPORT_METRICS`] order; `None` marks an infinite value.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub metrics: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub items: Vec<ItemRecord>,
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("pipeline,denoiser,stage,metric,value,n_items,n_infinite\n");
        for r in &self.rows {
            let v = match r.value {
                Some(v) => format!("{v}"),
                None => "inf".into(),
            };
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.pipeline, r.denoiser, r.stage, r.metric, v, r.n_items, r.n_infinite
            ));
        }
        s
    }

    pub fn row(&self, pipeline: &str, denoiser: &str, stage: &str, metric: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.pipeline == pipeline && r.denoiser == denoiser && r.stage == stage && r.metric == metric)
    }
}

/// Every report metric of one prediction against its clean reference.
pub fn pair_metrics(
    pred: &PipelineOutput,
    clean: &PipelineOutput,
    cfg: &ExperimentConfig,
) -> Result<Vec<f64>> {
    let (p2, c2) = (&pred.stage2, &clean.stage2);
    let max = c2.max_value() as f64;
    let range = if max > 0.0 { max } else { 1.0 };
    let ps = psnr(p2, c2, range, PsnrMode::StandardMse)?;
    let l1 = lp_distance(p2, c2, 1)?;
    let sp = SsimParams::for_reference(c2);
    let scale = |s: &Spectrogram| s.with_values(s.values().iter().map(|v| (*v as f64 / range) as f32).collect());
    let comps = tversky_components(&scale(p2)?, &scale(c2)?)?;
    let s3 = peak_prf(&pred.stage3.to_mask(), &clean.stage3.to_mask(), cfg.peak_tolerance)?;
    let sf = peak_prf(&pred.final_peaks.to_mask(), &clean.final_peaks.to_mask(), cfg.peak_tolerance)?;
    Ok(vec![
        if ps.infinite { f64::INFINITY } else { ps.db },
        l1.mean_per_pixel,
        ssim(p2, c2, &sp)?,
        dssim(p2, c2, &sp)?,
        tversky_index(&comps, &cfg.tversky)?,
        focal_tversky_loss(&comps, &cfg.tversky)?,
        s3.precision,
        s3.recall,
        s3.f1,
        sf.precision,
        sf.recall,
        sf.f1,
    ])
}

/// Metrics for every stored pair, pipeline and denoiser; writes
/// `report.csv` and `report.json`.
pub fn cmd_evaluate(cfg: &ExperimentConfig, exec: Execution) -> Result<Report> {
    cfg.validate()?;
    let inner = if exec.is_parallel() { Execution::Sequential } else { exec };
    let denoisers = cfg
        .denoiser_set()
        .into_iter()
        .map(|d| {
            let fp = Fingerprinter::new(cfg.fingerprint.clone())?.with_denoiser(d.build()?).with_execution(inner);
            Ok((d.label(), fp))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = Report {
        metrics: REPORT_METRICS.iter().map(|(s, m)| format!("{s}/{m}")).collect(),
        rows: Vec::new(),
        items: Vec::new(),
    };
    for pipeline in &cfg.pipelines {
        let store = PairStore::load(cfg, pipeline)?;
        if store.pairs.is_empty() {
            return Err(Error::Config(format!("paired store for '{pipeline}' is empty")));
        }
        let dir = PairStore::dir(cfg, pipeline);
        let per_pair = exec.map(&store.pairs, |p| -> Result<Vec<Vec<f64>>> {
            let (clean, noisy) = store.read_pair(&dir, p)?;
            let reference = run_pipeline(&clean, &cfg.fingerprint.pipeline)?;
            denoisers
                .iter()
                .map(|(_, fp)| pair_metrics(&fp.from_spectrogram(&noisy)?.stages, &reference, cfg))
                .collect()
        });
        let per_pair = per_pair.into_iter().collect::<Result<Vec<_>>>()?;
        for (d, (label, _)) in denoisers.iter().enumerate() {
            for (m, (stage, metric)) in REPORT_METRICS.iter().enumerate() {
                let (mut sum, mut n_fin, mut n_inf) = (0.0f64, 0usize, 0usize);
                for vals in &per_pair {
                    let v = vals[d][m];
                    if v.is_finite() {
                        sum += v;
                        n_fin += 1;
                    } else {
                        n_inf += 1;
                    }
                }
                report.rows.push(ReportRow {
                    pipeline: pipeline.clone(),
                    denoiser: label.clone(),
                    stage: stage.to_string(),
                    metric: metric.to_string(),
                    value: (n_fin > 0).then(|| sum / n_fin as f64),
                    infinite: n_fin == 0,
                    n_items: per_pair.len(),
                    n_infinite: n_inf,
                });
            }
            for (p, vals) in store.pairs.iter().zip(&per_pair) {
                report.items.push(ItemRecord {
                    pipeline: pipeline.clone(),
                    denoiser: label.clone(),
                    segment_id: p.segment_id.clone(),
                    values: vals[d].iter().map(|v| v.is_finite().then_some(*v)).collect(),
                });
            }
        }
    }
    write_text(&cfg.output_dir.join("report.csv"), &report.to_csv())?;
    write_json(&cfg.output_dir.join("report.json"), &report)?;
    Ok(report)
}
