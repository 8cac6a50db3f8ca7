use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::PipelineConfig;
use super::dataset::{list_images, DatasetIndex, Record};
use crate::edge_consistency::{edge_consistency_map, fallback_contour, EcMeta};
use crate::error::{Error, Result};
use crate::fusion::{quality_weighted_fuse, Components, ConfidenceFlags, QualityBundle};
use crate::io::{load_gray, load_rgb, save_gray_png};
use crate::metrics::{evaluate, ImageMetrics, MetricReport};
use crate::model_variance::model_variance;
use crate::regional_uncertainty::{regional_uncertainty_map, RuMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// An image that could not be processed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub stem: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: MetricReport,
    pub failures: Vec<Failure>,
}

#[derive(Serialize)]
struct EcSidecar<'a> {
    #[serde(flatten)]
    meta: &'a EcMeta,
    slic_seed: u64,
}

#[derive(Serialize)]
struct RuSidecar<'a> {
    #[serde(flatten)]
    meta: &'a RuMeta,
    slic_seed: u64,
}

#[derive(Serialize)]
struct MvSidecar {
    noise_seed: u64,
}

#[derive(Serialize)]
struct FusedSidecar {
    components: String,
    low_confidence: ConfidenceFlags,
    slic_seed: u64,
    noise_seed: u64,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn require<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::Dataset(format!("missing {what} input")))
}

/// Quality maps for one image. Writes `EC_`, `RU_` and `MV_` maps with their
/// sidecars for the enabled components.
pub fn quality_maps(
    record: &Record,
    cfg: &PipelineConfig,
    components: Components,
    out: &Path,
) -> Result<QualityBundle> {
    let stem = &record.stem;
    let mut bundle = QualityBundle::default();
    if components.ec || components.ru {
        let rgb = load_rgb(&record.rgb)?;
        let depth = load_gray(&record.depth)?;
        let contour = match &record.contour {
            Some(p) => load_gray(p)?,
            None => fallback_contour(&rgb)?,
        };
        let ec = edge_consistency_map(&rgb, &depth, &contour, &cfg.ec, &cfg.slic)?;
        if components.ec {
            save_gray_png(&ec.map, out.join(format!("EC_{stem}.png")))?;
            let sidecar = EcSidecar {
                meta: &ec.meta,
                slic_seed: cfg.slic.seed,
            };
            write_json(&sidecar, &out.join(format!("EC_{stem}.json")))?;
            bundle.low_confidence.ec = ec.meta.low_confidence;
            bundle.ec = Some(ec.map.clone());
        }
        if components.ru {
            let ru = regional_uncertainty_map(&rgb, &depth, &ec.apa, &cfg.ru, &cfg.slic)?;
            save_gray_png(&ru.map, out.join(format!("RU_{stem}.png")))?;
            let sidecar = RuSidecar {
                meta: &ru.meta,
                slic_seed: cfg.slic.seed,
            };
            write_json(&sidecar, &out.join(format!("RU_{stem}.json")))?;
            bundle.low_confidence.ru = ru.meta.low_confidence;
            bundle.ru = Some(ru.map);
        }
    }
    if components.mv {
        let a = load_gray(require(&record.sal_rgbd, "sal_rgbd")?)?;
        let b = load_gray(require(&record.sal_rgbr, "sal_rgbr")?)?;
        let mv = model_variance(&a, &b)?;
        save_gray_png(&mv, out.join(format!("MV_{stem}.png")))?;
        write_json(
            &MvSidecar {
                noise_seed: cfg.noise_seed,
            },
            &out.join(format!("MV_{stem}.json")),
        )?;
        bundle.mv = Some(mv);
    }
    Ok(bundle)
}

/// Quality maps, fusion and evaluation for one record. Returns `None` when
/// the record lacks the saliency inputs or ground truth needed for
/// evaluation.
fn process(record: &Record, cfg: &PipelineConfig) -> Result<Option<ImageMetrics>> {
    let stem = &record.stem;
    let bundle = quality_maps(record, cfg, cfg.components, &cfg.out_dir)?;
    let (Some(rgb_path), Some(d_path)) = (&record.sal_rgb, &record.sal_d) else {
        log::info!("{stem}: no sal_rgb/sal_d inputs, fusion skipped");
        return Ok(None);
    };
    let rgb_sal = load_gray(rgb_path)?;
    let d_sal = load_gray(d_path)?;
    let fused = quality_weighted_fuse(&rgb_sal, &d_sal, &bundle)?;
    save_gray_png(&fused, cfg.out_dir.join(format!("FUSED_{stem}.png")))?;
    write_json(
        &FusedSidecar {
            components: cfg.components.to_string(),
            low_confidence: bundle.low_confidence,
            slic_seed: cfg.slic.seed,
            noise_seed: cfg.noise_seed,
        },
        &cfg.out_dir.join(format!("FUSED_{stem}.json")),
    )?;
    let Some(gt_path) = &record.gt else {
        log::info!("{stem}: no ground truth, evaluation skipped");
        return Ok(None);
    };
    // Evaluate the map as written, so the report matches the PNG on disk.
    let fused = load_gray(cfg.out_dir.join(format!("FUSED_{stem}.png")))?;
    let gt = load_gray(gt_path)?;
    Ok(Some(evaluate(stem, &fused, &gt)?.0))
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

/// Runs quality maps, fusion and evaluation over the whole index, `cfg.jobs`
/// images at a time, and writes `report.json` and `report.csv` to
/// `cfg.out_dir`. Failed images are logged and listed in the outcome.
pub fn run_pipeline(index: &DatasetIndex, cfg: &PipelineConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    if index.is_empty() {
        return Err(Error::Dataset("empty dataset index".into()));
    }
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let results: Vec<Result<Option<ImageMetrics>>> = thread_pool(cfg.jobs)?
        .install(|| index.records.par_iter().map(|r| process(r, cfg)).collect());

    let mut per_image = Vec::new();
    let mut failures = Vec::new();
    for (record, result) in index.records.iter().zip(results) {
        match result {
            Ok(Some(m)) => per_image.push(m),
            Ok(None) => {}
            Err(e) => {
                log::error!("{}: {e}", record.stem);
                failures.push(Failure {
                    stem: record.stem.clone(),
                    message: e.to_string(),
                });
            }
        }
    }
    let report = MetricReport::from_images(index.name(), per_image);
    emit_report(
        &report,
        ReportFormat::Json,
        &cfg.out_dir.join("report.json"),
    )?;
    emit_report(&report, ReportFormat::Csv, &cfg.out_dir.join("report.csv"))?;
    Ok(RunOutcome { report, failures })
}

/// Pairs prediction and ground-truth maps by stem and evaluates them. A
/// prediction named `FUSED_<stem>` also matches `<stem>`. PR curves go to
/// `pr_dir/<stem>.csv` when requested.
pub fn evaluate_directories(
    pred_dir: &Path,
    gt_dir: &Path,
    pr_dir: Option<&Path>,
    jobs: usize,
) -> Result<RunOutcome> {
    let mut preds = list_images(pred_dir)?;
    let gts = list_images(gt_dir)?;
    if let Some(dir) = pr_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut pairs = Vec::new();
    for (stem, gt) in &gts {
        let pred = preds
            .remove(stem)
            .or_else(|| preds.remove(&format!("FUSED_{stem}")));
        match pred {
            Some(p) => pairs.push((stem.clone(), p, gt.clone())),
            None => log::warn!("{}: no matching prediction, skipped", gt.display()),
        }
    }
    for p in preds.values() {
        log::warn!("{}: no matching ground truth, skipped", p.display());
    }
    if pairs.is_empty() {
        return Err(Error::Dataset(format!(
            "no prediction/ground-truth pairs between {} and {}",
            pred_dir.display(),
            gt_dir.display()
        )));
    }
    let eval_one = |(stem, pred, gt): &(String, PathBuf, PathBuf)| -> Result<ImageMetrics> {
        let (metrics, curve) = evaluate(stem, &load_gray(pred)?, &load_gray(gt)?)?;
        if let (Some(dir), Some(curve)) = (pr_dir, curve) {
            curve.write_csv(dir.join(format!("{stem}.csv")))?;
        }
        Ok(metrics)
    };
    let results: Vec<Result<ImageMetrics>> =
        thread_pool(jobs)?.install(|| pairs.par_iter().map(eval_one).collect());

    let mut per_image = Vec::new();
    let mut failures = Vec::new();
    for ((stem, _, _), result) in pairs.iter().zip(results) {
        match result {
            Ok(m) => per_image.push(m),
            Err(e) => {
                log::error!("{stem}: {e}");
                failures.push(Failure {
                    stem: stem.clone(),
                    message: e.to_string(),
                });
            }
        }
    }
    let name = pred_dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(RunOutcome {
        report: MetricReport::from_images(name, per_image),
        failures,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// JSON report, or CSV with one row per image and a final `AGGREGATE` row.
pub fn emit_report(report: &MetricReport, format: ReportFormat, path: &Path) -> Result<()> {
    match format {
        ReportFormat::Json => write_json(report, path),
        ReportFormat::Csv => {
            let mut wtr = csv::Writer::from_path(path)?;
            wtr.write_record([
                "stem", "sm", "adp_e", "max_e", "adp_f", "mean_f", "max_f", "mae",
            ])?;
            for m in &report.per_image {
                wtr.write_record([
                    m.stem.clone(),
                    cell(Some(m.sm)),
                    cell(Some(m.adp_e)),
                    cell(Some(m.max_e)),
                    cell(m.adp_f),
                    cell(m.mean_f),
                    cell(m.max_f),
                    cell(Some(m.mae)),
                ])?;
            }
            let a = &report.aggregate;
            wtr.write_record([
                "AGGREGATE".to_string(),
                cell(a.sm),
                cell(a.adp_e),
                cell(a.max_e),
                cell(a.adp_f),
                cell(a.mean_f),
                cell(a.max_f),
                cell(a.mae),
            ])?;
            wtr.flush().map_err(|e| Error::io(path, e))
        }
    }
}
