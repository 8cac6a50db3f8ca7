use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use depthq::error::{Error, Result};
use depthq::fusion::{quality_weighted_fuse, Components, QualityBundle};
use depthq::harness::{
    emit_report, evaluate_directories, load_dataset, quality_maps, run_pipeline, Failure,
    PipelineConfig, Record, ReportFormat,
};
use depthq::io::{load_gray, load_rgb, save_gray_png};
use depthq::model_variance::{make_rgbr, model_variance};
use depthq::superpixels::slic;

#[derive(Parser)]
#[command(
    name = "depthq",
    version,
    about = "Depth quality maps, saliency fusion and SOD evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Config file with dotted keys, e.g. `ec.omega1 = 0.01`
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Images processed in parallel
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    slic_seed: Option<u64>,
    #[arg(long)]
    noise_seed: Option<u64>,
    /// Quality maps to use: comma-separated subset of ec,ru,mv, or `none`
    #[arg(long)]
    components: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Edge-consistency, regional-uncertainty and model-variance maps for one image
    Quality {
        #[arg(long)]
        rgb: PathBuf,
        #[arg(long)]
        depth: PathBuf,
        #[arg(long)]
        contour: Option<PathBuf>,
        #[arg(long)]
        sal_rgbd: Option<PathBuf>,
        #[arg(long)]
        sal_rgbr: Option<PathBuf>,
        /// Output name stem (default: stem of --rgb)
        #[arg(long)]
        stem: Option<String>,
        /// Also write the edge-consistency superpixels (16-bit label PNG and region CSV)
        #[arg(long)]
        debug_superpixels: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Model-variance map from saliency predicted with real depth and with noise
    Mv {
        #[arg(long)]
        sal_rgbd: PathBuf,
        #[arg(long)]
        sal_rgbr: PathBuf,
        #[arg(long)]
        stem: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// RGBA image whose alpha channel is seeded uniform noise
    MakeRgbr {
        #[arg(long)]
        rgb: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output PNG file
        #[arg(long = "out", id = "rgbr_out")]
        file: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        noise_seed: Option<u64>,
    },
    /// Quality-weighted fusion of RGB and depth saliency
    Fuse {
        #[arg(long)]
        sal_rgb: PathBuf,
        #[arg(long)]
        sal_d: PathBuf,
        #[arg(long)]
        ec: Option<PathBuf>,
        #[arg(long)]
        ru: Option<PathBuf>,
        #[arg(long)]
        mv: Option<PathBuf>,
        #[arg(long)]
        stem: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a directory of saliency maps against ground truth
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// JSON report file
        #[arg(long = "out", id = "report_out")]
        report: PathBuf,
        /// Write one PR-curve CSV per image into this directory
        #[arg(long)]
        pr_csv: Option<PathBuf>,
        /// Also write the report as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Full pipeline over a dataset directory
    Run {
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn config(common: &Common) -> Result<PipelineConfig> {
    let mut cfg = match &common.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if let Some(jobs) = common.jobs {
        cfg.jobs = jobs;
    }
    if let Some(seed) = common.slic_seed {
        cfg.slic.seed = seed;
    }
    if let Some(seed) = common.noise_seed {
        cfg.noise_seed = seed;
    }
    if let Some(c) = &common.components {
        cfg.components = c.parse()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn stem_of(explicit: Option<String>, path: &Path) -> String {
    explicit.unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "image".into())
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn report_failures(failures: &[Failure]) -> ExitCode {
    if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        for f in failures {
            eprintln!("failed: {}: {}", f.stem, f.message);
        }
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Quality {
            rgb,
            depth,
            contour,
            sal_rgbd,
            sal_rgbr,
            stem,
            debug_superpixels,
            common,
        } => {
            let cfg = config(&common)?;
            let mut components = cfg.components;
            if components.mv && (sal_rgbd.is_none() || sal_rgbr.is_none()) {
                log::info!("no --sal-rgbd/--sal-rgbr given, model variance skipped");
                components.mv = false;
            }
            create_dir(&cfg.out_dir)?;
            let record = Record {
                stem: stem_of(stem, &rgb),
                rgb,
                depth,
                gt: None,
                contour,
                sal_rgb: None,
                sal_d: None,
                sal_rgbd,
                sal_rgbr,
            };
            quality_maps(&record, &cfg, components, &cfg.out_dir)?;
            if debug_superpixels {
                let image = load_rgb(&record.rgb)?;
                let k = cfg.ec.k_superpixels.min(image.len());
                let seg = slic(&image, k, &cfg.slic)?;
                seg.save_label_png(cfg.out_dir.join(format!("SP_{}.png", record.stem)))?;
                seg.save_region_csv(cfg.out_dir.join(format!("SP_{}.csv", record.stem)))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Mv {
            sal_rgbd,
            sal_rgbr,
            stem,
            common,
        } => {
            let cfg = config(&common)?;
            create_dir(&cfg.out_dir)?;
            let mv = model_variance(&load_gray(&sal_rgbd)?, &load_gray(&sal_rgbr)?)?;
            save_gray_png(
                &mv,
                cfg.out_dir
                    .join(format!("MV_{}.png", stem_of(stem, &sal_rgbd))),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::MakeRgbr {
            rgb,
            seed,
            file,
            config: config_path,
            noise_seed,
        } => {
            let base = match &config_path {
                Some(p) => PipelineConfig::from_file(p)?.noise_seed,
                None => 0,
            };
            let seed = seed.or(noise_seed).unwrap_or(base);
            if let Some(dir) = file.parent().filter(|d| !d.as_os_str().is_empty()) {
                create_dir(dir)?;
            }
            make_rgbr(&load_rgb(&rgb)?, seed).save_png(&file)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Fuse {
            sal_rgb,
            sal_d,
            ec,
            ru,
            mv,
            stem,
            common,
        } => {
            let cfg = config(&common)?;
            let load = |p: Option<PathBuf>| p.map(load_gray).transpose();
            let bundle = QualityBundle {
                ec: load(ec)?,
                ru: load(ru)?,
                mv: load(mv)?,
                ..Default::default()
            }
            .restricted(cfg.components);
            if bundle.maps().next().is_none() && cfg.components != Components::NONE {
                log::info!("no quality maps given, fusing with equal weights");
            }
            let fused = quality_weighted_fuse(&load_gray(&sal_rgb)?, &load_gray(&sal_d)?, &bundle)?;
            create_dir(&cfg.out_dir)?;
            save_gray_png(
                &fused,
                cfg.out_dir
                    .join(format!("FUSED_{}.png", stem_of(stem, &sal_rgb))),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval {
            pred,
            gt,
            report,
            pr_csv,
            csv,
            jobs,
        } => {
            let outcome =
                evaluate_directories(&pred, &gt, pr_csv.as_deref(), jobs.unwrap_or(1).max(1))?;
            if let Some(dir) = report.parent().filter(|d| !d.as_os_str().is_empty()) {
                create_dir(dir)?;
            }
            emit_report(&outcome.report, ReportFormat::Json, &report)?;
            if let Some(path) = csv {
                emit_report(&outcome.report, ReportFormat::Csv, &path)?;
            }
            Ok(report_failures(&outcome.failures))
        }
        Command::Run { dataset, common } => {
            let cfg = config(&common)?;
            let index = load_dataset(&dataset)?;
            log::info!("{} images in {}", index.len(), dataset.display());
            let outcome = run_pipeline(&index, &cfg)?;
            Ok(report_failures(&outcome.failures))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
