use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use synthvid_core::config::GeneratorConfig;
use synthvid_core::io::container::{read_header, read_video};
use synthvid_core::io::dataset::{export_png_frames, generate_dataset};
use synthvid_core::par;
use synthvid_core::stats::analyze::{analyze_dataset, read_accuracy_csv, AnalysisOptions, DiskDataset, Reference, StatsReport};
use synthvid_core::stats::features::read_features;
use synthvid_core::stats::frechet::FeatureGaussian;
use synthvid_core::stream::Server;
use synthvid_core::{Generator, Level};

#[derive(Parser)]
#[command(name = "synthvid", version, about = "Procedural video datasets: generate, inspect, analyze, serve")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write videos 0..N and a manifest into a directory (resumable).
    Generate {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the config's dataset_size when that is fixed.
        #[arg(long)]
        count: Option<u64>,
    },
    /// Print a video header and per-frame checksums.
    Inspect {
        file: PathBuf,
        /// Header only.
        #[arg(long)]
        header_only: bool,
    },
    /// Write every frame of a video as PNG.
    ExportPng {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the resolved config as JSON, with its hash on stderr.
    Config {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Spectrum, colour, diversity and distance statistics of datasets.
    Stats(StatsArgs),
    /// Serve videos over TCP until interrupted.
    Serve {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value = "127.0.0.1:7447")]
        bind: String,
        #[arg(long, default_value_t = 8)]
        max_batch: u32,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON config file; missing keys take the defaults shown by `synthvid config`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from this level's defaults when no config file is given.
    #[arg(long)]
    level: Option<String>,
    /// `key=value` override, value parsed as JSON (falls back to a string).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<GeneratorConfig> {
        let mut cfg = match (&self.config, &self.level) {
            (Some(_), Some(_)) => bail!("--config and --level are mutually exclusive"),
            (Some(path), None) => GeneratorConfig::load(path)?,
            (None, Some(level)) => GeneratorConfig::for_level(parse_level(level)?),
            (None, None) => GeneratorConfig::default(),
        };
        for o in &self.overrides {
            cfg.apply_override(o)?;
        }
        Ok(cfg.validate()?)
    }
}

fn parse_level(name: &str) -> Result<Level> {
    serde_json::from_value(serde_json::Value::String(name.to_owned()))
        .with_context(|| format!("unknown level `{name}`"))
}

#[derive(Args)]
struct StatsArgs {
    /// Dataset directory; repeat to analyze several.
    #[arg(long, required = true)]
    dataset: Vec<PathBuf>,
    /// External `.sfea` features, one per dataset in the same order.
    #[arg(long)]
    features: Vec<PathBuf>,
    /// Dataset compared against for KL and Fréchet distances.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// External features of the reference, replacing builtin ones.
    #[arg(long)]
    reference_features: Option<PathBuf>,
    /// `dataset,accuracy` CSV; dataset names are directory names.
    #[arg(long)]
    accuracy: Option<PathBuf>,
    /// JSON report path; a CSV is written next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    frames: usize,
    #[arg(long, default_value_t = 1000)]
    videos: usize,
    #[arg(long, default_value_t = 16)]
    frames_per_video: usize,
    /// Analyze smaller datasets instead of failing.
    #[arg(long)]
    allow_small: bool,
}

fn main() -> Result<()> {
    match run() {
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => Ok(()),
        other => other,
    }
}

fn run() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    par::init_global(par::thread_cap_from_env());
    match Cli::parse().command {
        Command::Generate { config, out, count } => {
            let cfg = config.resolve()?;
            let count = match count.or(cfg.dataset_size.fixed()) {
                Some(n) => n,
                None => bail!("config generates on the fly; pass --count"),
            };
            let generator = Generator::new(cfg)?;
            let summary = generate_dataset(&generator, &out, count)?;
            println!(
                "{}: {} videos ({} generated, {} reused), dataset sha256 {}",
                out.display(),
                summary.manifest.video_count,
                summary.generated,
                summary.reused,
                summary.manifest.dataset_sha256
            );
        }
        Command::Inspect { file, header_only } => inspect(&file, header_only)?,
        Command::ExportPng { file, out } => {
            let paths = export_png_frames(&read_video(&file)?, &out)?;
            println!("wrote {} frames to {}", paths.len(), out.display());
        }
        Command::Config { config } => {
            let cfg = config.resolve()?;
            println!("{}", cfg.to_json_pretty());
            eprintln!("sha256 {}", cfg.hash_hex());
        }
        Command::Stats(args) => stats(&args)?,
        Command::Serve { config, bind, max_batch } => {
            let cfg = config.resolve()?;
            let hash = cfg.hash_hex();
            let server = Server::bind(Generator::new(cfg)?, &bind, max_batch)?;
            log::info!("serving config {hash} on {} (max batch {max_batch})", server.local_addr()?);
            server.run()?;
        }
    }
    Ok(())
}

fn inspect(file: &Path, header_only: bool) -> Result<()> {
    let h = read_header(file)?;
    let mut out = io::stdout().lock();
    writeln!(out, "file     {}", file.display())?;
    writeln!(out, "version  {}", h.version)?;
    writeln!(out, "shape    {} frames × {}×{} × 3", h.frames, h.height, h.width)?;
    writeln!(out, "fps      {}", h.fps)?;
    writeln!(out, "dtype    uint8")?;
    writeln!(out, "seed     {:#018x}", h.seed)?;
    if header_only {
        return Ok(());
    }
    let video = read_video(file)?;
    writeln!(out, "sha256   {}", video.content_checksum())?;
    for (t, sum) in video.frame_checksums().iter().enumerate() {
        writeln!(out, "frame {t:5} {sum}")?;
    }
    Ok(())
}

fn stats(args: &StatsArgs) -> Result<()> {
    if !args.features.is_empty() && args.features.len() != args.dataset.len() {
        bail!("--features must be given once per --dataset");
    }
    let base = AnalysisOptions {
        seed: args.seed,
        frame_samples: args.frames,
        videos: args.videos,
        frames_per_video: args.frames_per_video,
        allow_small: args.allow_small,
        ..Default::default()
    };
    let reference = match &args.reference {
        Some(dir) => {
            let source = DiskDataset::open(dir)?;
            let mut opts = base.clone();
            if let Some(f) = &args.reference_features {
                opts.features = Some(read_features(f)?);
            }
            Some(analyze_dataset(&source, &opts)?.as_reference())
        }
        None => match &args.reference_features {
            Some(f) => Some(Reference {
                label: f.display().to_string(),
                color: None,
                features: Some(FeatureGaussian::fit(&read_features(f)?)?),
            }),
            None => None,
        },
    };
    let mut reports = Vec::new();
    for (i, dir) in args.dataset.iter().enumerate() {
        let mut opts = AnalysisOptions { reference: reference.clone(), ..base.clone() };
        if let Some(f) = args.features.get(i) {
            opts.features = Some(read_features(f)?);
        }
        let report = analyze_dataset(&DiskDataset::open(dir)?, &opts).with_context(|| format!("analyzing {}", dir.display()))?;
        log::info!("{}: alpha {:.3}, diversity {:.3}", report.label, report.spectrum.alpha, report.diversity.value);
        reports.push(report);
    }
    let mut report = StatsReport::new(reports);
    if let Some(acc) = &args.accuracy {
        report.correlate(&read_accuracy_csv(acc)?)?;
    }
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let csv = report.save(&args.out)?;
    println!("wrote {} and {}", args.out.display(), csv.display());
    Ok(())
}
