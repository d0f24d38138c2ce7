//! `sdmon`: social-distancing analytics over recorded detections.

use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sdmon_core::estimate_homography;
use sdmon_core::io::{
    format_homography_block, load_config, parse_config, parse_correspondences,
    parse_jsonl_detections, parse_mot_detections, run_pipeline, run_tracking, write_crowd_rasters,
    write_risk_rasters, Detections, RunConfig, CROWD_LONG_TERM_TABLE, CROWD_TABLE, TRACKING_TABLE,
    VIOLATION_TABLE,
};
use sdmon_core::risk::read_value_table;

#[derive(Debug, Parser)]
#[command(name = "sdmon", version, about = "Social-distancing analytics over per-frame person detections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Track detections and write tracks.txt only.
    Track(RunArgs),
    /// Full analysis: tracks, stats table, summary, grids and heat maps.
    Analyze(RunArgs),
    /// Re-render rasters from saved value tables.
    Heatmap(HeatmapArgs),
    /// Estimate a homography from point correspondences.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Mot,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

impl Toggle {
    fn enabled(self) -> bool {
        self == Toggle::On
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Calibration and policy file (TOML). `analyze` requires one.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Detection file, or `-` for standard input.
    #[arg(long)]
    det: PathBuf,
    #[arg(long, value_enum, default_value = "mot")]
    format: Format,
    /// Output directory; overrides the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    couples: Option<Toggle>,
    #[arg(long, value_enum)]
    crowd: Option<Toggle>,
    /// Frame rate of the detection stream.
    #[arg(long)]
    fps: Option<f64>,
}

#[derive(Debug, Args)]
struct HeatmapArgs {
    /// Directory holding the value tables; defaults to `--out`.
    #[arg(long)]
    tables: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Lines of `u v x y`: image point, then ground point.
    #[arg(long)]
    points: PathBuf,
    /// Where to write the homography block; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

const IDENTITY_BLOCK: &str = "[homography]\nm = [1, 0, 0, 0, 1, 0, 0, 0, 1]\n";

fn config(args: &RunArgs, required: bool) -> Result<RunConfig> {
    let mut config = match &args.config {
        Some(path) => load_config(path).with_context(|| format!("loading {}", path.display()))?,
        None if required => bail!("--config is required"),
        None => parse_config(IDENTITY_BLOCK, std::env::vars())?,
    };
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    if let Some(c) = args.couples {
        config.couples_enabled = c.enabled();
    }
    if let Some(c) = args.crowd {
        config.risk.crowd_enabled = c.enabled();
    }
    if let Some(fps) = args.fps {
        config.policy.fps = fps;
        config.policy.validate()?;
    }
    Ok(config)
}

fn detections(args: &RunArgs) -> Result<Detections> {
    let reader: Box<dyn BufRead> = if args.det == Path::new("-") {
        Box::new(io::stdin().lock())
    } else {
        let file = File::open(&args.det).with_context(|| format!("opening {}", args.det.display()))?;
        Box::new(BufReader::new(file))
    };
    let parsed = match args.format {
        Format::Mot => parse_mot_detections(reader),
        Format::Jsonl => parse_jsonl_detections(reader),
    };
    let d = parsed.with_context(|| format!("reading {}", args.det.display()))?;
    for w in d.warnings.iter().take(10) {
        eprintln!("warning: {w}");
    }
    if d.warnings.len() > 10 {
        eprintln!("warning: {} more rejected records", d.warnings.len() - 10);
    }
    Ok(d)
}

fn run(args: RunArgs, full: bool) -> Result<()> {
    let config = config(&args, full)?;
    let detections = detections(&args)?;
    let analysis = if full {
        run_pipeline(&config, detections)?
    } else {
        run_tracking(&config, detections)?
    };
    analysis.write(&config.output_dir)?;
    if full {
        let s = &analysis.summary;
        eprintln!(
            "{} frames, {} detections, {} ids, violation ratio {:.4}; wrote {}",
            s.frames,
            s.detections_accepted,
            s.unique_ids,
            s.violation_ratio,
            config.output_dir.display()
        );
    }
    Ok(())
}

fn heatmap(args: HeatmapArgs) -> Result<()> {
    let tables = args.tables.as_deref().unwrap_or(&args.out);
    let read = |name: &str| {
        let path = tables.join(name);
        read_value_table(&path).with_context(|| format!("reading {}", path.display()))
    };
    let tracking = read(TRACKING_TABLE)?;
    let combined = read(VIOLATION_TABLE)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut written = Vec::new();
    write_risk_rasters(&args.out, &tracking, &combined, &mut written)?;
    if tables.join(CROWD_TABLE).exists() {
        let current = read(CROWD_TABLE)?;
        let long_term = if tables.join(CROWD_LONG_TERM_TABLE).exists() {
            Some(read(CROWD_LONG_TERM_TABLE)?)
        } else {
            None
        };
        write_crowd_rasters(&args.out, &current, long_term.as_ref(), &mut written)?;
    }
    Ok(())
}

fn calibrate(args: CalibrateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.points)
        .with_context(|| format!("reading {}", args.points.display()))?;
    let points = parse_correspondences(&text).with_context(|| args.points.display().to_string())?;
    let block = format_homography_block(&estimate_homography(&points)?);
    match args.out {
        Some(path) => std::fs::write(&path, block).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{block}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    // Usage errors exit with status 2 from here.
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Track(a) => run(a, false),
        Command::Analyze(a) => run(a, true),
        Command::Heatmap(a) => heatmap(a),
        Command::Calibrate(a) => calibrate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
