//! `wusem`: count tracks in photomicrographs and evaluate the counts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use wusem_core::features::{encode_feature_csv, filter_eccentricity, region_properties};
use wusem_core::raster::{read_gray, read_label_csv, write_gray, write_label_csv, LabelImage};
use wusem_core::stats::{
    self, compare_baseline, efficiency_reports, encode_report_csv, load_sample_images, read_counts_csv, SweepConfig,
};
use wusem_core::synth::{encode_ground_truth_csv, read_spec_json, synth_generate};
use wusem_core::wusem::{enumerate_objects, WusemParams, PRESETS};
use wusem_core::Pipeline;

#[derive(Parser)]
#[command(
    name = "wusem",
    version,
    about = "Count overlapping tracks with successive-erosion watershed"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Threshold, fill and segment one image; print the track count.
    Segment(SegmentArgs),
    /// Count every image for every (r0, dr) pair and pick the best pair.
    Sweep(SweepArgs),
    /// Efficiency report of automatic against manual counts.
    Stats(StatsArgs),
    /// Render a synthetic image with known tracks.
    Synth(SynthArgs),
    /// Count with a classic watershed seeded at every distance maximum.
    Baseline(BaselineArgs),
    /// Region measurements of a labelled image.
    Features(FeaturesArgs),
}

#[derive(Args)]
struct PipelineArgs {
    /// Smallest region kept, in pixels.
    #[arg(long, default_value_t = wusem_core::wusem::DEFAULT_MIN_AREA)]
    min_area: usize,
    /// Keep regions touching the last row or column.
    #[arg(long)]
    no_border_rule: bool,
    /// Tracks are brighter than the background.
    #[arg(long)]
    roi_bright: bool,
}

impl PipelineArgs {
    fn pipeline(&self) -> Pipeline {
        Pipeline {
            roi_is_dark: !self.roi_bright,
            min_area: self.min_area,
            apply_rd_border_rule: !self.no_border_rule,
        }
    }
}

#[derive(Args)]
struct SegmentArgs {
    /// Grayscale PGM photomicrograph.
    #[arg(long)]
    input: PathBuf,
    /// Initial erosion radius.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    r0: Option<u32>,
    /// Radius increment between erosions.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    dr: Option<u32>,
    /// Named parameter pair instead of --r0/--dr.
    #[arg(long, value_parser = preset_names())]
    preset: Option<String>,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Write the label image as CSV.
    #[arg(long)]
    out_labels: Option<PathBuf>,
    /// Write one `id,x,y` centroid row per counted track.
    #[arg(long)]
    out_annot: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Directory laid out as <sample>/<image>.pgm.
    #[arg(long)]
    images: PathBuf,
    /// Manual counts CSV (sample,image,count).
    #[arg(long)]
    manual: PathBuf,
    /// Initial radii: `a..b`, `a..b:step` or `a,b,c`.
    #[arg(long, value_parser = parse_grid)]
    r0: Grid,
    /// Radius increments, same syntax as --r0.
    #[arg(long, value_parser = parse_grid)]
    dr: Grid,
    /// Width of the undercount interval 0 < manual - auto < tolerance.
    #[arg(long, default_value_t = 2)]
    tolerance: u32,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Per-pair, per-sample CSV; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the JSON summary; stdout if omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Manual counts CSV (sample,image,count).
    #[arg(long)]
    manual: PathBuf,
    /// Automatic counts CSV, same layout.
    #[arg(long)]
    auto: PathBuf,
    /// Report CSV; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// JSON scene description.
    #[arg(long)]
    spec: PathBuf,
    /// Output directory for image.pgm and ground_truth.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BaselineArgs {
    /// Single image to count.
    #[arg(long, required_unless_present = "images", conflicts_with = "images")]
    input: Option<PathBuf>,
    /// Directory laid out as <sample>/<image>.pgm, compared against WUSEM.
    #[arg(long, requires_all = ["manual", "r0", "dr"])]
    images: Option<PathBuf>,
    /// Manual counts CSV, with --images.
    #[arg(long)]
    manual: Option<PathBuf>,
    /// WUSEM initial radius, with --images.
    #[arg(long)]
    r0: Option<u32>,
    /// WUSEM radius increment, with --images.
    #[arg(long)]
    dr: Option<u32>,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Label image CSV (--input) or paired-count CSV (--images).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FeaturesArgs {
    /// Grayscale PGM the labels were computed from.
    #[arg(long)]
    input: PathBuf,
    /// Label image CSV.
    #[arg(long)]
    labels: PathBuf,
    /// Drop regions with eccentricity above this value.
    #[arg(long)]
    eps_max: Option<f64>,
    /// Feature CSV; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct Grid(Vec<u32>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let number = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("{t:?}: {e}"));
    let values = if let Some((lo, rest)) = s.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (hi, number(step)?),
            None => (rest, 1),
        };
        let (lo, hi) = (number(lo)?, number(hi)?);
        if step == 0 || lo > hi {
            return Err(format!("{s:?}: need lo <= hi and a positive step"));
        }
        (lo..=hi).step_by(step as usize).collect()
    } else {
        s.split(',').map(number).collect::<Result<Vec<_>, _>>()?
    };
    Ok(Grid(values))
}

fn preset_names() -> clap::builder::PossibleValuesParser {
    clap::builder::PossibleValuesParser::new(PRESETS.iter().map(|(name, _, _)| *name))
}

/// Writes `text` to `path`, or to stdout when no path is given.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn segment(args: SegmentArgs) -> Result<()> {
    let (r0, dr) = match (&args.preset, args.r0, args.dr) {
        (Some(name), _, _) => {
            let p = WusemParams::preset(name).expect("validated by clap");
            (p.initial_radius(), p.delta_radius())
        }
        (None, Some(r0), Some(dr)) => (r0, dr),
        _ => unreachable!("clap requires --r0 and --dr without --preset"),
    };
    let gray = read_gray(&args.input)?;
    let (prepared, result) = args
        .pipeline
        .pipeline()
        .segment(&gray, r0, dr)
        .with_context(|| format!("segmenting {}", args.input.display()))?;
    // Diagnostics go to stderr so stdout stays a single integer line.
    let t = prepared.threshold;
    eprintln!(
        "threshold {t} ({:.3} of full scale), {} erosion rounds",
        f64::from(t) / 255.0,
        result.iterations
    );
    if let Some(path) = &args.out_labels {
        write_label_csv(&result.labels, path)?;
    }
    if let Some(path) = &args.out_annot {
        emit(Some(path), &annotations(&result.labels))?;
    }
    println!("{}", result.count);
    Ok(())
}

fn annotations(labels: &LabelImage) -> String {
    let mut out = String::from("id,x,y\n");
    for o in enumerate_objects(labels) {
        writeln!(out, "{},{},{}", o.id, o.x, o.y).unwrap();
    }
    out
}

fn sweep(args: SweepArgs) -> Result<()> {
    if args.out.is_none() && args.summary.is_none() {
        bail!("--out or --summary is required so the CSV and JSON do not share stdout");
    }
    let images = load_sample_images(&args.images)?;
    let manual = read_counts_csv(&args.manual)?;
    let cfg = SweepConfig::new(args.r0.0, args.dr.0, args.tolerance)?;
    let result = stats::run_sweep(&images, &manual, &cfg, &args.pipeline.pipeline())?;
    let summary = serde_json::to_string_pretty(&result.summary_json())? + "\n";
    emit(args.out.as_deref(), &result.encode_csv())?;
    emit(args.summary.as_deref(), &summary)
}

fn stats_report(args: StatsArgs) -> Result<()> {
    let manual = read_counts_csv(&args.manual)?;
    let auto = read_counts_csv(&args.auto)?;
    let reports = efficiency_reports(&manual, &auto)
        .with_context(|| format!("matching {} against {}", args.auto.display(), args.manual.display()))?;
    emit(args.out.as_deref(), &encode_report_csv(&reports))
}

fn synth(args: SynthArgs) -> Result<()> {
    let spec = read_spec_json(&args.spec)?;
    let (image, truth) = synth_generate(&spec).with_context(|| format!("rendering {}", args.spec.display()))?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_gray(&image, args.out.join("image.pgm"))?;
    emit(
        Some(&args.out.join("ground_truth.csv")),
        &encode_ground_truth_csv(&truth),
    )
}

fn baseline(args: BaselineArgs) -> Result<()> {
    let pipeline = args.pipeline.pipeline();
    if let Some(input) = &args.input {
        let gray = read_gray(input)?;
        let mask = pipeline
            .prepare(&gray)
            .with_context(|| format!("thresholding {}", input.display()))?
            .mask;
        let result = pipeline.baseline(&mask);
        if let Some(path) = &args.out {
            write_label_csv(&result.labels, path)?;
        }
        println!("{}", result.count);
        return Ok(());
    }
    let (Some(dir), Some(manual), Some(r0), Some(dr)) = (&args.images, &args.manual, args.r0, args.dr) else {
        unreachable!("clap enforces --images with --manual, --r0 and --dr");
    };
    let images = load_sample_images(dir)?;
    let manual = read_counts_csv(manual)?;
    let comparison = compare_baseline(&images, &manual, r0, dr, &pipeline)?;
    emit(args.out.as_deref(), &comparison.encode_csv())
}

fn features(args: FeaturesArgs) -> Result<()> {
    let gray = read_gray(&args.input)?;
    let labels = read_label_csv(&args.labels)?;
    let mut feats = region_properties(&labels, &gray)
        .with_context(|| format!("measuring {} on {}", args.labels.display(), args.input.display()))?;
    if let Some(eps) = args.eps_max {
        if !(0.0..1.0).contains(&eps) {
            bail!("--eps-max must lie in [0, 1), got {eps}");
        }
        feats = filter_eccentricity(&feats, eps);
    }
    let image = args
        .input
        .file_stem()
        .unwrap_or_default()
        .to_string_lossy()
        .into_owned();
    let rows: Vec<_> = feats.into_iter().map(|f| (image.clone(), f)).collect();
    emit(args.out.as_deref(), &encode_feature_csv(&rows))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Segment(a) => segment(a),
        Command::Sweep(a) => sweep(a),
        Command::Stats(a) => stats_report(a),
        Command::Synth(a) => synth(a),
        Command::Baseline(a) => baseline(a),
        Command::Features(a) => features(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
