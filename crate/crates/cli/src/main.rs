//! `suv` — command-line frontend for saliency uncertainty volumes.
//!
//! Each subcommand wraps one stage of the pipeline: `estimate` runs an
//! uncertainty estimator over a saliency volume, `truth` derives the
//! fixation-based ground truth, `evaluate`/`distances` score an estimate
//! against it, `entropy` measures how predictable fixation densities are
//! from their neighborhoods, `synth` generates test scenarios with known
//! answers, `sweep` runs a whole estimator/video grid from a TOML config,
//! and `convert` turns raw gaze logs into the fixation CSV format.
//!
//! Failures print `error[CODE]: message` on stderr and exit 1 (usage
//! mistakes exit 2); all file outputs are written atomically, so an
//! aborted run never leaves partial artifacts.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use suv_core::entropy::{entropy_analysis, EntropyConfig};
use suv_core::eval::{histogram_distances, roc_sweep};
use suv_core::filter::Padding;
use suv_core::io::config::{parse_scale, EstimatorEntry, RunConfig};
use suv_core::io::fixation_csv::{read_fixation_csv, write_fixation_csv};
use suv_core::io::reports::{
    write_auc_csv, write_category_csv, write_distance_csv, write_entropy_csv, write_json,
    write_roc_csv,
};
use suv_core::io::suv1::{read_volume, write_volume};
use suv_core::pipeline::run_sweep;
use suv_core::synth::{generate_scenario, SynthScenario};
use suv_core::truth::{
    aggregate_fixations_at, binarize_truth, from_continuous, true_uncertainty, FixationEvent,
    FixationEventLog, FixationNormalization,
};
use suv_core::volume::VolumeKind;
use suv_core::{Error, Result, ScalingConfig, Volume};

#[derive(Parser)]
#[command(name = "suv", version, about = "Pixel-wise uncertainty maps for video saliency volumes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an uncertainty estimator over a saliency volume
    Estimate(EstimateArgs),
    /// Derive the continuous true-uncertainty volume from fixations
    Truth(TruthArgs),
    /// ROC-sweep an estimate against binarized ground truth
    Evaluate(EvaluateArgs),
    /// Histogram distances between an estimate and the continuous truth
    Distances(DistancesArgs),
    /// Neighborhood-conditioned entropy of a fixation density volume
    Entropy(EntropyArgs),
    /// Generate a synthetic scenario with known ground truth
    Synth(SynthArgs),
    /// Run a batch sweep from a TOML configuration
    Sweep(SweepArgs),
    /// Convert a raw gaze log into the fixation CSV format
    Convert(ConvertArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Stu,
    Tu,
    Su,
    Fusion,
    Baseline,
    Eu,
}

impl MethodArg {
    fn to_method(self) -> suv_core::EstimatorMethod {
        use suv_core::EstimatorMethod::*;
        match self {
            MethodArg::Stu => Stu,
            MethodArg::Tu => Tu,
            MethodArg::Su => Su,
            MethodArg::Fusion => SuPlusTu,
            MethodArg::Baseline => Baseline,
            MethodArg::Eu => Eu,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PaddingArg {
    Replicate,
    Zero,
}

impl PaddingArg {
    fn to_padding(self) -> Padding {
        match self {
            PaddingArg::Replicate => Padding::Replicate,
            PaddingArg::Zero => Padding::Zero,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalingArg {
    /// Scale the input onto [0,1] once; outputs are comparable across volumes
    Fixed,
    /// Stretch each output so its own maximum lands on gamma
    Maxnorm,
}

impl ScalingArg {
    fn to_scaling(self) -> ScalingConfig {
        match self {
            ScalingArg::Fixed => ScalingConfig::fixed_unit(),
            ScalingArg::Maxnorm => ScalingConfig::per_volume_max(),
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    /// Estimator to run
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Window extents `L1xL2xL3` (rows x cols x frames, all odd); for
    /// `fusion` the spatial part feeds SU and the frame count feeds TU.
    /// Ignored by `eu`, which has no window parameter.
    #[arg(long)]
    kernel: Option<String>,
    /// Input saliency volume (.suv)
    #[arg(long = "in")]
    input: PathBuf,
    /// Output uncertainty volume (.suv)
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "replicate")]
    padding: PaddingArg,
    #[arg(long, value_enum, default_value = "fixed")]
    scaling: ScalingArg,
}

#[derive(Args)]
struct TruthArgs {
    /// Saliency volume at the analysis scale (.suv)
    #[arg(long)]
    saliency: PathBuf,
    /// Fixation events (.csv) at source resolution
    #[arg(long)]
    fixations: PathBuf,
    /// Analysis scale: preset `1|2|3` (for 480x640 sources) or explicit `HxW`
    #[arg(long)]
    scale: String,
    /// Output continuous true-uncertainty volume (.suv)
    #[arg(long)]
    out: PathBuf,
    /// Source geometry `HxW` the fixations were recorded at
    #[arg(long, default_value = "480x640")]
    source: String,
    /// How the fixation density is brought onto [0,1] before differencing
    #[arg(long, value_enum, default_value = "per-volume")]
    normalization: NormalizationArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizationArg {
    PerVolume,
    PerFrame,
}

impl NormalizationArg {
    fn to_normalization(self) -> FixationNormalization {
        match self {
            NormalizationArg::PerVolume => FixationNormalization::PerVolume,
            NormalizationArg::PerFrame => FixationNormalization::PerFrame,
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    /// Uncertainty estimate (.suv)
    #[arg(long)]
    estimate: PathBuf,
    /// Continuous true-uncertainty volume (.suv)
    #[arg(long)]
    truth: PathBuf,
    /// Threshold that binarizes the truth (inclusive)
    #[arg(long, default_value_t = 0.55)]
    t1: f32,
    /// Number of uniform t2 thresholds swept over [0,1]
    #[arg(long, default_value_t = 1024)]
    steps: usize,
    /// Output JSON report
    #[arg(long)]
    report: PathBuf,
    /// Also write the ROC curve as CSV
    #[arg(long)]
    roc_csv: Option<PathBuf>,
}

#[derive(Args)]
struct DistancesArgs {
    /// Uncertainty estimate (.suv)
    #[arg(long)]
    estimate: PathBuf,
    /// Continuous true-uncertainty volume (.suv)
    #[arg(long)]
    truth: PathBuf,
    /// Histogram resolution over [0,1]
    #[arg(long, default_value_t = 64)]
    bins: usize,
    /// Output JSON report
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct EntropyArgs {
    /// Fixation events (.csv) at source resolution
    #[arg(long)]
    fixations: PathBuf,
    /// Analysis scale: preset `1|2|3` or explicit `HxW`
    #[arg(long)]
    scale: String,
    /// Quantization levels for voxel values and neighborhood means
    #[arg(long, default_value_t = 256)]
    levels: usize,
    /// Output CSV report
    #[arg(long)]
    report: PathBuf,
    /// Source geometry `HxW` the fixations were recorded at
    #[arg(long, default_value = "480x640")]
    source: String,
    /// Seed for the shuffled-noise control column
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct SynthArgs {
    /// Scenario preset: `saccadetest` or `saccadetest-corrupted`
    #[arg(long)]
    preset: String,
    /// Seed for fixation jitter and corruption placement
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Directory receiving the generated artifacts
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep configuration (.toml); paths inside resolve relative to it
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct ConvertArgs {
    /// Raw gaze log: whitespace-separated `subject time_s x_col y_row`
    /// per line, `#` starts a comment
    #[arg(long = "in")]
    input: PathBuf,
    /// Output fixation CSV
    #[arg(long)]
    out: PathBuf,
    /// Video frame rate used to map timestamps to frame indices
    #[arg(long)]
    fps: f64,
    /// Source geometry `HxW`; samples outside it are dropped
    #[arg(long, default_value = "480x640")]
    source: String,
    /// Keep only frames below this count (default: highest frame + 1)
    #[arg(long)]
    frames: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Truth(args) => cmd_truth(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Distances(args) => cmd_distances(args),
        Command::Entropy(args) => cmd_entropy(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Convert(args) => cmd_convert(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}

/// `HxW` pair, e.g. `480x640`.
fn parse_geometry(text: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = text.split(['x', 'X']).collect();
    let parse = |s: &str| s.trim().parse::<usize>().ok().filter(|&v| v > 0);
    match parts.as_slice() {
        [h, w] => match (parse(h), parse(w)) {
            (Some(h), Some(w)) => Ok((h, w)),
            _ => Err(Error::InvalidConfig(format!(
                "geometry '{text}' must be two positive integers HxW"
            ))),
        },
        _ => Err(Error::InvalidConfig(format!(
            "geometry '{text}' must look like 480x640"
        ))),
    }
}

fn read_saliency(path: &Path) -> Result<suv_core::io::suv1::Suv1File> {
    let file = read_volume(path)?;
    if file.volume.kind() != VolumeKind::Saliency {
        return Err(Error::InvalidInput(format!(
            "{} holds a {:?} volume, expected Saliency",
            path.display(),
            file.volume.kind()
        )));
    }
    Ok(file)
}

/// File stem used to tag reports, e.g. `clip01` for `out/clip01.suv`.
fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "volume".to_string())
}

fn cmd_estimate(args: EstimateArgs) -> Result<()> {
    let file = read_saliency(&args.input)?;
    let entry = EstimatorEntry {
        method: args.method.to_method(),
        kernel: args.kernel,
        padding: args.padding.to_padding(),
        scaling: args.scaling.to_scaling(),
    };
    let config = entry.to_config()?;
    let u = config.run(&file.volume)?;
    write_volume(&args.out, &u, file.scale_label)?;
    println!(
        "{} wrote {} ({}x{}x{}, max {})",
        config.label(),
        args.out.display(),
        u.height(),
        u.width(),
        u.depth(),
        u.max_value()
    );
    Ok(())
}

fn cmd_truth(args: TruthArgs) -> Result<()> {
    let (source_h, source_w) = parse_geometry(&args.source)?;
    let scale = parse_scale(&args.scale, source_h, source_w)?;
    let file = read_saliency(&args.saliency)?;
    let s = file.volume;
    if (s.height(), s.width()) != (scale.height(), scale.width()) {
        return Err(Error::InvalidGeometry(format!(
            "saliency frames are {}x{} but scale '{}' is {}x{}",
            s.height(),
            s.width(),
            args.scale,
            scale.height(),
            scale.width()
        )));
    }
    let log = read_fixation_csv(&args.fixations, source_h, source_w, Some(s.depth()))?;
    let fix = aggregate_fixations_at(&log, &scale)?;
    let gt = true_uncertainty(&s, &fix, args.normalization.to_normalization())?;
    if !gt.zero_fixation_frames().is_empty() {
        eprintln!(
            "note: {} of {} frames received no fixations; their truth compares against an empty density",
            gt.zero_fixation_frames().len(),
            s.depth()
        );
    }
    write_volume(&args.out, gt.utr(), scale.label())?;
    println!("wrote {} (mean truth {:.4})", args.out.display(), mean(gt.utr()));
    Ok(())
}

fn mean(v: &Volume) -> f64 {
    v.sum() / v.voxel_count() as f64
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let estimate = read_volume(&args.estimate)?.volume;
    let truth_volume = read_volume(&args.truth)?.volume;
    let truth = binarize_truth(&from_continuous(truth_volume)?, args.t1)?;
    let report = roc_sweep(&estimate, &truth, args.steps, &stem(&args.estimate))?;
    write_json(&args.report, &report)?;
    if let Some(path) = &args.roc_csv {
        write_roc_csv(path, &report)?;
    }
    println!("auc {} (t1 {}, {} thresholds)", report.auc, args.t1, args.steps);
    Ok(())
}

fn cmd_distances(args: DistancesArgs) -> Result<()> {
    let estimate = read_volume(&args.estimate)?.volume;
    let truth = read_volume(&args.truth)?.volume;
    let report = histogram_distances(&estimate, &truth, args.bins)?;
    write_json(&args.report, &report)?;
    println!(
        "js {} jd {} hi {} l2 {} ({} bins)",
        report.js, report.jd, report.hi, report.l2, report.bins
    );
    Ok(())
}

fn cmd_entropy(args: EntropyArgs) -> Result<()> {
    let (source_h, source_w) = parse_geometry(&args.source)?;
    let scale = parse_scale(&args.scale, source_h, source_w)?;
    let log = read_fixation_csv(&args.fixations, source_h, source_w, None)?;
    let fix = aggregate_fixations_at(&log, &scale)?;
    let config = EntropyConfig {
        quant_levels: args.levels,
        seed: args.seed,
        ..EntropyConfig::default()
    };
    let report = entropy_analysis(&fix, &stem(&args.fixations), &config)?;
    write_entropy_csv(&args.report, std::slice::from_ref(&report))?;
    match report.reduction_ratio {
        Some(ratio) => println!(
            "h_x {} h_x_given_z {} reduction {:.3}",
            report.h_x, report.h_x_given_z, ratio
        ),
        None => println!("h_x 0 (constant density, no reduction to measure)"),
    }
    Ok(())
}

/// What `synth` wrote and the scenario it came from, so a generated
/// directory is self-describing.
#[derive(serde::Serialize)]
struct SynthManifest {
    preset: String,
    seed: u64,
    source_height: usize,
    source_width: usize,
    frames: usize,
    analysis_height: usize,
    analysis_width: usize,
    scale_label: u8,
    subjects: usize,
    corrupted_frames: usize,
    files: Vec<String>,
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let scenario = SynthScenario::preset(&args.preset, args.seed)?;
    let data = generate_scenario(&scenario)?;
    std::fs::create_dir_all(&args.out_dir)?;

    let label = scenario.scale.label();
    let mut files = vec![
        "saliency.suv".to_string(),
        "oracle_saliency.suv".to_string(),
        "fixations.csv".to_string(),
    ];
    write_volume(&args.out_dir.join("saliency.suv"), &data.saliency, label)?;
    write_volume(&args.out_dir.join("oracle_saliency.suv"), &data.oracle_saliency, label)?;
    write_fixation_csv(&args.out_dir.join("fixations.csv"), &data.log)?;
    let corrupted = data.corrupted_frames.iter().filter(|&&c| c).count();
    if corrupted > 0 {
        write_volume(&args.out_dir.join("mask.suv"), &data.corruption_mask_volume(), label)?;
        files.push("mask.suv".to_string());
    }

    let manifest = SynthManifest {
        preset: args.preset,
        seed: args.seed,
        source_height: scenario.source_height,
        source_width: scenario.source_width,
        frames: scenario.frames,
        analysis_height: scenario.scale.height(),
        analysis_width: scenario.scale.width(),
        scale_label: label,
        subjects: scenario.subjects,
        corrupted_frames: corrupted,
        files: files.clone(),
    };
    write_json(&args.out_dir.join("manifest.json"), &manifest)?;

    println!(
        "wrote {} files to {} ({} corrupted frames)",
        files.len() + 1,
        args.out_dir.display(),
        corrupted
    );
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let config = RunConfig::load(&args.config)?;
    let base = args
        .config
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();
    let report = run_sweep(&config, &base)?;

    let out_dir = if config.output_dir.is_absolute() {
        config.output_dir.clone()
    } else {
        base.join(&config.output_dir)
    };
    std::fs::create_dir_all(&out_dir)?;
    write_json(&out_dir.join("sweep.json"), &report)?;
    write_auc_csv(&out_dir.join("auc.csv"), &report.rows)?;
    write_distance_csv(&out_dir.join("distances.csv"), &report.distances)?;
    for block in &report.categories {
        let name = format!("categories_t1_{}.csv", block.t1);
        write_category_csv(&out_dir.join(name), &block.report)?;
    }

    println!(
        "swept {} videos x {} estimators x {} thresholds -> {}",
        config.videos.len(),
        config.estimators.len(),
        config.t1.len(),
        out_dir.display()
    );
    Ok(())
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse { line, reason: reason.into() }
}

fn cmd_convert(args: ConvertArgs) -> Result<()> {
    let (source_h, source_w) = parse_geometry(&args.source)?;
    if !(args.fps.is_finite() && args.fps > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "fps must be positive, got {}",
            args.fps
        )));
    }
    let text = std::fs::read_to_string(&args.input)?;

    let mut subject_ids: std::collections::HashMap<String, u32> = std::collections::HashMap::new();
    let mut events = Vec::new();
    let mut dropped = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [subject, time_s, x_col, y_row] = fields.as_slice() else {
            return Err(parse_err(
                line_no,
                format!("expected 4 fields `subject time_s x_col y_row`, got {}", fields.len()),
            ));
        };
        let time: f64 = time_s
            .parse()
            .map_err(|_| parse_err(line_no, format!("time '{time_s}' is not a number")))?;
        let col: f64 = x_col
            .parse()
            .map_err(|_| parse_err(line_no, format!("x '{x_col}' is not a number")))?;
        let row: f64 = y_row
            .parse()
            .map_err(|_| parse_err(line_no, format!("y '{y_row}' is not a number")))?;

        // off-screen and pre-roll samples are ordinary tracker output, not
        // errors; drop them and report how many
        if time < 0.0 || row < 0.0 || col < 0.0 || row >= source_h as f64 || col >= source_w as f64
        {
            dropped += 1;
            continue;
        }
        let frame = (time * args.fps).floor() as usize;
        if let Some(limit) = args.frames {
            if frame >= limit {
                dropped += 1;
                continue;
            }
        }
        let next_id = subject_ids.len() as u32;
        let id = *subject_ids.entry(subject.to_string()).or_insert(next_id);
        events.push(FixationEvent {
            subject: id,
            frame,
            row: row as usize,
            col: col as usize,
        });
    }

    if events.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{} contains no usable samples ({dropped} dropped)",
            args.input.display()
        )));
    }
    let frame_count = match args.frames {
        Some(limit) => limit,
        None => events.iter().map(|e| e.frame).max().unwrap_or(0) + 1,
    };
    let log = FixationEventLog::new(source_h, source_w, frame_count, events)?;
    write_fixation_csv(&args.out, &log)?;
    println!(
        "converted {} samples ({} dropped) from {} subjects into {}",
        log.events().len(),
        dropped,
        log.subject_count(),
        args.out.display()
    );
    Ok(())
}
