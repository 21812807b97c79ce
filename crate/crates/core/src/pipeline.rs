//! Batch sweep: every configured estimator runs over every configured
//! video, each estimate is scored against fixation-derived ground truth,
//! and the per-pair results are rolled up into category tables.
//!
//! Videos are processed in parallel on a dedicated worker pool; results
//! are merged in configuration order, so a sweep's output is byte-for-byte
//! identical regardless of the worker count.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EstimatorConfig;
use crate::eval::{self, AucEntry, CategoryReport, HistogramDistanceReport};
use crate::io::config::{RunConfig, VideoEntry};
use crate::io::fixation_csv::read_fixation_csv;
use crate::io::suv1::read_volume;
use crate::truth::{self, TrueUncertainty};
use crate::volume::{ScaleSpec, VolumeKind};

/// AUC of one (video, estimator, t1) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucRow {
    pub video: String,
    pub category: String,
    pub estimator: String,
    pub t1: f32,
    pub auc: f64,
    /// Frames of this video that received no fixations; they stay in the
    /// evaluation but flag how trustworthy the ground truth is.
    pub zero_fixation_frames: usize,
}

/// Histogram distances between one estimate and the continuous ground
/// truth (independent of any t1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub video: String,
    pub estimator: String,
    pub distances: HistogramDistanceReport,
}

/// Category rollup of all AUC rows sharing one truth threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryBlock {
    pub t1: f32,
    pub report: CategoryReport,
}

/// Everything a sweep produces, in deterministic configuration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub scale: String,
    pub steps: usize,
    pub bins: usize,
    pub rows: Vec<AucRow>,
    pub distances: Vec<DistanceRow>,
    pub categories: Vec<CategoryBlock>,
}

struct VideoOutput {
    rows: Vec<AucRow>,
    distances: Vec<DistanceRow>,
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

/// Any failure inside a video's task aborts the sweep; tag it with the
/// video and stage so a batch error points at the offending input.
fn stage<T>(video: &str, what: &str, result: Result<T>) -> Result<T> {
    result.map_err(|e| Error::InvalidInput(format!("video '{video}', {what}: {e}")))
}

fn process_video(
    video: &VideoEntry,
    base: &Path,
    scale: &ScaleSpec,
    estimators: &[EstimatorConfig],
    config: &RunConfig,
) -> Result<VideoOutput> {
    let name = &video.name;

    let saliency_path = resolve(base, &video.saliency);
    let file = stage(name, "saliency volume", read_volume(&saliency_path))?;
    let s = file.volume;
    if s.kind() != VolumeKind::Saliency {
        return stage(
            name,
            "saliency volume",
            Err(Error::InvalidInput(format!(
                "expected a saliency volume, file holds {:?}",
                s.kind()
            ))),
        );
    }
    let (h, w, depth) = s.dims();
    if (h, w) != (scale.height(), scale.width()) {
        return stage(
            name,
            "saliency volume",
            Err(Error::InvalidGeometry(format!(
                "{h}x{w} frames but the sweep scale is {}x{}",
                scale.height(),
                scale.width()
            ))),
        );
    }

    let log = stage(
        name,
        "fixation log",
        read_fixation_csv(
            &resolve(base, &video.fixations),
            config.source_height,
            config.source_width,
            Some(depth),
        ),
    )?;
    let fix = stage(name, "fixation aggregation", truth::aggregate_fixations_at(&log, scale))?;
    let gt = stage(
        name,
        "ground truth",
        truth::true_uncertainty(&s, &fix, config.normalization),
    )?;
    let zero_frames = gt.zero_fixation_frames().len();
    let binarized: Vec<TrueUncertainty> = config
        .t1
        .iter()
        .map(|&t| stage(name, "truth binarization", truth::binarize_truth(&gt, t)))
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(estimators.len() * binarized.len());
    let mut distances = Vec::with_capacity(estimators.len());
    for est in estimators {
        let label = est.label();
        let u = stage(name, &label, est.run(&s))?;
        distances.push(DistanceRow {
            video: name.clone(),
            estimator: label.clone(),
            distances: stage(
                name,
                "histogram distances",
                eval::histogram_distances(&u, gt.utr(), config.bins),
            )?,
        });
        for bt in &binarized {
            let t1 = bt.t1().expect("binarized truth records t1");
            let roc = stage(
                name,
                &format!("roc sweep at t1={t1}"),
                eval::roc_sweep(&u, bt, config.steps, &label),
            )?;
            rows.push(AucRow {
                video: name.clone(),
                category: video.category.clone(),
                estimator: label.clone(),
                t1,
                auc: roc.auc,
                zero_fixation_frames: zero_frames,
            });
        }
    }
    Ok(VideoOutput { rows, distances })
}

/// Runs the whole sweep described by `config`. Relative input paths are
/// resolved against `base_dir` (callers typically pass the directory the
/// config file came from).
pub fn run_sweep(config: &RunConfig, base_dir: &Path) -> Result<SweepReport> {
    config.validate()?;
    let scale = config.scale_spec()?;
    let estimators: Vec<EstimatorConfig> = config
        .estimators
        .iter()
        .map(|e| e.to_config())
        .collect::<Result<_>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build a {}-worker pool: {e}", config.workers)))?;
    let outputs: Vec<VideoOutput> = pool.install(|| {
        config
            .videos
            .par_iter()
            .map(|v| process_video(v, base_dir, &scale, &estimators, config))
            .collect::<Result<_>>()
    })?;

    let mut rows = Vec::new();
    let mut distances = Vec::new();
    for out in outputs {
        rows.extend(out.rows);
        distances.extend(out.distances);
    }

    let categories = config
        .t1
        .iter()
        .map(|&t1| {
            let entries: Vec<AucEntry> = rows
                .iter()
                .filter(|r| r.t1 == t1)
                .map(|r| AucEntry {
                    video: r.video.clone(),
                    category: r.category.clone(),
                    estimator: r.estimator.clone(),
                    auc: r.auc,
                })
                .collect();
            CategoryBlock {
                t1,
                report: eval::category_report(&entries),
            }
        })
        .collect();

    Ok(SweepReport {
        scale: config.scale.clone(),
        steps: config.steps,
        bins: config.bins,
        rows,
        distances,
        categories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::EstimatorMethod;
    use crate::io::config::EstimatorEntry;
    use crate::io::fixation_csv::write_fixation_csv;
    use crate::io::suv1::write_volume;
    use crate::synth::{self, SynthScenario, Trajectory};
    use crate::volume::ScalingConfig;
    use crate::filter::Padding;

    fn small_scenario(seed: u64, trajectory: Trajectory, corrupt: f64) -> SynthScenario {
        SynthScenario {
            source_height: 120,
            source_width: 160,
            frames: 40,
            scale: ScaleSpec::custom(12, 16, 120, 160).unwrap(),
            trajectory,
            disk_radius: 12.0,
            subjects: 5,
            fixation_jitter: 0.0,
            corrupt_fraction: corrupt,
            seed,
        }
    }

    /// Two synthetic videos (one clean pan, one partly corrupted static
    /// shot) with two estimators and two truth thresholds.
    fn demo_config(dir: &Path, workers: usize) -> RunConfig {
        let pan = small_scenario(
            11,
            Trajectory::Linear { from: (30.0, 20.0), to: (90.0, 140.0) },
            0.0,
        );
        let noisy = small_scenario(12, Trajectory::Static { row: 60.0, col: 80.0 }, 0.25);
        for (scenario, stem) in [(&pan, "pan"), (&noisy, "noisy")] {
            let data = synth::generate_scenario(scenario).unwrap();
            write_volume(&dir.join(format!("{stem}.suv")), &data.saliency, 0).unwrap();
            write_fixation_csv(&dir.join(format!("{stem}.csv")), &data.log).unwrap();
        }
        RunConfig {
            scale: "12x16".into(),
            steps: 129,
            bins: 16,
            t1: vec![0.2, 0.5],
            seed: 7,
            workers,
            output_dir: dir.join("out"),
            source_height: 120,
            source_width: 160,
            normalization: Default::default(),
            videos: vec![
                VideoEntry {
                    name: "pan".into(),
                    category: "clean".into(),
                    saliency: "pan.suv".into(),
                    fixations: "pan.csv".into(),
                },
                VideoEntry {
                    name: "noisy".into(),
                    category: "corrupted".into(),
                    saliency: "noisy.suv".into(),
                    fixations: "noisy.csv".into(),
                },
            ],
            estimators: vec![
                EstimatorEntry {
                    method: EstimatorMethod::Stu,
                    kernel: Some("3x3x3".into()),
                    padding: Padding::Replicate,
                    scaling: ScalingConfig::default(),
                },
                EstimatorEntry {
                    method: EstimatorMethod::Baseline,
                    kernel: Some("3x3x3".into()),
                    padding: Padding::Replicate,
                    scaling: ScalingConfig::default(),
                },
            ],
        }
    }

    #[test]
    fn sweep_covers_every_combination() {
        let dir = tempfile::tempdir().unwrap();
        let config = demo_config(dir.path(), 1);
        let report = run_sweep(&config, dir.path()).unwrap();

        assert_eq!(report.rows.len(), 2 * 2 * 2); // videos x estimators x t1
        assert_eq!(report.distances.len(), 2 * 2);
        assert_eq!(report.categories.len(), 2);
        for row in &report.rows {
            assert!((0.0..=1.0).contains(&row.auc), "auc {} out of range", row.auc);
            assert_eq!(row.zero_fixation_frames, 0);
        }
        // One video per category here, so every cell averages one AUC.
        for block in &report.categories {
            assert_eq!(block.report.rows.len(), 4);
            assert!(block.report.rows.iter().all(|r| r.video_count == 1));
        }
        // Config order, not alphabetical: pan rows before noisy rows.
        assert_eq!(report.rows[0].video, "pan");
        assert_eq!(report.rows[0].estimator, "stu_3x3x3");
        assert_eq!(report.rows.last().unwrap().video, "noisy");
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let dir = tempfile::tempdir().unwrap();
        let sequential = demo_config(dir.path(), 1);
        let parallel = RunConfig { workers: 4, ..sequential.clone() };

        let a = run_sweep(&sequential, dir.path()).unwrap();
        let b = run_sweep(&parallel, dir.path()).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn errors_name_the_offending_video() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = demo_config(dir.path(), 1);
        config.videos[1].saliency = "missing.suv".into();
        let err = run_sweep(&config, dir.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("'noisy'"), "{msg}");
        assert!(msg.contains("saliency volume"), "{msg}");
    }

    #[test]
    fn scale_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = demo_config(dir.path(), 1);
        config.scale = "6x8".into();
        let err = run_sweep(&config, dir.path()).unwrap_err();
        assert!(err.to_string().contains("sweep scale"), "{err}");
    }
}
