//! Deterministic synthetic scenarios for end-to-end verification: a disk
//! moving over an empty background, watched by simulated subjects whose
//! fixations track the disk center. The generator emits the clean saliency
//! volume, an optionally corrupted copy (whole frames replaced by uniform
//! noise, with the affected frames logged), and a fixation event log at
//! source resolution — the same trio a real dataset would provide, but with
//! planted ground truth.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{box_sum, Padding};
use crate::truth::{partition_map, binarize_truth, from_continuous, FixationEvent, FixationEventLog, TrueUncertainty};
use crate::volume::{ScaleSpec, Volume, VolumeKind};

/// Disk center position per frame, in source-pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trajectory {
    Static { row: f64, col: f64 },
    /// Linear sweep from `from` to `to` across the whole clip.
    Linear { from: (f64, f64), to: (f64, f64) },
}

impl Trajectory {
    pub fn at(&self, frame: usize, frames: usize) -> (f64, f64) {
        match *self {
            Trajectory::Static { row, col } => (row, col),
            Trajectory::Linear { from, to } => {
                let t = if frames > 1 {
                    frame as f64 / (frames - 1) as f64
                } else {
                    0.0
                };
                (
                    from.0 + (to.0 - from.0) * t,
                    from.1 + (to.1 - from.1) * t,
                )
            }
        }
    }
}

/// Everything needed to generate one synthetic clip. Lengths are in source
/// pixels; the saliency output lands on `scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthScenario {
    pub source_height: usize,
    pub source_width: usize,
    pub frames: usize,
    pub scale: ScaleSpec,
    pub trajectory: Trajectory,
    /// Disk radius in source pixels.
    pub disk_radius: f64,
    /// Simulated observers; each fixates the disk center once per frame.
    pub subjects: usize,
    /// Std-dev of Gaussian jitter applied to fixation positions, in source
    /// pixels. Zero puts every subject exactly on the center.
    pub fixation_jitter: f64,
    /// Fraction of frames whose saliency is replaced with uniform noise.
    pub corrupt_fraction: f64,
    pub seed: u64,
}

impl SynthScenario {
    /// The moving-disk clip: 300 frames at 480x640, analysis at 24x32,
    /// eight subjects with no jitter, nothing corrupted.
    pub fn saccadetest(seed: u64) -> Self {
        SynthScenario {
            source_height: 480,
            source_width: 640,
            frames: 300,
            scale: ScaleSpec::scale2(),
            trajectory: Trajectory::Linear {
                from: (120.0, 80.0),
                to: (360.0, 560.0),
            },
            disk_radius: 30.0,
            subjects: 8,
            fixation_jitter: 0.0,
            corrupt_fraction: 0.0,
            seed,
        }
    }

    /// Same clip with 10% of the frames replaced by uniform noise —
    /// planted anomalies with a known mask.
    pub fn saccadetest_corrupted(seed: u64) -> Self {
        SynthScenario {
            corrupt_fraction: 0.1,
            ..Self::saccadetest(seed)
        }
    }

    /// Looks up a named preset (`saccadetest`, `saccadetest-corrupted`).
    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        match name {
            "saccadetest" => Ok(Self::saccadetest(seed)),
            "saccadetest-corrupted" => Ok(Self::saccadetest_corrupted(seed)),
            other => Err(Error::InvalidScenario(format!(
                "unknown preset '{other}' (try saccadetest or saccadetest-corrupted)"
            ))),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::InvalidScenario("need at least one frame".into()));
        }
        if self.subjects == 0 {
            return Err(Error::InvalidScenario("need at least one subject".into()));
        }
        if !(self.disk_radius > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "disk radius must be positive, got {}",
                self.disk_radius
            )));
        }
        if self.fixation_jitter < 0.0 {
            return Err(Error::InvalidScenario("jitter must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.corrupt_fraction) {
            return Err(Error::InvalidScenario(format!(
                "corrupt fraction must lie in [0,1), got {}",
                self.corrupt_fraction
            )));
        }
        if self.scale.height() > self.source_height || self.scale.width() > self.source_width {
            return Err(Error::InvalidScenario(format!(
                "analysis scale {}x{} larger than source {}x{}",
                self.scale.height(),
                self.scale.width(),
                self.source_height,
                self.source_width
            )));
        }
        for k in 0..self.frames {
            let (r, c) = self.trajectory.at(k, self.frames);
            let inside = r - self.disk_radius >= 0.0
                && r + self.disk_radius < self.source_height as f64
                && c - self.disk_radius >= 0.0
                && c + self.disk_radius < self.source_width as f64;
            if !inside {
                return Err(Error::InvalidScenario(format!(
                    "disk leaves the frame at frame {k} (center {r:.1},{c:.1}, radius {})",
                    self.disk_radius
                )));
            }
        }
        Ok(())
    }
}

/// Generator output. `saliency` is what an estimator sees; `oracle_saliency`
/// is the uncorrupted version; `corrupted_frames` marks the planted frames.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioData {
    pub saliency: Volume,
    pub oracle_saliency: Volume,
    pub log: FixationEventLog,
    pub corrupted_frames: Vec<bool>,
}

impl ScenarioData {
    /// The planted anomaly mask as a volume: 1 on corrupted frames.
    pub fn corruption_mask_volume(&self) -> Volume {
        let (h, w, d) = self.saliency.dims();
        let data: Vec<f32> = (0..d)
            .flat_map(|k| {
                let v = if self.corrupted_frames[k] { 1.0 } else { 0.0 };
                std::iter::repeat(v).take(h * w)
            })
            .collect();
        Volume::new(VolumeKind::TrueUncertainty, h, w, d, data).expect("mask geometry")
    }

    /// Binarized truth derived from the corruption mask, ready for
    /// `roc_sweep`: corrupted voxels are the positives.
    pub fn corruption_truth(&self) -> Result<TrueUncertainty> {
        binarize_truth(&from_continuous(self.corruption_mask_volume())?, 0.5)
    }
}

/// Renders the disk's per-block coverage for one frame directly at analysis
/// scale: each analysis voxel gets the fraction of its source block covered
/// by the disk.
fn rasterize_disk_frame(
    scenario: &SynthScenario,
    center: (f64, f64),
    row_map: &[usize],
    col_map: &[usize],
    block_area: &[f64],
    out: &mut [f32],
) {
    let (cr, cc) = center;
    let radius = scenario.disk_radius;
    let r2 = radius * radius;
    let tw = scenario.scale.width();

    let row_lo = (cr - radius).floor().max(0.0) as usize;
    let row_hi = ((cr + radius).ceil() as usize).min(scenario.source_height - 1);
    let col_lo = (cc - radius).floor().max(0.0) as usize;
    let col_hi = ((cc + radius).ceil() as usize).min(scenario.source_width - 1);

    for r in row_lo..=row_hi {
        let dr = r as f64 - cr;
        // horizontal chord of the disk at this row
        let span2 = r2 - dr * dr;
        if span2 < 0.0 {
            continue;
        }
        let span = span2.sqrt();
        let c_start = ((cc - span).ceil().max(col_lo as f64)) as usize;
        let c_end = ((cc + span).floor().min(col_hi as f64)) as usize;
        for c in c_start..=c_end {
            out[row_map[r] * tw + col_map[c]] += 1.0;
        }
    }
    for (v, &area) in out.iter_mut().zip(block_area) {
        *v /= area as f32;
    }
}

/// Builds the whole scenario. Reproducible: the same config (same seed)
/// yields bit-identical volumes, logs, and masks.
pub fn generate_scenario(scenario: &SynthScenario) -> Result<ScenarioData> {
    scenario.validate()?;
    let (th, tw, k_total) = (scenario.scale.height(), scenario.scale.width(), scenario.frames);

    let row_map = partition_map(scenario.source_height, th);
    let col_map = partition_map(scenario.source_width, tw);
    let mut block_area = vec![0.0f64; th * tw];
    for r in 0..scenario.source_height {
        for c in 0..scenario.source_width {
            block_area[row_map[r] * tw + col_map[c]] += 1.0;
        }
    }

    // coverage volume at analysis scale
    let mut coverage = vec![0.0f32; th * tw * k_total];
    let mut frame_buf = vec![0.0f32; th * tw];
    for k in 0..k_total {
        frame_buf.fill(0.0);
        rasterize_disk_frame(
            scenario,
            scenario.trajectory.at(k, k_total),
            &row_map,
            &col_map,
            &block_area,
            &mut frame_buf,
        );
        coverage[k * th * tw..(k + 1) * th * tw].copy_from_slice(&frame_buf);
    }

    // small spatial box blur, then normalize to [0,1]
    let as_f64: Vec<f64> = coverage.iter().map(|&v| v as f64).collect();
    let blurred = box_sum(&as_f64, (th, tw, k_total), (3, 3, 1), Padding::Replicate)?;
    let blurred: Vec<f32> = blurred.iter().map(|&v| (v / 9.0) as f32).collect();
    let oracle_saliency =
        Volume::new(VolumeKind::Saliency, th, tw, k_total, blurred)?.normalized();

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);

    // corruption: a fixed number of distinct frames, drawn without
    // replacement, then filled with uniform noise in frame order
    let corrupt_count =
        ((scenario.corrupt_fraction * k_total as f64) + 0.5).floor() as usize;
    let mut corrupted_frames = vec![false; k_total];
    let mut pool: Vec<usize> = (0..k_total).collect();
    for _ in 0..corrupt_count {
        let i = rng.random_range(0..pool.len());
        corrupted_frames[pool.swap_remove(i)] = true;
    }

    let mut saliency_data = oracle_saliency.data().to_vec();
    for (k, &corrupt) in corrupted_frames.iter().enumerate() {
        if corrupt {
            for v in &mut saliency_data[k * th * tw..(k + 1) * th * tw] {
                *v = rng.random_range(0.0..1.0);
            }
        }
    }
    let saliency = Volume::new(VolumeKind::Saliency, th, tw, k_total, saliency_data)?;

    // fixations: one event per subject per frame at the (jittered) center
    let jitter = if scenario.fixation_jitter > 0.0 {
        Some(Normal::new(0.0, scenario.fixation_jitter).expect("validated std-dev"))
    } else {
        None
    };
    let mut events = Vec::with_capacity(k_total * scenario.subjects);
    for k in 0..k_total {
        let (cr, cc) = scenario.trajectory.at(k, k_total);
        for subject in 0..scenario.subjects {
            let (mut r, mut c) = (cr, cc);
            if let Some(noise) = &jitter {
                r += noise.sample(&mut rng);
                c += noise.sample(&mut rng);
            }
            let row = (r.round().max(0.0) as usize).min(scenario.source_height - 1);
            let col = (c.round().max(0.0) as usize).min(scenario.source_width - 1);
            events.push(FixationEvent {
                subject: subject as u32,
                frame: k,
                row,
                col,
            });
        }
    }
    let log = FixationEventLog::new(
        scenario.source_height,
        scenario.source_width,
        k_total,
        events,
    )?;

    Ok(ScenarioData {
        saliency,
        oracle_saliency,
        log,
        corrupted_frames,
    })
}
