//! Fixation-derived ground truth: turn raw eye-fixation events into a
//! count volume, bring it onto the analysis scale, and compare against the
//! saliency volume to get the continuous true-uncertainty map
//! `utr = |normalize(S) - normalize(F)|`, optionally binarized at T1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{voxel_abs_diff, BlockReducer, ScaleSpec, Volume, VolumeKind};

/// One recorded eye fixation: a subject looked at source pixel
/// `(row, col)` during `frame`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixationEvent {
    pub subject: u32,
    pub frame: usize,
    pub row: usize,
    pub col: usize,
}

/// A bounds-checked set of fixation events against a known source geometry.
/// Subjects are pooled unweighted: locations more subjects agree on simply
/// accumulate more counts.
#[derive(Debug, Clone, PartialEq)]
pub struct FixationEventLog {
    source_height: usize,
    source_width: usize,
    frame_count: usize,
    events: Vec<FixationEvent>,
}

impl FixationEventLog {
    pub fn new(
        source_height: usize,
        source_width: usize,
        frame_count: usize,
        events: Vec<FixationEvent>,
    ) -> Result<Self> {
        if source_height == 0 || source_width == 0 || frame_count == 0 {
            return Err(Error::InvalidGeometry(format!(
                "log geometry must be positive, got {source_height}x{source_width}x{frame_count}"
            )));
        }
        for (index, e) in events.iter().enumerate() {
            let reason = if e.row >= source_height {
                Some(format!("row {} outside 0..{source_height}", e.row))
            } else if e.col >= source_width {
                Some(format!("col {} outside 0..{source_width}", e.col))
            } else if e.frame >= frame_count {
                Some(format!("frame {} outside 0..{frame_count}", e.frame))
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(Error::InvalidEvent { index, reason });
            }
        }
        Ok(FixationEventLog {
            source_height,
            source_width,
            frame_count,
            events,
        })
    }

    pub fn source_height(&self) -> usize {
        self.source_height
    }

    pub fn source_width(&self) -> usize {
        self.source_width
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn events(&self) -> &[FixationEvent] {
        &self.events
    }

    pub fn subject_count(&self) -> usize {
        let mut ids: Vec<u32> = self.events.iter().map(|e| e.subject).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

/// Accumulates events into a count volume at full source resolution:
/// +1 per event, so the volume's total mass equals the event count.
pub fn aggregate_fixations(log: &FixationEventLog) -> Result<Volume> {
    let mut data = vec![0.0f32; log.source_height * log.source_width * log.frame_count];
    for e in &log.events {
        data[(e.frame * log.source_height + e.row) * log.source_width + e.col] += 1.0;
    }
    Volume::new(
        VolumeKind::Fixation,
        log.source_height,
        log.source_width,
        log.frame_count,
        data,
    )
}

/// Downscales a fixation count volume onto the analysis grid. Block sums
/// are used so no event ever disappears: total mass is conserved.
pub fn resize_fixations(counts: &Volume, target: &ScaleSpec) -> Result<Volume> {
    counts.block_resize(target, BlockReducer::Sum)
}

/// Fills block `m` with every source index in `[bound(m), bound(m+1))`,
/// i.e. the inverse of the floor-boundary partition used by block resizing.
pub(crate) fn partition_map(source: usize, target: usize) -> Vec<usize> {
    let mut map = vec![0usize; source];
    for m in 0..target {
        let (b0, b1) = (m * source / target, (m + 1) * source / target);
        for item in &mut map[b0..b1] {
            *item = m;
        }
    }
    map
}

/// Accumulates events directly at the analysis scale, skipping the full
/// source-resolution volume. Equivalent to [`aggregate_fixations`] followed
/// by [`resize_fixations`] — each event lands in exactly one block — but
/// without allocating `M' x N' x K` floats.
pub fn aggregate_fixations_at(log: &FixationEventLog, target: &ScaleSpec) -> Result<Volume> {
    let (th, tw) = (target.height(), target.width());
    if th > log.source_height || tw > log.source_width {
        return Err(Error::InvalidGeometry(format!(
            "target {th}x{tw} larger than source {}x{}",
            log.source_height, log.source_width
        )));
    }
    let row_map = partition_map(log.source_height, th);
    let col_map = partition_map(log.source_width, tw);
    let mut data = vec![0.0f32; th * tw * log.frame_count];
    for e in &log.events {
        data[(e.frame * th + row_map[e.row]) * tw + col_map[e.col]] += 1.0;
    }
    Volume::new(VolumeKind::Fixation, th, tw, log.frame_count, data)
}

/// How the fixation count volume is normalized before it is compared with
/// the saliency volume. Per-volume is the default; per-frame gives every
/// frame equal weight regardless of how many subjects fixated during it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixationNormalization {
    #[default]
    PerVolume,
    PerFrame,
}

fn normalize_fixations(fix: &Volume, mode: FixationNormalization) -> Volume {
    match mode {
        FixationNormalization::PerVolume => fix.normalized(),
        FixationNormalization::PerFrame => {
            let (h, w, d) = fix.dims();
            let mut data = fix.data().to_vec();
            for k in 0..d {
                let frame = &mut data[k * h * w..(k + 1) * h * w];
                let max = frame.iter().copied().fold(0.0f32, f32::max);
                if max > 0.0 {
                    for v in frame {
                        *v /= max;
                    }
                }
            }
            Volume::new(fix.kind(), h, w, d, data).expect("geometry unchanged")
        }
    }
}

/// Continuous true uncertainty plus its optional binarized form.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueUncertainty {
    utr: Volume,
    t1: Option<f32>,
    binary: Option<Vec<bool>>,
    zero_fixation_frames: Vec<usize>,
}

impl TrueUncertainty {
    pub fn utr(&self) -> &Volume {
        &self.utr
    }

    /// Threshold used by the binarization, when one has been applied.
    pub fn t1(&self) -> Option<f32> {
        self.t1
    }

    /// Per-voxel labels `utr >= t1`, in volume layout order.
    pub fn binary(&self) -> Option<&[bool]> {
        self.binary.as_deref()
    }

    /// Frames that had no fixation events at all. The truth there degrades
    /// to the normalized saliency itself, so downstream reports flag them.
    pub fn zero_fixation_frames(&self) -> &[usize] {
        &self.zero_fixation_frames
    }
}

/// Builds the continuous true-uncertainty volume: both inputs are brought
/// onto [0,1] and subtracted voxel-wise, `utr = |normalize(s) - normalize(f)|`.
/// The result is symmetric in its inputs and zero exactly where the saliency
/// map reproduces the fixation density.
pub fn true_uncertainty(
    s: &Volume,
    fix_resized: &Volume,
    normalization: FixationNormalization,
) -> Result<TrueUncertainty> {
    if s.dims() != fix_resized.dims() {
        return Err(Error::InvalidGeometry(format!(
            "saliency {:?} vs fixation {:?}",
            s.dims(),
            fix_resized.dims()
        )));
    }
    let (h, w, _) = fix_resized.dims();
    let zero_fixation_frames = (0..fix_resized.depth())
        .filter(|&k| {
            fix_resized.data()[k * h * w..(k + 1) * h * w]
                .iter()
                .all(|&v| v == 0.0)
        })
        .collect();

    let ns = s.normalized();
    let nf = normalize_fixations(fix_resized, normalization);
    let utr = voxel_abs_diff(&ns, &nf)?.with_kind(VolumeKind::TrueUncertainty);
    Ok(TrueUncertainty {
        utr,
        t1: None,
        binary: None,
        zero_fixation_frames,
    })
}

/// Wraps an externally produced continuous truth volume (e.g. read back
/// from disk) so it can be binarized and evaluated.
pub fn from_continuous(utr: Volume) -> Result<TrueUncertainty> {
    if utr.data().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::InvalidInput(
            "true-uncertainty values must lie in [0,1]".into(),
        ));
    }
    Ok(TrueUncertainty {
        utr: utr.with_kind(VolumeKind::TrueUncertainty),
        t1: None,
        binary: None,
        zero_fixation_frames: Vec::new(),
    })
}

/// Thresholds the continuous truth at `t1` (inclusive, so `t1 = 0` labels
/// everything positive) and records the operating point.
pub fn binarize_truth(t: &TrueUncertainty, t1: f32) -> Result<TrueUncertainty> {
    if !t1.is_finite() {
        return Err(Error::InvalidInput(format!("t1 must be finite, got {t1}")));
    }
    let binary = t.utr.data().iter().map(|&v| v >= t1).collect();
    Ok(TrueUncertainty {
        utr: t.utr.clone(),
        t1: Some(t1),
        binary: Some(binary),
        zero_fixation_frames: t.zero_fixation_frames.clone(),
    })
}
