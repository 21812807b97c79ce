//! The 3-D scalar volume every pipeline stage operates on, plus the scale
//! geometry used to move between source-resolution frames and downscaled
//! analysis maps.
//!
//! A [`Volume`] is `height x width x depth` (rows x cols x frames) of `f32`
//! voxels stored frame-major, then row-major. Volumes are immutable after
//! construction; all operations return new volumes and are safe to call
//! concurrently.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a volume's voxels mean. Saliency, uncertainty, and true-uncertainty
/// volumes hold values in `[0, 1]`; fixation volumes hold non-negative event
/// counts until they are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VolumeKind {
    Saliency,
    Uncertainty,
    Fixation,
    TrueUncertainty,
}

impl VolumeKind {
    pub fn as_u8(self) -> u8 {
        match self {
            VolumeKind::Saliency => 0,
            VolumeKind::Uncertainty => 1,
            VolumeKind::Fixation => 2,
            VolumeKind::TrueUncertainty => 3,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(VolumeKind::Saliency),
            1 => Some(VolumeKind::Uncertainty),
            2 => Some(VolumeKind::Fixation),
            3 => Some(VolumeKind::TrueUncertainty),
            _ => None,
        }
    }
}

/// Reducer applied to each source block during [`Volume::block_resize`].
///
/// `Sum` preserves total mass (the right choice for fixation counts);
/// `Mean` is the plain downscale for saliency maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockReducer {
    Sum,
    Mean,
}

/// A 3-D scalar field of `f32` voxels, indexed `[row, col, frame]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    kind: VolumeKind,
    height: usize,
    width: usize,
    depth: usize,
    data: Vec<f32>,
}

impl Volume {
    /// Builds a volume from raw voxel data. `data` must hold exactly
    /// `height * width * depth` values, laid out frame-major then row-major:
    /// `data[(k * height + m) * width + n]` is the voxel at row `m`,
    /// column `n`, frame `k`.
    pub fn new(
        kind: VolumeKind,
        height: usize,
        width: usize,
        depth: usize,
        data: Vec<f32>,
    ) -> Result<Self> {
        if height == 0 || width == 0 || depth == 0 {
            return Err(Error::InvalidGeometry(format!(
                "volume dimensions must be positive, got {height}x{width}x{depth}"
            )));
        }
        let expected = height * width * depth;
        if data.len() != expected {
            return Err(Error::InvalidGeometry(format!(
                "data length {} does not match {height}x{width}x{depth} = {expected}",
                data.len()
            )));
        }
        Ok(Volume {
            kind,
            height,
            width,
            depth,
            data,
        })
    }

    pub fn zeros(kind: VolumeKind, height: usize, width: usize, depth: usize) -> Result<Self> {
        Self::filled(kind, height, width, depth, 0.0)
    }

    pub fn filled(
        kind: VolumeKind,
        height: usize,
        width: usize,
        depth: usize,
        value: f32,
    ) -> Result<Self> {
        Self::new(kind, height, width, depth, vec![value; height * width * depth])
    }

    pub fn kind(&self) -> VolumeKind {
        self.kind
    }

    /// Number of rows per frame (M).
    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of columns per frame (N).
    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of frames (K).
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.depth)
    }

    pub fn voxel_count(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize, frame: usize) -> usize {
        debug_assert!(row < self.height && col < self.width && frame < self.depth);
        (frame * self.height + row) * self.width + col
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, frame: usize) -> f32 {
        self.data[self.index(row, col, frame)]
    }

    /// Returns a copy of this volume relabeled as `kind`; the voxel data is
    /// unchanged.
    pub fn with_kind(&self, kind: VolumeKind) -> Volume {
        Volume {
            kind,
            ..self.clone()
        }
    }

    pub fn max_value(&self) -> f32 {
        self.data.iter().copied().fold(f32::NEG_INFINITY, f32::max)
    }

    /// Total mass, accumulated in f64 so large fixation volumes do not drift.
    pub fn sum(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum()
    }

    pub fn same_geometry(&self, other: &Volume) -> bool {
        self.dims() == other.dims()
    }

    fn require_same_geometry(&self, other: &Volume, op: &str) -> Result<()> {
        if !self.same_geometry(other) {
            return Err(Error::InvalidGeometry(format!(
                "{op} requires identical geometry: {:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(())
    }

    /// Rescales the volume so its maximum voxel equals 1. An all-zero volume
    /// comes back unchanged: empty fixation frames occur in real logs and
    /// must not be an error.
    pub fn normalized(&self) -> Volume {
        let max = self.max_value();
        if max <= 0.0 {
            return self.clone();
        }
        let data = self.data.iter().map(|&v| v / max).collect();
        Volume {
            data,
            ..self.clone()
        }
    }

    /// Downscales each frame onto `target`, reducing every source block with
    /// `reducer`. Depth is unchanged.
    ///
    /// Block boundaries sit at `floor(i * source / target)`, so the blocks
    /// tile every frame exactly even for non-divisible ratios and a `Sum`
    /// reduction conserves total mass.
    pub fn block_resize(&self, target: &ScaleSpec, reducer: BlockReducer) -> Result<Volume> {
        let (th, tw) = (target.height(), target.width());
        if th == 0 || tw == 0 {
            return Err(Error::InvalidGeometry("target dimensions must be positive".into()));
        }
        if th > self.height || tw > self.width {
            return Err(Error::InvalidGeometry(format!(
                "target {th}x{tw} larger than source {}x{}",
                self.height, self.width
            )));
        }

        // Precompute the row/col partition boundaries once per axis.
        let row_bound = |i: usize| i * self.height / th;
        let col_bound = |j: usize| j * self.width / tw;

        let mut out = vec![0.0f32; th * tw * self.depth];
        for k in 0..self.depth {
            for m in 0..th {
                let (r0, r1) = (row_bound(m), row_bound(m + 1));
                for n in 0..tw {
                    let (c0, c1) = (col_bound(n), col_bound(n + 1));
                    let mut acc = 0.0f64;
                    for r in r0..r1 {
                        let base = (k * self.height + r) * self.width;
                        for c in c0..c1 {
                            acc += self.data[base + c] as f64;
                        }
                    }
                    let cells = ((r1 - r0) * (c1 - c0)) as f64;
                    let v = match reducer {
                        BlockReducer::Sum => acc,
                        BlockReducer::Mean => acc / cells,
                    };
                    out[(k * th + m) * tw + n] = v as f32;
                }
            }
        }
        Volume::new(self.kind, th, tw, self.depth, out)
    }
}

/// Element-wise sum. Callers decide whether the result needs clamping or
/// renormalization.
pub fn voxel_add(a: &Volume, b: &Volume) -> Result<Volume> {
    a.require_same_geometry(b, "voxel_add")?;
    let data = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| x + y)
        .collect();
    Volume::new(a.kind, a.height, a.width, a.depth, data)
}

/// Element-wise absolute difference.
pub fn voxel_abs_diff(a: &Volume, b: &Volume) -> Result<Volume> {
    a.require_same_geometry(b, "voxel_abs_diff")?;
    let data = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| (x - y).abs())
        .collect();
    Volume::new(a.kind, a.height, a.width, a.depth, data)
}

/// An analysis scale: the map resolution plus the support region (source
/// pixels per voxel) it represents.
///
/// The built-in presets assume 480x640 source frames: scale 1 is 12x16
/// (40x40-pixel support), scale 2 is 24x32 (20x20), scale 3 is 48x64 (10x10).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleSpec {
    /// Preset label (1, 2, 3). 0 marks a custom, unlabeled scale.
    label: u8,
    height: usize,
    width: usize,
    block_height: usize,
    block_width: usize,
}

impl ScaleSpec {
    pub const SOURCE_HEIGHT: usize = 480;
    pub const SOURCE_WIDTH: usize = 640;

    pub const fn scale1() -> Self {
        ScaleSpec {
            label: 1,
            height: 12,
            width: 16,
            block_height: 40,
            block_width: 40,
        }
    }

    pub const fn scale2() -> Self {
        ScaleSpec {
            label: 2,
            height: 24,
            width: 32,
            block_height: 20,
            block_width: 20,
        }
    }

    pub const fn scale3() -> Self {
        ScaleSpec {
            label: 3,
            height: 48,
            width: 64,
            block_height: 10,
            block_width: 10,
        }
    }

    pub fn preset(label: u8) -> Option<Self> {
        match label {
            1 => Some(Self::scale1()),
            2 => Some(Self::scale2()),
            3 => Some(Self::scale3()),
            _ => None,
        }
    }

    /// A custom target resolution. The support region is derived from the
    /// given source geometry via the same floor-boundary partition used by
    /// [`Volume::block_resize`], so `block_height`/`block_width` are the
    /// nominal (integer-division) block sizes.
    pub fn custom(height: usize, width: usize, source_height: usize, source_width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidGeometry("scale dimensions must be positive".into()));
        }
        if height > source_height || width > source_width {
            return Err(Error::InvalidGeometry(format!(
                "scale {height}x{width} larger than source {source_height}x{source_width}"
            )));
        }
        Ok(ScaleSpec {
            label: 0,
            height,
            width,
            block_height: source_height / height,
            block_width: source_width / width,
        })
    }

    pub fn label(&self) -> u8 {
        self.label
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn block_height(&self) -> usize {
        self.block_height
    }

    pub fn block_width(&self) -> usize {
        self.block_width
    }
}

/// How estimator inputs and outputs are brought into `[0, 1]`.
///
/// `FixedUnit` scales the input by `alpha / max(S)` and the output only by
/// `gamma`; the zero-sum kernel bounds the raw response by 1, so the default
/// `alpha = gamma = 1` already lands in `[0, 1]`. `PerVolumeMax` additionally
/// stretches the output so its maximum equals `gamma`, which is useful when
/// maps will be displayed or compared under a shared threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMode {
    FixedUnit,
    PerVolumeMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScalingConfig {
    pub alpha: f32,
    pub gamma: f32,
    pub mode: ScalingMode,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            alpha: 1.0,
            gamma: 1.0,
            mode: ScalingMode::FixedUnit,
        }
    }
}

impl ScalingConfig {
    pub fn fixed_unit() -> Self {
        Self::default()
    }

    pub fn per_volume_max() -> Self {
        ScalingConfig {
            mode: ScalingMode::PerVolumeMax,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !(self.gamma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "scaling factors must be positive, got alpha={} gamma={}",
                self.alpha, self.gamma
            )));
        }
        Ok(())
    }
}
