//! Uncertainty estimators: the divergence family (STU, TU, SU, SU+TU
//! fusion), a local-variance baseline, and an entropy-based competitor (EU).
//!
//! The divergence family is one computation with different kernel shapes:
//! uncertainty is the magnitude of the voxel's deviation from its local
//! neighborhood mean, `U = gamma * |alpha * S (*) W|`, with W the zero-sum
//! kernel of [`KernelSpec`]. TU and SU are literally STU with degenerate
//! extents and share its code path, so the special-case reductions hold
//! bit-for-bit. All estimators are pure functions of their inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{self, Padding};
use crate::kernel::KernelSpec;
use crate::volume::{voxel_add, ScalingConfig, ScalingMode, Volume, VolumeKind};

fn require_kernel_fits(s: &Volume, kernel: &KernelSpec) -> Result<()> {
    let (h, w, d) = s.dims();
    let (lr, lc, lf) = kernel.extents();
    if lr > h || lc > w || lf > d {
        return Err(Error::InvalidGeometry(format!(
            "kernel {lr}x{lc}x{lf} exceeds volume {h}x{w}x{d}"
        )));
    }
    Ok(())
}

/// Shared core of STU/TU/SU: signed divergence, then magnitude and scaling.
fn divergence_estimate(
    s: &Volume,
    kernel: &KernelSpec,
    scaling: &ScalingConfig,
    padding: Padding,
) -> Result<Volume> {
    scaling.validate()?;
    require_kernel_fits(s, kernel)?;
    let div = filter::divergence(s, kernel, padding)?;
    let alpha = scaling.alpha as f64;
    let gamma = scaling.gamma as f64;

    let data: Vec<f32> = match scaling.mode {
        // Scale the input onto [0,1] (divergence is linear, so this can be
        // folded into the response), then apply gamma. The kernel bounds
        // |response| by (R-1)/R, so defaults stay inside [0,1] analytically.
        ScalingMode::FixedUnit => {
            let max = s.max_value() as f64;
            let alpha_eff = if max > 0.0 { alpha / max } else { alpha };
            div.iter()
                .map(|&x| (gamma * (alpha_eff * x).abs()) as f32)
                .collect()
        }
        // Stretch the response so the volume maximum lands on gamma.
        ScalingMode::PerVolumeMax => {
            let raw: Vec<f64> = div.iter().map(|&x| (alpha * x).abs()).collect();
            let max = raw.iter().copied().fold(0.0f64, f64::max);
            if max > 0.0 {
                raw.iter().map(|&x| (gamma * x / max) as f32).collect()
            } else {
                raw.iter().map(|&x| x as f32).collect()
            }
        }
    };
    Volume::new(VolumeKind::Uncertainty, s.height(), s.width(), s.depth(), data)
}

/// Spatiotemporal uncertainty: divergence from the `L1 x L2 x L3`
/// neighborhood mean.
pub fn estimate_stu(
    s: &Volume,
    kernel: &KernelSpec,
    scaling: &ScalingConfig,
    padding: Padding,
) -> Result<Volume> {
    divergence_estimate(s, kernel, scaling, padding)
}

/// Temporal uncertainty: each pixel trace filtered on its own with a
/// `1 x 1 x frames` window.
pub fn estimate_tu(
    s: &Volume,
    frames: usize,
    scaling: &ScalingConfig,
    padding: Padding,
) -> Result<Volume> {
    divergence_estimate(s, &KernelSpec::temporal(frames)?, scaling, padding)
}

/// Spatial uncertainty: each frame filtered independently with a
/// `rows x cols x 1` window.
pub fn estimate_su(
    s: &Volume,
    rows: usize,
    cols: usize,
    scaling: &ScalingConfig,
    padding: Padding,
) -> Result<Volume> {
    divergence_estimate(s, &KernelSpec::spatial(rows, cols)?, scaling, padding)
}

/// Naive fusion: voxel-wise SU + TU, renormalized by the maximum of the sum
/// so the result stays comparable under a shared threshold sweep.
pub fn estimate_fusion(
    s: &Volume,
    spatial: &KernelSpec,
    temporal: &KernelSpec,
    scaling: &ScalingConfig,
    padding: Padding,
) -> Result<Volume> {
    if !spatial.is_spatial() {
        return Err(Error::InvalidKernel(format!(
            "fusion spatial kernel must have a single frame, got {:?}",
            spatial.extents()
        )));
    }
    if !temporal.is_temporal() {
        return Err(Error::InvalidKernel(format!(
            "fusion temporal kernel must be 1x1xLt, got {:?}",
            temporal.extents()
        )));
    }
    let su = divergence_estimate(s, spatial, scaling, padding)?;
    let tu = divergence_estimate(s, temporal, scaling, padding)?;
    Ok(voxel_add(&su, &tu)?.normalized())
}

/// Local population variance of each voxel's neighborhood, normalized by
/// the volume maximum. The comparison baseline for the divergence family.
pub fn estimate_baseline_variance(
    s: &Volume,
    kernel: &KernelSpec,
    padding: Padding,
) -> Result<Volume> {
    require_kernel_fits(s, kernel)?;
    let var = filter::window_variance(s, kernel, padding)?;
    let max = var.iter().copied().fold(0.0f64, f64::max);
    let data: Vec<f32> = if max > 0.0 {
        var.iter().map(|&v| (v / max) as f32).collect()
    } else {
        var.iter().map(|&v| v as f32).collect()
    };
    Volume::new(VolumeKind::Uncertainty, s.height(), s.width(), s.depth(), data)
}

/// Binary entropy in bits: `-p log2 p - (1-p) log2 (1-p)`, with the usual
/// `0 log 0 = 0` convention. Peaks at 1 for p = 0.5.
pub fn binary_entropy(p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p), "probability out of range: {p}");
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Density model for the entropy-based competitor: how likely a voxel is to
/// be salient given its distance from the center of mass, and given how many
/// of its 26 neighbors are salient.
///
/// [`EuDensityModel::from_saliency`] builds the default model (exponential
/// distance falloff with sigma = 1/4 frame diagonal, linear connectedness
/// c/26, center of mass taken from the volume itself); fitted densities can
/// be deserialized from config instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EuDensityModel {
    /// Center of mass, in (row, col) frame coordinates.
    pub center_row: f64,
    pub center_col: f64,
    /// `(distance, probability)` samples, strictly increasing in distance
    /// and non-increasing in probability; queries interpolate linearly and
    /// clamp beyond the ends.
    pub p_sal_given_distance: Vec<(f64, f64)>,
    /// Probability per neighbor count c in 0..=26.
    pub p_sal_given_connectedness: Vec<f64>,
    /// A voxel counts as salient when its max-normalized value reaches this.
    pub salient_threshold: f32,
}

impl EuDensityModel {
    pub const NEIGHBOR_COUNT: usize = 26;

    /// Default model derived from the saliency volume: center of mass is the
    /// saliency-weighted mean position (frame center if the volume is empty),
    /// `p(s|d) = exp(-d / (diag/4))`, `p(s|c) = c/26`, threshold 0.5.
    pub fn from_saliency(s: &Volume) -> Self {
        let (h, w, _) = s.dims();
        let mut mass = 0.0f64;
        let (mut row_acc, mut col_acc) = (0.0f64, 0.0f64);
        for k in 0..s.depth() {
            for m in 0..h {
                for n in 0..w {
                    let v = s.get(m, n, k) as f64;
                    mass += v;
                    row_acc += v * m as f64;
                    col_acc += v * n as f64;
                }
            }
        }
        let (center_row, center_col) = if mass > 0.0 {
            (row_acc / mass, col_acc / mass)
        } else {
            ((h as f64 - 1.0) / 2.0, (w as f64 - 1.0) / 2.0)
        };

        let diag = ((h * h + w * w) as f64).sqrt();
        let sigma = diag / 4.0;
        let p_sal_given_distance = (0..=diag.ceil() as usize + 1)
            .map(|d| (d as f64, (-(d as f64) / sigma).exp()))
            .collect();
        let p_sal_given_connectedness = (0..=Self::NEIGHBOR_COUNT)
            .map(|c| c as f64 / Self::NEIGHBOR_COUNT as f64)
            .collect();
        EuDensityModel {
            center_row,
            center_col,
            p_sal_given_distance,
            p_sal_given_connectedness,
            salient_threshold: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.p_sal_given_distance;
        if t.is_empty() {
            return Err(Error::InvalidConfig("distance table is empty".into()));
        }
        for pair in t.windows(2) {
            let ((d0, p0), (d1, p1)) = (pair[0], pair[1]);
            if d1 <= d0 {
                return Err(Error::InvalidConfig(format!(
                    "distance table not strictly increasing at d={d1}"
                )));
            }
            if p1 > p0 {
                return Err(Error::InvalidConfig(format!(
                    "p(s|d) must be non-increasing, rises at d={d1}"
                )));
            }
        }
        let probs = t
            .iter()
            .map(|&(_, p)| p)
            .chain(self.p_sal_given_connectedness.iter().copied());
        for p in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("probability {p} outside [0,1]")));
            }
        }
        if self.p_sal_given_connectedness.len() != Self::NEIGHBOR_COUNT + 1 {
            return Err(Error::InvalidConfig(format!(
                "connectedness table must have 27 entries, got {}",
                self.p_sal_given_connectedness.len()
            )));
        }
        if !(self.salient_threshold > 0.0 && self.salient_threshold < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "salient threshold must lie in (0,1), got {}",
                self.salient_threshold
            )));
        }
        Ok(())
    }

    /// p(salient | distance d), linearly interpolated.
    pub fn p_distance(&self, d: f64) -> f64 {
        let t = &self.p_sal_given_distance;
        if d <= t[0].0 {
            return t[0].1;
        }
        let (d_last, p_last) = *t.last().expect("validated non-empty");
        if d >= d_last {
            return p_last;
        }
        let i = t.partition_point(|&(x, _)| x < d);
        let (x0, y0) = t[i - 1];
        let (x1, y1) = t[i];
        y0 + (y1 - y0) * (d - x0) / (x1 - x0)
    }

    /// p(salient | c salient neighbors).
    pub fn p_connectedness(&self, c: usize) -> f64 {
        self.p_sal_given_connectedness[c.min(Self::NEIGHBOR_COUNT)]
    }
}

/// Entropy-based competitor: per voxel, the mean of the binary entropies of
/// p(salient | distance to center of mass) and p(salient | connectedness).
///
/// Connectedness counts salient voxels among the 26 neighbors actually
/// inside the volume; the threshold is applied to the max-normalized volume
/// so the output does not depend on input gain.
pub fn estimate_eu(s: &Volume, model: &EuDensityModel) -> Result<Volume> {
    model.validate()?;
    let (h, w, d) = s.dims();
    let norm = s.normalized();

    // The distance term only depends on the pixel position; compute one
    // frame's worth and reuse it.
    let mut dist_entropy = vec![0.0f64; h * w];
    for m in 0..h {
        for n in 0..w {
            let dr = m as f64 - model.center_row;
            let dc = n as f64 - model.center_col;
            dist_entropy[m * w + n] = binary_entropy(model.p_distance((dr * dr + dc * dc).sqrt()));
        }
    }

    // Salient-neighbor counts via a 3x3x3 box sum of the indicator with
    // zero padding (out-of-volume voxels are simply not salient), minus the
    // voxel's own indicator.
    let indicator: Vec<f64> = norm
        .data()
        .iter()
        .map(|&v| if v >= model.salient_threshold { 1.0 } else { 0.0 })
        .collect();
    let sums = filter::box_sum(&indicator, (h, w, d), (3, 3, 3), Padding::Zero)?;

    let mut out = vec![0.0f32; h * w * d];
    for k in 0..d {
        for m in 0..h {
            for n in 0..w {
                let idx = (k * h + m) * w + n;
                let c = (sums[idx] - indicator[idx]).round().max(0.0) as usize;
                let conn_entropy = binary_entropy(model.p_connectedness(c));
                out[idx] = (0.5 * (dist_entropy[m * w + n] + conn_entropy)) as f32;
            }
        }
    }
    Volume::new(VolumeKind::Uncertainty, h, w, d, out)
}

/// Which estimator to run; the serialized names are what config files and
/// report rows use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMethod {
    Stu,
    Tu,
    Su,
    SuPlusTu,
    Baseline,
    Eu,
}

impl EstimatorMethod {
    pub fn slug(&self) -> &'static str {
        match self {
            EstimatorMethod::Stu => "stu",
            EstimatorMethod::Tu => "tu",
            EstimatorMethod::Su => "su",
            EstimatorMethod::SuPlusTu => "su_plus_tu",
            EstimatorMethod::Baseline => "baseline",
            EstimatorMethod::Eu => "eu",
        }
    }
}

/// A fully-specified estimator run. For `SuPlusTu` the kernel's spatial
/// extents go to the SU half and its temporal extent to the TU half; for
/// `Eu` the kernel is unused and `eu_model` (or the default model derived
/// from the input) applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub method: EstimatorMethod,
    pub kernel: KernelSpec,
    pub scaling: ScalingConfig,
    pub padding: Padding,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eu_model: Option<EuDensityModel>,
}

impl EstimatorConfig {
    pub fn new(method: EstimatorMethod, kernel: KernelSpec) -> Self {
        EstimatorConfig {
            method,
            kernel,
            scaling: ScalingConfig::default(),
            padding: Padding::Replicate,
            eu_model: None,
        }
    }

    /// Report/row label, e.g. `stu_5x5x5` or `eu`.
    pub fn label(&self) -> String {
        match self.method {
            EstimatorMethod::Eu => "eu".to_string(),
            _ => {
                let (lr, lc, lf) = self.kernel.extents();
                format!("{}_{lr}x{lc}x{lf}", self.method.slug())
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scaling.validate()?;
        match self.method {
            EstimatorMethod::Tu => {
                if !self.kernel.is_temporal() {
                    return Err(Error::InvalidKernel(format!(
                        "tu requires a 1x1xLt kernel, got {:?}",
                        self.kernel.extents()
                    )));
                }
            }
            EstimatorMethod::Su => {
                if !self.kernel.is_spatial() {
                    return Err(Error::InvalidKernel(format!(
                        "su requires an Ls1xLs2x1 kernel, got {:?}",
                        self.kernel.extents()
                    )));
                }
            }
            EstimatorMethod::SuPlusTu => {
                self.fusion_kernels()?;
            }
            _ => {}
        }
        if let Some(model) = &self.eu_model {
            model.validate()?;
        }
        Ok(())
    }

    fn fusion_kernels(&self) -> Result<(KernelSpec, KernelSpec)> {
        let (lr, lc, lf) = self.kernel.extents();
        Ok((KernelSpec::spatial(lr, lc)?, KernelSpec::temporal(lf)?))
    }

    pub fn run(&self, s: &Volume) -> Result<Volume> {
        self.validate()?;
        match self.method {
            EstimatorMethod::Stu | EstimatorMethod::Tu | EstimatorMethod::Su => {
                divergence_estimate(s, &self.kernel, &self.scaling, self.padding)
            }
            EstimatorMethod::SuPlusTu => {
                let (spatial, temporal) = self.fusion_kernels()?;
                estimate_fusion(s, &spatial, &temporal, &self.scaling, self.padding)
            }
            EstimatorMethod::Baseline => {
                estimate_baseline_variance(s, &self.kernel, self.padding)
            }
            EstimatorMethod::Eu => match &self.eu_model {
                Some(model) => estimate_eu(s, model),
                None => estimate_eu(s, &EuDensityModel::from_saliency(s)),
            },
        }
    }
}
