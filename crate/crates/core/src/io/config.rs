//! TOML run configuration for batch sweeps: which videos to score, which
//! estimators to run, and the evaluation settings shared across them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorConfig, EstimatorMethod};
use crate::eval::{DEFAULT_BINS, DEFAULT_SWEEP_STEPS};
use crate::filter::Padding;
use crate::kernel::KernelSpec;
use crate::truth::FixationNormalization;
use crate::volume::{ScaleSpec, ScalingConfig};

/// Parses `"LrxLcxLf"` (e.g. `"5x5x5"`, `"1x1x11"`) into a kernel spec.
pub fn parse_kernel(text: &str) -> Result<KernelSpec> {
    let parts: Vec<&str> = text.split(['x', 'X']).collect();
    if parts.len() != 3 {
        return Err(Error::InvalidKernel(format!(
            "kernel '{text}' must have the form LrxLcxLf"
        )));
    }
    let mut extents = [0usize; 3];
    for (slot, part) in extents.iter_mut().zip(&parts) {
        *slot = part.parse().map_err(|_| {
            Error::InvalidKernel(format!("kernel '{text}': '{part}' is not a positive integer"))
        })?;
    }
    KernelSpec::new(extents[0], extents[1], extents[2])
}

/// Parses a scale selector: `"1"`, `"2"`, `"3"` pick the preset analysis
/// resolutions (which assume the standard 480x640 source), while `"HxW"`
/// names a custom target resolution for the given source geometry.
pub fn parse_scale(text: &str, source_height: usize, source_width: usize) -> Result<ScaleSpec> {
    if let Ok(label) = text.parse::<u8>() {
        let spec = ScaleSpec::preset(label).ok_or_else(|| {
            Error::InvalidConfig(format!("scale '{text}' is not one of the presets 1, 2, 3"))
        })?;
        if (source_height, source_width) != (ScaleSpec::SOURCE_HEIGHT, ScaleSpec::SOURCE_WIDTH) {
            return Err(Error::InvalidConfig(format!(
                "preset scale {label} assumes a {}x{} source, got {source_height}x{source_width}; \
                 use an explicit HxW scale instead",
                ScaleSpec::SOURCE_HEIGHT,
                ScaleSpec::SOURCE_WIDTH
            )));
        }
        return Ok(spec);
    }
    let parts: Vec<&str> = text.split(['x', 'X']).collect();
    if parts.len() == 2 {
        let h = parts[0].parse().ok();
        let w = parts[1].parse().ok();
        if let (Some(h), Some(w)) = (h, w) {
            return ScaleSpec::custom(h, w, source_height, source_width);
        }
    }
    Err(Error::InvalidConfig(format!(
        "scale '{text}' must be 1, 2, 3, or HxW"
    )))
}

/// One video in a sweep: a saliency volume on disk plus its fixation log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoEntry {
    pub name: String,
    pub category: String,
    pub saliency: PathBuf,
    pub fixations: PathBuf,
}

/// One estimator in a sweep. `kernel` is required for every method except
/// `eu`; `su_plus_tu` reads it as `LsxLsxLt` (spatial extents plus the
/// temporal extent of the fused pair).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorEntry {
    pub method: EstimatorMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(default = "default_padding")]
    pub padding: Padding,
    #[serde(default)]
    pub scaling: ScalingConfig,
}

fn default_padding() -> Padding {
    Padding::Replicate
}

impl EstimatorEntry {
    pub fn to_config(&self) -> Result<EstimatorConfig> {
        let kernel = match (&self.kernel, self.method) {
            (Some(text), _) => parse_kernel(text)?,
            // EU has no window parameter; the config slot still needs a
            // well-formed kernel, which run() then ignores.
            (None, EstimatorMethod::Eu) => KernelSpec::new(3, 3, 3)?,
            (None, method) => {
                return Err(Error::InvalidConfig(format!(
                    "estimator '{}' requires a kernel",
                    method.slug()
                )));
            }
        };
        let config = EstimatorConfig {
            method: self.method,
            kernel,
            scaling: self.scaling,
            padding: self.padding,
            eu_model: None,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Everything a batch sweep needs. Only `scale`, `output_dir`, `videos`,
/// and `estimators` are required in the TOML; the rest default to the
/// standard evaluation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scale: String,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_t1")]
    pub t1: Vec<f32>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    pub output_dir: PathBuf,
    #[serde(default = "default_source_height")]
    pub source_height: usize,
    #[serde(default = "default_source_width")]
    pub source_width: usize,
    #[serde(default)]
    pub normalization: FixationNormalization,
    pub videos: Vec<VideoEntry>,
    pub estimators: Vec<EstimatorEntry>,
}

fn default_steps() -> usize {
    DEFAULT_SWEEP_STEPS
}

fn default_bins() -> usize {
    DEFAULT_BINS
}

fn default_t1() -> Vec<f32> {
    vec![0.55]
}

fn default_seed() -> u64 {
    42
}

fn default_workers() -> usize {
    1
}

fn default_source_height() -> usize {
    ScaleSpec::SOURCE_HEIGHT
}

fn default_source_width() -> usize {
    ScaleSpec::SOURCE_WIDTH
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        let config: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::InvalidConfig(format!("cannot serialize config: {e}")))?;
        super::atomic_write(path, text.as_bytes())
    }

    pub fn scale_spec(&self) -> Result<ScaleSpec> {
        parse_scale(&self.scale, self.source_height, self.source_width)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidConfig(format!(
                "steps must be at least 2, got {}",
                self.steps
            )));
        }
        if self.bins < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 histogram bins, got {}",
                self.bins
            )));
        }
        if self.t1.is_empty() {
            return Err(Error::InvalidConfig("t1 list must not be empty".into()));
        }
        for (i, &t) in self.t1.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::InvalidConfig(format!("t1 value {t} is not finite")));
            }
            if self.t1[..i].contains(&t) {
                return Err(Error::InvalidConfig(format!("duplicate t1 value {t}")));
            }
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        self.scale_spec()?;
        if self.videos.is_empty() {
            return Err(Error::InvalidConfig("no videos configured".into()));
        }
        let mut names: Vec<&str> = self.videos.iter().map(|v| v.name.as_str()).collect();
        names.sort_unstable();
        for pair in names.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::InvalidConfig(format!(
                    "duplicate video name '{}'",
                    pair[0]
                )));
            }
        }
        for video in &self.videos {
            if video.name.is_empty() || video.name.contains(['/', '\\']) {
                return Err(Error::InvalidConfig(format!(
                    "video name '{}' must be a non-empty plain name (it becomes a file stem)",
                    video.name
                )));
            }
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidConfig("no estimators configured".into()));
        }
        let mut labels = Vec::with_capacity(self.estimators.len());
        for entry in &self.estimators {
            labels.push(entry.to_config()?.label());
        }
        labels.sort_unstable();
        for pair in labels.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::InvalidConfig(format!(
                    "duplicate estimator '{}'",
                    pair[0]
                )));
            }
        }
        Ok(())
    }
}
