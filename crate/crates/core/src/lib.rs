//! Pixel-wise uncertainty maps for video saliency volumes.
//!
//! A saliency model scores every pixel of every frame, but says nothing
//! about how far to trust those scores. This crate estimates that missing
//! error bar without reference data: a zero-sum local-divergence filter
//! turns disagreement between a pixel and its spatiotemporal neighborhood
//! into an uncertainty value, on the premise that saliency responses vary
//! smoothly where the model is reliable.
//!
//! The crate is organized around that premise end to end:
//!
//! - [`volume`], [`kernel`], [`filter`] — frame-major `f32` volumes and the
//!   separable box-sum machinery the estimators are built on.
//! - [`estimators`] — the divergence family (spatiotemporal, temporal-only,
//!   spatial-only, and their fusion), a window-variance baseline, and an
//!   entropy-based density model for comparison.
//! - [`truth`] — fixation logs aggregated into ground-truth uncertainty:
//!   where recorded gaze and predicted saliency disagree, a perfect
//!   estimator should light up.
//! - [`eval`] — threshold-sweep ROC/AUC and histogram-distance metrics.
//! - [`entropy`] — quantized conditional-entropy analysis of how much a
//!   neighborhood actually says about its center pixel.
//! - [`synth`] — deterministic synthetic clips with planted anomalies, for
//!   end-to-end validation without eye-tracking data.
//! - [`io`], [`pipeline`] — volume/fixation/report file formats and the
//!   batch sweep that runs estimator x video grids reproducibly.

pub mod entropy;
pub mod error;
pub mod estimators;
pub mod eval;
pub mod filter;
pub mod io;
pub mod kernel;
pub mod pipeline;
pub mod synth;
pub mod truth;
pub mod volume;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use estimators::{EstimatorConfig, EstimatorMethod};
pub use kernel::KernelSpec;
pub use volume::{ScaleSpec, ScalingConfig, ScalingMode, Volume, VolumeKind};
