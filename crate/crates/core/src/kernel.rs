//! Neighborhood kernel geometry for the divergence estimators.
//!
//! The estimators all convolve with the same family of zero-sum averaging
//! kernels: over an `L1 x L2 x L3` window of R voxels the center weight is
//! `(R - 1) / R` and every other weight is `-1 / R`, so the response at a
//! voxel is exactly its deviation from the window mean. The spatial axes
//! (L1 rows, L2 cols) and the temporal axis (L3 frames) may be degenerate:
//! `1 x 1 x Lt` probes only time, `Ls x Ls x 1` only space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Odd per-axis extents of a zero-sum averaging kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    rows: usize,
    cols: usize,
    frames: usize,
}

impl KernelSpec {
    /// `rows x cols x frames` window. Extents must be odd so the kernel has
    /// a center voxel, and the window must contain at least two voxels —
    /// a 1x1x1 kernel has no neighborhood to diverge from.
    pub fn new(rows: usize, cols: usize, frames: usize) -> Result<Self> {
        for (name, l) in [("rows", rows), ("cols", cols), ("frames", frames)] {
            if l == 0 || l % 2 == 0 {
                return Err(Error::InvalidKernel(format!(
                    "kernel {name} extent must be odd and positive, got {l}"
                )));
            }
        }
        if rows * cols * frames < 2 {
            return Err(Error::InvalidKernel(
                "kernel must span more than one voxel".into(),
            ));
        }
        Ok(KernelSpec { rows, cols, frames })
    }

    /// Purely temporal kernel `1 x 1 x frames`.
    pub fn temporal(frames: usize) -> Result<Self> {
        Self::new(1, 1, frames)
    }

    /// Purely spatial kernel `rows x cols x 1`.
    pub fn spatial(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, 1)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn extents(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.frames)
    }

    /// Window size R.
    pub fn window_size(&self) -> usize {
        self.rows * self.cols * self.frames
    }

    /// Weight at the window center: `(R - 1) / R`.
    pub fn center_coefficient(&self) -> f64 {
        let r = self.window_size() as f64;
        (r - 1.0) / r
    }

    /// Weight everywhere else: `-1 / R`.
    pub fn off_coefficient(&self) -> f64 {
        -1.0 / self.window_size() as f64
    }

    pub fn is_temporal(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }

    pub fn is_spatial(&self) -> bool {
        self.frames == 1
    }

    /// Materializes the full coefficient grid in the volume's frame-major
    /// layout. Only used by tests and the naive reference convolution; the
    /// production path never builds the grid.
    pub fn coefficients(&self) -> Vec<f64> {
        let r = self.window_size();
        let mut w = vec![self.off_coefficient(); r];
        let center = (self.frames / 2 * self.rows + self.rows / 2) * self.cols + self.cols / 2;
        w[center] = self.center_coefficient();
        w
    }
}

/// Grows (or shrinks) a kernel's spatial extents to keep its footprint
/// matched to a different analysis resolution.
///
/// Each spatial extent L maps to the nearest odd integer to `ratio * L`,
/// computed as `2 * round((ratio * L - 1) / 2) + 1` with half-up rounding.
/// The temporal extent is resolution-independent and is left alone. The
/// identity ratio returns the kernel unchanged; e.g. doubling the
/// resolution takes 5x5 windows to 11x11 and quadrupling takes them to
/// 21x21.
pub fn scale_matched_extents(base: &KernelSpec, ratio: f64) -> Result<KernelSpec> {
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::InvalidKernel(format!(
            "scale ratio must be positive and finite, got {ratio}"
        )));
    }
    let grow = |l: usize| -> usize {
        let half = (ratio * l as f64 - 1.0) / 2.0;
        let half = (half + 0.5).floor().max(0.0) as usize;
        2 * half + 1
    };
    KernelSpec::new(grow(base.rows), grow(base.cols), base.frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_3x3x3() {
        let k = KernelSpec::new(3, 3, 3).unwrap();
        assert_eq!(k.window_size(), 27);
        assert!((k.center_coefficient() - 26.0 / 27.0).abs() < 1e-15);
        assert!((k.off_coefficient() + 1.0 / 27.0).abs() < 1e-15);

        let w = k.coefficients();
        let total: f64 = w.iter().sum();
        assert!(total.abs() < 1e-12, "kernel must be zero-sum, got {total}");
        assert_eq!(w.iter().filter(|&&c| c > 0.0).count(), 1);
        // center sits at frame 1, row 1, col 1
        assert_eq!(w[(1 * 3 + 1) * 3 + 1], k.center_coefficient());
    }

    #[test]
    fn coefficients_temporal_1x1x5() {
        let k = KernelSpec::temporal(5).unwrap();
        assert!((k.center_coefficient() - 0.8).abs() < 1e-15);
        assert!((k.off_coefficient() + 0.2).abs() < 1e-15);
        let w = k.coefficients();
        assert_eq!(w.len(), 5);
        assert_eq!(w[2], 0.8);
    }

    #[test]
    fn rejects_even_zero_and_degenerate_extents() {
        assert!(KernelSpec::new(4, 3, 3).is_err());
        assert!(KernelSpec::new(3, 0, 3).is_err());
        assert!(KernelSpec::new(3, 3, 2).is_err());
        assert!(KernelSpec::new(1, 1, 1).is_err());
        assert!(KernelSpec::new(1, 1, 3).is_ok());
    }

    #[test]
    fn scale_matching_reproduces_preset_ladder() {
        let base = KernelSpec::new(5, 5, 5).unwrap();
        let same = scale_matched_extents(&base, 1.0).unwrap();
        assert_eq!(same, base);

        let doubled = scale_matched_extents(&base, 2.0).unwrap();
        assert_eq!(doubled.extents(), (11, 11, 5));

        let quadrupled = scale_matched_extents(&base, 4.0).unwrap();
        assert_eq!(quadrupled.extents(), (21, 21, 5));
    }

    #[test]
    fn scale_matching_down_keeps_extents_odd_and_positive() {
        let big = KernelSpec::new(21, 21, 5).unwrap();
        let shrunk = scale_matched_extents(&big, 0.25).unwrap();
        assert_eq!(shrunk.extents(), (5, 5, 5));

        let tiny = scale_matched_extents(&KernelSpec::new(3, 3, 3).unwrap(), 0.1).unwrap();
        assert_eq!(tiny.extents(), (1, 1, 3));
    }
}
