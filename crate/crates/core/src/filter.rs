//! Separable sliding-window filtering over volumes.
//!
//! The divergence kernels have only two distinct weights, so convolving with
//! them reduces to `x - boxMean(x)`: the box sum factors into three 1-D
//! sliding passes (rows, cols, frames) and the whole filter runs in
//! O(voxels) regardless of kernel extent. Accumulation is f64 throughout;
//! results match the naive padded convolution to float precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::volume::Volume;

/// How windows hanging over the volume boundary are filled.
///
/// `Replicate` clamps reads to the nearest edge voxel (the default for the
/// estimators, so borders are not artificially divergent); `Zero` treats
/// everything outside as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Padding {
    Replicate,
    Zero,
}

/// One sliding pass along a line already gathered into `line`; writes window
/// sums of extent `2 * half + 1` into `out`.
fn slide_line(line: &[f64], out: &mut [f64], half: usize, padding: Padding) {
    let len = line.len() as isize;
    let at = |j: isize| -> f64 {
        match padding {
            Padding::Replicate => line[j.clamp(0, len - 1) as usize],
            Padding::Zero => {
                if j < 0 || j >= len {
                    0.0
                } else {
                    line[j as usize]
                }
            }
        }
    };
    let half = half as isize;
    let mut acc = 0.0;
    for j in -half..=half {
        acc += at(j);
    }
    out[0] = acc;
    for i in 1..len {
        acc += at(i + half) - at(i - 1 - half);
        out[i as usize] = acc;
    }
}

/// Applies one axis pass in place. Lines along the axis start at
/// `starts` and step by `stride`.
fn pass_axis(
    buf: &mut [f64],
    starts: impl Iterator<Item = usize>,
    len: usize,
    stride: usize,
    half: usize,
    padding: Padding,
) {
    if half == 0 {
        return;
    }
    let mut line = vec![0.0f64; len];
    let mut sums = vec![0.0f64; len];
    for start in starts {
        for t in 0..len {
            line[t] = buf[start + t * stride];
        }
        slide_line(&line, &mut sums, half, padding);
        for t in 0..len {
            buf[start + t * stride] = sums[t];
        }
    }
}

/// Box sums of `values` (laid out like [`Volume`] data: frame-major, then
/// row-major) over `rows x cols x frames` windows centered at each voxel.
/// Extents must be odd.
pub fn box_sum(
    values: &[f64],
    dims: (usize, usize, usize),
    extents: (usize, usize, usize),
    padding: Padding,
) -> Result<Vec<f64>> {
    let (h, w, d) = dims;
    if values.len() != h * w * d {
        return Err(Error::InvalidGeometry(format!(
            "value length {} does not match {h}x{w}x{d}",
            values.len()
        )));
    }
    let (lr, lc, lf) = extents;
    for l in [lr, lc, lf] {
        if l == 0 || l % 2 == 0 {
            return Err(Error::InvalidKernel(format!(
                "box extents must be odd and positive, got {lr}x{lc}x{lf}"
            )));
        }
    }

    let mut buf = values.to_vec();
    // cols: contiguous lines of length w
    pass_axis(
        &mut buf,
        (0..h * d).map(|i| i * w),
        w,
        1,
        lc / 2,
        padding,
    );
    // rows: stride w, one line per (frame, col)
    pass_axis(
        &mut buf,
        (0..d).flat_map(|k| (0..w).map(move |n| k * h * w + n)),
        h,
        w,
        lr / 2,
        padding,
    );
    // frames: stride h*w, one line per (row, col)
    pass_axis(&mut buf, 0..h * w, d, h * w, lf / 2, padding);
    Ok(buf)
}

fn to_f64(volume: &Volume) -> Vec<f64> {
    volume.data().iter().map(|&v| v as f64).collect()
}

/// Signed response of the zero-sum averaging kernel at every voxel:
/// the voxel's deviation from its window mean, `x - boxSum(x) / R`.
pub fn divergence(volume: &Volume, kernel: &KernelSpec, padding: Padding) -> Result<Vec<f64>> {
    let values = to_f64(volume);
    let sums = box_sum(&values, volume.dims(), kernel.extents(), padding)?;
    let r = kernel.window_size() as f64;
    Ok(values
        .iter()
        .zip(&sums)
        .map(|(&x, &s)| x - s / r)
        .collect())
}

/// Population variance of each voxel's window, `E[x^2] - E[x]^2` over the
/// R window values (padding included). Float cancellation can dip a hair
/// below zero on near-constant windows; that is clamped away.
pub fn window_variance(volume: &Volume, kernel: &KernelSpec, padding: Padding) -> Result<Vec<f64>> {
    let values = to_f64(volume);
    let squares: Vec<f64> = values.iter().map(|&v| v * v).collect();
    let dims = volume.dims();
    let sums = box_sum(&values, dims, kernel.extents(), padding)?;
    let sq_sums = box_sum(&squares, dims, kernel.extents(), padding)?;
    let r = kernel.window_size() as f64;
    Ok(sums
        .iter()
        .zip(&sq_sums)
        .map(|(&s, &sq)| {
            let mean = s / r;
            (sq / r - mean * mean).max(0.0)
        })
        .collect())
}
