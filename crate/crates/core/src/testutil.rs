//! Reference implementations and fixtures shared across unit tests. These
//! are the slow, obviously-correct oracles the fast paths are checked
//! against; none of this compiles into the library proper.

use crate::filter::Padding;
use crate::kernel::KernelSpec;
use crate::volume::{Volume, VolumeKind};

/// Padded read used by the naive oracles.
fn read(volume: &Volume, m: isize, n: isize, k: isize, padding: Padding) -> f64 {
    let (h, w, d) = volume.dims();
    match padding {
        Padding::Replicate => volume.get(
            m.clamp(0, h as isize - 1) as usize,
            n.clamp(0, w as isize - 1) as usize,
            k.clamp(0, d as isize - 1) as usize,
        ) as f64,
        Padding::Zero => {
            if m < 0 || n < 0 || k < 0 || m >= h as isize || n >= w as isize || k >= d as isize {
                0.0
            } else {
                volume.get(m as usize, n as usize, k as usize) as f64
            }
        }
    }
}

/// Direct padded convolution with the materialized zero-sum coefficient
/// grid. Quadratic in kernel size; only sized for tests.
pub(crate) fn naive_divergence(volume: &Volume, kernel: &KernelSpec, padding: Padding) -> Vec<f64> {
    let (h, w, d) = volume.dims();
    let (lr, lc, lf) = kernel.extents();
    let (hr, hc, hf) = (lr as isize / 2, lc as isize / 2, lf as isize / 2);
    let coeff = kernel.coefficients();
    let mut out = vec![0.0f64; h * w * d];
    for k in 0..d as isize {
        for m in 0..h as isize {
            for n in 0..w as isize {
                let mut acc = 0.0;
                for dk in -hf..=hf {
                    for dm in -hr..=hr {
                        for dn in -hc..=hc {
                            let c = coeff[(((dk + hf) * lr as isize + (dm + hr)) * lc as isize
                                + (dn + hc)) as usize];
                            acc += c * read(volume, m + dm, n + dn, k + dk, padding);
                        }
                    }
                }
                out[((k as usize) * h + m as usize) * w + n as usize] = acc;
            }
        }
    }
    out
}

/// Per-voxel population variance over the padded window, by direct loop.
pub(crate) fn naive_window_variance(
    volume: &Volume,
    kernel: &KernelSpec,
    padding: Padding,
) -> Vec<f64> {
    let (h, w, d) = volume.dims();
    let (lr, lc, lf) = kernel.extents();
    let (hr, hc, hf) = (lr as isize / 2, lc as isize / 2, lf as isize / 2);
    let r = kernel.window_size() as f64;
    let mut out = vec![0.0f64; h * w * d];
    for k in 0..d as isize {
        for m in 0..h as isize {
            for n in 0..w as isize {
                let mut sum = 0.0;
                let mut sq = 0.0;
                for dk in -hf..=hf {
                    for dm in -hr..=hr {
                        for dn in -hc..=hc {
                            let v = read(volume, m + dm, n + dn, k + dk, padding);
                            sum += v;
                            sq += v * v;
                        }
                    }
                }
                let mean = sum / r;
                out[((k as usize) * h + m as usize) * w + n as usize] =
                    (sq / r - mean * mean).max(0.0);
            }
        }
    }
    out
}

/// Deterministic xorshift-filled volume with values in [0, 1).
pub(crate) fn pseudo_random_volume(h: usize, w: usize, d: usize, seed: u64) -> Volume {
    let mut state = seed | 1;
    let data: Vec<f32> = (0..h * w * d)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 40) as f32 / 16777216.0
        })
        .collect();
    Volume::new(VolumeKind::Saliency, h, w, d, data).unwrap()
}
