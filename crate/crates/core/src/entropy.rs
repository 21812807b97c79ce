//! Conditional-entropy study of fixation maps: how much knowing a voxel's
//! neighborhood average tells you about the voxel. Reports H(X) of the
//! quantized voxel values, H(X|Z) with Z the quantized neighborhood mean,
//! and the control H(X|n) where the conditioning variable is replaced by
//! seeded uniform noise. All entropies are in bits.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{box_sum, Padding};
use crate::volume::Volume;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntropyConfig {
    /// Uniform quantization levels over [0,1]; 256 matches 8-bit map storage.
    pub quant_levels: usize,
    /// Neighborhood extents for Z (odd per axis).
    pub extents: (usize, usize, usize),
    /// Whether the neighborhood mean includes the voxel itself. Excluded by
    /// default: Z should describe the surroundings, not leak the value.
    pub include_center: bool,
    /// Seed for the noise-conditioning control.
    pub seed: u64,
    /// Independent noise draws averaged into `h_x_given_noise`.
    pub noise_draws: usize,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig {
            quant_levels: 256,
            extents: (3, 3, 3),
            include_center: false,
            seed: 42,
            noise_draws: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub video_tag: String,
    /// Entropy of the quantized voxel values, bits.
    pub h_x: f64,
    /// Entropy of a voxel given its quantized neighborhood mean, bits.
    pub h_x_given_z: f64,
    /// Control: entropy of a voxel given uniform noise, mean over draws.
    pub h_x_given_noise: f64,
    pub quant_levels: usize,
    /// `1 - h_x_given_z / h_x`; absent for constant (zero-entropy) volumes.
    pub reduction_ratio: Option<f64>,
}

/// Entropy in bits of a discrete distribution given by symbol counts.
fn entropy_of_counts<'a>(counts: impl Iterator<Item = &'a u64>, total: u64) -> f64 {
    let n = total as f64;
    counts
        .map(|&c| {
            if c == 0 {
                0.0
            } else {
                let p = c as f64 / n;
                -p * p.log2()
            }
        })
        .sum()
}

/// Direct conditional entropy: H(X|Z) = sum_z p(z) * H(X | Z = z).
fn conditional_entropy_direct(xs: &[u32], zs: &[u32]) -> f64 {
    let mut by_z: BTreeMap<u32, BTreeMap<u32, u64>> = BTreeMap::new();
    for (&x, &z) in xs.iter().zip(zs) {
        *by_z.entry(z).or_default().entry(x).or_insert(0) += 1;
    }
    let n = xs.len() as f64;
    by_z
        .values()
        .map(|xc| {
            let nz: u64 = xc.values().sum();
            (nz as f64 / n) * entropy_of_counts(xc.values(), nz)
        })
        .sum()
}

/// Independent H(X|Z) estimator via the chain rule, H(X,Z) - H(Z), from an
/// explicit joint frequency table. Kept deliberately different from the
/// direct path in [`entropy_analysis`] so the two can check each other.
pub fn conditional_entropy_from_samples(xs: &[u32], zs: &[u32]) -> Result<f64> {
    if xs.len() != zs.len() || xs.is_empty() {
        return Err(Error::InvalidInput(format!(
            "sample lists must be non-empty and equal length, got {} and {}",
            xs.len(),
            zs.len()
        )));
    }
    let mut joint: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    let mut marginal_z: BTreeMap<u32, u64> = BTreeMap::new();
    for (&x, &z) in xs.iter().zip(zs) {
        *joint.entry((x, z)).or_insert(0) += 1;
        *marginal_z.entry(z).or_insert(0) += 1;
    }
    let total = xs.len() as u64;
    let h_joint = entropy_of_counts(joint.values(), total);
    let h_z = entropy_of_counts(marginal_z.values(), total);
    Ok(h_joint - h_z)
}

fn quantize(v: f64, levels: usize) -> u32 {
    ((v * levels as f64) as usize).min(levels - 1) as u32
}

/// Quantized (X, Z) sample pairs for every voxel: X is the max-normalized
/// voxel value, Z the neighborhood mean around it, both on the same
/// `quant_levels` grid. This is the sampling stage of [`entropy_analysis`],
/// exposed so the chain-rule oracle can run on identical samples.
pub fn quantized_neighborhood_samples(
    fix: &Volume,
    cfg: &EntropyConfig,
) -> Result<(Vec<u32>, Vec<u32>)> {
    if cfg.quant_levels < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 quantization levels, got {}",
            cfg.quant_levels
        )));
    }
    let (h, w, d) = fix.dims();
    let (lr, lc, lf) = cfg.extents;
    if lr > h || lc > w || lf > d {
        return Err(Error::InvalidGeometry(format!(
            "neighborhood {lr}x{lc}x{lf} exceeds volume {h}x{w}x{d}"
        )));
    }

    let norm = fix.normalized();
    let values: Vec<f64> = norm.data().iter().map(|&v| v as f64).collect();
    let sums = box_sum(&values, fix.dims(), cfg.extents, Padding::Replicate)?;
    let r = (lr * lc * lf) as f64;

    let levels = cfg.quant_levels;
    let xs: Vec<u32> = values.iter().map(|&v| quantize(v, levels)).collect();
    let zs: Vec<u32> = values
        .iter()
        .zip(&sums)
        .map(|(&x, &s)| {
            let mean = if cfg.include_center {
                s / r
            } else {
                (s - x) / (r - 1.0)
            };
            // replicate padding and values in [0,1] keep the mean in range;
            // clamp only against float dust
            quantize(mean.clamp(0.0, 1.0), levels)
        })
        .collect();
    Ok((xs, zs))
}

/// Runs the full study on one fixation volume: H(X), H(X|Z) from the
/// empirical conditional distribution, and the H(X|n) noise control
/// averaged over seeded draws.
pub fn entropy_analysis(fix: &Volume, video_tag: &str, cfg: &EntropyConfig) -> Result<EntropyReport> {
    let (xs, zs) = quantized_neighborhood_samples(fix, cfg)?;

    let mut x_counts: BTreeMap<u32, u64> = BTreeMap::new();
    for &x in &xs {
        *x_counts.entry(x).or_insert(0) += 1;
    }
    let h_x = entropy_of_counts(x_counts.values(), xs.len() as u64);
    let h_x_given_z = conditional_entropy_direct(&xs, &zs);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let draws = cfg.noise_draws.max(1);
    let mut noise_total = 0.0;
    for _ in 0..draws {
        let ns: Vec<u32> = (0..xs.len())
            .map(|_| rng.random_range(0..cfg.quant_levels as u32))
            .collect();
        noise_total += conditional_entropy_direct(&xs, &ns);
    }

    Ok(EntropyReport {
        video_tag: video_tag.to_string(),
        h_x,
        h_x_given_z,
        h_x_given_noise: noise_total / draws as f64,
        quant_levels: cfg.quant_levels,
        reduction_ratio: if h_x > 0.0 {
            Some(1.0 - h_x_given_z / h_x)
        } else {
            None
        },
    })
}
