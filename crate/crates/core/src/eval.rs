//! Evaluation of uncertainty estimates against binarized truth: ROC/AUC via
//! a threshold sweep, an exhaustive pair-counting AUC oracle, histogram
//! distance metrics between value distributions, and per-category rollups.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::truth::TrueUncertainty;
use crate::volume::Volume;

/// Default number of uniform T2 thresholds; fine enough that grid error is
/// below 0.001 for 8-bit-quantized maps.
pub const DEFAULT_SWEEP_STEPS: usize = 1024;

/// Default histogram resolution for the distance metrics.
pub const DEFAULT_BINS: usize = 64;

/// Smoothing added to every histogram bin before the KL terms of JD, so
/// empty bins do not produce infinities.
pub const DEFAULT_EPSILON: f64 = 1e-10;

/// One operating point of the sweep: detection rate and false-positive rate
/// under the decision rule `u >= t2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub t2: f64,
    pub tdr: f64,
    pub fpr: f64,
}

/// Full ROC curve for one (estimate, truth) pairing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocReport {
    pub estimator_tag: String,
    /// Threshold the truth volume was binarized at.
    pub t1: f32,
    pub steps: usize,
    /// Points ordered by rising t2, from (fpr, tdr) = (1, 1) at t2 = 0 down
    /// to (0, 0) at the past-the-end threshold.
    pub sweep: Vec<RocPoint>,
    /// Trapezoidal area under the (fpr, tdr) curve.
    pub auc: f64,
}

/// Sweeps `steps` uniform thresholds over [0, 1] (plus one past-the-end
/// sentinel that pins the curve at the origin) and integrates TDR over FPR.
///
/// A single pass buckets every score by the largest threshold it still
/// satisfies; suffix sums then give the confusion counts for all thresholds
/// at once, so the cost is O(voxels + steps) rather than O(voxels * steps).
pub fn roc_sweep(
    u: &Volume,
    truth: &TrueUncertainty,
    steps: usize,
    estimator_tag: &str,
) -> Result<RocReport> {
    if steps < 2 {
        return Err(Error::InvalidConfig(format!(
            "sweep needs at least 2 thresholds, got {steps}"
        )));
    }
    let labels = truth
        .binary()
        .ok_or_else(|| Error::InvalidInput("truth has not been binarized".into()))?;
    if u.dims() != truth.utr().dims() {
        return Err(Error::InvalidGeometry(format!(
            "estimate {:?} vs truth {:?}",
            u.dims(),
            truth.utr().dims()
        )));
    }
    let positives = labels.iter().filter(|&&b| b).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::DegenerateTruth(format!(
            "need both classes, got {positives} positive / {negatives} negative voxels"
        )));
    }

    let denom = (steps - 1) as f64;
    let t_at = |i: usize| i as f64 / denom;

    // Bucket i holds the scores for which t_at(i) is the largest satisfied
    // threshold. The nudge loops pin down exact float boundary cases so the
    // histogram agrees with a literal `u >= t2` comparison at every grid
    // point.
    let mut pos_hist = vec![0u64; steps];
    let mut neg_hist = vec![0u64; steps];
    for (&score, &label) in u.data().iter().zip(labels) {
        let s = score as f64;
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidInput(format!(
                "estimate values must lie in [0,1], found {s}"
            )));
        }
        let mut i = ((s * denom) as usize).min(steps - 1);
        while i + 1 < steps && t_at(i + 1) <= s {
            i += 1;
        }
        while i > 0 && t_at(i) > s {
            i -= 1;
        }
        if label {
            pos_hist[i] += 1;
        } else {
            neg_hist[i] += 1;
        }
    }

    let mut sweep = vec![
        RocPoint {
            t2: 1.0 + 1.0 / denom,
            tdr: 0.0,
            fpr: 0.0,
        };
        steps + 1
    ];
    let (mut tp, mut fp) = (0u64, 0u64);
    for i in (0..steps).rev() {
        tp += pos_hist[i];
        fp += neg_hist[i];
        sweep[i] = RocPoint {
            t2: t_at(i),
            tdr: tp as f64 / positives as f64,
            fpr: fp as f64 / negatives as f64,
        };
    }

    let auc = trapezoid_auc(&sweep);
    Ok(RocReport {
        estimator_tag: estimator_tag.to_string(),
        t1: truth.t1().expect("binarized truth always records t1"),
        steps,
        sweep,
        auc,
    })
}

/// Area under the (fpr, tdr) polyline of a sweep ordered by rising t2.
pub fn trapezoid_auc(sweep: &[RocPoint]) -> f64 {
    sweep
        .windows(2)
        .map(|w| (w[0].fpr - w[1].fpr) * (w[0].tdr + w[1].tdr) / 2.0)
        .sum()
}

/// Exhaustive Mann-Whitney AUC: the fraction of (positive, negative) pairs
/// the scores order correctly, ties counting one half. O(P * N) — this is
/// the independent check the sweep is validated against, not the fast path.
pub fn auc_pair_count(scores: &[f32], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let pos: Vec<f32> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(&s, _)| s)
        .collect();
    let neg: Vec<f32> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &l)| !l)
        .map(|(&s, _)| s)
        .collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::DegenerateTruth(
            "pair counting needs both classes".into(),
        ));
    }
    let mut favorable = 0.0f64;
    for &p in &pos {
        for &n in &neg {
            if p > n {
                favorable += 1.0;
            } else if p == n {
                favorable += 0.5;
            }
        }
    }
    Ok(favorable / (pos.len() as f64 * neg.len() as f64))
}

/// [`auc_pair_count`] applied to a volume and binarized truth.
pub fn auc_pair_count_volume(u: &Volume, truth: &TrueUncertainty) -> Result<f64> {
    let labels = truth
        .binary()
        .ok_or_else(|| Error::InvalidInput("truth has not been binarized".into()))?;
    auc_pair_count(u.data(), labels)
}

/// Distribution distances between two value histograms. `js` and `jd` are
/// in nats; `hi` is the complement of histogram intersection in [0,1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramDistanceReport {
    pub bins: usize,
    pub js: f64,
    pub jd: f64,
    pub hi: f64,
    pub l2: f64,
    /// Smoothing used by the JD term.
    pub epsilon: f64,
    /// Logarithm base of the divergences, recorded for report consumers.
    pub log_units: String,
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&pi, &qi)| if pi > 0.0 { pi * (pi / qi).ln() } else { 0.0 })
        .sum()
}

/// The metric core on explicit probability vectors:
/// JS = ½KL(p‖m) + ½KL(q‖m) with m the midpoint (no smoothing needed),
/// JD = KL(p‖q) + KL(q‖p) with `epsilon` added to every bin first,
/// HI = 1 − Σ min(p,q), L2 = ‖p − q‖.
pub fn distances_from_probabilities(
    p: &[f64],
    q: &[f64],
    epsilon: f64,
) -> Result<HistogramDistanceReport> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::InvalidInput(format!(
            "histograms must be non-empty and equal length, got {} and {}",
            p.len(),
            q.len()
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let m: Vec<f64> = p.iter().zip(q).map(|(&a, &b)| (a + b) / 2.0).collect();
    let js = 0.5 * kl(p, &m) + 0.5 * kl(q, &m);

    let ps: Vec<f64> = p.iter().map(|&x| x + epsilon).collect();
    let qs: Vec<f64> = q.iter().map(|&x| x + epsilon).collect();
    let jd = kl(&ps, &qs) + kl(&qs, &ps);

    let hi = 1.0 - p.iter().zip(q).map(|(&a, &b)| a.min(b)).sum::<f64>();
    let l2 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();

    Ok(HistogramDistanceReport {
        bins: p.len(),
        js,
        jd,
        hi,
        l2,
        epsilon,
        log_units: "nats".to_string(),
    })
}

/// Normalized value histogram of a volume over [0, 1].
pub fn value_histogram(volume: &Volume, bins: usize) -> Result<Vec<f64>> {
    if bins < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    let mut counts = vec![0u64; bins];
    for &v in volume.data() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidInput(format!(
                "histogram values must lie in [0,1], found {v}"
            )));
        }
        let i = ((v as f64 * bins as f64) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let total = volume.voxel_count() as f64;
    Ok(counts.iter().map(|&c| c as f64 / total).collect())
}

/// Histogram distances between an uncertainty estimate and the continuous
/// truth, both binned over [0, 1].
pub fn histogram_distances(
    u: &Volume,
    utr: &Volume,
    bins: usize,
) -> Result<HistogramDistanceReport> {
    let p = value_histogram(u, bins)?;
    let q = value_histogram(utr, bins)?;
    distances_from_probabilities(&p, &q, DEFAULT_EPSILON)
}

/// One per-video evaluation outcome feeding the category rollup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucEntry {
    pub video: String,
    pub category: String,
    pub estimator: String,
    pub auc: f64,
}

/// Mean AUC of one estimator over one category's videos.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub category: String,
    pub estimator: String,
    pub video_count: usize,
    pub mean_auc: f64,
    /// Highest mean AUC within the category (ties share the flag).
    pub best_in_category: bool,
    /// Lowest mean AUC within the category.
    pub worst_in_category: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryReport {
    pub rows: Vec<CategoryRow>,
}

/// Averages per-video AUCs into (category, estimator) cells and marks each
/// category's best and worst estimator.
pub fn category_report(entries: &[AucEntry]) -> CategoryReport {
    let mut cells: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for e in entries {
        cells
            .entry((e.category.clone(), e.estimator.clone()))
            .or_default()
            .push(e.auc);
    }

    let mut rows: Vec<CategoryRow> = cells
        .into_iter()
        .map(|((category, estimator), aucs)| CategoryRow {
            category,
            estimator,
            video_count: aucs.len(),
            mean_auc: aucs.iter().sum::<f64>() / aucs.len() as f64,
            best_in_category: false,
            worst_in_category: false,
        })
        .collect();

    let mut extremes: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for row in &rows {
        let entry = extremes
            .entry(row.category.clone())
            .or_insert((f64::NEG_INFINITY, f64::INFINITY));
        entry.0 = entry.0.max(row.mean_auc);
        entry.1 = entry.1.min(row.mean_auc);
    }
    for row in &mut rows {
        let (best, worst) = extremes[&row.category];
        row.best_in_category = row.mean_auc == best;
        row.worst_in_category = row.mean_auc == worst;
    }
    CategoryReport { rows }
}
