//! Randomized invariant checks over the volume ops, estimators, and
//! evaluation metrics. Each property encodes something the algorithms
//! promise for *every* input, not just the worked examples.

use proptest::prelude::*;

use suv_core::estimators::{estimate_baseline_variance, estimate_stu};
use suv_core::eval::{distances_from_probabilities, roc_sweep, trapezoid_auc};
use suv_core::filter::Padding;
use suv_core::kernel::KernelSpec;
use suv_core::truth::{binarize_truth, from_continuous};
use suv_core::volume::{voxel_abs_diff, BlockReducer, ScaleSpec, ScalingConfig, Volume, VolumeKind};

fn volume_strategy(max_side: usize, max_depth: usize) -> impl Strategy<Value = Volume> {
    sized_volume_strategy(1, max_side, max_depth)
}

/// Volumes with every side in `[min_side, max]`, so kernel-fit preconditions
/// can be guaranteed up front instead of filtered.
fn sized_volume_strategy(
    min_side: usize,
    max_side: usize,
    max_depth: usize,
) -> impl Strategy<Value = Volume> {
    (min_side..=max_side, min_side..=max_side, min_side..=max_depth).prop_flat_map(
        |(h, w, d)| {
            proptest::collection::vec(0.0f32..1.0, h * w * d).prop_map(move |data| {
                Volume::new(VolumeKind::Saliency, h, w, d, data).unwrap()
            })
        },
    )
}

fn odd(max_half: usize) -> impl Strategy<Value = usize> {
    (0..=max_half).prop_map(|h| 2 * h + 1)
}

/// Independent block-resize reference: walk every source voxel and add it
/// to the block whose floor-boundary interval contains it.
fn naive_block_sum(v: &Volume, th: usize, tw: usize) -> Vec<f64> {
    let (sh, sw, d) = v.dims();
    let bounds = |s: usize, t: usize| -> Vec<usize> {
        (0..=t).map(|b| b * s / t).collect()
    };
    let (rb, cb) = (bounds(sh, th), bounds(sw, tw));
    let block_of = |i: usize, b: &[usize]| b.iter().rposition(|&edge| edge <= i).unwrap().min(b.len() - 2);
    let mut out = vec![0.0f64; th * tw * d];
    for k in 0..d {
        for i in 0..sh {
            for j in 0..sw {
                let (bi, bj) = (block_of(i, &rb), block_of(j, &cb));
                out[(k * th + bi) * tw + bj] += v.get(i, j, k) as f64;
            }
        }
    }
    out
}

proptest! {
    #[test]
    fn normalize_is_idempotent(v in volume_strategy(8, 6)) {
        let once = v.normalized();
        let twice = once.normalized();
        prop_assert_eq!(once.data(), twice.data());
    }

    #[test]
    fn abs_diff_is_symmetric(
        pair in (1usize..=6, 1usize..=6, 1usize..=4).prop_flat_map(|(h, w, d)| {
            let n = h * w * d;
            (
                proptest::collection::vec(0.0f32..1.0, n),
                proptest::collection::vec(0.0f32..1.0, n),
            )
                .prop_map(move |(a, b)| {
                    (
                        Volume::new(VolumeKind::Saliency, h, w, d, a).unwrap(),
                        Volume::new(VolumeKind::Saliency, h, w, d, b).unwrap(),
                    )
                })
        })
    ) {
        let (a, b) = pair;
        let ab = voxel_abs_diff(&a, &b).unwrap();
        let ba = voxel_abs_diff(&b, &a).unwrap();
        prop_assert_eq!(ab.data(), ba.data());
    }

    #[test]
    fn block_resize_conserves_mass_and_matches_reference(
        v in volume_strategy(16, 4),
        th in 1usize..=16,
        tw in 1usize..=16,
    ) {
        let (sh, sw, _) = v.dims();
        prop_assume!(th <= sh && tw <= sw);
        let spec = ScaleSpec::custom(th, tw, sh, sw).unwrap();
        let resized = v.block_resize(&spec, BlockReducer::Sum).unwrap();

        let total_before = v.sum();
        let total_after = resized.sum();
        prop_assert!((total_before - total_after).abs() <= 1e-3 * total_before.abs().max(1.0));

        let expect = naive_block_sum(&v, th, tw);
        for (got, want) in resized.data().iter().zip(&expect) {
            prop_assert!((*got as f64 - want).abs() < 1e-3);
        }
    }

    #[test]
    fn kernel_coefficients_sum_to_zero_with_unit_center(
        r in odd(3), c in odd(3), f in odd(3),
    ) {
        prop_assume!(r * c * f > 1);
        let k = KernelSpec::new(r, c, f).unwrap();
        let coeffs = k.coefficients();
        let sum: f64 = coeffs.iter().sum();
        prop_assert!(sum.abs() < 1e-12, "sum {sum}");
        let range = (k.window_size() - 1) as f64 / k.window_size() as f64;
        prop_assert_eq!(k.center_coefficient(), range);
    }

    #[test]
    fn constant_volumes_produce_zero_uncertainty(
        level in 0.01f32..10.0,
        r in odd(2), c in odd(2), f in odd(2),
    ) {
        prop_assume!(r * c * f > 1);
        let v = Volume::filled(VolumeKind::Saliency, 7, 7, 7, level).unwrap();
        let k = KernelSpec::new(r, c, f).unwrap();
        for padding in [Padding::Replicate, Padding::Zero] {
            // Zero padding makes the border *see* a step down to 0, so only
            // replicate padding promises an identically flat response.
            let u = estimate_stu(&v, &k, &ScalingConfig::default(), padding).unwrap();
            if padding == Padding::Replicate {
                prop_assert!(u.max_value() < 1e-6, "max {}", u.max_value());
            } else {
                let (ih, iw, id) = (3, 3, 3); // interior voxel, windows fit
                prop_assert!(u.get(ih, iw, id) < 1e-6);
            }
        }
    }

    #[test]
    fn estimates_stay_in_unit_range(v in sized_volume_strategy(3, 9, 7)) {
        let k = KernelSpec::new(3, 3, 3).unwrap();
        for scaling in [ScalingConfig::fixed_unit(), ScalingConfig::per_volume_max()] {
            let u = estimate_stu(&v, &k, &scaling, Padding::Replicate).unwrap();
            for &x in u.data() {
                prop_assert!((0.0..=1.0).contains(&x), "value {x} outside [0,1]");
            }
        }
        let b = estimate_baseline_variance(&v, &k, Padding::Replicate).unwrap();
        for &x in b.data() {
            prop_assert!((0.0..=1.0).contains(&x), "baseline value {x} outside [0,1]");
        }
    }

    #[test]
    fn gain_does_not_move_the_response(v in sized_volume_strategy(3, 8, 5), gain in 0.1f32..8.0) {
        prop_assume!(v.max_value() > 0.0);
        let scaled_data: Vec<f32> = v.data().iter().map(|&x| x * gain).collect();
        let (h, w, d) = v.dims();
        let scaled = Volume::new(VolumeKind::Saliency, h, w, d, scaled_data).unwrap();
        let k = KernelSpec::new(3, 3, 3).unwrap();
        let a = estimate_stu(&v, &k, &ScalingConfig::default(), Padding::Replicate).unwrap();
        let b = estimate_stu(&scaled, &k, &ScalingConfig::default(), Padding::Replicate).unwrap();
        for (&x, &y) in a.data().iter().zip(b.data()) {
            prop_assert!((x - y).abs() < 1e-5, "{x} vs {y} under gain {gain}");
        }
    }

    #[test]
    fn roc_curves_are_monotone_and_integrate_consistently(
        scores in proptest::collection::vec(0.0f32..1.0, 20..200),
        flips in proptest::collection::vec(any::<bool>(), 20..200),
        steps in 2usize..128,
    ) {
        let n = scores.len().min(flips.len());
        prop_assume!(flips[..n].iter().any(|&b| b) && flips[..n].iter().any(|&b| !b));
        let u = Volume::new(VolumeKind::Uncertainty, 1, n, 1, scores[..n].to_vec()).unwrap();
        let tv: Vec<f32> = flips[..n].iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let truth = binarize_truth(
            &from_continuous(Volume::new(VolumeKind::TrueUncertainty, 1, n, 1, tv).unwrap()).unwrap(),
            0.5,
        ).unwrap();

        let report = roc_sweep(&u, &truth, steps, "prop").unwrap();
        for pair in report.sweep.windows(2) {
            prop_assert!(pair[1].t2 > pair[0].t2);
            prop_assert!(pair[1].tdr <= pair[0].tdr + 1e-12);
            prop_assert!(pair[1].fpr <= pair[0].fpr + 1e-12);
        }
        let first = &report.sweep[0];
        prop_assert_eq!((first.t2, first.tdr, first.fpr), (0.0, 1.0, 1.0));
        let last = report.sweep.last().unwrap();
        prop_assert_eq!((last.tdr, last.fpr), (0.0, 0.0));
        prop_assert!((report.auc - trapezoid_auc(&report.sweep)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&report.auc));
    }

    #[test]
    fn raising_the_threshold_never_adds_positives(
        values in proptest::collection::vec(0.0f32..=1.0, 1..100),
        lo in 0.0f32..=1.0,
        hi in 0.0f32..=1.0,
    ) {
        prop_assume!(lo <= hi);
        let n = values.len();
        let t = from_continuous(
            Volume::new(VolumeKind::TrueUncertainty, 1, n, 1, values).unwrap()
        ).unwrap();
        let a = binarize_truth(&t, lo).unwrap();
        let b = binarize_truth(&t, hi).unwrap();
        for (&was, &now) in a.binary().unwrap().iter().zip(b.binary().unwrap()) {
            prop_assert!(!(now && !was), "raising t1 flipped a voxel false -> true");
        }
    }

    #[test]
    fn smoothed_double_divergence_dominates_js(
        raw_p in proptest::collection::vec(0.0f64..1.0, 8),
        raw_q in proptest::collection::vec(0.0f64..1.0, 8),
    ) {
        let norm = |raw: &[f64]| -> Vec<f64> {
            let s: f64 = raw.iter().sum();
            if s > 0.0 {
                raw.iter().map(|&x| x / s).collect()
            } else {
                vec![1.0 / raw.len() as f64; raw.len()]
            }
        };
        let (p, q) = (norm(&raw_p), norm(&raw_q));
        let report = distances_from_probabilities(&p, &q, 1e-10).unwrap();
        prop_assert!(report.js <= report.jd + 1e-12, "js {} > jd {}", report.js, report.jd);
        prop_assert!(report.js <= std::f64::consts::LN_2 + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&report.hi));
    }
}
