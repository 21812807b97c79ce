//! Writers for evaluation artifacts: pretty JSON for any serializable
//! report, plus flat CSVs for ROC sweeps, entropy summaries, and
//! per-category AUC tables.

use std::path::Path;

use serde::Serialize;

use crate::entropy::EntropyReport;
use crate::error::{Error, Result};
use crate::eval::{CategoryReport, RocReport};
use crate::pipeline::{AucRow, DistanceRow};

/// Serializes `value` as pretty-printed JSON and writes it atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidInput(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    super::atomic_write(path, text.as_bytes())
}

/// One ROC point per line: `t2,fpr,tdr`.
pub fn write_roc_csv(path: &Path, report: &RocReport) -> Result<()> {
    let mut text = String::from("t2,fpr,tdr\n");
    for p in &report.sweep {
        text.push_str(&format!("{},{},{}\n", p.t2, p.fpr, p.tdr));
    }
    super::atomic_write(path, text.as_bytes())
}

/// One video per line; `reduction_ratio` is left empty when undefined.
pub fn write_entropy_csv(path: &Path, reports: &[EntropyReport]) -> Result<()> {
    let mut text =
        String::from("video_tag,h_x,h_x_given_z,h_x_given_noise,quant_levels,reduction_ratio\n");
    for r in reports {
        let ratio = r.reduction_ratio.map_or(String::new(), |v| v.to_string());
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.video_tag, r.h_x, r.h_x_given_z, r.h_x_given_noise, r.quant_levels, ratio
        ));
    }
    super::atomic_write(path, text.as_bytes())
}

/// One (video, estimator, t1) result per line.
pub fn write_auc_csv(path: &Path, rows: &[AucRow]) -> Result<()> {
    let mut text = String::from("video,category,estimator,t1,auc,zero_fixation_frames\n");
    for r in rows {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.video, r.category, r.estimator, r.t1, r.auc, r.zero_fixation_frames
        ));
    }
    super::atomic_write(path, text.as_bytes())
}

/// One (video, estimator) distance report per line.
pub fn write_distance_csv(path: &Path, rows: &[DistanceRow]) -> Result<()> {
    let mut text = String::from("video,estimator,bins,js,jd,hi,l2\n");
    for r in rows {
        let d = &r.distances;
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.video, r.estimator, d.bins, d.js, d.jd, d.hi, d.l2
        ));
    }
    super::atomic_write(path, text.as_bytes())
}

/// One (category, estimator) cell per line with best/worst flags.
pub fn write_category_csv(path: &Path, report: &CategoryReport) -> Result<()> {
    let mut text =
        String::from("category,estimator,video_count,mean_auc,best_in_category,worst_in_category\n");
    for row in &report.rows {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.category,
            row.estimator,
            row.video_count,
            row.mean_auc,
            row.best_in_category,
            row.worst_in_category
        ));
    }
    super::atomic_write(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{AucEntry, RocPoint, category_report};

    fn sample_roc() -> RocReport {
        RocReport {
            estimator_tag: "stu_3x3x3".into(),
            t1: 0.55,
            steps: 3,
            sweep: vec![
                RocPoint { t2: 0.0, tdr: 1.0, fpr: 1.0 },
                RocPoint { t2: 0.5, tdr: 0.75, fpr: 0.25 },
                RocPoint { t2: 1.0, tdr: 0.25, fpr: 0.0 },
                RocPoint { t2: 1.5, tdr: 0.0, fpr: 0.0 },
            ],
            auc: 0.71875,
        }
    }

    #[test]
    fn roc_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("roc.csv");
        write_roc_csv(&path, &sample_roc()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t2,fpr,tdr");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "0,1,1");
        assert_eq!(lines[2], "0.5,0.25,0.75");
    }

    #[test]
    fn json_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("roc.json");
        let report = sample_roc();
        write_json(&path, &report).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let back: RocReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.auc, report.auc);
        assert_eq!(back.sweep.len(), report.sweep.len());
        assert_eq!(back.estimator_tag, report.estimator_tag);
    }

    #[test]
    fn entropy_csv_handles_missing_ratio() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("entropy.csv");
        let reports = vec![
            EntropyReport {
                video_tag: "clip-a".into(),
                h_x: 3.0,
                h_x_given_z: 1.5,
                h_x_given_noise: 2.9,
                quant_levels: 256,
                reduction_ratio: Some(0.5),
            },
            EntropyReport {
                video_tag: "flat".into(),
                h_x: 0.0,
                h_x_given_z: 0.0,
                h_x_given_noise: 0.0,
                quant_levels: 256,
                reduction_ratio: None,
            },
        ];
        write_entropy_csv(&path, &reports).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "clip-a,3,1.5,2.9,256,0.5");
        assert_eq!(lines[2], "flat,0,0,0,256,");
    }

    #[test]
    fn auc_and_distance_csv_layouts() {
        let dir = tempfile::tempdir().unwrap();

        let auc_path = dir.path().join("auc.csv");
        let rows = vec![AucRow {
            video: "pan".into(),
            category: "clean".into(),
            estimator: "stu_5x5x5".into(),
            t1: 0.55,
            auc: 0.875,
            zero_fixation_frames: 2,
        }];
        write_auc_csv(&auc_path, &rows).unwrap();
        let text = std::fs::read_to_string(&auc_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "video,category,estimator,t1,auc,zero_fixation_frames");
        assert_eq!(lines[1], "pan,clean,stu_5x5x5,0.55,0.875,2");

        let dist_path = dir.path().join("distances.csv");
        let rows = vec![DistanceRow {
            video: "pan".into(),
            estimator: "stu_5x5x5".into(),
            distances: crate::eval::HistogramDistanceReport {
                bins: 64,
                js: 0.125,
                jd: 0.5,
                hi: 0.25,
                l2: 0.0625,
                epsilon: 1e-10,
                log_units: "nats".into(),
            },
        }];
        write_distance_csv(&dist_path, &rows).unwrap();
        let text = std::fs::read_to_string(&dist_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "video,estimator,bins,js,jd,hi,l2");
        assert_eq!(lines[1], "pan,stu_5x5x5,64,0.125,0.5,0.25,0.0625");
    }

    #[test]
    fn category_csv_columns() {
        let entries = vec![
            AucEntry { video: "a".into(), category: "news".into(), estimator: "stu".into(), auc: 0.7 },
            AucEntry { video: "b".into(), category: "news".into(), estimator: "stu".into(), auc: 0.9 },
            AucEntry { video: "a".into(), category: "news".into(), estimator: "eu".into(), auc: 0.6 },
            AucEntry { video: "b".into(), category: "news".into(), estimator: "eu".into(), auc: 0.6 },
        ];
        let report = category_report(&entries);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cat.csv");
        write_category_csv(&path, &report).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "category,estimator,video_count,mean_auc,best_in_category,worst_in_category"
        );
        assert!(lines.iter().any(|l| l.starts_with("news,stu,2,0.8")), "{text}");
        assert!(lines.iter().any(|l| l.starts_with("news,eu,2,0.6")), "{text}");
    }
}
