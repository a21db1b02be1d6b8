//! Voxelwise detection scoring against a ground-truth mask: confusion
//! counts, ROC curves from a threshold sweep, and trapezoidal AUC.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::saliency::SaliencyVolume;
use crate::segmentation::quantize;
use crate::volume::BinaryVolume;

/// Voxel counts of a detection against ground truth; positives are truth
/// voxels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionStats {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionStats {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// TP / (TP + FN); `None` without positives.
    pub fn sensitivity(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// TN / (TN + FP); `None` without negatives.
    pub fn specificity(&self) -> Option<f64> {
        ratio(self.tn, self.tn + self.fp)
    }

    /// FP / (TN + FP), i.e. one minus specificity.
    pub fn fallout(&self) -> Option<f64> {
        ratio(self.fp, self.tn + self.fp)
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn confusion(detected: &BinaryVolume, truth: &BinaryVolume) -> Result<ConfusionStats> {
    if detected.dims() != truth.dims() {
        return Err(Error::ShapeMismatch {
            left: detected.dims(),
            right: truth.dims(),
        });
    }
    let mut s = ConfusionStats::default();
    for (&b, &g) in detected.bits().iter().zip(truth.bits()) {
        match (b, g) {
            (true, true) => s.tp += 1,
            (true, false) => s.fp += 1,
            (false, false) => s.tn += 1,
            (false, true) => s.fn_ += 1,
        }
    }
    Ok(s)
}

/// One operating point. `threshold` is the quantized level a voxel must
/// reach to count as detected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: usize,
    pub tpr: f64,
    pub fpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl RocCurve {
    /// Sweep point maximizing `tpr - fpr`; the first (highest threshold)
    /// wins ties. Endpoints are excluded.
    pub fn optimal_point(&self) -> RocPoint {
        let inner = &self.points[1..self.points.len() - 1];
        let mut best = inner[0];
        for p in &inner[1..] {
            if p.tpr - p.fpr > best.tpr - best.fpr {
                best = *p;
            }
        }
        best
    }
}

/// `n_thresholds` levels evenly spaced over `[1, levels - 1]`, descending.
pub fn sweep_levels(n_thresholds: usize, levels: usize) -> Vec<usize> {
    let top = (levels - 1) as f64;
    let step = (top - 1.0) / (n_thresholds - 1) as f64;
    (0..n_thresholds)
        .map(|j| (top - j as f64 * step).round() as usize)
        .collect()
}

/// ROC curve of the raw (unclosed) thresholded saliency against `truth`.
///
/// Points run from the `(0, 0)` endpoint through the sweep in descending
/// threshold order to `(1, 1)`. The endpoints carry thresholds `levels` and
/// `0`.
pub fn roc_sweep(
    s: &SaliencyVolume,
    truth: &BinaryVolume,
    n_thresholds: usize,
    levels: usize,
) -> Result<RocCurve> {
    if s.dims() != truth.dims() {
        return Err(Error::ShapeMismatch {
            left: s.dims(),
            right: truth.dims(),
        });
    }
    if n_thresholds < 2 {
        return Err(Error::InvalidParameter(format!(
            "n_thresholds must be >= 2, got {n_thresholds}"
        )));
    }
    let (q, _) = quantize(s, levels)?;

    let mut pos = vec![0u64; levels];
    let mut neg = vec![0u64; levels];
    for (&level, &g) in q.values().iter().zip(truth.bits()) {
        if g {
            pos[level as usize] += 1;
        } else {
            neg[level as usize] += 1;
        }
    }
    let p_total: u64 = pos.iter().sum();
    let n_total: u64 = neg.iter().sum();
    if p_total == 0 || n_total == 0 {
        return Err(Error::Degenerate(format!(
            "ground truth has {p_total} positive and {n_total} negative voxels; rates undefined"
        )));
    }

    // detections at level >= t
    let mut pos_above = vec![0u64; levels + 1];
    let mut neg_above = vec![0u64; levels + 1];
    for t in (0..levels).rev() {
        pos_above[t] = pos_above[t + 1] + pos[t];
        neg_above[t] = neg_above[t + 1] + neg[t];
    }

    let mut points = Vec::with_capacity(n_thresholds + 2);
    points.push(RocPoint {
        threshold: levels,
        tpr: 0.0,
        fpr: 0.0,
    });
    for t in sweep_levels(n_thresholds, levels) {
        points.push(RocPoint {
            threshold: t,
            tpr: pos_above[t] as f64 / p_total as f64,
            fpr: neg_above[t] as f64 / n_total as f64,
        });
    }
    points.push(RocPoint {
        threshold: 0,
        tpr: 1.0,
        fpr: 1.0,
    });
    let auc = auc(&points)?;
    Ok(RocCurve { points, auc })
}

/// Trapezoidal area under `points`, which must be sorted by FPR.
pub fn auc(points: &[RocPoint]) -> Result<f64> {
    if let Some(w) = points.windows(2).find(|w| w[1].fpr < w[0].fpr) {
        return Err(Error::InvalidParameter(format!(
            "ROC points not sorted by FPR: {} follows {}",
            w[1].fpr, w[0].fpr
        )));
    }
    Ok(points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
        .sum())
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub auc: f64,
    pub optimal_threshold: usize,
    pub tpr_at_opt: f64,
    pub fpr_at_opt: f64,
}

impl Summary {
    pub fn from_curve(curve: &RocCurve) -> Self {
        let opt = curve.optimal_point();
        Summary {
            auc: curve.auc,
            optimal_threshold: opt.threshold,
            tpr_at_opt: opt.tpr,
            fpr_at_opt: opt.fpr,
        }
    }
}

/// `threshold,tpr,fpr` rows with LF line endings.
pub fn roc_csv(curve: &RocCurve) -> String {
    let mut out = String::from("threshold,tpr,fpr\n");
    for p in &curve.points {
        out.push_str(&format!("{},{},{}\n", p.threshold, p.tpr, p.fpr));
    }
    out
}

/// Sweeps the ROC curve and writes `roc.csv` and `summary.json` into `out_dir`.
pub fn evaluate_report(
    s: &SaliencyVolume,
    truth: &BinaryVolume,
    cfg: &PipelineConfig,
    out_dir: impl AsRef<Path>,
) -> Result<Summary> {
    cfg.validate()?;
    let out_dir = out_dir.as_ref();
    let curve = roc_sweep(s, truth, cfg.n_thresholds, cfg.levels)?;
    let summary = Summary::from_curve(&curve);

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let csv_path = out_dir.join("roc.csv");
    fs::write(&csv_path, roc_csv(&curve)).map_err(|e| Error::io(&csv_path, e))?;
    let json_path = out_dir.join("summary.json");
    let mut f = fs::File::create(&json_path).map_err(|e| Error::io(&json_path, e))?;
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    writeln!(f, "{text}").map_err(|e| Error::io(&json_path, e))?;
    Ok(summary)
}
