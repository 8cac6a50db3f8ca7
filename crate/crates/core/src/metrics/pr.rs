use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LevelCounts, LEVELS};
use crate::error::{Error, Result};
use crate::raster::GrayMap;

pub const DEFAULT_BETA2: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: u8,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

/// One point per threshold level `0..=255`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
}

impl PrCurve {
    pub(crate) fn from_counts(counts: &LevelCounts) -> Result<Self> {
        if counts.n_fg == 0 {
            return Err(Error::DegenerateGroundTruth);
        }
        let points = counts
            .cumulative()
            .into_iter()
            .enumerate()
            .map(|(t, (tp, fp))| {
                let precision = if tp + fp == 0 {
                    0.0
                } else {
                    tp as f64 / (tp + fp) as f64
                };
                let recall = tp as f64 / counts.n_fg as f64;
                PrPoint {
                    threshold: t as u8,
                    precision,
                    recall,
                    f: f_measure(precision, recall, DEFAULT_BETA2),
                }
            })
            .collect();
        Ok(PrCurve { points })
    }

    pub fn at(&self, threshold: usize) -> &PrPoint {
        &self.points[threshold]
    }

    /// `threshold,precision,recall,f` with 256 data rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut wtr = csv::Writer::from_path(path)?;
        wtr.write_record(["threshold", "precision", "recall", "f"])?;
        for p in &self.points {
            wtr.write_record([
                p.threshold.to_string(),
                format!("{:.6}", p.precision),
                format!("{:.6}", p.recall),
                format!("{:.6}", p.f),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io(path, e))
    }
}

/// Precision/recall/F at every threshold. Fails on ground truth without
/// foreground.
pub fn pr_curve(sal: &GrayMap, gt: &GrayMap) -> Result<PrCurve> {
    PrCurve::from_counts(&LevelCounts::new(sal, gt)?)
}

/// `(1 + b2) P R / (b2 P + R)`, 0 when the denominator vanishes.
pub fn f_measure(precision: f64, recall: f64, beta2: f64) -> f64 {
    let den = beta2 * precision + recall;
    if den == 0.0 {
        0.0
    } else {
        (1.0 + beta2) * precision * recall / den
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FStats {
    pub adp_f: f64,
    pub mean_f: f64,
    pub max_f: f64,
}

impl FStats {
    pub(crate) fn from_curve(curve: &PrCurve, adaptive: usize) -> Self {
        let fs = curve.points.iter().map(|p| p.f);
        FStats {
            adp_f: curve.at(adaptive).f,
            mean_f: fs.clone().sum::<f64>() / LEVELS as f64,
            max_f: fs.fold(0.0, f64::max),
        }
    }
}

/// Adaptive, mean (over all 256 thresholds) and maximum F-measure.
pub fn f_stats(sal: &GrayMap, gt: &GrayMap) -> Result<FStats> {
    let counts = LevelCounts::new(sal, gt)?;
    let curve = PrCurve::from_counts(&counts)?;
    Ok(FStats::from_curve(&curve, counts.adaptive))
}
