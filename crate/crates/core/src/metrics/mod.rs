//! Saliency evaluation: PR curves, F-measure variants, S-measure,
//! E-measure and MAE.
//!
//! Conventions shared by every metric here:
//! - saliency is quantized to `0..=255` with round-half-up before thresholding;
//! - a pixel is predicted foreground at threshold `T` when `sal_q >= T`;
//! - ground truth is foreground where `gt >= 0.5`;
//! - the adaptive threshold is `ceil(min(2 * mean(sal_q), 255))`.

mod alignment;
mod pr;
mod report;
mod structure;

pub use alignment::{e_measure, enhanced_alignment, EStats};
pub use pr::{f_measure, f_stats, pr_curve, FStats, PrCurve, PrPoint, DEFAULT_BETA2};
pub use report::{evaluate, AggregateMetrics, ImageMetrics, MetricReport};
pub use structure::{s_measure, DEFAULT_ALPHA};

use crate::error::Result;
use crate::raster::GrayMap;

pub const LEVELS: usize = 256;

/// Saliency quantized to 8-bit levels (round half up).
pub fn quantize(sal: &GrayMap) -> Vec<u8> {
    sal.data().iter().map(|&v| crate::io::to_u8(v)).collect()
}

/// Ground-truth foreground mask.
pub fn gt_mask(gt: &GrayMap) -> Vec<bool> {
    gt.data().iter().map(|&v| v >= 0.5).collect()
}

/// Adaptive threshold level, `ceil(min(2 * mean(sal_q), 255))`.
pub fn adaptive_threshold(sal_q: &[u8]) -> usize {
    let mean = sal_q.iter().map(|&q| f64::from(q)).sum::<f64>() / sal_q.len() as f64;
    (2.0 * mean).min(255.0).ceil() as usize
}

/// Foreground/background histograms of quantized saliency.
#[derive(Debug, Clone)]
pub(crate) struct LevelCounts {
    pub fg: [usize; LEVELS],
    pub bg: [usize; LEVELS],
    pub n_fg: usize,
    pub n: usize,
    pub adaptive: usize,
}

impl LevelCounts {
    pub fn new(sal: &GrayMap, gt: &GrayMap) -> Result<Self> {
        sal.ensure_same_dims(gt)?;
        let q = quantize(sal);
        let mask = gt_mask(gt);
        let mut fg = [0usize; LEVELS];
        let mut bg = [0usize; LEVELS];
        for (&level, &is_fg) in q.iter().zip(&mask) {
            if is_fg {
                fg[level as usize] += 1;
            } else {
                bg[level as usize] += 1;
            }
        }
        Ok(LevelCounts {
            n_fg: fg.iter().sum(),
            n: q.len(),
            adaptive: adaptive_threshold(&q),
            fg,
            bg,
        })
    }

    /// `(tp, fp)` at each threshold: counts of levels `>= T`.
    pub fn cumulative(&self) -> Vec<(usize, usize)> {
        let mut out = vec![(0, 0); LEVELS];
        let (mut tp, mut fp) = (0, 0);
        for t in (0..LEVELS).rev() {
            tp += self.fg[t];
            fp += self.bg[t];
            out[t] = (tp, fp);
        }
        out
    }
}

/// Mean absolute per-pixel difference.
pub fn mae(sal: &GrayMap, gt: &GrayMap) -> Result<f64> {
    sal.ensure_same_dims(gt)?;
    let total: f64 = sal
        .data()
        .iter()
        .zip(gt.data())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(total / sal.len() as f64)
}
