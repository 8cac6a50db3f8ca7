use serde::{Deserialize, Serialize};

use super::{e_measure, mae, s_measure, FStats, LevelCounts, PrCurve, DEFAULT_ALPHA};
use crate::error::{Error, Result};
use crate::raster::GrayMap;

/// Metrics of one saliency map. F-measure fields are `None` when the ground
/// truth has no foreground.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageMetrics {
    pub stem: String,
    pub sm: f64,
    pub adp_e: f64,
    pub max_e: f64,
    pub adp_f: Option<f64>,
    pub mean_f: Option<f64>,
    pub max_f: Option<f64>,
    pub mae: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub sm: Option<f64>,
    pub adp_e: Option<f64>,
    pub max_e: Option<f64>,
    pub adp_f: Option<f64>,
    pub mean_f: Option<f64>,
    pub max_f: Option<f64>,
    pub mae: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub dataset: String,
    pub n_images: usize,
    pub per_image: Vec<ImageMetrics>,
    pub aggregate: AggregateMetrics,
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl MetricReport {
    /// Sorts images by stem and averages each metric over the images that
    /// have it.
    pub fn from_images(dataset: impl Into<String>, mut per_image: Vec<ImageMetrics>) -> Self {
        per_image.sort_by(|a, b| a.stem.cmp(&b.stem));
        let agg = |f: fn(&ImageMetrics) -> Option<f64>| mean_of(per_image.iter().map(f));
        let aggregate = AggregateMetrics {
            sm: agg(|m| Some(m.sm)),
            adp_e: agg(|m| Some(m.adp_e)),
            max_e: agg(|m| Some(m.max_e)),
            adp_f: agg(|m| m.adp_f),
            mean_f: agg(|m| m.mean_f),
            max_f: agg(|m| m.max_f),
            mae: agg(|m| Some(m.mae)),
        };
        MetricReport {
            dataset: dataset.into(),
            n_images: per_image.len(),
            per_image,
            aggregate,
        }
    }
}

/// All metrics for one `(saliency, ground truth)` pair, plus the PR curve
/// when the ground truth has foreground.
pub fn evaluate(
    stem: &str,
    sal: &GrayMap,
    gt: &GrayMap,
) -> Result<(ImageMetrics, Option<PrCurve>)> {
    let counts = LevelCounts::new(sal, gt)?;
    let (f, curve) = match PrCurve::from_counts(&counts) {
        Ok(curve) => (
            Some(FStats::from_curve(&curve, counts.adaptive)),
            Some(curve),
        ),
        Err(Error::DegenerateGroundTruth) => {
            log::warn!(
                "{stem}: ground truth has no foreground; excluded from F-measure aggregates"
            );
            (None, None)
        }
        Err(e) => return Err(e),
    };
    let e = e_measure(sal, gt)?;
    let metrics = ImageMetrics {
        stem: stem.to_string(),
        sm: s_measure(sal, gt, DEFAULT_ALPHA)?,
        adp_e: e.adp_e,
        max_e: e.max_e,
        adp_f: f.map(|s| s.adp_f),
        mean_f: f.map(|s| s.mean_f),
        max_f: f.map(|s| s.max_f),
        mae: mae(sal, gt)?,
    };
    Ok((metrics, curve))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics(stem: &str, v: f64, f: Option<f64>) -> ImageMetrics {
        ImageMetrics {
            stem: stem.into(),
            sm: v,
            adp_e: v,
            max_e: v,
            adp_f: f,
            mean_f: f,
            max_f: f,
            mae: v,
        }
    }

    #[test]
    fn aggregates_are_means_over_available_values() {
        let r = MetricReport::from_images(
            "toy",
            vec![metrics("b", 0.2, None), metrics("a", 0.6, Some(0.5))],
        );
        assert_eq!(r.per_image[0].stem, "a");
        assert_eq!(r.n_images, 2);
        assert!((r.aggregate.sm.unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(r.aggregate.max_f, Some(0.5));
    }

    #[test]
    fn degenerate_gt_leaves_f_empty() {
        let (m, curve) = evaluate("x", &GrayMap::filled(4, 4, 0.1), &GrayMap::zeros(4, 4)).unwrap();
        assert!(m.adp_f.is_none() && curve.is_none());
        assert!((m.sm - 0.9).abs() < 1e-12);
    }
}
