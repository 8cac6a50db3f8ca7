use serde::{Deserialize, Serialize};

use super::{LevelCounts, LEVELS};
use crate::error::Result;
use crate::raster::GrayMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EStats {
    pub adp_e: f64,
    pub max_e: f64,
}

/// Enhanced-alignment score of a binary foreground map against a binary
/// ground truth, given the confusion counts.
///
/// Both maps are binary, so the alignment term takes one of four values
/// (one per confusion cell) and the mean reduces to a weighted sum.
/// Ground truth that is all background scores `1 - mean(FM)`; all
/// foreground scores `mean(FM)`.
pub fn enhanced_alignment(tp: usize, fp: usize, n_fg: usize, n: usize) -> f64 {
    let nf = n as f64;
    let mu_fm = (tp + fp) as f64 / nf;
    if n_fg == 0 {
        return 1.0 - mu_fm;
    }
    if n_fg == n {
        return mu_fm;
    }
    let mu_gt = n_fg as f64 / nf;
    let cell = |g: f64, f: f64| {
        let (pg, pf) = (g - mu_gt, f - mu_fm);
        let den = pg * pg + pf * pf;
        let xi = if den == 0.0 { 0.0 } else { 2.0 * pg * pf / den };
        (1.0 + xi) * (1.0 + xi) / 4.0
    };
    let fn_ = n_fg - tp;
    let tn = n - n_fg - fp;
    (tp as f64 * cell(1.0, 1.0)
        + fn_ as f64 * cell(1.0, 0.0)
        + fp as f64 * cell(0.0, 1.0)
        + tn as f64 * cell(0.0, 0.0))
        / nf
}

/// E-measure at the adaptive threshold and the maximum over all 256 levels.
pub fn e_measure(sal: &GrayMap, gt: &GrayMap) -> Result<EStats> {
    let counts = LevelCounts::new(sal, gt)?;
    let per_level: Vec<f64> = counts
        .cumulative()
        .into_iter()
        .map(|(tp, fp)| enhanced_alignment(tp, fp, counts.n_fg, counts.n))
        .collect();
    debug_assert_eq!(per_level.len(), LEVELS);
    Ok(EStats {
        adp_e: per_level[counts.adaptive],
        max_e: per_level.iter().copied().fold(0.0, f64::max),
    })
}
