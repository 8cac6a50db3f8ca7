//! Structure measure: object-aware plus region-aware structural similarity.

use super::gt_mask;
use crate::error::Result;
use crate::raster::GrayMap;

pub const DEFAULT_ALPHA: f64 = 0.5;

/// Machine epsilon as used by the reference formulation of the measure.
const EPS: f64 = f64::EPSILON;

/// `alpha * S_object + (1 - alpha) * S_region`, clamped to `[0, 1]`.
///
/// Ground truth without foreground scores `1 - mean(sal)`; all-foreground
/// ground truth scores `mean(sal)`.
pub fn s_measure(sal: &GrayMap, gt: &GrayMap, alpha: f64) -> Result<f64> {
    sal.ensure_same_dims(gt)?;
    let mask = gt_mask(gt);
    let n_fg = mask.iter().filter(|&&m| m).count();
    let score = if n_fg == 0 {
        1.0 - sal.mean()
    } else if n_fg == mask.len() {
        sal.mean()
    } else {
        alpha * object_similarity(sal, &mask, n_fg) + (1.0 - alpha) * region_similarity(sal, &mask)
    };
    Ok(score.clamp(0.0, 1.0))
}

fn object_score(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    2.0 * mean / (mean * mean + 1.0 + sd + EPS)
}

fn object_similarity(sal: &GrayMap, mask: &[bool], n_fg: usize) -> f64 {
    let mut fg = Vec::with_capacity(n_fg);
    let mut bg = Vec::with_capacity(mask.len() - n_fg);
    for (&v, &m) in sal.data().iter().zip(mask) {
        if m {
            fg.push(v);
        } else {
            bg.push(1.0 - v);
        }
    }
    let u = n_fg as f64 / mask.len() as f64;
    u * object_score(&fg) + (1.0 - u) * object_score(&bg)
}

/// Split point `(X, Y)`: the rounded 1-based foreground centroid, so the
/// left/top blocks hold columns `0..X` and rows `0..Y`.
fn split_point(mask: &[bool], w: usize) -> (usize, usize) {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        sx += (i % w + 1) as f64;
        sy += (i / w + 1) as f64;
        n += 1.0;
    }
    ((sx / n).round() as usize, (sy / n).round() as usize)
}

/// SSIM-style similarity of one block.
fn block_ssim(sal: &GrayMap, mask: &[bool], cols: (usize, usize), rows: (usize, usize)) -> f64 {
    let w = sal.width();
    let n = ((cols.1 - cols.0) * (rows.1 - rows.0)) as f64;
    let pixels = || (rows.0..rows.1).flat_map(move |y| (cols.0..cols.1).map(move |x| y * w + x));
    let (mut sum_x, mut sum_y) = (0.0, 0.0);
    for i in pixels() {
        sum_x += sal.data()[i];
        sum_y += f64::from(u8::from(mask[i]));
    }
    let (mx, my) = (sum_x / n, sum_y / n);
    let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
    for i in pixels() {
        let dx = sal.data()[i] - mx;
        let dy = f64::from(u8::from(mask[i])) - my;
        vx += dx * dx;
        vy += dy * dy;
        cxy += dx * dy;
    }
    let norm = n - 1.0 + EPS;
    let (vx, vy, cxy) = (vx / norm, vy / norm, cxy / norm);
    let a = 4.0 * mx * my * cxy;
    let b = (mx * mx + my * my) * (vx + vy);
    if a != 0.0 {
        a / (b + EPS)
    } else if b == 0.0 {
        1.0
    } else {
        0.0
    }
}

fn region_similarity(sal: &GrayMap, mask: &[bool]) -> f64 {
    let (w, h) = sal.dims();
    let (x, y) = split_point(mask, w);
    let area = (w * h) as f64;
    let blocks = [
        ((0, x), (0, y)),
        ((x, w), (0, y)),
        ((0, x), (y, h)),
        ((x, w), (y, h)),
    ];
    blocks
        .iter()
        .filter(|((c0, c1), (r0, r1))| c1 > c0 && r1 > r0)
        .map(|&(cols, rows)| {
            let weight = ((cols.1 - cols.0) * (rows.1 - rows.0)) as f64 / area;
            weight * block_ssim(sal, mask, cols, rows)
        })
        .sum()
}
