//! Low-level edge-consistency quality map (EC).
//!
//! Depth gradients are multiplied with an RGB contour map; pixels where both
//! agree strongly become anchors. A conservative threshold seeds a coarse
//! quality map, and an aggressive one picks the anchors that bound the
//! per-superpixel spatial weighting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{
    gaussian_blur, hadamard, normalize_unit, rectify_shift, sobel_gradient, GaussianPass, GrayMap,
    RgbMap,
};
use crate::superpixels::{slic, Region, SlicOptions};

/// Pixel coordinates `(x, y)` whose consistency value exceeded a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    pub coords: Vec<(usize, usize)>,
    pub threshold_used: f64,
}

impl AnchorSet {
    /// Every pixel strictly above `threshold`, in raster order.
    pub fn above(map: &GrayMap, threshold: f64) -> Self {
        let w = map.width();
        let coords = map
            .data()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > threshold)
            .map(|(i, _)| (i % w, i / w))
            .collect();
        AnchorSet {
            coords,
            threshold_used: threshold,
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Distance from `(x, y)` to the nearest anchor; `None` when empty.
    pub fn nearest_distance(&self, x: f64, y: f64) -> Option<f64> {
        self.coords
            .iter()
            .map(|&(ax, ay)| {
                let dx = ax as f64 - x;
                let dy = ay as f64 - y;
                dx * dx + dy * dy
            })
            .min_by(f64::total_cmp)
            .map(f64::sqrt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcConfig {
    /// Conservative threshold as a multiple of mean(FG).
    pub tc_mult: f64,
    /// Aggressive threshold as a multiple of mean(FG).
    pub ta_mult: f64,
    /// Color-similarity strength of the spatial weighting.
    pub omega1: f64,
    pub k_superpixels: usize,
    pub passes: [GaussianPass; 2],
}

impl Default for EcConfig {
    fn default() -> Self {
        EcConfig {
            tc_mult: 20.0,
            ta_mult: 30.0,
            omega1: 0.01,
            k_superpixels: 400,
            passes: [
                GaussianPass::rounded_up(80, 25.0).expect("valid default"),
                GaussianPass::rounded_up(20, 20.0).expect("valid default"),
            ],
        }
    }
}

impl EcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tc_mult > 0.0 && self.ta_mult > self.tc_mult && self.ta_mult.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need ta_mult > tc_mult > 0, got ta_mult={} tc_mult={}",
                self.ta_mult, self.tc_mult
            )));
        }
        if !(self.omega1 > 0.0 && self.omega1.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "omega1 must be positive, got {}",
                self.omega1
            )));
        }
        if self.k_superpixels == 0 {
            return Err(Error::InvalidParameter("k_superpixels must be >= 1".into()));
        }
        Ok(())
    }
}

/// `FG = DG ⊙ contour`.
pub fn mutual_consistency(dg: &GrayMap, contour: &GrayMap) -> Result<GrayMap> {
    hadamard(dg, contour)
}

/// Coarse quality `EC⁻` (the thresholded map blurred by both passes) and the
/// conservative anchors.
pub fn coarse_edge_quality(fg: &GrayMap, cfg: &EcConfig) -> (GrayMap, AnchorSet) {
    let tc = cfg.tc_mult * fg.mean();
    let shifted = rectify_shift(fg, tc);
    let coarse = gaussian_blur(&gaussian_blur(&shifted, &cfg.passes[0]), &cfg.passes[1]);
    (coarse, AnchorSet::above(fg, tc))
}

/// Pixels with `fg > ta_mult * mean(fg)`.
pub fn aggressive_anchors(fg: &GrayMap, cfg: &EcConfig) -> AnchorSet {
    AnchorSet::above(fg, cfg.ta_mult * fg.mean())
}

/// Anchor-scoped, color-weighted average of per-superpixel values.
///
/// Region `i` averages over every region whose centroid lies within the
/// distance from `i`'s centroid to the nearest anchor, each weighted by
/// `exp(-omega1 * ||c_i - c_j||)` on mean colors. The scope always contains
/// `i` itself, so the output is a convex combination of the inputs.
pub fn adaptive_spatial_weight(
    values: &[f64],
    regions: &[Region],
    anchors: &AnchorSet,
    omega1: f64,
) -> Result<Vec<f64>> {
    if values.len() != regions.len() {
        return Err(Error::InvalidParameter(format!(
            "{} values for {} regions",
            values.len(),
            regions.len()
        )));
    }
    if anchors.is_empty() {
        return Err(Error::NoAnchors);
    }
    let out = regions
        .iter()
        .map(|ri| {
            let radius = anchors
                .nearest_distance(ri.centroid.0, ri.centroid.1)
                .expect("anchors non-empty");
            let mut num = 0.0;
            let mut den = 0.0;
            for (rj, &v) in regions.iter().zip(values) {
                if ri.centroid_distance(rj) <= radius {
                    let wgt = (-omega1 * ri.color_distance(rj)).exp();
                    num += v * wgt;
                    den += wgt;
                }
            }
            num / den
        })
        .collect();
    Ok(out)
}

/// Per-image diagnostics written next to the EC map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcMeta {
    pub tc: f64,
    pub ta: f64,
    pub apc_count: usize,
    pub apa_count: usize,
    pub low_confidence: bool,
}

#[derive(Debug, Clone)]
pub struct EcOutput {
    pub map: GrayMap,
    /// Depth gradient, reused by the regional-uncertainty stage.
    pub depth_gradient: GrayMap,
    pub fg: GrayMap,
    pub apc: AnchorSet,
    pub apa: AnchorSet,
    pub meta: EcMeta,
}

/// Contour fallback when no precomputed contour map is available: Sobel
/// magnitude of the RGB luminance.
pub fn fallback_contour(rgb: &RgbMap) -> Result<GrayMap> {
    sobel_gradient(&rgb.luminance())
}

/// Full edge-consistency map for one RGB-D pair.
///
/// Without aggressive anchors the spatial weighting is skipped: the result
/// is the normalized coarse map and `low_confidence` is set.
pub fn edge_consistency_map(
    rgb: &RgbMap,
    depth: &GrayMap,
    contour: &GrayMap,
    cfg: &EcConfig,
    slic_opts: &SlicOptions,
) -> Result<EcOutput> {
    cfg.validate()?;
    crate::raster::check_dims(rgb.dims(), depth.dims())?;
    crate::raster::check_dims(rgb.dims(), contour.dims())?;

    let dg = sobel_gradient(depth)?;
    let fg = mutual_consistency(&dg, contour)?;
    let (coarse, apc) = coarse_edge_quality(&fg, cfg);
    let apa = aggressive_anchors(&fg, cfg);
    let mut meta = EcMeta {
        tc: apc.threshold_used,
        ta: apa.threshold_used,
        apc_count: apc.len(),
        apa_count: apa.len(),
        low_confidence: false,
    };

    let map = if apa.is_empty() {
        meta.low_confidence = true;
        normalize_unit(&coarse)
    } else {
        let k = cfg.k_superpixels.min(rgb.len());
        let seg = slic(rgb, k, slic_opts)?;
        let pooled = seg.region_means(&coarse)?;
        let weighted = adaptive_spatial_weight(&pooled, seg.regions(), &apa, cfg.omega1)?;
        normalize_unit(&seg.paint(&weighted))
    };

    Ok(EcOutput {
        map,
        depth_gradient: dg,
        fg,
        apc,
        apa,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn region(id: usize, c: (f64, f64), color: [f64; 3]) -> Region {
        Region {
            id,
            centroid: c,
            mean_color: color,
            pixel_count: 1,
        }
    }

    #[test]
    fn mutual_consistency_identity_and_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dg = GrayMap::from_fn(6, 6, |_, _| rng.random());
        assert_eq!(
            mutual_consistency(&dg, &GrayMap::filled(6, 6, 1.0)).unwrap(),
            dg
        );
        let z = mutual_consistency(&GrayMap::zeros(6, 6), &dg).unwrap();
        assert!(z.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mutual_consistency_overlap_only() {
        let dg = GrayMap::from_fn(8, 8, |x, _| if x == 3 { 0.8 } else { 0.0 });
        let contour = GrayMap::from_fn(8, 8, |_, y| if y == 5 { 0.5 } else { 0.0 });
        let fg = mutual_consistency(&dg, &contour).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                let expected = if x == 3 && y == 5 { 0.4 } else { 0.0 };
                assert_eq!(fg.get(x, y), expected);
            }
        }
    }

    #[test]
    fn coarse_constant_and_zero() {
        let cfg = EcConfig::default();
        let (c, apc) = coarse_edge_quality(&GrayMap::filled(10, 10, 0.3), &cfg);
        assert!(c.data().iter().all(|&v| v == 0.0));
        assert!(apc.is_empty());
        let (c, apc) = coarse_edge_quality(&GrayMap::zeros(10, 10), &cfg);
        assert!(c.data().iter().all(|&v| v == 0.0));
        assert!(apc.is_empty());
    }

    #[test]
    fn coarse_blob_conserves_mass() {
        // blob far enough from the border that neither pass reaches it
        let fg = GrayMap::from_fn(128, 128, |x, y| {
            if (63..66).contains(&x) && (63..66).contains(&y) {
                1.0
            } else {
                0.0
            }
        });
        let cfg = EcConfig::default();
        let (coarse, apc) = coarse_edge_quality(&fg, &cfg);
        let tc = 20.0 * 9.0 / (128.0 * 128.0);
        assert_eq!(apc.len(), 9);
        let expected: f64 = fg.data().iter().map(|v| (v - tc).max(0.0)).sum();
        assert!((coarse.sum() - expected).abs() < 1e-6);
        // peak at the blob center
        let peak = coarse.get(64, 64);
        assert!(coarse.data().iter().all(|&v| v <= peak + 1e-15));
    }

    #[test]
    fn aggressive_single_pixel() {
        let fg = GrayMap::from_fn(10, 10, |x, y| if x == 4 && y == 7 { 1.0 } else { 0.0 });
        let apa = aggressive_anchors(&fg, &EcConfig::default());
        assert!((apa.threshold_used - 0.3).abs() < 1e-12);
        assert_eq!(apa.coords, vec![(4, 7)]);
        assert!(aggressive_anchors(&GrayMap::zeros(5, 5), &EcConfig::default()).is_empty());
    }

    #[test]
    fn aggressive_subset_of_conservative() {
        let cfg = EcConfig::default();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // sparse bright ridges so both thresholds bite
            let fg = GrayMap::from_fn(24, 24, |_, _| {
                if rng.random::<f64>() < 0.03 {
                    rng.random()
                } else {
                    0.0
                }
            });
            let apc = coarse_edge_quality(&fg, &cfg).1;
            let apa = aggressive_anchors(&fg, &cfg);
            assert!(apa.coords.iter().all(|c| apc.coords.contains(c)));
        }
    }

    #[test]
    fn spatial_weight_constant_values() {
        let regions = vec![
            region(0, (0.0, 0.0), [10.0, 20.0, 30.0]),
            region(1, (5.0, 0.0), [200.0, 20.0, 30.0]),
            region(2, (0.0, 5.0), [10.0, 90.0, 30.0]),
        ];
        let anchors = AnchorSet {
            coords: vec![(20, 20)],
            threshold_used: 0.0,
        };
        let out = adaptive_spatial_weight(&[0.4; 3], &regions, &anchors, 0.01).unwrap();
        assert!(out.iter().all(|v| (v - 0.4).abs() < 1e-15));
    }

    #[test]
    fn spatial_weight_singleton_scope() {
        let regions = vec![
            region(0, (0.0, 0.0), [0.0; 3]),
            region(1, (10.0, 0.0), [0.0; 3]),
        ];
        let anchors = AnchorSet {
            coords: vec![(1, 0)],
            threshold_used: 0.0,
        };
        let out = adaptive_spatial_weight(&[0.2, 0.9], &regions, &anchors, 0.01).unwrap();
        assert_eq!(out[0], 0.2);
    }

    #[test]
    fn spatial_weight_no_anchor() {
        let regions = vec![region(0, (0.0, 0.0), [0.0; 3])];
        let empty = AnchorSet {
            coords: vec![],
            threshold_used: 1.0,
        };
        assert!(matches!(
            adaptive_spatial_weight(&[0.5], &regions, &empty, 0.01),
            Err(Error::NoAnchors)
        ));
    }

    #[test]
    fn constant_depth_gives_zero_map() {
        let rgb = RgbMap::from_fn(
            32,
            32,
            |x, _| if x < 16 { [200, 10, 10] } else { [10, 10, 200] },
        );
        let depth = GrayMap::filled(32, 32, 0.5);
        let contour = fallback_contour(&rgb).unwrap();
        let out = edge_consistency_map(
            &rgb,
            &depth,
            &contour,
            &EcConfig::default(),
            &SlicOptions::default(),
        )
        .unwrap();
        assert!(out.map.data().iter().all(|&v| v == 0.0));
        assert!(out.meta.low_confidence);
    }

    #[test]
    fn config_validation() {
        let bad = EcConfig {
            ta_mult: 10.0,
            ..EcConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(EcConfig::default().validate().is_ok());
    }
}
