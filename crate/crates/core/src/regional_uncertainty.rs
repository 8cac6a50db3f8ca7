//! Mid-level regional-uncertainty quality map (RU).
//!
//! Combines a localization prior (closeness of each superpixel to the
//! aggressive anchors) with the local entropy residual between the RGB and
//! depth gradient maps, then smooths the product with the same anchor-scoped
//! spatial weighting used for EC.

use serde::{Deserialize, Serialize};

use crate::edge_consistency::{adaptive_spatial_weight, AnchorSet};
use crate::error::{Error, Result};
use crate::raster::{
    check_dims, hadamard, local_entropy, normalize_unit, sobel_gradient, GrayMap, RgbMap,
};
use crate::superpixels::{slic, Region, SlicOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuConfig {
    pub omega2: f64,
    pub k_superpixels: usize,
    pub entropy_radius: usize,
    pub entropy_bins: usize,
    /// Color-similarity strength of the final spatial weighting.
    pub omega1: f64,
}

impl Default for RuConfig {
    fn default() -> Self {
        RuConfig {
            omega2: 7.0,
            k_superpixels: 1000,
            entropy_radius: 8,
            entropy_bins: 64,
            omega1: 0.01,
        }
    }
}

impl RuConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.omega2) || !positive(self.omega1) {
            return Err(Error::InvalidParameter(format!(
                "omega1/omega2 must be positive, got {}/{}",
                self.omega1, self.omega2
            )));
        }
        if self.k_superpixels == 0 || self.entropy_radius == 0 {
            return Err(Error::InvalidParameter(
                "k_superpixels and entropy_radius must be >= 1".into(),
            ));
        }
        if self.entropy_bins < 2 {
            return Err(Error::InvalidParameter("entropy_bins must be >= 2".into()));
        }
        Ok(())
    }
}

/// `PM(sp_i) = exp(-omega2 * mean_l(||p(sp_i) - HP_l||) / diag)`, in `(0, 1]`.
pub fn localization_prior(
    regions: &[Region],
    apa: &AnchorSet,
    cfg: &RuConfig,
    diag: f64,
) -> Result<Vec<f64>> {
    if apa.is_empty() {
        return Err(Error::NoAnchors);
    }
    if !(diag > 0.0 && diag.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "diagonal must be positive, got {diag}"
        )));
    }
    let pn = apa.len() as f64;
    Ok(regions
        .iter()
        .map(|r| {
            let total: f64 = apa
                .coords
                .iter()
                .map(|&(x, y)| (r.centroid.0 - x as f64).hypot(r.centroid.1 - y as f64))
                .sum();
            (-cfg.omega2 * total / pn / diag).exp()
        })
        .collect())
}

/// `LER = max(0, E(rgbg) - E(dg))` with windowed entropy, in bits.
pub fn entropy_residual(rgbg: &GrayMap, dg: &GrayMap, cfg: &RuConfig) -> Result<GrayMap> {
    rgbg.ensure_same_dims(dg)?;
    let e_rgb = local_entropy(rgbg, cfg.entropy_radius, cfg.entropy_bins)?;
    let e_depth = local_entropy(dg, cfg.entropy_radius, cfg.entropy_bins)?;
    let data = e_rgb
        .data()
        .iter()
        .zip(e_depth.data())
        .map(|(a, b)| (a - b).max(0.0))
        .collect();
    GrayMap::new(rgbg.width(), rgbg.height(), data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuMeta {
    pub pn: usize,
    pub low_confidence: bool,
}

#[derive(Debug, Clone)]
pub struct RuOutput {
    pub map: GrayMap,
    pub meta: RuMeta,
}

/// Full regional-uncertainty map. An empty anchor set yields an all-zero map
/// flagged low-confidence.
pub fn regional_uncertainty_map(
    rgb: &RgbMap,
    depth: &GrayMap,
    apa: &AnchorSet,
    cfg: &RuConfig,
    slic_opts: &SlicOptions,
) -> Result<RuOutput> {
    cfg.validate()?;
    check_dims(rgb.dims(), depth.dims())?;
    let (w, h) = rgb.dims();
    if apa.is_empty() {
        return Ok(RuOutput {
            map: GrayMap::zeros(w, h),
            meta: RuMeta {
                pn: 0,
                low_confidence: true,
            },
        });
    }

    let rgbg = sobel_gradient(&rgb.luminance())?;
    let dg = sobel_gradient(depth)?;
    let max_bits = (cfg.entropy_bins as f64).log2();
    let ler = entropy_residual(&rgbg, &dg, cfg)?.map(|v| (v / max_bits).min(1.0));

    let seg = slic(rgb, cfg.k_superpixels.min(rgb.len()), slic_opts)?;
    let diag = (w as f64).hypot(h as f64);
    let prior = seg.paint(&localization_prior(seg.regions(), apa, cfg, diag)?);
    let raw = hadamard(&ler, &prior)?;
    let pooled = seg.region_means(&raw)?;
    let weighted = adaptive_spatial_weight(&pooled, seg.regions(), apa, cfg.omega1)?;

    Ok(RuOutput {
        map: normalize_unit(&seg.paint(&weighted)),
        meta: RuMeta {
            pn: apa.len(),
            low_confidence: false,
        },
    })
}
