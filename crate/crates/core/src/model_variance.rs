//! High-level model-variance quality map (MV).
//!
//! The saliency model itself runs outside this crate. This module prepares
//! its RGB + noise input and diffs the two saliency maps it returns.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::raster::{GrayMap, RgbMap};

/// RGB image with a fourth channel of uniform noise standing in for depth.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbrImage {
    pub rgb: RgbMap,
    /// Noise levels `k / 255`, `k` uniform over `0..=255`.
    pub noise: GrayMap,
    pub seed: u64,
}

impl RgbrImage {
    /// Noise channel as raw 8-bit levels.
    pub fn noise_levels(&self) -> Vec<u8> {
        self.noise
            .data()
            .iter()
            .map(|&v| crate::io::to_u8(v))
            .collect()
    }

    /// RGBA PNG, alpha = noise.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::save_rgba_png(&self.rgb, &self.noise_levels(), path)
    }

    pub fn load_png(path: impl AsRef<Path>, seed: u64) -> Result<Self> {
        let (rgb, alpha) = crate::io::load_rgba(path)?;
        let noise = GrayMap::new(
            rgb.width(),
            rgb.height(),
            alpha.iter().map(|&a| f64::from(a) / 255.0).collect(),
        )?;
        Ok(RgbrImage { rgb, noise, seed })
    }
}

/// Deterministic noise channel for `(dimensions, seed)`, drawn with ChaCha8
/// in raster order.
pub fn noise_channel(width: usize, height: usize, seed: u64) -> GrayMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayMap::from_fn(width, height, |_, _| f64::from(rng.random::<u8>()) / 255.0)
}

pub fn make_rgbr(rgb: &RgbMap, seed: u64) -> RgbrImage {
    RgbrImage {
        noise: noise_channel(rgb.width(), rgb.height(), seed),
        rgb: rgb.clone(),
        seed,
    }
}

/// `MV = |sal_rgbr - sal_rgbd|` per pixel.
pub fn model_variance(sal_rgbd: &GrayMap, sal_rgbr: &GrayMap) -> Result<GrayMap> {
    sal_rgbd.ensure_same_dims(sal_rgbr)?;
    let data = sal_rgbd
        .data()
        .iter()
        .zip(sal_rgbr.data())
        .map(|(a, b)| (a - b).abs())
        .collect();
    Ok(GrayMap::from_raw(sal_rgbd.width(), sal_rgbd.height(), data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn random(w: usize, h: usize, seed: u64) -> GrayMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GrayMap::from_fn(w, h, |_, _| rng.random())
    }

    #[test]
    fn self_difference_is_zero() {
        let a = random(8, 8, 1);
        assert!(model_variance(&a, &a)
            .unwrap()
            .data()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn extreme_difference() {
        let mv = model_variance(&GrayMap::filled(4, 4, 1.0), &GrayMap::zeros(4, 4)).unwrap();
        assert!(mv.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn matches_per_pixel_oracle() {
        let a = random(8, 8, 2);
        let b = random(8, 8, 3);
        let mv = model_variance(&a, &b).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                let d = a.get(x, y) - b.get(x, y);
                assert_eq!(mv.get(x, y), if d < 0.0 { -d } else { d });
            }
        }
    }

    #[test]
    fn shape_mismatch() {
        assert!(matches!(
            model_variance(&GrayMap::zeros(3, 3), &GrayMap::zeros(3, 4)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn noise_is_seeded() {
        let rgb = RgbMap::filled(64, 64, [1, 2, 3]);
        assert_eq!(make_rgbr(&rgb, 1), make_rgbr(&rgb, 1));
        let a = make_rgbr(&rgb, 1).noise;
        let b = make_rgbr(&rgb, 2).noise;
        let differing = a
            .data()
            .iter()
            .zip(b.data())
            .filter(|(x, y)| x != y)
            .count();
        assert!(differing as f64 > 0.99 * 4096.0, "{differing}");
    }

    #[test]
    fn noise_deciles_are_balanced() {
        let noise = noise_channel(100, 100, 42);
        let mut deciles = [0usize; 10];
        for &v in noise.data() {
            deciles[((v * 10.0) as usize).min(9)] += 1;
        }
        for count in deciles {
            assert!((900..=1100).contains(&count), "{deciles:?}");
        }
    }

    #[test]
    fn png_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgbr.png");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rgb = RgbMap::from_fn(7, 5, |_, _| [rng.random(), rng.random(), rng.random()]);
        let rgbr = make_rgbr(&rgb, 9);
        rgbr.save_png(&path).unwrap();
        assert_eq!(RgbrImage::load_png(&path, 9).unwrap(), rgbr);
    }
}
