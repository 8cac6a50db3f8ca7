//! PNG (and JPEG on read) ingestion and emission of rasters.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgba};

use crate::error::{Error, Result};
use crate::raster::{GrayMap, RgbMap};

fn open(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

fn rgb_luma(r: f64, g: f64, b: f64) -> f64 {
    0.299 * r + 0.587 * g + 0.114 * b
}

/// Reads a single-channel raster scaled to `[0, 1]`.
///
/// 8-bit and 16-bit gray images are divided by their type maximum. Color
/// images are reduced with the same luminance weights as [`RgbMap::luminance`].
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayMap> {
    let path = path.as_ref();
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<f64> = match &img {
        DynamicImage::ImageLuma8(buf) => buf.pixels().map(|p| f64::from(p.0[0]) / 255.0).collect(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| f64::from(p.0[0]) / 255.0).collect(),
        DynamicImage::ImageLuma16(buf) => {
            buf.pixels().map(|p| f64::from(p.0[0]) / 65535.0).collect()
        }
        DynamicImage::ImageLumaA16(buf) => {
            buf.pixels().map(|p| f64::from(p.0[0]) / 65535.0).collect()
        }
        DynamicImage::ImageRgb16(_) | DynamicImage::ImageRgba16(_) => img
            .to_rgb16()
            .pixels()
            .map(|p| {
                let [r, g, b] = p.0.map(f64::from);
                rgb_luma(r, g, b) / 65535.0
            })
            .collect(),
        _ => img
            .to_rgb8()
            .pixels()
            .map(|p| {
                let [r, g, b] = p.0.map(f64::from);
                rgb_luma(r, g, b) / 255.0
            })
            .collect(),
    };
    GrayMap::new(w, h, data)
}

/// Reads an 8-bit RGB raster; alpha is dropped, gray is replicated.
pub fn load_rgb(path: impl AsRef<Path>) -> Result<RgbMap> {
    let path = path.as_ref();
    let img = open(path)?.to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    RgbMap::new(w, h, img.pixels().map(|p| p.0).collect())
}

/// Quantizes a `[0, 1]` map to 8 bits (round half up, clamped).
pub fn to_u8(v: f64) -> u8 {
    (v * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

fn save(img: DynamicImage, path: &Path) -> Result<()> {
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

/// Writes an 8-bit gray PNG.
pub fn save_gray_png(map: &GrayMap, path: impl AsRef<Path>) -> Result<()> {
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::from_raw(
        map.width() as u32,
        map.height() as u32,
        map.data().iter().map(|&v| to_u8(v)).collect(),
    )
    .expect("buffer length matches dimensions");
    save(DynamicImage::ImageLuma8(buf), path.as_ref())
}

/// Writes a 16-bit gray PNG of raw values (used for label rasters).
pub fn save_u16_png(
    width: usize,
    height: usize,
    values: &[u16],
    path: impl AsRef<Path>,
) -> Result<()> {
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(width as u32, height as u32, values.to_vec())
            .ok_or_else(|| Error::InvalidParameter("label buffer length mismatch".into()))?;
    save(DynamicImage::ImageLuma16(buf), path.as_ref())
}

pub fn save_rgb_png(rgb: &RgbMap, path: impl AsRef<Path>) -> Result<()> {
    let buf = image::RgbImage::from_raw(
        rgb.width() as u32,
        rgb.height() as u32,
        rgb.pixels().iter().flatten().copied().collect(),
    )
    .expect("buffer length matches dimensions");
    save(DynamicImage::ImageRgb8(buf), path.as_ref())
}

/// Writes an RGBA PNG whose alpha channel carries `alpha`.
pub fn save_rgba_png(rgb: &RgbMap, alpha: &[u8], path: impl AsRef<Path>) -> Result<()> {
    if alpha.len() != rgb.len() {
        return Err(Error::InvalidParameter("alpha length mismatch".into()));
    }
    let raw: Vec<u8> = rgb
        .pixels()
        .iter()
        .zip(alpha)
        .flat_map(|(&[r, g, b], &a)| [r, g, b, a])
        .collect();
    let buf: ImageBuffer<Rgba<u8>, Vec<u8>> =
        ImageBuffer::from_raw(rgb.width() as u32, rgb.height() as u32, raw)
            .expect("buffer length matches dimensions");
    save(DynamicImage::ImageRgba8(buf), path.as_ref())
}

/// Reads an RGBA PNG, returning the color planes and the alpha channel.
pub fn load_rgba(path: impl AsRef<Path>) -> Result<(RgbMap, Vec<u8>)> {
    let path = path.as_ref();
    let img = open(path)?.to_rgba8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let rgb = img.pixels().map(|p| [p.0[0], p.0[1], p.0[2]]).collect();
    let alpha = img.pixels().map(|p| p.0[3]).collect();
    Ok((RgbMap::new(w, h, rgb)?, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_png_roundtrip_is_8bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        let m = GrayMap::from_fn(5, 4, |x, y| ((x * 4 + y) * 9) as f64 / 255.0);
        save_gray_png(&m, &path).unwrap();
        let back = load_gray(&path).unwrap();
        for (a, b) in m.data().iter().zip(back.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sixteen_bit_depth_scaled_by_type_max() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.png");
        save_u16_png(2, 1, &[0, 65535], &path).unwrap();
        let d = load_gray(&path).unwrap();
        assert_eq!(d.data(), &[0.0, 1.0]);
    }

    #[test]
    fn quantization_rounds_half_up() {
        assert_eq!(to_u8(0.5), 128);
        assert_eq!(to_u8(0.0), 0);
        assert_eq!(to_u8(1.0), 255);
        assert_eq!(to_u8(1.7), 255);
    }
}
