//! Raster containers and the low-level kernels shared by every quality map.
//!
//! All kernels use replicate (clamp-to-edge) borders and operate in `f64`.

use crate::error::{Error, Result};

/// Single-channel row-major raster of finite intensities.
///
/// Maps produced by normalizing operations lie in `[0, 1]`; intermediate
/// results (blurred thresholded maps, entropies in bits) may exceed that.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Degenerate(format!("empty raster {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "raster {width}x{height} needs {} values, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite value at index {i}"
            )));
        }
        Ok(GrayMap {
            width,
            height,
            data,
        })
    }

    /// Panics on zero dimensions.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "empty raster");
        assert!(value.is_finite());
        GrayMap {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    /// Builds a map from a per-pixel function of `(x, y)`. Panics on zero
    /// dimensions or non-finite values.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "empty raster");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                assert!(v.is_finite(), "non-finite value at ({x}, {y})");
                data.push(v);
            }
        }
        GrayMap {
            width,
            height,
            data,
        }
    }

    // Kernels only produce finite values from finite input.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        debug_assert!(data.iter().all(|v| v.is_finite()));
        GrayMap {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Pixel lookup with replicate padding.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Applies `f` to every pixel. Panics if `f` yields a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GrayMap {
        let data: Vec<f64> = self.data.iter().map(|&v| f(v)).collect();
        assert!(
            data.iter().all(|v| v.is_finite()),
            "map produced non-finite value"
        );
        GrayMap::from_raw(self.width, self.height, data)
    }

    pub fn ensure_same_dims(&self, other: &GrayMap) -> Result<()> {
        check_dims(self.dims(), other.dims())
    }
}

pub(crate) fn check_dims(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Shape { expected, found })
    }
}

/// Row-major 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbMap {
    width: usize,
    height: usize,
    data: Vec<[u8; 3]>,
}

impl RgbMap {
    pub fn new(width: usize, height: usize, data: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Degenerate(format!("empty raster {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "raster {width}x{height} needs {} pixels, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(RgbMap {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Self {
        assert!(width > 0 && height > 0, "empty raster");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        RgbMap {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        Self::from_fn(width, height, |_, _| rgb)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.data[y * self.width + x]
    }

    /// Rec. 601 luminance scaled to `[0, 1]`.
    pub fn luminance(&self) -> GrayMap {
        let data = self
            .data
            .iter()
            .map(|&[r, g, b]| {
                (0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b)) / 255.0
            })
            .collect();
        GrayMap::from_raw(self.width, self.height, data)
    }
}

/// One separable Gaussian filtering pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPass {
    side: usize,
    sigma: f64,
}

impl GaussianPass {
    pub fn new(side: usize, sigma: f64) -> Result<Self> {
        if side == 0 || side.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "gaussian kernel side must be odd and >= 1, got {side}"
            )));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gaussian sigma must be positive, got {sigma}"
            )));
        }
        Ok(GaussianPass { side, sigma })
    }

    /// Like [`GaussianPass::new`] but rounds an even side up to the next odd one.
    pub fn rounded_up(side: usize, sigma: f64) -> Result<Self> {
        Self::new(side | 1, sigma)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Normalized 1-D kernel of length `side`.
    pub fn kernel(&self) -> Vec<f64> {
        let radius = (self.side / 2) as isize;
        let denom = 2.0 * self.sigma * self.sigma;
        let mut k: Vec<f64> = (-radius..=radius)
            .map(|i| (-((i * i) as f64) / denom).exp())
            .collect();
        let total: f64 = k.iter().sum();
        k.iter_mut().for_each(|v| *v /= total);
        k
    }
}

/// Divides by the maximum; all-zero (or non-positive) maps become zeros.
pub fn normalize_unit(map: &GrayMap) -> GrayMap {
    let max = map.max();
    if max > 0.0 {
        map.map(|v| (v / max).max(0.0))
    } else {
        GrayMap::zeros(map.width, map.height)
    }
}

/// 3x3 Sobel gradient magnitude, normalized to `[0, 1]`.
pub fn sobel_gradient(map: &GrayMap) -> Result<GrayMap> {
    let (w, h) = map.dims();
    if w < 3 || h < 3 {
        return Err(Error::Degenerate(format!(
            "sobel needs at least 3x3 pixels, got {w}x{h}"
        )));
    }
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let v = |dx: isize, dy: isize| map.get_clamped(x + dx, y + dy);
            // paired differences so that flat neighbourhoods cancel exactly
            let gx = (v(1, -1) - v(-1, -1)) + 2.0 * (v(1, 0) - v(-1, 0)) + (v(1, 1) - v(-1, 1));
            let gy = (v(-1, 1) - v(-1, -1)) + 2.0 * (v(0, 1) - v(0, -1)) + (v(1, 1) - v(1, -1));
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    Ok(normalize_unit(&GrayMap::from_raw(w, h, out)))
}

/// Separable Gaussian convolution with a normalized kernel.
pub fn gaussian_blur(map: &GrayMap, pass: &GaussianPass) -> GrayMap {
    let kernel = pass.kernel();
    let radius = (kernel.len() / 2) as isize;
    let (w, h) = map.dims();
    let (wi, hi) = (w as isize, h as isize);

    let mut horizontal = vec![0.0; w * h];
    for y in 0..h {
        let row = &map.data[y * w..(y + 1) * w];
        let out_row = &mut horizontal[y * w..(y + 1) * w];
        for (x, out) in out_row.iter_mut().enumerate() {
            let x = x as isize;
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                let sx = (x + k as isize - radius).clamp(0, wi - 1) as usize;
                acc += kv * row[sx];
            }
            *out = acc;
        }
    }

    let mut out = vec![0.0; w * h];
    for y in 0..hi {
        for (k, &kv) in kernel.iter().enumerate() {
            let sy = (y + k as isize - radius).clamp(0, hi - 1) as usize;
            let src = &horizontal[sy * w..(sy + 1) * w];
            let dst = &mut out[y as usize * w..(y as usize + 1) * w];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += kv * s;
            }
        }
    }
    GrayMap::from_raw(w, h, out)
}

/// `max(0, v - threshold)` per pixel.
pub fn rectify_shift(map: &GrayMap, threshold: f64) -> GrayMap {
    assert!(threshold.is_finite(), "threshold must be finite");
    map.map(|v| (v - threshold).max(0.0))
}

/// Elementwise product.
pub fn hadamard(a: &GrayMap, b: &GrayMap) -> Result<GrayMap> {
    a.ensure_same_dims(b)?;
    let data = a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect();
    Ok(GrayMap::from_raw(a.width, a.height, data))
}

/// Histogram bin of a unit-interval value; out-of-range values clamp to the end bins.
#[inline]
pub(crate) fn unit_bin(v: f64, bins: usize) -> usize {
    let b = (v * bins as f64).floor();
    if b <= 0.0 {
        0
    } else {
        (b as usize).min(bins - 1)
    }
}

/// Shannon entropy (bits) of the `(2r+1)^2` replicate-padded window around each pixel.
///
/// Values are binned uniformly over `[0, 1]` into `bins` bins. The output is in
/// `[0, log2(bins)]` and is not renormalized.
pub fn local_entropy(map: &GrayMap, radius: usize, bins: usize) -> Result<GrayMap> {
    if radius == 0 {
        return Err(Error::InvalidParameter(
            "entropy radius must be >= 1".into(),
        ));
    }
    if bins < 2 {
        return Err(Error::InvalidParameter(
            "entropy needs at least 2 bins".into(),
        ));
    }
    let (w, h) = map.dims();
    let r = radius as isize;
    let side = 2 * radius + 1;
    let samples = side * side;

    // -p log2 p for every possible bin count; a full window has `samples` values.
    let plogp: Vec<f64> = (0..=samples)
        .map(|c| {
            if c == 0 {
                0.0
            } else {
                let p = c as f64 / samples as f64;
                -p * p.log2()
            }
        })
        .collect();

    let binned: Vec<u32> = map.data.iter().map(|&v| unit_bin(v, bins) as u32).collect();
    let clamp_x = |x: isize| x.clamp(0, w as isize - 1) as usize;
    let clamp_y = |y: isize| y.clamp(0, h as isize - 1) as usize;

    let mut out = vec![0.0; w * h];
    let mut hist = vec![0u32; bins];
    let mut rows = Vec::with_capacity(side);
    for y in 0..h as isize {
        hist.iter_mut().for_each(|c| *c = 0);
        rows.clear();
        rows.extend((-r..=r).map(|dy| clamp_y(y + dy) * w));
        for dx in -r..=r {
            let cx = clamp_x(dx);
            for &row in &rows {
                hist[binned[row + cx] as usize] += 1;
            }
        }
        let out_row = &mut out[y as usize * w..(y as usize + 1) * w];
        out_row[0] = hist.iter().map(|&c| plogp[c as usize]).sum();
        for x in 1..w as isize {
            let leaving = clamp_x(x - 1 - r);
            let entering = clamp_x(x + r);
            if leaving != entering {
                for &row in &rows {
                    hist[binned[row + leaving] as usize] -= 1;
                    hist[binned[row + entering] as usize] += 1;
                }
            }
            out_row[x as usize] = hist.iter().map(|&c| plogp[c as usize]).sum();
        }
    }
    Ok(GrayMap::from_raw(w, h, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_map(w: usize, h: usize, seed: u64) -> GrayMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GrayMap::from_fn(w, h, |_, _| rng.random::<f64>())
    }

    #[test]
    fn graymap_rejects_bad_input() {
        assert!(GrayMap::new(2, 2, vec![0.0; 3]).is_err());
        assert!(GrayMap::new(0, 2, vec![]).is_err());
        assert!(GrayMap::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn normalize_examples() {
        let z = normalize_unit(&GrayMap::zeros(4, 4));
        assert!(z.data().iter().all(|&v| v == 0.0));

        let m = GrayMap::new(3, 1, vec![0.0, 0.5, 2.0]).unwrap();
        assert_eq!(normalize_unit(&m).data(), &[0.0, 0.25, 1.0]);

        let unit = GrayMap::new(3, 1, vec![0.1, 1.0, 0.3]).unwrap();
        assert_eq!(normalize_unit(&unit), unit);
    }

    #[test]
    fn sobel_constant_is_zero() {
        let g = sobel_gradient(&GrayMap::filled(7, 5, 0.4)).unwrap();
        assert!(g.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sobel_step_edge() {
        let k = 6;
        let m = GrayMap::from_fn(12, 8, |x, _| if x >= k { 1.0 } else { 0.0 });
        let g = sobel_gradient(&m).unwrap();
        for y in 0..8 {
            for x in 0..12 {
                let v = g.get(x, y);
                if x == k - 1 || x == k {
                    assert_eq!(v, 1.0);
                } else {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn sobel_too_small() {
        assert!(matches!(
            sobel_gradient(&GrayMap::zeros(2, 5)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn sobel_matches_naive_convolution() {
        let m = random_map(8, 8, 11);
        let g = sobel_gradient(&m).unwrap();
        // direct per-pixel evaluation with explicit neighbours
        let p = |x: isize, y: isize| m.get(x.clamp(0, 7) as usize, y.clamp(0, 7) as usize);
        let mut raw = vec![0.0; 64];
        for y in 0..8isize {
            for x in 0..8isize {
                let gx = (p(x + 1, y - 1) + 2.0 * p(x + 1, y) + p(x + 1, y + 1))
                    - (p(x - 1, y - 1) + 2.0 * p(x - 1, y) + p(x - 1, y + 1));
                let gy = (p(x - 1, y + 1) + 2.0 * p(x, y + 1) + p(x + 1, y + 1))
                    - (p(x - 1, y - 1) + 2.0 * p(x, y - 1) + p(x + 1, y - 1));
                raw[(y * 8 + x) as usize] = (gx * gx + gy * gy).sqrt();
            }
        }
        let max = raw.iter().copied().fold(0.0, f64::max);
        for (a, b) in g.data().iter().zip(&raw) {
            assert!((a - b / max).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_pass_validation() {
        assert!(GaussianPass::new(4, 1.0).is_err());
        assert!(GaussianPass::new(5, 0.0).is_err());
        assert_eq!(GaussianPass::rounded_up(80, 25.0).unwrap().side(), 81);
        assert_eq!(GaussianPass::rounded_up(21, 20.0).unwrap().side(), 21);
    }

    #[test]
    fn blur_preserves_constant() {
        let m = GrayMap::filled(10, 7, 0.37);
        let b = gaussian_blur(&m, &GaussianPass::new(81, 25.0).unwrap());
        assert!(b.data().iter().all(|v| (v - 0.37).abs() < 1e-12));
    }

    #[test]
    fn blur_impulse_mass() {
        let m = GrayMap::from_fn(33, 33, |x, y| if x == 16 && y == 16 { 1.0 } else { 0.0 });
        let b = gaussian_blur(&m, &GaussianPass::new(9, 2.0).unwrap());
        assert!((b.sum() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn blur_matches_dense_2d_convolution() {
        let m = random_map(16, 16, 3);
        let pass = GaussianPass::new(5, 1.5).unwrap();
        let b = gaussian_blur(&m, &pass);
        // dense 2-D kernel built independently from the closed form
        let mut k2 = [[0.0f64; 5]; 5];
        let mut total = 0.0;
        for (j, row) in k2.iter_mut().enumerate() {
            for (i, v) in row.iter_mut().enumerate() {
                let dx = i as f64 - 2.0;
                let dy = j as f64 - 2.0;
                *v = (-(dx * dx + dy * dy) / (2.0 * 1.5 * 1.5)).exp();
                total += *v;
            }
        }
        for y in 0..16isize {
            for x in 0..16isize {
                let mut acc = 0.0;
                for (j, row) in k2.iter().enumerate() {
                    for (i, kv) in row.iter().enumerate() {
                        acc += kv / total * m.get_clamped(x + i as isize - 2, y + j as isize - 2);
                    }
                }
                assert!((acc - b.get(x as usize, y as usize)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn blur_is_linear() {
        let a = random_map(8, 8, 5);
        let b = random_map(8, 8, 6);
        let pass = GaussianPass::new(5, 1.2).unwrap();
        let combo = GrayMap::from_fn(8, 8, |x, y| 0.3 * a.get(x, y) - 1.7 * b.get(x, y));
        let lhs = gaussian_blur(&combo, &pass);
        let (ba, bb) = (gaussian_blur(&a, &pass), gaussian_blur(&b, &pass));
        for i in 0..64 {
            let rhs = 0.3 * ba.data()[i] - 1.7 * bb.data()[i];
            assert!((lhs.data()[i] - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn rectify_examples() {
        let low = rectify_shift(&GrayMap::filled(3, 3, 0.2), 0.5);
        assert!(low.data().iter().all(|&v| v == 0.0));
        let high = rectify_shift(&GrayMap::filled(3, 3, 0.7), 0.5);
        assert!(high.data().iter().all(|&v| (v - 0.2).abs() < 1e-15));
        let m = random_map(4, 4, 9);
        assert_eq!(rectify_shift(&m, 0.0), m);
    }

    #[test]
    fn hadamard_examples() {
        let a = random_map(8, 8, 1);
        let b = random_map(8, 8, 2);
        assert_eq!(hadamard(&a, &GrayMap::filled(8, 8, 1.0)).unwrap(), a);
        assert!(hadamard(&a, &GrayMap::zeros(8, 8))
            .unwrap()
            .data()
            .iter()
            .all(|&v| v == 0.0));
        assert_eq!(hadamard(&a, &b).unwrap(), hadamard(&b, &a).unwrap());
        assert!(matches!(
            hadamard(&a, &GrayMap::zeros(8, 7)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn entropy_constant_is_zero() {
        let e = local_entropy(&GrayMap::filled(9, 9, 0.3), 2, 8).unwrap();
        assert!(e.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn entropy_uniform_window_is_log_bins() {
        // 3x3 window, 9 bins, each value in its own bin
        let m = GrayMap::from_fn(3, 3, |x, y| (y * 3 + x) as f64 / 9.0 + 0.05);
        let e = local_entropy(&m, 1, 9).unwrap();
        assert!((e.get(1, 1) - 9f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn entropy_matches_windowed_histogram() {
        let m = random_map(12, 12, 21);
        let e = local_entropy(&m, 2, 8).unwrap();
        for y in 0..12isize {
            for x in 0..12isize {
                let mut hist = [0usize; 8];
                for dy in -2..=2 {
                    for dx in -2..=2 {
                        let v = m.get_clamped(x + dx, y + dy);
                        hist[((v * 8.0) as usize).min(7)] += 1;
                    }
                }
                let expected: f64 = hist
                    .iter()
                    .filter(|&&c| c > 0)
                    .map(|&c| {
                        let p = c as f64 / 25.0;
                        -p * p.log2()
                    })
                    .sum();
                assert!((e.get(x as usize, y as usize) - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn entropy_bounds() {
        let m = random_map(20, 15, 4);
        let e = local_entropy(&m, 3, 16).unwrap();
        assert!(e.data().iter().all(|&v| (0.0..=4.0 + 1e-12).contains(&v)));
    }

    #[test]
    fn luminance_weights() {
        let rgb = RgbMap::filled(2, 2, [255, 0, 0]);
        assert!((rgb.luminance().get(0, 0) - 0.299).abs() < 1e-12);
        let white = RgbMap::filled(2, 2, [255, 255, 255]);
        assert!((white.luminance().get(1, 1) - 1.0).abs() < 1e-12);
    }
}
