#![allow(dead_code)]

use std::path::Path;

use depthq::io::{save_gray_png, save_rgb_png};
use depthq::{GrayMap, RgbMap};

pub struct Scene {
    pub rgb: RgbMap,
    pub depth: GrayMap,
    pub gt: GrayMap,
    pub sal_rgb: GrayMap,
    pub sal_d: GrayMap,
}

/// Disk-shaped object whose size and position depend on `i`.
pub fn scene(i: usize) -> Scene {
    let (w, h) = (64, 48);
    let (cx, cy, r) = (20.0 + 6.0 * i as f64, 22.0, 9.0 + i as f64);
    let inside = move |x: usize, y: usize| (x as f64 - cx).hypot(y as f64 - cy) < r;
    Scene {
        rgb: RgbMap::from_fn(w, h, |x, y| {
            let noise = ((x * 7 + y * 13 + i * 5) % 11) as u8;
            if inside(x, y) {
                [200, 60 + noise, 40]
            } else {
                [30 + noise, 70, 180]
            }
        }),
        depth: GrayMap::from_fn(w, h, |x, y| if inside(x, y) { 0.8 } else { 0.2 }),
        gt: GrayMap::from_fn(w, h, |x, y| if inside(x, y) { 1.0 } else { 0.0 }),
        sal_rgb: GrayMap::from_fn(w, h, |x, y| if inside(x, y) { 0.9 } else { 0.2 }),
        sal_d: GrayMap::from_fn(w, h, |x, y| {
            if inside(x, y) {
                0.6
            } else {
                (x % 5) as f64 / 10.0
            }
        }),
    }
}

/// Writes `n` scenes as a dataset with RGB, depth, GT and the four saliency
/// directories.
pub fn write_dataset(root: &Path, n: usize) {
    for d in [
        "RGB", "depth", "GT", "sal_rgb", "sal_d", "sal_rgbd", "sal_rgbr",
    ] {
        std::fs::create_dir_all(root.join(d)).unwrap();
    }
    for i in 0..n {
        let s = scene(i);
        let stem = format!("s{i}");
        save_rgb_png(&s.rgb, root.join(format!("RGB/{stem}.png"))).unwrap();
        save_gray_png(&s.depth, root.join(format!("depth/{stem}.png"))).unwrap();
        save_gray_png(&s.gt, root.join(format!("GT/{stem}.png"))).unwrap();
        save_gray_png(&s.sal_rgb, root.join(format!("sal_rgb/{stem}.png"))).unwrap();
        save_gray_png(&s.sal_d, root.join(format!("sal_d/{stem}.png"))).unwrap();
        save_gray_png(&s.sal_rgb, root.join(format!("sal_rgbd/{stem}.png"))).unwrap();
        save_gray_png(&s.sal_d, root.join(format!("sal_rgbr/{stem}.png"))).unwrap();
    }
}
