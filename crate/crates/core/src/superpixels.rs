//! Deterministic SLIC superpixels with per-region centroid and mean color.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::raster::{check_dims, GrayMap, RgbMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicOptions {
    pub compactness: f64,
    pub iterations: usize,
    /// Breaks ties when several seed positions share the lowest gradient.
    pub seed: u64,
}

impl Default for SlicOptions {
    fn default() -> Self {
        SlicOptions {
            compactness: 10.0,
            iterations: 10,
            seed: 0,
        }
    }
}

/// Statistics of one superpixel. Centroids are in pixel coordinates
/// (`x` = column, `y` = row); colors are in 0..255 units.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub id: usize,
    pub centroid: (f64, f64),
    pub mean_color: [f64; 3],
    pub pixel_count: usize,
}

impl Region {
    pub fn centroid_distance(&self, other: &Region) -> f64 {
        (self.centroid.0 - other.centroid.0).hypot(self.centroid.1 - other.centroid.1)
    }

    pub fn color_distance(&self, other: &Region) -> f64 {
        self.mean_color
            .iter()
            .zip(&other.mean_color)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    regions: Vec<Region>,
}

impl Segmentation {
    /// Builds a segmentation from a label raster, computing region statistics.
    ///
    /// Labels must be contiguous from 0. Connectivity is not checked here.
    pub fn from_labels(image: &RgbMap, labels: Vec<u32>) -> Result<Self> {
        let (w, h) = image.dims();
        if labels.len() != w * h {
            return Err(Error::InvalidParameter(
                "label raster length mismatch".into(),
            ));
        }
        let count = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        let mut sums = vec![[0.0f64; 5]; count];
        let mut sizes = vec![0usize; count];
        for (i, (&l, px)) in labels.iter().zip(image.pixels()).enumerate() {
            let s = &mut sums[l as usize];
            s[0] += (i % w) as f64;
            s[1] += (i / w) as f64;
            s[2] += f64::from(px[0]);
            s[3] += f64::from(px[1]);
            s[4] += f64::from(px[2]);
            sizes[l as usize] += 1;
        }
        if let Some(missing) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidParameter(format!(
                "label ids not contiguous: {missing} unused"
            )));
        }
        let regions = sums
            .iter()
            .zip(&sizes)
            .enumerate()
            .map(|(id, (s, &n))| {
                let n_f = n as f64;
                Region {
                    id,
                    centroid: (s[0] / n_f, s[1] / n_f),
                    mean_color: [s[2] / n_f, s[3] / n_f, s[4] / n_f],
                    pixel_count: n,
                }
            })
            .collect();
        Ok(Segmentation {
            width: w,
            height: h,
            labels,
            regions,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn label_at(&self, x: usize, y: usize) -> usize {
        self.labels[y * self.width + x] as usize
    }

    /// Mean of `map` over each region.
    pub fn region_means(&self, map: &GrayMap) -> Result<Vec<f64>> {
        check_dims((self.width, self.height), map.dims())?;
        let mut sums = vec![0.0; self.regions.len()];
        for (&l, &v) in self.labels.iter().zip(map.data()) {
            sums[l as usize] += v;
        }
        Ok(sums
            .iter()
            .zip(&self.regions)
            .map(|(s, r)| s / r.pixel_count as f64)
            .collect())
    }

    /// Piecewise-constant map with `values[i]` on every pixel of region `i`.
    pub fn paint(&self, values: &[f64]) -> GrayMap {
        assert_eq!(values.len(), self.regions.len(), "one value per region");
        GrayMap::from_raw(
            self.width,
            self.height,
            self.labels.iter().map(|&l| values[l as usize]).collect(),
        )
    }

    /// Number of 4-neighbour pixel pairs with different labels.
    pub fn boundary_length(&self) -> usize {
        let w = self.width;
        let mut count = 0;
        for y in 0..self.height {
            for x in 0..w {
                let l = self.labels[y * w + x];
                if x + 1 < w && self.labels[y * w + x + 1] != l {
                    count += 1;
                }
                if y + 1 < self.height && self.labels[(y + 1) * w + x] != l {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn save_label_png(&self, path: impl AsRef<Path>) -> Result<()> {
        if self.regions.len() > usize::from(u16::MAX) + 1 {
            return Err(Error::InvalidParameter(
                "too many regions for a 16-bit label map".into(),
            ));
        }
        let values: Vec<u16> = self.labels.iter().map(|&l| l as u16).collect();
        crate::io::save_u16_png(self.width, self.height, &values, path)
    }

    /// Writes `id,cx,cy,r,g,b,count` rows.
    pub fn save_region_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut wtr = csv::Writer::from_path(path)?;
        wtr.write_record(["id", "cx", "cy", "r", "g", "b", "count"])?;
        for r in &self.regions {
            wtr.write_record([
                r.id.to_string(),
                format!("{:.6}", r.centroid.0),
                format!("{:.6}", r.centroid.1),
                format!("{:.6}", r.mean_color[0]),
                format!("{:.6}", r.mean_color[1]),
                format!("{:.6}", r.mean_color[2]),
                r.pixel_count.to_string(),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io(path, e))
    }
}

fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// sRGB (0..255) to CIELAB under the D65 white point.
pub fn srgb_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let [r, g, b] = rgb.map(|c| srgb_to_linear(f64::from(c) / 255.0));
    let x = 0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b;
    let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
    let z = 0.019_333_9 * r + 0.119_192_0 * g + 0.950_304_1 * b;
    let (fx, fy, fz) = (lab_f(x / 0.950_47), lab_f(y), lab_f(z / 1.088_83));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

fn lab_dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

#[derive(Clone, Copy)]
struct Center {
    lab: [f64; 3],
    x: f64,
    y: f64,
}

/// SLIC clustering in (CIELAB, xy) space.
///
/// The assignment distance is `d_lab + (compactness / S) * d_xy` with
/// `S = sqrt(N / k)`. Disconnected fragments are merged into their largest
/// adjacent region afterwards, so the returned region count may differ from
/// `k`. Region ids are assigned in raster order of each region's first pixel.
pub fn slic(image: &RgbMap, k: usize, opts: &SlicOptions) -> Result<Segmentation> {
    let (w, h) = image.dims();
    let n = w * h;
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "superpixel count {k} must be in 1..={n}"
        )));
    }
    if opts.iterations == 0 {
        return Err(Error::InvalidParameter(
            "slic needs at least one iteration".into(),
        ));
    }
    if !(opts.compactness >= 0.0 && opts.compactness.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "compactness must be non-negative, got {}",
            opts.compactness
        )));
    }

    let lab: Vec<[f64; 3]> = image.pixels().iter().map(|&p| srgb_to_lab(p)).collect();
    let step = (n as f64 / k as f64).sqrt();

    let mut centers = seed_centers(&lab, w, h, k, opts.seed);
    let ny = grid_rows(w, h, k);
    let nx = grid_cols(w, h, k, ny);
    let window = (w as f64 / nx as f64).max(h as f64 / ny as f64).ceil();
    let spatial = opts.compactness / step;

    let mut labels = vec![u32::MAX; n];
    let mut dist = vec![f64::INFINITY; n];
    for iter in 0..opts.iterations {
        labels.fill(u32::MAX);
        dist.fill(f64::INFINITY);
        for (ci, c) in centers.iter().enumerate() {
            let x0 = (c.x - window).floor().max(0.0) as usize;
            let x1 = ((c.x + window).ceil() as usize).min(w - 1);
            let y0 = (c.y - window).floor().max(0.0) as usize;
            let y1 = ((c.y + window).ceil() as usize).min(h - 1);
            for y in y0..=y1 {
                let dy = y as f64 - c.y;
                for x in x0..=x1 {
                    let i = y * w + x;
                    let dx = x as f64 - c.x;
                    let d = lab_dist2(&lab[i], &c.lab).sqrt() + spatial * dx.hypot(dy);
                    if d < dist[i] {
                        dist[i] = d;
                        labels[i] = ci as u32;
                    }
                }
            }
        }
        for i in 0..n {
            if labels[i] != u32::MAX {
                continue;
            }
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            for (ci, c) in centers.iter().enumerate() {
                let d = lab_dist2(&lab[i], &c.lab).sqrt() + spatial * (x - c.x).hypot(y - c.y);
                if d < dist[i] {
                    dist[i] = d;
                    labels[i] = ci as u32;
                }
            }
        }
        if iter + 1 == opts.iterations {
            break;
        }
        let mut sums = vec![[0.0f64; 6]; centers.len()];
        for (i, &l) in labels.iter().enumerate() {
            let s = &mut sums[l as usize];
            s[0] += lab[i][0];
            s[1] += lab[i][1];
            s[2] += lab[i][2];
            s[3] += (i % w) as f64;
            s[4] += (i / w) as f64;
            s[5] += 1.0;
        }
        for (c, s) in centers.iter_mut().zip(&sums) {
            if s[5] > 0.0 {
                *c = Center {
                    lab: [s[0] / s[5], s[1] / s[5], s[2] / s[5]],
                    x: s[3] / s[5],
                    y: s[4] / s[5],
                };
            }
        }
    }

    let labels = enforce_connectivity(&labels, w, h);
    Segmentation::from_labels(image, labels)
}

fn grid_rows(w: usize, h: usize, k: usize) -> usize {
    ((k as f64 * h as f64 / w as f64).sqrt().round() as usize).clamp(1, h)
}

fn grid_cols(w: usize, _h: usize, k: usize, rows: usize) -> usize {
    ((k as f64 / rows as f64).round() as usize).clamp(1, w)
}

fn lab_gradient(lab: &[[f64; 3]], w: usize, h: usize, x: usize, y: usize) -> f64 {
    let at = |x: usize, y: usize| &lab[y * w + x];
    let (xl, xr) = (x.saturating_sub(1), (x + 1).min(w - 1));
    let (yu, yd) = (y.saturating_sub(1), (y + 1).min(h - 1));
    lab_dist2(at(xr, y), at(xl, y)) + lab_dist2(at(x, yd), at(x, yu))
}

/// Grid-initialized centers moved to the lowest-gradient pixel of their 3x3 neighbourhood.
fn seed_centers(lab: &[[f64; 3]], w: usize, h: usize, k: usize, seed: u64) -> Vec<Center> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ny = grid_rows(w, h, k);
    let nx = grid_cols(w, h, k, ny);
    let mut centers = Vec::with_capacity(nx * ny);
    let mut ties = Vec::with_capacity(9);
    for j in 0..ny {
        for i in 0..nx {
            let gx = (((i as f64 + 0.5) * w as f64 / nx as f64) as usize).min(w - 1);
            let gy = (((j as f64 + 0.5) * h as f64 / ny as f64) as usize).min(h - 1);
            let mut best = f64::INFINITY;
            ties.clear();
            for y in gy.saturating_sub(1)..=(gy + 1).min(h - 1) {
                for x in gx.saturating_sub(1)..=(gx + 1).min(w - 1) {
                    let g = lab_gradient(lab, w, h, x, y);
                    if g < best {
                        best = g;
                        ties.clear();
                    }
                    if g == best {
                        ties.push((x, y));
                    }
                }
            }
            let (x, y) = if ties.len() > 1 {
                ties[rng.random_range(0..ties.len())]
            } else {
                ties[0]
            };
            centers.push(Center {
                lab: lab[y * w + x],
                x: x as f64,
                y: y as f64,
            });
        }
    }
    centers
}

struct Components {
    id: Vec<u32>,
    label: Vec<u32>,
    size: Vec<usize>,
}

fn components(labels: &[u32], w: usize, h: usize) -> Components {
    let n = w * h;
    let mut id = vec![u32::MAX; n];
    let mut label = Vec::new();
    let mut size = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if id[start] != u32::MAX {
            continue;
        }
        let c = label.len() as u32;
        let l = labels[start];
        let mut count = 0;
        id[start] = c;
        stack.push(start);
        while let Some(i) = stack.pop() {
            count += 1;
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if id[j] == u32::MAX && labels[j] == l {
                    id[j] = c;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        label.push(l);
        size.push(count);
    }
    Components { id, label, size }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Keeps the largest fragment of every label and merges each remaining
/// fragment into its largest adjacent region. Returns contiguous labels in
/// raster order.
fn enforce_connectivity(labels: &[u32], w: usize, h: usize) -> Vec<u32> {
    let comps = components(labels, w, h);
    let nc = comps.size.len();

    let max_label = comps.label.iter().copied().max().unwrap_or(0) as usize;
    let mut main_of = vec![usize::MAX; max_label + 1];
    for c in 0..nc {
        let l = comps.label[c] as usize;
        let m = main_of[l];
        if m == usize::MAX || comps.size[c] > comps.size[m] {
            main_of[l] = c;
        }
    }

    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); nc];
    for y in 0..h {
        for x in 0..w {
            let a = comps.id[y * w + x] as usize;
            if x + 1 < w {
                let b = comps.id[y * w + x + 1] as usize;
                if a != b {
                    adjacency[a].push(b);
                    adjacency[b].push(a);
                }
            }
            if y + 1 < h {
                let b = comps.id[(y + 1) * w + x] as usize;
                if a != b {
                    adjacency[a].push(b);
                    adjacency[b].push(a);
                }
            }
        }
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
        adj.dedup();
    }

    let mut parent: Vec<usize> = (0..nc).collect();
    let mut set_size = comps.size.clone();
    let mut has_main: Vec<bool> = (0..nc)
        .map(|c| main_of[comps.label[c] as usize] == c)
        .collect();
    let mut members: Vec<Vec<usize>> = (0..nc).map(|c| vec![c]).collect();

    let mut orphans: Vec<usize> = (0..nc).filter(|&c| !has_main[c]).collect();
    orphans.sort_by_key(|&c| (comps.size[c], c));
    for o in orphans {
        let root = find(&mut parent, o);
        if has_main[root] {
            continue;
        }
        let mut target: Option<usize> = None;
        for &m in &members[root] {
            for &nb in &adjacency[m] {
                let r = find(&mut parent, nb);
                if r == root {
                    continue;
                }
                // largest neighbour wins, lowest root on ties
                let better = match target {
                    None => true,
                    Some(t) => set_size[r] > set_size[t] || (set_size[r] == set_size[t] && r < t),
                };
                if better {
                    target = Some(r);
                }
            }
        }
        let Some(t) = target else { continue };
        parent[root] = t;
        set_size[t] += set_size[root];
        has_main[t] |= has_main[root];
        let moved = std::mem::take(&mut members[root]);
        members[t].extend(moved);
    }

    let mut relabel = vec![u32::MAX; nc];
    let mut next = 0u32;
    let mut out = Vec::with_capacity(w * h);
    for &c in &comps.id {
        let r = find(&mut parent, c as usize);
        if relabel[r] == u32::MAX {
            relabel[r] = next;
            next += 1;
        }
        out.push(relabel[r]);
    }
    out
}
