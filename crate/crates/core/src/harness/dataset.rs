use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub stem: String,
    pub rgb: PathBuf,
    pub depth: PathBuf,
    pub gt: Option<PathBuf>,
    pub contour: Option<PathBuf>,
    pub sal_rgb: Option<PathBuf>,
    pub sal_d: Option<PathBuf>,
    pub sal_rgbd: Option<PathBuf>,
    pub sal_rgbr: Option<PathBuf>,
}

/// Records sorted by stem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetIndex {
    pub root: PathBuf,
    pub records: Vec<Record>,
}

impl DatasetIndex {
    /// Dataset id: the final component of the root path.
    pub fn name(&self) -> String {
        self.root
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.root.display().to_string())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Image files of `dir` keyed by file stem. When two files share a stem the
/// PNG wins, then the lexicographically first name.
pub fn list_images(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && is_image(&path) {
            paths.push(path);
        }
    }
    paths.sort();
    let mut out: BTreeMap<String, PathBuf> = BTreeMap::new();
    for path in paths {
        let Some(stem) = path.file_stem().map(|s| s.to_string_lossy().into_owned()) else {
            continue;
        };
        match out.get(&stem) {
            Some(kept) => {
                let png = |p: &Path| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"));
                if png(&path) && !png(kept) {
                    log::warn!(
                        "{}: duplicate stem, using {}",
                        kept.display(),
                        path.display()
                    );
                    out.insert(stem, path);
                } else {
                    log::warn!("{}: duplicate stem, ignored", path.display());
                }
            }
            None => {
                out.insert(stem, path);
            }
        }
    }
    Ok(out)
}

fn optional_dir(root: &Path, name: &str) -> Result<BTreeMap<String, PathBuf>> {
    let dir = root.join(name);
    if dir.is_dir() {
        list_images(&dir)
    } else {
        Ok(BTreeMap::new())
    }
}

/// Indexes `root/RGB`, `root/depth` and the optional `GT`, `contour`,
/// `sal_rgb`, `sal_d`, `sal_rgbd`, `sal_rgbr` directories, joined by file
/// stem. Files that match no RGB + depth pair are logged and skipped.
pub fn load_dataset(root: impl AsRef<Path>) -> Result<DatasetIndex> {
    let root = root.as_ref();
    for required in ["RGB", "depth"] {
        if !root.join(required).is_dir() {
            return Err(Error::Dataset(format!(
                "{}: missing {required}/ directory",
                root.display()
            )));
        }
    }
    let rgb = list_images(&root.join("RGB"))?;
    let mut depth = list_images(&root.join("depth"))?;
    if !root.join("GT").is_dir() {
        log::warn!(
            "{}: no GT/ directory; evaluation will be skipped",
            root.display()
        );
    }
    let mut optional: Vec<(&str, BTreeMap<String, PathBuf>)> = Vec::new();
    for name in ["GT", "contour", "sal_rgb", "sal_d", "sal_rgbd", "sal_rgbr"] {
        optional.push((name, optional_dir(root, name)?));
    }

    let mut records = Vec::new();
    for (stem, rgb_path) in rgb {
        let Some(depth_path) = depth.remove(&stem) else {
            log::warn!("{}: no matching depth map, skipped", rgb_path.display());
            continue;
        };
        let mut take = |name: &str| {
            optional
                .iter_mut()
                .find(|(n, _)| *n == name)
                .and_then(|(_, files)| files.remove(&stem))
        };
        records.push(Record {
            gt: take("GT"),
            contour: take("contour"),
            sal_rgb: take("sal_rgb"),
            sal_d: take("sal_d"),
            sal_rgbd: take("sal_rgbd"),
            sal_rgbr: take("sal_rgbr"),
            stem,
            rgb: rgb_path,
            depth: depth_path,
        });
    }
    for path in depth.values() {
        log::warn!("{}: no matching RGB image, skipped", path.display());
    }
    for (_, files) in &optional {
        for path in files.values() {
            log::warn!("{}: no matching RGB-D pair, skipped", path.display());
        }
    }
    if records.is_empty() {
        return Err(Error::Dataset(format!(
            "{}: no RGB/depth pairs matched by stem",
            root.display()
        )));
    }
    for r in &records {
        if r.gt.is_none() {
            log::info!("{}: no ground truth", r.stem);
        }
    }
    Ok(DatasetIndex {
        root: root.to_path_buf(),
        records,
    })
}
