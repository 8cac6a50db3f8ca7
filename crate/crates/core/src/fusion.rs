//! Quality-guided fusion of RGB and depth saliency maps.
//!
//! The per-pixel trust in the depth branch is the mean of whichever quality
//! maps are present; with none, both branches are weighted equally.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{check_dims, GrayMap};

/// Which quality maps take part in fusion (the ablation configuration).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Components {
    pub ec: bool,
    pub ru: bool,
    pub mv: bool,
}

impl Components {
    pub const NONE: Components = Components {
        ec: false,
        ru: false,
        mv: false,
    };
    pub const ALL: Components = Components {
        ec: true,
        ru: true,
        mv: true,
    };

    pub fn is_empty(&self) -> bool {
        !(self.ec || self.ru || self.mv)
    }
}

impl FromStr for Components {
    type Err = Error;

    /// Comma-separated subset of `ec,ru,mv`; empty or `none` selects nothing.
    fn from_str(s: &str) -> Result<Self> {
        let mut c = Components::NONE;
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case("none") {
            return Ok(c);
        }
        for part in s.split(',') {
            match part.trim().to_ascii_lowercase().as_str() {
                "ec" => c.ec = true,
                "ru" => c.ru = true,
                "mv" => c.mv = true,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown quality component {other:?} (expected ec, ru, mv)"
                    )))
                }
            }
        }
        Ok(c)
    }
}

impl fmt::Display for Components {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [(self.ec, "ec"), (self.ru, "ru"), (self.mv, "mv")]
            .iter()
            .filter(|(on, _)| *on)
            .map(|(_, n)| *n)
            .collect();
        if names.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&names.join(","))
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfidenceFlags {
    pub ec: bool,
    pub ru: bool,
    pub mv: bool,
}

/// The quality maps available for one image.
#[derive(Debug, Clone, Default)]
pub struct QualityBundle {
    pub ec: Option<GrayMap>,
    pub ru: Option<GrayMap>,
    pub mv: Option<GrayMap>,
    pub low_confidence: ConfidenceFlags,
}

impl QualityBundle {
    pub fn maps(&self) -> impl Iterator<Item = &GrayMap> {
        [&self.ec, &self.ru, &self.mv].into_iter().flatten()
    }

    /// Keeps only the maps selected by `components`.
    pub fn restricted(mut self, components: Components) -> Self {
        if !components.ec {
            self.ec = None;
        }
        if !components.ru {
            self.ru = None;
        }
        if !components.mv {
            self.mv = None;
        }
        self
    }

    /// Per-pixel depth trust: mean of the present maps, or 0.5 with none.
    pub fn weight(&self, width: usize, height: usize) -> Result<GrayMap> {
        let maps: Vec<&GrayMap> = self.maps().collect();
        if maps.is_empty() {
            return Ok(GrayMap::filled(width, height, 0.5));
        }
        for m in &maps {
            check_dims((width, height), m.dims())?;
        }
        let n = maps.len() as f64;
        let data = (0..width * height)
            .map(|i| maps.iter().map(|m| m.data()[i]).sum::<f64>() / n)
            .collect();
        GrayMap::new(width, height, data)
    }
}

/// `fused = w * d_sal + (1 - w) * rgb_sal`, clamped to `[0, 1]`.
pub fn quality_weighted_fuse(
    rgb_sal: &GrayMap,
    d_sal: &GrayMap,
    q: &QualityBundle,
) -> Result<GrayMap> {
    rgb_sal.ensure_same_dims(d_sal)?;
    let (w, h) = rgb_sal.dims();
    let weight = q.weight(w, h)?;
    let data = weight
        .data()
        .iter()
        .zip(rgb_sal.data().iter().zip(d_sal.data()))
        .map(|(&wt, (&r, &d))| (wt * d + (1.0 - wt) * r).clamp(0.0, 1.0))
        .collect();
    GrayMap::new(w, h, data)
}
