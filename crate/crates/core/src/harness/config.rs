use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::edge_consistency::EcConfig;
use crate::error::{Error, Result};
use crate::fusion::Components;
use crate::raster::GaussianPass;
use crate::regional_uncertainty::RuConfig;
use crate::superpixels::SlicOptions;

/// Everything a batch run needs besides the dataset itself.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub ec: EcConfig,
    pub ru: RuConfig,
    pub slic: SlicOptions,
    pub noise_seed: u64,
    pub components: Components,
    pub out_dir: PathBuf,
    pub jobs: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            ec: EcConfig::default(),
            ru: RuConfig::default(),
            slic: SlicOptions::default(),
            noise_seed: 0,
            components: Components::ALL,
            out_dir: PathBuf::from("out"),
            jobs: 1,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EcSection {
    tc_mult: Option<f64>,
    ta_mult: Option<f64>,
    omega1: Option<f64>,
    k_superpixels: Option<usize>,
    pass1_side: Option<usize>,
    pass1_sigma: Option<f64>,
    pass2_side: Option<usize>,
    pass2_sigma: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuSection {
    omega1: Option<f64>,
    omega2: Option<f64>,
    k_superpixels: Option<usize>,
    entropy_radius: Option<usize>,
    entropy_bins: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SlicSection {
    compactness: Option<f64>,
    iterations: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseSection {
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    components: Option<String>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    ec: Option<EcSection>,
    ru: Option<RuSection>,
    slic: Option<SlicSection>,
    noise: Option<NoiseSection>,
    run: Option<RunSection>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl PipelineConfig {
    /// Parses dotted `key = value` text (`ec.omega1 = 0.01`). Keys that are
    /// absent keep their defaults; unknown keys are rejected.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = PipelineConfig::default();
        if let Some(ec) = file.ec {
            set(&mut cfg.ec.tc_mult, ec.tc_mult);
            set(&mut cfg.ec.ta_mult, ec.ta_mult);
            set(&mut cfg.ec.omega1, ec.omega1);
            set(&mut cfg.ec.k_superpixels, ec.k_superpixels);
            let [p1, p2] = cfg.ec.passes;
            cfg.ec.passes = [
                GaussianPass::rounded_up(
                    ec.pass1_side.unwrap_or(p1.side()),
                    ec.pass1_sigma.unwrap_or(p1.sigma()),
                )?,
                GaussianPass::rounded_up(
                    ec.pass2_side.unwrap_or(p2.side()),
                    ec.pass2_sigma.unwrap_or(p2.sigma()),
                )?,
            ];
        }
        if let Some(ru) = file.ru {
            set(&mut cfg.ru.omega1, ru.omega1);
            set(&mut cfg.ru.omega2, ru.omega2);
            set(&mut cfg.ru.k_superpixels, ru.k_superpixels);
            set(&mut cfg.ru.entropy_radius, ru.entropy_radius);
            set(&mut cfg.ru.entropy_bins, ru.entropy_bins);
        }
        if let Some(slic) = file.slic {
            set(&mut cfg.slic.compactness, slic.compactness);
            set(&mut cfg.slic.iterations, slic.iterations);
            set(&mut cfg.slic.seed, slic.seed);
        }
        if let Some(noise) = file.noise {
            set(&mut cfg.noise_seed, noise.seed);
        }
        if let Some(run) = file.run {
            if let Some(c) = run.components {
                cfg.components = c.parse()?;
            }
            set(&mut cfg.out_dir, run.out);
            set(&mut cfg.jobs, run.jobs);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.ec.validate()?;
        self.ru.validate()?;
        if !(self.slic.compactness > 0.0 && self.slic.compactness.is_finite())
            || self.slic.iterations == 0
        {
            return Err(Error::InvalidParameter(
                "slic compactness must be positive and iterations >= 1".into(),
            ));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidParameter("jobs must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(
            PipelineConfig::from_toml_str("").unwrap(),
            PipelineConfig::default()
        );
    }

    #[test]
    fn dotted_keys_override() {
        let cfg = PipelineConfig::from_toml_str(
            "ec.omega1 = 0.02\nec.pass1_side = 40\nru.omega2 = 5.0\nslic.seed = 9\nnoise.seed = 3\nrun.components = \"ec,mv\"\nrun.jobs = 4\n",
        )
        .unwrap();
        assert_eq!(cfg.ec.omega1, 0.02);
        assert_eq!(cfg.ec.passes[0].side(), 41);
        assert_eq!(cfg.ec.passes[0].sigma(), 25.0);
        assert_eq!(cfg.ru.omega2, 5.0);
        assert_eq!(cfg.slic.seed, 9);
        assert_eq!(cfg.noise_seed, 3);
        assert_eq!(
            cfg.components,
            Components {
                ec: true,
                ru: false,
                mv: true
            }
        );
        assert_eq!(cfg.jobs, 4);
    }

    #[test]
    fn unknown_and_invalid_keys_rejected() {
        assert!(PipelineConfig::from_toml_str("ec.omega3 = 1.0").is_err());
        assert!(PipelineConfig::from_toml_str("ec.ta_mult = 10.0").is_err());
        assert!(PipelineConfig::from_toml_str("run.jobs = 0").is_err());
    }
}
