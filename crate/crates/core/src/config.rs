use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::ClassifyConfig;
use crate::error::{Error, Result};
use crate::imaging::StructuringElement;
use crate::watershed::{SeedingMode, StochasticConfig};

/// Environment variable naming a config file when `--config` is absent.
pub const CONFIG_ENV: &str = "PITCHMARKS_CONFIG";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Seeding {
    /// One seed per cell of a randomly shifted lattice.
    Windowed,
    /// The same number of seeds drawn uniformly over the image.
    Uniform,
}

/// Every tunable of a detection or evaluation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Diameter of the Top-Hat disk (px); must exceed the widest line.
    pub se_diameter: usize,
    /// Number of watershed experiments M.
    pub experiments: usize,
    pub seeding: Seeding,
    /// Target lattice cell size (px); also fixes the uniform seed count.
    pub cell_size: usize,
    /// Probability threshold T for line pixels.
    pub threshold: f64,
    /// Relief values up to this level are flattened to zero before flooding,
    /// so that sensor noise forms plateaus instead of seed-independent ridges.
    pub relief_floor: f64,
    /// Pixel matching tolerance of the evaluation (px).
    pub tol_px: f64,
    /// Master random seed.
    pub seed: u64,
    /// Worker threads over dataset items (0 = all cores). Not serialized:
    /// it never changes results.
    #[serde(skip_serializing)]
    pub jobs: usize,
    pub classify: ClassifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            se_diameter: 11,
            experiments: 20,
            seeding: Seeding::Windowed,
            cell_size: 24,
            threshold: 0.8,
            relief_floor: 0.1,
            tol_px: 2.0,
            seed: 0,
            jobs: 1,
            classify: ClassifyConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.se_diameter == 0 || self.se_diameter % 2 == 0 {
            return Err(Error::Config(format!("se_diameter must be odd and >= 1, got {}", self.se_diameter)));
        }
        if self.experiments == 0 {
            return Err(Error::Config("experiments must be >= 1".into()));
        }
        if self.cell_size < 2 {
            return Err(Error::Config("cell_size must be >= 2".into()));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::Config(format!("threshold must be in (0, 1], got {}", self.threshold)));
        }
        if !(0.0..1.0).contains(&self.relief_floor) {
            return Err(Error::Config(format!("relief_floor must be in [0, 1), got {}", self.relief_floor)));
        }
        if !(self.tol_px >= 0.0 && self.tol_px.is_finite()) {
            return Err(Error::Config(format!("tol_px must be >= 0, got {}", self.tol_px)));
        }
        self.classify.validate()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Format { path: path.to_path_buf(), message: m },
            other => other,
        })
    }

    /// Defaults, or the file given explicitly, or the one named by
    /// `PITCHMARKS_CONFIG`.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        let path = explicit.map(Path::to_path_buf).or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn structuring_element(&self) -> Result<StructuringElement> {
        StructuringElement::disk(self.se_diameter)
    }

    /// Seeding of an `h x w` image; uniform mode uses the windowed seed count.
    pub fn seeding_mode(&self, h: usize, w: usize) -> SeedingMode {
        let windowed = SeedingMode::windowed_for(h, w, self.cell_size);
        match self.seeding {
            Seeding::Windowed => windowed,
            Seeding::Uniform => SeedingMode::Uniform { count: windowed.seed_count() },
        }
    }

    pub fn stochastic(&self, h: usize, w: usize) -> StochasticConfig {
        let mut s = StochasticConfig::new(self.experiments, self.seeding_mode(h, w), self.seed);
        s.threshold = self.threshold;
        s
    }
}
