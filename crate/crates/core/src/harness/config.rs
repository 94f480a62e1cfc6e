//! Grid configuration: the experiment factors, TOML parsing, and the
//! permitted-set validation behind the `--extended` escape hatch.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, HarnessError};
use crate::colorspace::ColorSpace;
use crate::distance::DistanceKind;

pub const DEFAULT_COLOR_SPACES: [ColorSpace; 3] =
    [ColorSpace::Rgb, ColorSpace::Hsv, ColorSpace::CieLab];
pub const DEFAULT_BINS: [usize; 4] = [16, 32, 64, 128];
pub const DEFAULT_STRIPES: [usize; 4] = [1, 5, 10, 25];
pub const DEFAULT_SEED: u64 = 42;

/// One sweep request: the cartesian product of datasets, color spaces,
/// distances, bin counts, and stripe counts, under one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub datasets: Vec<PathBuf>,
    #[serde(default = "default_color_spaces")]
    pub color_spaces: Vec<ColorSpace>,
    #[serde(default = "default_distances")]
    pub distances: Vec<DistanceKind>,
    #[serde(default = "default_bins")]
    pub bins: Vec<usize>,
    #[serde(default = "default_stripes")]
    pub stripes: Vec<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_color_spaces() -> Vec<ColorSpace> {
    DEFAULT_COLOR_SPACES.to_vec()
}

fn default_distances() -> Vec<DistanceKind> {
    DistanceKind::ALL.to_vec()
}

fn default_bins() -> Vec<usize> {
    DEFAULT_BINS.to_vec()
}

fn default_stripes() -> Vec<usize> {
    DEFAULT_STRIPES.to_vec()
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl GridSpec {
    /// Full default grid over the given datasets: 3 color spaces x 7
    /// distances x 4 bin counts x 4 stripe counts.
    pub fn full(datasets: Vec<PathBuf>, seed: u64) -> Self {
        Self {
            datasets,
            color_spaces: default_color_spaces(),
            distances: default_distances(),
            bins: default_bins(),
            stripes: default_stripes(),
            seed,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::ConfigParse(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::ConfigIo {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_toml_str(&text)
    }

    /// Checks list shapes and, unless `extended`, restricts color spaces,
    /// bins, and stripes to the standard grid values. `extended` unlocks
    /// YCbCr and arbitrary positive bin/stripe counts.
    pub fn validate(&self, extended: bool) -> Result<(), HarnessError> {
        fn no_duplicates<T: PartialEq + std::fmt::Debug>(
            what: &str,
            items: &[T],
        ) -> Result<(), HarnessError> {
            if items.is_empty() {
                return Err(HarnessError::InvalidGrid(format!("{what} is empty")));
            }
            for (i, item) in items.iter().enumerate() {
                if items[..i].contains(item) {
                    return Err(HarnessError::InvalidGrid(format!(
                        "{what} lists {item:?} more than once"
                    )));
                }
            }
            Ok(())
        }

        no_duplicates("datasets", &self.datasets)?;
        no_duplicates("color_spaces", &self.color_spaces)?;
        no_duplicates("distances", &self.distances)?;
        no_duplicates("bins", &self.bins)?;
        no_duplicates("stripes", &self.stripes)?;

        if !extended {
            if let Some(space) = self
                .color_spaces
                .iter()
                .find(|s| !DEFAULT_COLOR_SPACES.contains(s))
            {
                return Err(HarnessError::InvalidGrid(format!(
                    "color space {space} requires --extended"
                )));
            }
            if let Some(b) = self.bins.iter().find(|b| !DEFAULT_BINS.contains(b)) {
                return Err(HarnessError::InvalidGrid(format!(
                    "bin count {b} requires --extended (standard: {DEFAULT_BINS:?})"
                )));
            }
            if let Some(s) = self.stripes.iter().find(|s| !DEFAULT_STRIPES.contains(s)) {
                return Err(HarnessError::InvalidGrid(format!(
                    "stripe count {s} requires --extended (standard: {DEFAULT_STRIPES:?})"
                )));
            }
        } else {
            if let Some(b) = self.bins.iter().find(|&&b| b == 0) {
                return Err(HarnessError::InvalidGrid(format!("bin count {b} invalid")));
            }
            if let Some(s) = self.stripes.iter().find(|&&s| s == 0) {
                return Err(HarnessError::InvalidGrid(format!(
                    "stripe count {s} invalid"
                )));
            }
        }
        Ok(())
    }

    /// All grid cells, in (dataset, color space, distance, bins, stripes)
    /// order.
    pub fn expand(&self) -> Vec<ExperimentConfig> {
        self.datasets
            .iter()
            .flat_map(|d| self.expand_for_dataset(d))
            .collect()
    }

    pub(crate) fn expand_for_dataset(&self, dataset: &Path) -> Vec<ExperimentConfig> {
        let mut cells = Vec::new();
        for &color_space in &self.color_spaces {
            for &distance in &self.distances {
                for &bins in &self.bins {
                    for &stripes in &self.stripes {
                        cells.push(ExperimentConfig {
                            dataset: dataset.to_path_buf(),
                            color_space,
                            distance,
                            bins,
                            stripes,
                            seed: self.seed,
                        });
                    }
                }
            }
        }
        cells
    }
}
