//! 1-D channel histograms: construction over a uniform binning of a channel
//! range, and probability-style normalization.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HistogramError {
    #[error("channel {channel}: value {value} outside [{min}, {max}]")]
    OutOfRange {
        channel: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("bin count must be at least 1")]
    ZeroBins,
    #[error("invalid channel range [{min}, {max}]")]
    InvalidRange { min: f64, max: f64 },
    #[error("bin values must be non-negative, got {0}")]
    NegativeBin(f64),
    #[error("histogram needs at least one bin")]
    NoBins,
}

/// Uniform partition of one channel's nominal value range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinningSpec {
    pub bin_count: usize,
    pub range_min: f64,
    pub range_max: f64,
    /// Channel label used in error messages ("H", "Cb", ...).
    pub channel: &'static str,
}

impl BinningSpec {
    pub fn new(bin_count: usize, range_min: f64, range_max: f64) -> Result<Self, HistogramError> {
        Self::for_channel("value", bin_count, range_min, range_max)
    }

    pub fn for_channel(
        channel: &'static str,
        bin_count: usize,
        range_min: f64,
        range_max: f64,
    ) -> Result<Self, HistogramError> {
        if bin_count == 0 {
            return Err(HistogramError::ZeroBins);
        }
        if !(range_min < range_max) || !range_min.is_finite() || !range_max.is_finite() {
            return Err(HistogramError::InvalidRange {
                min: range_min,
                max: range_max,
            });
        }
        Ok(Self {
            bin_count,
            range_min,
            range_max,
            channel,
        })
    }

    /// Bin index for `value`: floor((v - min) / (max - min) * n), with the
    /// upper range edge falling into the last bin.
    pub fn bin_index(&self, value: f64) -> Result<usize, HistogramError> {
        if !value.is_finite() || value < self.range_min || value > self.range_max {
            return Err(HistogramError::OutOfRange {
                channel: self.channel,
                value,
                min: self.range_min,
                max: self.range_max,
            });
        }
        let width = self.range_max - self.range_min;
        let idx = ((value - self.range_min) / width * self.bin_count as f64).floor() as usize;
        Ok(idx.min(self.bin_count - 1))
    }
}

/// Fixed-length vector of non-negative bin masses.
///
/// A zero-mass histogram normalizes to the all-zero vector carrying an
/// explicit empty marker instead of erroring, so distance code can apply a
/// uniform worst-case policy to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    bins: Vec<f64>,
    normalized: bool,
    empty: bool,
}

impl Histogram {
    /// Wraps raw (unnormalized) bin masses.
    pub fn from_bins(bins: Vec<f64>) -> Result<Self, HistogramError> {
        if bins.is_empty() {
            return Err(HistogramError::NoBins);
        }
        if let Some(&bad) = bins.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
            return Err(HistogramError::NegativeBin(bad));
        }
        let empty = bins.iter().all(|&b| b == 0.0);
        Ok(Self {
            bins,
            normalized: false,
            empty,
        })
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn total(&self) -> f64 {
        self.bins.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// True when the histogram carries no mass at all.
    pub fn is_empty_mass(&self) -> bool {
        self.empty
    }

    /// Divides every bin by the total mass so the bins sum to 1. A zero-mass
    /// histogram stays all-zero and is flagged empty.
    pub fn normalize(&self) -> Histogram {
        let total = self.total();
        if total > 0.0 {
            Histogram {
                bins: self.bins.iter().map(|b| b / total).collect(),
                normalized: true,
                empty: false,
            }
        } else {
            Histogram {
                bins: vec![0.0; self.bins.len()],
                normalized: true,
                empty: true,
            }
        }
    }
}

/// Counts occurrences of each value into the bins of `spec`.
///
/// The sum of the resulting bins equals the number of input values; any value
/// outside the spec's range is an error.
pub fn build_histogram(
    values: impl IntoIterator<Item = f64>,
    spec: &BinningSpec,
) -> Result<Histogram, HistogramError> {
    let mut bins = vec![0.0; spec.bin_count];
    for value in values {
        bins[spec.bin_index(value)?] += 1.0;
    }
    Histogram::from_bins(bins)
}
