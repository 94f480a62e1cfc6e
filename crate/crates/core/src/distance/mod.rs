//! Histogram distance measures.
//!
//! Seven comparison kernels over normalized histograms, all oriented so that
//! lower means more similar: Correlation and Intersection are negated, and
//! Kullback-Leibler is taken in absolute value. Chi-Square skips bin pairs
//! that are both zero and KL skips pairs where either side is zero, so every
//! kernel stays finite on sparse histograms.

mod emd;
mod mahalanobis;

pub use emd::{emd_cdf, emd_transport, min_cost_transport};
pub use mahalanobis::{estimate_covariance, MahalanobisFactor};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptor::Descriptor;
use crate::histogram::Histogram;

/// Stand-in dissimilarity for a comparison against an empty-mass histogram
/// when the kernel has no finite upper bound (KL, Mahalanobis) and no
/// context is available to pick the maximum observed value instead.
/// [`descriptor_distance`] and probe matching replace it with the largest
/// finite distance they observed.
pub const EMPTY_SENTINEL: f64 = 1.0e9;

#[derive(Debug, Error)]
pub enum DistanceError {
    #[error("histogram bin counts differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("histograms must be normalized before comparison")]
    NotNormalized,
    #[error("descriptors disagree in stripes, bin count, or color space")]
    DescriptorMismatch,
    #[error("Mahalanobis requires a fitted covariance factor")]
    MissingCovariance,
    #[error("need at least 2 histograms to estimate a covariance, got {0}")]
    InsufficientData(usize),
    #[error("covariance matrix is not symmetric")]
    NotSymmetric,
    #[error("covariance matrix is not positive definite after regularization")]
    NotPositiveDefinite,
    #[error("cannot transport zero total mass")]
    ZeroMass,
    #[error("transportation solver did not converge")]
    NoConvergence,
    #[error("unknown distance measure {0:?}")]
    UnknownKind(String),
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum DistanceKind {
    Bhattacharyya,
    ChiSquare,
    Correlation,
    Intersection,
    #[serde(rename = "KL")]
    KullbackLeibler,
    #[serde(rename = "EMD")]
    Emd,
    Mahalanobis,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 7] = [
        DistanceKind::Bhattacharyya,
        DistanceKind::ChiSquare,
        DistanceKind::Correlation,
        DistanceKind::Intersection,
        DistanceKind::KullbackLeibler,
        DistanceKind::Emd,
        DistanceKind::Mahalanobis,
    ];

    /// The value a kernel returns for two identical non-empty histograms.
    pub fn self_distance(self) -> f64 {
        match self {
            DistanceKind::Correlation | DistanceKind::Intersection => -1.0,
            _ => 0.0,
        }
    }

    /// KL does not satisfy the symmetry property; every other kernel does.
    pub fn is_symmetric(self) -> bool {
        !matches!(self, DistanceKind::KullbackLeibler)
    }

    /// Worst-case value for comparisons involving an empty histogram, where
    /// the kernel's range is bounded.
    fn max_dissimilarity(self, bin_count: usize) -> Option<f64> {
        match self {
            DistanceKind::Bhattacharyya | DistanceKind::ChiSquare => Some(1.0),
            DistanceKind::Correlation => Some(1.0),
            DistanceKind::Intersection => Some(0.0),
            DistanceKind::Emd => Some((bin_count - 1) as f64),
            DistanceKind::KullbackLeibler | DistanceKind::Mahalanobis => None,
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DistanceKind::Bhattacharyya => "Bhattacharyya",
            DistanceKind::ChiSquare => "ChiSquare",
            DistanceKind::Correlation => "Correlation",
            DistanceKind::Intersection => "Intersection",
            DistanceKind::KullbackLeibler => "KL",
            DistanceKind::Emd => "EMD",
            DistanceKind::Mahalanobis => "Mahalanobis",
        };
        f.write_str(name)
    }
}

impl FromStr for DistanceKind {
    type Err = DistanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Bhattacharyya" => Ok(DistanceKind::Bhattacharyya),
            "ChiSquare" => Ok(DistanceKind::ChiSquare),
            "Correlation" => Ok(DistanceKind::Correlation),
            "Intersection" => Ok(DistanceKind::Intersection),
            "KL" | "KullbackLeibler" => Ok(DistanceKind::KullbackLeibler),
            "EMD" | "Emd" => Ok(DistanceKind::Emd),
            "Mahalanobis" => Ok(DistanceKind::Mahalanobis),
            other => Err(DistanceError::UnknownKind(other.to_string())),
        }
    }
}

/// A distance, oriented lower-is-more-similar. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DistanceValue(pub f64);

impl fmt::Display for DistanceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A comparison kernel, carrying the fitted covariance factor when the kind
/// is Mahalanobis. Cheap to clone and safe to share across threads.
#[derive(Debug, Clone)]
pub struct DistanceMeasure {
    kind: DistanceKind,
    factor: Option<Arc<MahalanobisFactor>>,
}

impl DistanceMeasure {
    pub fn new(kind: DistanceKind) -> Result<Self, DistanceError> {
        if kind == DistanceKind::Mahalanobis {
            return Err(DistanceError::MissingCovariance);
        }
        Ok(Self { kind, factor: None })
    }

    pub fn with_mahalanobis(factor: MahalanobisFactor) -> Self {
        Self {
            kind: DistanceKind::Mahalanobis,
            factor: Some(Arc::new(factor)),
        }
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn distance(&self, x: &Histogram, y: &Histogram) -> Result<DistanceValue, DistanceError> {
        Ok(resolve_bare(kernel_cell(
            self.kind,
            self.factor.as_deref(),
            x,
            y,
        )?))
    }
}

/// Outcome of one histogram-pair comparison: either a finite value, or a
/// marker that the pair involved an empty histogram and the kernel has no
/// bounded worst case, so the caller must substitute a sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum CellOutcome {
    Value(f64),
    NeedsSentinel,
}

fn resolve_bare(cell: CellOutcome) -> DistanceValue {
    match cell {
        CellOutcome::Value(v) => DistanceValue(v),
        CellOutcome::NeedsSentinel => DistanceValue(EMPTY_SENTINEL),
    }
}

fn check_pair(x: &Histogram, y: &Histogram) -> Result<usize, DistanceError> {
    if x.bin_count() != y.bin_count() {
        return Err(DistanceError::DimensionMismatch {
            left: x.bin_count(),
            right: y.bin_count(),
        });
    }
    if !x.is_normalized() || !y.is_normalized() {
        return Err(DistanceError::NotNormalized);
    }
    Ok(x.bin_count())
}

pub(crate) fn kernel_cell(
    kind: DistanceKind,
    factor: Option<&MahalanobisFactor>,
    x: &Histogram,
    y: &Histogram,
) -> Result<CellOutcome, DistanceError> {
    let n = check_pair(x, y)?;
    if x.is_empty_mass() || y.is_empty_mass() {
        return Ok(match kind.max_dissimilarity(n) {
            Some(v) => CellOutcome::Value(v),
            None => CellOutcome::NeedsSentinel,
        });
    }
    let value = match kind {
        DistanceKind::Bhattacharyya => bhattacharyya_raw(x.bins(), y.bins()),
        DistanceKind::ChiSquare => chi_square_raw(x.bins(), y.bins()),
        DistanceKind::Correlation => correlation_raw(x.bins(), y.bins()),
        DistanceKind::Intersection => intersection_raw(x.bins(), y.bins()),
        DistanceKind::KullbackLeibler => kl_raw(x.bins(), y.bins()),
        DistanceKind::Emd => emd_dispatch(x.bins(), y.bins())?,
        DistanceKind::Mahalanobis => {
            let f = factor.ok_or(DistanceError::MissingCovariance)?;
            if f.dim() != n {
                return Err(DistanceError::DimensionMismatch {
                    left: f.dim(),
                    right: n,
                });
            }
            f.distance(x.bins(), y.bins())
        }
    };
    Ok(CellOutcome::Value(value))
}

/// 1 - sqrt(sum_i sqrt(x_i y_i) / sqrt(sum x sum y)); 0 for identical
/// distributions, 1 for disjoint support.
fn bhattacharyya_raw(x: &[f64], y: &[f64]) -> f64 {
    let sum_x: f64 = x.iter().sum();
    let sum_y: f64 = y.iter().sum();
    let bc: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a * b).sqrt())
        .sum::<f64>()
        / (sum_x * sum_y).sqrt();
    (1.0 - bc.sqrt()).max(0.0)
}

/// (1/2) sum (x_i - y_i)^2 / (x_i + y_i), discarding bin pairs whose
/// denominator is zero.
fn chi_square_raw(x: &[f64], y: &[f64]) -> f64 {
    0.5 * x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a + **b > 0.0)
        .map(|(a, b)| (a - b) * (a - b) / (a + b))
        .sum::<f64>()
}

/// Negated Pearson correlation of the bin vectors: -1 for identical shape,
/// +1 for perfect anticorrelation. Zero-variance vectors compare as -1 when
/// bin-wise equal and +1 otherwise.
fn correlation_raw(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean_x: f64 = x.iter().sum::<f64>() / n;
    let mean_y: f64 = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in x.iter().zip(y) {
        let da = a - mean_x;
        let db = b - mean_y;
        num += da * db;
        var_x += da * da;
        var_y += db * db;
    }
    if var_x <= 1e-24 || var_y <= 1e-24 {
        let equal = x.iter().zip(y).all(|(a, b)| (a - b).abs() <= 1e-12);
        return if equal { -1.0 } else { 1.0 };
    }
    (-(num / (var_x * var_y).sqrt())).clamp(-1.0, 1.0)
}

/// Negated histogram intersection: -sum min(x_i, y_i), in [-1, 0] for
/// normalized inputs.
fn intersection_raw(x: &[f64], y: &[f64]) -> f64 {
    -x.iter().zip(y).map(|(a, b)| a.min(*b)).sum::<f64>() + 0.0
}

/// |sum x_i ln(x_i / y_i)| over bin pairs where both sides are positive;
/// pairs touching a zero bin are discarded.
fn kl_raw(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| a * (a / b).ln())
        .sum::<f64>()
        .abs()
}

fn emd_dispatch(x: &[f64], y: &[f64]) -> Result<f64, DistanceError> {
    let sum_x: f64 = x.iter().sum();
    let sum_y: f64 = y.iter().sum();
    if (sum_x - sum_y).abs() <= 1e-9 * sum_x.max(sum_y).max(1.0) {
        Ok(emd::emd_cdf(x, y))
    } else {
        emd::emd_transport(x, y)
    }
}

pub fn bhattacharyya(x: &Histogram, y: &Histogram) -> Result<DistanceValue, DistanceError> {
    Ok(resolve_bare(kernel_cell(
        DistanceKind::Bhattacharyya,
        None,
        x,
        y,
    )?))
}

pub fn chi_square(x: &Histogram, y: &Histogram) -> Result<DistanceValue, DistanceError> {
    Ok(resolve_bare(kernel_cell(DistanceKind::ChiSquare, None, x, y)?))
}

pub fn correlation(x: &Histogram, y: &Histogram) -> Result<DistanceValue, DistanceError> {
    Ok(resolve_bare(kernel_cell(
        DistanceKind::Correlation,
        None,
        x,
        y,
    )?))
}

pub fn intersection(x: &Histogram, y: &Histogram) -> Result<DistanceValue, DistanceError> {
    Ok(resolve_bare(kernel_cell(
        DistanceKind::Intersection,
        None,
        x,
        y,
    )?))
}

pub fn kullback_leibler(x: &Histogram, y: &Histogram) -> Result<DistanceValue, DistanceError> {
    Ok(resolve_bare(kernel_cell(
        DistanceKind::KullbackLeibler,
        None,
        x,
        y,
    )?))
}

pub fn emd(x: &Histogram, y: &Histogram) -> Result<DistanceValue, DistanceError> {
    Ok(resolve_bare(kernel_cell(DistanceKind::Emd, None, x, y)?))
}

pub fn mahalanobis(
    x: &Histogram,
    y: &Histogram,
    factor: &MahalanobisFactor,
) -> Result<DistanceValue, DistanceError> {
    Ok(resolve_bare(kernel_cell(
        DistanceKind::Mahalanobis,
        Some(factor),
        x,
        y,
    )?))
}

/// Kernel outcomes for every stripe-channel cell of a descriptor pair, in
/// grid order.
pub(crate) fn descriptor_cells(
    a: &Descriptor,
    b: &Descriptor,
    measure: &DistanceMeasure,
) -> Result<Vec<CellOutcome>, DistanceError> {
    if a.stripes() != b.stripes() || a.bin_count() != b.bin_count() || a.space() != b.space() {
        return Err(DistanceError::DescriptorMismatch);
    }
    a.cells()
        .iter()
        .zip(b.cells())
        .map(|(x, y)| kernel_cell(measure.kind, measure.factor.as_deref(), x, y))
        .collect()
}

pub(crate) fn max_finite_value(cells: &[CellOutcome]) -> Option<f64> {
    cells
        .iter()
        .filter_map(|c| match c {
            CellOutcome::Value(v) => Some(*v),
            CellOutcome::NeedsSentinel => None,
        })
        .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
}

pub(crate) fn mean_with_sentinel(cells: &[CellOutcome], sentinel: f64) -> f64 {
    let total: f64 = cells
        .iter()
        .map(|c| match c {
            CellOutcome::Value(v) => *v,
            CellOutcome::NeedsSentinel => sentinel,
        })
        .sum();
    total / cells.len() as f64
}

/// Distance between two descriptors: the arithmetic mean of the per-stripe,
/// per-channel kernel distances. Cells involving empty histograms take the
/// kernel's worst case; for KL and Mahalanobis that is the maximum finite
/// cell value of this pair (or [`EMPTY_SENTINEL`] when none exists).
pub fn descriptor_distance(
    a: &Descriptor,
    b: &Descriptor,
    measure: &DistanceMeasure,
) -> Result<DistanceValue, DistanceError> {
    let cells = descriptor_cells(a, b, measure)?;
    let sentinel = max_finite_value(&cells).unwrap_or(EMPTY_SENTINEL);
    Ok(DistanceValue(mean_with_sentinel(&cells, sentinel)))
}
