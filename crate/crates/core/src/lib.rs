//! Color-histogram person re-identification benchmark.
//!
//! The pipeline: decode person images from a manifest ([`dataset`]), convert
//! them to a working color space ([`colorspace`]), describe each image as a
//! grid of per-stripe per-channel histograms ([`histogram`], [`descriptor`]),
//! compare descriptors under one of seven histogram distances ([`distance`]),
//! rank the gallery per probe and score the ranking with CMC curves
//! ([`evaluation`]), and sweep whole configuration grids ([`harness`]).

pub mod colorspace;
pub mod dataset;
pub mod descriptor;
pub mod distance;
pub mod evaluation;
pub mod harness;
pub mod histogram;

pub use colorspace::{ColorImage, ColorSpace};
pub use descriptor::{extract_descriptor, Descriptor};
pub use distance::{DistanceKind, DistanceMeasure, DistanceValue};
pub use evaluation::{compute_cmc, match_probe, CmcCurve, LabeledDescriptor, RankResult};
pub use harness::{run_grid, GridSpec};
pub use histogram::{build_histogram, BinningSpec, Histogram};
