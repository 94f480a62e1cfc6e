//! Horizontal stripe division and per-stripe, per-channel histogram
//! descriptors of a person image.

use thiserror::Error;

use crate::colorspace::{ColorImage, ColorSpace};
use crate::histogram::{build_histogram, BinningSpec, Histogram, HistogramError};

pub const CHANNELS: usize = 3;

#[derive(Debug, Error)]
pub enum DescriptorError {
    #[error("image height {height} is smaller than the stripe count {stripes}")]
    ImageTooSmall { height: usize, stripes: usize },
    #[error("stripe count must be at least 1")]
    ZeroStripes,
    #[error(transparent)]
    Histogram(#[from] HistogramError),
}

/// Row ranges `[start, end)` of `k` stripes covering `height` rows: stripe
/// `i` spans `[floor(i*h/k), floor((i+1)*h/k))`. The stripes are disjoint,
/// cover every row, and are non-empty whenever `height >= k`.
pub fn stripe_bounds(height: usize, k: usize) -> Result<Vec<(usize, usize)>, DescriptorError> {
    if k == 0 {
        return Err(DescriptorError::ZeroStripes);
    }
    if height < k {
        return Err(DescriptorError::ImageTooSmall {
            height,
            stripes: k,
        });
    }
    Ok((0..k)
        .map(|i| (i * height / k, (i + 1) * height / k))
        .collect())
}

/// Per-stripe, per-channel grid of normalized histograms for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    space: ColorSpace,
    bin_count: usize,
    stripes: usize,
    /// Row-major `stripes x CHANNELS` grid.
    grid: Vec<Histogram>,
}

impl Descriptor {
    pub fn space(&self) -> ColorSpace {
        self.space
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn stripes(&self) -> usize {
        self.stripes
    }

    pub fn histogram(&self, stripe: usize, channel: usize) -> &Histogram {
        &self.grid[stripe * CHANNELS + channel]
    }

    /// All stripe-channel histograms in (stripe, channel) order.
    pub fn cells(&self) -> &[Histogram] {
        &self.grid
    }
}

/// Splits `img` into `k` horizontal stripes and builds one normalized
/// histogram per stripe and channel, binned over the channel's nominal
/// range. `k = 1` describes the complete image.
pub fn extract_descriptor(
    img: &ColorImage,
    k: usize,
    bin_count: usize,
) -> Result<Descriptor, DescriptorError> {
    let bounds = stripe_bounds(img.height(), k)?;
    let space = img.space();
    let ranges = space.channel_ranges();
    let names = space.channel_names();
    let specs: Vec<BinningSpec> = (0..CHANNELS)
        .map(|c| BinningSpec::for_channel(names[c], bin_count, ranges[c].0, ranges[c].1))
        .collect::<Result<_, _>>()?;

    let width = img.width();
    let pixels = img.pixels();
    let mut grid = Vec::with_capacity(k * CHANNELS);
    for &(start, end) in &bounds {
        let stripe_pixels = &pixels[start * width..end * width];
        for (c, spec) in specs.iter().enumerate() {
            let h = build_histogram(stripe_pixels.iter().map(|p| p[c]), spec)?;
            grid.push(h.normalize());
        }
    }
    Ok(Descriptor {
        space,
        bin_count,
        stripes: k,
        grid,
    })
}
