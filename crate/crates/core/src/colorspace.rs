//! Color space conversions from 8-bit RGB to HSV, CIELAB, and YCbCr, plus
//! the per-channel nominal ranges used to bin each space.
//!
//! CIELAB assumes sRGB primaries with the D65 white point; YCbCr is the
//! full-range BT.601 transform.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ColorError {
    #[error("expected an image in {expected}, got {actual}")]
    WrongSpace {
        expected: ColorSpace,
        actual: ColorSpace,
    },
    #[error("pixel buffer length {len} does not match {width}x{height}")]
    BadDimensions {
        width: usize,
        height: usize,
        len: usize,
    },
    #[error("unknown color space {0:?}")]
    UnknownSpace(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ColorSpace {
    #[serde(rename = "RGB")]
    Rgb,
    #[serde(rename = "HSV")]
    Hsv,
    #[serde(rename = "CIELAB")]
    CieLab,
    #[serde(rename = "YCbCr")]
    YCbCr,
}

impl ColorSpace {
    /// Nominal (min, max) per channel, in channel order.
    pub fn channel_ranges(self) -> [(f64, f64); 3] {
        match self {
            ColorSpace::Rgb => [(0.0, 255.0); 3],
            ColorSpace::Hsv => [(0.0, 360.0), (0.0, 1.0), (0.0, 1.0)],
            ColorSpace::CieLab => [(0.0, 100.0), (-128.0, 127.0), (-128.0, 127.0)],
            ColorSpace::YCbCr => [(0.0, 255.0); 3],
        }
    }

    pub fn channel_names(self) -> [&'static str; 3] {
        match self {
            ColorSpace::Rgb => ["R", "G", "B"],
            ColorSpace::Hsv => ["H", "S", "V"],
            ColorSpace::CieLab => ["L", "a", "b"],
            ColorSpace::YCbCr => ["Y", "Cb", "Cr"],
        }
    }
}

impl fmt::Display for ColorSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ColorSpace::Rgb => "RGB",
            ColorSpace::Hsv => "HSV",
            ColorSpace::CieLab => "CIELAB",
            ColorSpace::YCbCr => "YCbCr",
        };
        f.write_str(name)
    }
}

impl FromStr for ColorSpace {
    type Err = ColorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "RGB" | "rgb" => Ok(ColorSpace::Rgb),
            "HSV" | "hsv" => Ok(ColorSpace::Hsv),
            "CIELAB" | "cielab" | "Lab" | "lab" => Ok(ColorSpace::CieLab),
            "YCbCr" | "ycbcr" => Ok(ColorSpace::YCbCr),
            other => Err(ColorError::UnknownSpace(other.to_string())),
        }
    }
}

/// Row-major 3-channel raster tagged with the space its values live in.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    pixels: Vec<[f64; 3]>,
    space: ColorSpace,
}

impl ColorImage {
    pub fn new(
        width: usize,
        height: usize,
        pixels: Vec<[f64; 3]>,
        space: ColorSpace,
    ) -> Result<Self, ColorError> {
        if pixels.len() != width * height {
            return Err(ColorError::BadDimensions {
                width,
                height,
                len: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
            space,
        })
    }

    pub fn from_rgb8(img: &image::RgbImage) -> Self {
        let pixels = img
            .pixels()
            .map(|p| [p.0[0] as f64, p.0[1] as f64, p.0[2] as f64])
            .collect();
        Self {
            width: img.width() as usize,
            height: img.height() as usize,
            pixels,
            space: ColorSpace::Rgb,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn space(&self) -> ColorSpace {
        self.space
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        self.pixels[row * self.width + col]
    }

    fn map_pixels(&self, space: ColorSpace, f: impl Fn([f64; 3]) -> [f64; 3]) -> ColorImage {
        ColorImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
            space,
        }
    }

    fn expect_space(&self, expected: ColorSpace) -> Result<(), ColorError> {
        if self.space != expected {
            return Err(ColorError::WrongSpace {
                expected,
                actual: self.space,
            });
        }
        Ok(())
    }
}

/// RGB in [0,255] to hexcone HSV: H in [0,360) degrees, S and V in [0,1].
/// Gray pixels (max = min) get H = 0 and S = 0.
pub fn rgb_pixel_to_hsv(rgb: [f64; 3]) -> [f64; 3] {
    let r = rgb[0] / 255.0;
    let g = rgb[1] / 255.0;
    let b = rgb[2] / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let range = max - min;

    let v = max;
    if v == 0.0 || range == 0.0 {
        return [0.0, 0.0, v];
    }
    let s = range / max;

    let mut h = if r == max {
        (g - b) / range
    } else if g == max {
        (b - r) / range + 2.0
    } else {
        (r - g) / range + 4.0
    };
    h *= 60.0;
    if h < 0.0 {
        h += 360.0;
    }
    if h >= 360.0 {
        h = 0.0;
    }
    [h, s.clamp(0.0, 1.0), v.clamp(0.0, 1.0)]
}

/// Reference inverse of [`rgb_pixel_to_hsv`]; returns RGB in [0,255].
pub fn hsv_pixel_to_rgb(hsv: [f64; 3]) -> [f64; 3] {
    let [h, s, v] = hsv;
    if s == 0.0 {
        let c = v * 255.0;
        return [c, c, c];
    }
    let h6 = (h.rem_euclid(360.0)) / 60.0;
    let sector = (h6.floor() as usize) % 6;
    let f = h6 - h6.floor();
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    let (r, g, b) = match sector {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [r * 255.0, g * 255.0, b * 255.0]
}

// sRGB -> XYZ (D65) matrix and white point.
const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];
const D65_WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];

fn srgb_linearize(c: f64) -> f64 {
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

/// RGB in [0,255] to CIELAB (sRGB gamma, D65 white).
pub fn rgb_pixel_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let lin = [
        srgb_linearize(rgb[0] / 255.0),
        srgb_linearize(rgb[1] / 255.0),
        srgb_linearize(rgb[2] / 255.0),
    ];
    let mut xyz = [0.0f64; 3];
    for (i, row) in SRGB_TO_XYZ.iter().enumerate() {
        xyz[i] = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
    }
    let fx = lab_f(xyz[0] / D65_WHITE[0]);
    let fy = lab_f(xyz[1] / D65_WHITE[1]);
    let fz = lab_f(xyz[2] / D65_WHITE[2]);
    let l = 116.0 * fy - 16.0;
    let a = 500.0 * (fx - fy);
    let b = 200.0 * (fy - fz);
    [
        l.clamp(0.0, 100.0),
        a.clamp(-128.0, 127.0),
        b.clamp(-128.0, 127.0),
    ]
}

/// RGB in [0,255] to full-range BT.601 YCbCr, all channels in [0,255].
pub fn rgb_pixel_to_ycbcr(rgb: [f64; 3]) -> [f64; 3] {
    let [r, g, b] = rgb;
    let y = 0.299 * r + 0.587 * g + 0.114 * b;
    let cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
    let cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
    [
        y.clamp(0.0, 255.0),
        cb.clamp(0.0, 255.0),
        cr.clamp(0.0, 255.0),
    ]
}

pub fn rgb_to_hsv(img: &ColorImage) -> Result<ColorImage, ColorError> {
    img.expect_space(ColorSpace::Rgb)?;
    Ok(img.map_pixels(ColorSpace::Hsv, rgb_pixel_to_hsv))
}

pub fn rgb_to_lab(img: &ColorImage) -> Result<ColorImage, ColorError> {
    img.expect_space(ColorSpace::Rgb)?;
    Ok(img.map_pixels(ColorSpace::CieLab, rgb_pixel_to_lab))
}

pub fn rgb_to_ycbcr(img: &ColorImage) -> Result<ColorImage, ColorError> {
    img.expect_space(ColorSpace::Rgb)?;
    Ok(img.map_pixels(ColorSpace::YCbCr, rgb_pixel_to_ycbcr))
}

/// Converts an RGB image to `target` (identity for RGB).
pub fn convert(img: &ColorImage, target: ColorSpace) -> Result<ColorImage, ColorError> {
    match target {
        ColorSpace::Rgb => {
            img.expect_space(ColorSpace::Rgb)?;
            Ok(img.clone())
        }
        ColorSpace::Hsv => rgb_to_hsv(img),
        ColorSpace::CieLab => rgb_to_lab(img),
        ColorSpace::YCbCr => rgb_to_ycbcr(img),
    }
}
