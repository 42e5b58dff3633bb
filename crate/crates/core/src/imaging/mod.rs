//! Pixel-level preprocessing of scanned handwriting.
//!
//! Everything here works on row-major rasters with 8-connected ink, where ink
//! is the dark foreground of a light page.

mod binarize;
mod contour;
mod graph;
mod keypoints;
mod label;
mod stroke;
mod thin;

pub use binarize::{binarize, otsu_threshold};
pub use contour::{euler_number, trace_contours, Contour, ContourKind};
pub use graph::{build_stroke_graph, Edge, StrokeGraph};
pub use keypoints::{detect_keypoints, Keypoint, KeypointKind, CURVE_CHORD, CURVE_MIN_TURN_DEG};
pub use label::{count_components, label_components, Labels};
pub use stroke::{distance_transform, stroke_width_stats, StrokeStats};
pub use thin::{prune_spurs, spur_lengths, thin, Skeleton};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pixel coordinate as `(row, col)`.
pub type Point = (usize, usize);

/// Offsets of the 8-neighborhood in clockwise order starting at north,
/// as `(d_row, d_col)`.
pub(crate) const RING: [(isize, isize); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                found: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// A page filled with one intensity.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.pixels[row * self.width + col] = value;
    }

    /// Copies rows `[top, bottom)` into a new image.
    pub fn crop_rows(&self, top: usize, bottom: usize) -> Result<Self> {
        if top >= bottom || bottom > self.height {
            return Err(Error::InvalidArgument(format!(
                "row range {top}..{bottom} outside image of height {}",
                self.height
            )));
        }
        Self::new(
            self.width,
            bottom - top,
            self.pixels[top * self.width..bottom * self.width].to_vec(),
        )
    }

    /// Gray-level histogram with 256 bins.
    pub fn histogram(&self) -> [u64; 256] {
        let mut hist = [0u64; 256];
        for &p in &self.pixels {
            hist[p as usize] += 1;
        }
        hist
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                found: bits.len(),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Parses an ASCII picture where `#` (or any non-space, non-`.`
    /// character) is ink. Rows may be ragged; short rows are padded.
    pub fn from_ascii(art: &str) -> Self {
        let rows: Vec<&str> = art.lines().filter(|l| !l.trim().is_empty()).collect();
        let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        let mut img = Self::new(width, rows.len());
        for (r, line) in rows.iter().enumerate() {
            for (c, ch) in line.chars().enumerate() {
                if ch != '.' && ch != ' ' {
                    img.set(r, c, true);
                }
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    /// Out-of-bounds coordinates read as background.
    #[inline]
    pub fn get_signed(&self, row: isize, col: isize) -> bool {
        row >= 0
            && col >= 0
            && (row as usize) < self.height
            && (col as usize) < self.width
            && self.bits[row as usize * self.width + col as usize]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn ink_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Ink pixels in raster order.
    pub fn ink_points(&self) -> impl Iterator<Item = Point> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i / self.width, i % self.width))
    }

    /// Ink neighbors of `(row, col)` in [`RING`] order.
    pub fn neighbors(&self, row: usize, col: usize) -> impl Iterator<Item = Point> + '_ {
        RING.iter().filter_map(move |&(dr, dc)| {
            let r = row as isize + dr;
            let c = col as isize + dc;
            self.get_signed(r, c).then_some((r as usize, c as usize))
        })
    }

    pub fn neighbor_count(&self, row: usize, col: usize) -> usize {
        RING.iter()
            .filter(|&&(dr, dc)| self.get_signed(row as isize + dr, col as isize + dc))
            .count()
    }

    /// Bounding box `(top, left, bottom, right)` of all ink, inclusive.
    pub fn ink_bbox(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bbox: Option<(usize, usize, usize, usize)> = None;
        for (r, c) in self.ink_points() {
            bbox = Some(match bbox {
                None => (r, c, r, c),
                Some((t, l, b, rt)) => (t.min(r), l.min(c), b.max(r), rt.max(c)),
            });
        }
        bbox
    }

    /// Translates the content by `(d_row, d_col)` onto a canvas enlarged by
    /// the same amount, so nothing is clipped.
    pub fn shifted(&self, d_row: usize, d_col: usize) -> Self {
        let mut out = Self::new(self.width + d_col, self.height + d_row);
        for (r, c) in self.ink_points() {
            out.set(r + d_row, c + d_col, true);
        }
        out
    }

    /// Renders ink as black on white.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.bits.iter().map(|&b| if b { 0 } else { 255 }).collect(),
        }
    }
}
