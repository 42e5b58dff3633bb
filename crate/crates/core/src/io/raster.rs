//! PNG/PGM reading and writing for page rasters and patch grids.

use std::path::Path;

use crate::error::Result;
use crate::imaging::{BinaryImage, GrayImage};

/// Loads any supported raster as 8-bit gray.
pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let img = image::open(path)?.into_luma8();
    let (w, h) = img.dimensions();
    GrayImage::new(w as usize, h as usize, img.into_raw())
}

/// Writes an 8-bit gray PNG (or PGM when the extension says so).
pub fn save_gray(path: &Path, img: &GrayImage) -> Result<()> {
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, img.pixels().to_vec())
        .expect("buffer length matches dimensions");
    buf.save(path)?;
    Ok(())
}

pub fn save_binary(path: &Path, img: &BinaryImage) -> Result<()> {
    save_gray(path, &img.to_gray())
}

/// Tiles equally sized binary patches into one image, `cols` per row, with
/// a one pixel gray separator.
pub fn patch_grid(patches: &[&BinaryImage], cols: usize) -> Option<GrayImage> {
    let first = patches.first()?;
    let (pw, ph) = (first.width(), first.height());
    let cols = cols.clamp(1, patches.len());
    let rows = patches.len().div_ceil(cols);
    let mut out = GrayImage::filled(cols * (pw + 1) + 1, rows * (ph + 1) + 1, 128);
    for (i, p) in patches.iter().enumerate() {
        let (top, left) = (1 + (i / cols) * (ph + 1), 1 + (i % cols) * (pw + 1));
        for r in 0..ph.min(p.height()) {
            for c in 0..pw.min(p.width()) {
                out.set(top + r, left + c, if p.get(r, c) { 0 } else { 255 });
            }
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.png");
        let img = GrayImage::new(3, 2, vec![0, 10, 20, 30, 40, 255]).unwrap();
        save_gray(&path, &img).unwrap();
        assert_eq!(load_gray(&path).unwrap(), img);
    }

    #[test]
    fn grid_layout() {
        let a = BinaryImage::from_ascii("#.\n.#");
        let g = patch_grid(&[&a, &a, &a], 2).unwrap();
        assert_eq!((g.width(), g.height()), (7, 7));
        assert_eq!(g.get(1, 1), 0);
        assert_eq!(g.get(0, 0), 128);
    }
}
