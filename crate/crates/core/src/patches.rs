//! Fixed-size patch windows around characters and stroke keypoints.
//!
//! A character patch is an `n_char` square centered on the character's
//! center of gravity. An allograph patch is half that size, centered on a
//! keypoint, and embedded in an `n_char` canvas with a blank border. Window
//! parts falling outside the page are blank.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{BinaryImage, Keypoint};
use crate::page::PageAnalysis;
use crate::segmentation::CharacterBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchConfig {
    pub n_char: usize,
}

impl PatchConfig {
    pub fn new(n_char: usize) -> Result<Self> {
        if n_char < 2 {
            return Err(Error::InvalidArgument(format!("n_char must be >= 2, got {n_char}")));
        }
        Ok(Self { n_char })
    }

    pub fn n_allo(&self) -> usize {
        self.n_char / 2
    }

    pub fn pad_to(&self) -> usize {
        self.n_char
    }

    /// Blank border width around an allograph window.
    pub fn pad(&self) -> usize {
        (self.n_char - self.n_allo()) / 2
    }
}

impl Default for PatchConfig {
    fn default() -> Self {
        Self { n_char: 116 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatchKind {
    Char,
    Allo,
}

/// Where [`sample_patches`] draws its centers from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    /// Character centers of gravity, character windows.
    Char,
    /// Keypoints, allograph windows.
    Allo,
    /// Any skeleton pixel, character windows.
    Arbitrary,
}

impl std::str::FromStr for SampleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "char" => Ok(Self::Char),
            "allo" => Ok(Self::Allo),
            "arbitrary" => Ok(Self::Arbitrary),
            other => Err(Error::InvalidArgument(format!("unknown patch mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Patch {
    pub source_sample_id: String,
    /// Window center `(row, col)` on the page.
    pub center: (usize, usize),
    pub kind: PatchKind,
    pub pixels: BinaryImage,
}

/// Copies the `size` square whose center pixel is `center` into `out` at
/// `offset`.
fn copy_window(page: &BinaryImage, center: (usize, usize), size: usize, out: &mut BinaryImage, offset: usize) {
    let top = center.0 as isize - (size / 2) as isize;
    let left = center.1 as isize - (size / 2) as isize;
    for r in 0..size {
        for c in 0..size {
            if page.get_signed(top + r as isize, left + c as isize) {
                out.set(offset + r, offset + c, true);
            }
        }
    }
}

fn round_center(p: (f64, f64)) -> (usize, usize) {
    (p.0.round().max(0.0) as usize, p.1.round().max(0.0) as usize)
}

fn char_patch_at(page: &BinaryImage, sample_id: &str, center: (usize, usize), cfg: &PatchConfig) -> Patch {
    let mut pixels = BinaryImage::new(cfg.n_char, cfg.n_char);
    copy_window(page, center, cfg.n_char, &mut pixels, 0);
    Patch {
        source_sample_id: sample_id.to_string(),
        center,
        kind: PatchKind::Char,
        pixels,
    }
}

fn allo_patch_at(page: &BinaryImage, sample_id: &str, center: (usize, usize), cfg: &PatchConfig) -> Patch {
    let mut pixels = BinaryImage::new(cfg.pad_to(), cfg.pad_to());
    copy_window(page, center, cfg.n_allo(), &mut pixels, cfg.pad());
    Patch {
        source_sample_id: sample_id.to_string(),
        center,
        kind: PatchKind::Allo,
        pixels,
    }
}

pub fn extract_patch_char(page: &BinaryImage, sample_id: &str, ch: &CharacterBox, cfg: &PatchConfig) -> Patch {
    char_patch_at(page, sample_id, round_center(ch.center_of_gravity), cfg)
}

pub fn extract_patch_allo(page: &BinaryImage, sample_id: &str, kp: &Keypoint, cfg: &PatchConfig) -> Patch {
    allo_patch_at(page, sample_id, kp.position, cfg)
}

/// Draws `n_p` patches. With enough candidates they are drawn without
/// replacement; otherwise every candidate is used once and the rest are
/// drawn with replacement. Output is sorted by center.
pub fn sample_patches(
    page: &PageAnalysis,
    sample_id: &str,
    n_p: usize,
    mode: SampleMode,
    cfg: &PatchConfig,
    seed: u64,
) -> Result<Vec<Patch>> {
    if n_p == 0 {
        return Err(Error::InvalidArgument("patch count must be >= 1".into()));
    }
    let centers: Vec<(usize, usize)> = match mode {
        SampleMode::Char => page
            .segmentation
            .characters
            .iter()
            .map(|c| round_center(c.center_of_gravity))
            .collect(),
        SampleMode::Allo => page.keypoints.iter().map(|k| k.position).collect(),
        SampleMode::Arbitrary => page.skeleton.image.ink_points().collect(),
    };
    if centers.is_empty() {
        return Err(Error::NoInk);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen: Vec<usize> = if centers.len() >= n_p {
        index::sample(&mut rng, centers.len(), n_p).into_vec()
    } else {
        let mut all: Vec<usize> = (0..centers.len()).collect();
        all.extend((centers.len()..n_p).map(|_| rng.gen_range(0..centers.len())));
        all
    };
    let mut patches: Vec<Patch> = chosen
        .into_iter()
        .map(|i| match mode {
            SampleMode::Allo => allo_patch_at(&page.binary, sample_id, centers[i], cfg),
            _ => char_patch_at(&page.binary, sample_id, centers[i], cfg),
        })
        .collect();
    patches.sort_by_key(|p| p.center);
    Ok(patches)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_formulas() {
        let c = PatchConfig::new(224).unwrap();
        assert_eq!((c.n_allo(), c.pad(), c.pad_to()), (112, 56, 224));
        let c = PatchConfig::new(116).unwrap();
        assert_eq!((c.n_allo(), c.pad(), c.pad_to()), (58, 29, 116));
    }

    #[test]
    fn corner_window_is_zero_filled() {
        let mut page = BinaryImage::new(50, 50);
        page.set(0, 0, true);
        let cfg = PatchConfig::new(20).unwrap();
        let p = char_patch_at(&page, "s", (0, 0), &cfg);
        assert_eq!((p.pixels.width(), p.pixels.height()), (20, 20));
        assert_eq!(p.pixels.ink_count(), 1);
        assert!(p.pixels.get(10, 10));
    }

    #[test]
    fn allo_border_is_blank() {
        let mut page = BinaryImage::new(60, 60);
        for r in 0..60 {
            for c in 0..60 {
                page.set(r, c, true);
            }
        }
        let cfg = PatchConfig::new(30).unwrap();
        let p = allo_patch_at(&page, "s", (30, 30), &cfg);
        let pad = cfg.pad();
        for r in 0..30 {
            for c in 0..30 {
                let inside = (pad..pad + cfg.n_allo()).contains(&r) && (pad..pad + cfg.n_allo()).contains(&c);
                assert_eq!(p.pixels.get(r, c), inside, "({r},{c})");
            }
        }
    }
}
