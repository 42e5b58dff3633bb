//! DropStroke augmentation and the per-page sample expansion.
//!
//! DropStroke deletes stroke-graph edges without changing the number of ink
//! components: an edge may go only if removing its skeleton pixels keeps the
//! skeleton component count, and the erased page ink must keep the page
//! component count too. The droppable set is recomputed after every removal.
//!
//! Each page is split into two halves at the inter-line gap nearest its
//! middle; every half yields itself plus ten DropStroke variants, 22 samples
//! per page. With two pages per writer and style, page one trains, the top
//! half of page two validates and its bottom half tests.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{count_components, BinaryImage, Point, StrokeGraph};
use crate::page::PageAnalysis;
use crate::segmentation::SegmentConfig;
use crate::seed;

pub const VARIANTS_PER_HALF: usize = 10;
pub const SAMPLES_PER_PAGE: usize = 2 * (1 + VARIANTS_PER_HALF);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub alpha_d: f64,
    pub seed: u64,
}

impl AugmentConfig {
    pub fn new(alpha_d: f64, seed: u64) -> Result<Self> {
        if !(0.1..=1.0).contains(&alpha_d) {
            return Err(Error::InvalidArgument(format!(
                "alpha_d must lie in [0.1, 1], got {alpha_d}"
            )));
        }
        Ok(Self { alpha_d, seed })
    }
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            alpha_d: 0.2,
            seed: 7,
        }
    }
}

/// Flood-fills from `start` through ink and reports whether every pixel of
/// `targets` was reached.
fn reaches_all(img: &BinaryImage, start: Point, targets: &HashSet<Point>) -> bool {
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    let mut found = usize::from(targets.contains(&start));
    while let Some((r, c)) = stack.pop() {
        if found == targets.len() {
            return true;
        }
        for q in img.neighbors(r, c) {
            if seen.insert(q) {
                if targets.contains(&q) {
                    found += 1;
                }
                stack.push(q);
            }
        }
    }
    found == targets.len()
}

/// True when erasing `pixels` from `img` leaves the component count as is.
/// Only the ink bordering the erased pixels can change its connectivity, so
/// it is enough that this border stays in one piece (and is not empty).
fn removal_keeps_components(img: &BinaryImage, pixels: &[Point]) -> bool {
    if pixels.is_empty() {
        return false;
    }
    let mut rest = img.clone();
    for &(r, c) in pixels {
        rest.set(r, c, false);
    }
    let border: HashSet<Point> = pixels
        .iter()
        .flat_map(|&(r, c)| rest.neighbors(r, c).collect::<Vec<_>>())
        .collect();
    match border.iter().min() {
        None => false,
        Some(&start) => reaches_all(&rest, start, &border),
    }
}

/// Edges (by id) whose pixel removal keeps the skeleton's component count.
/// Edges with no pixels of their own are never droppable.
pub fn droppable_edges(g: &StrokeGraph, skeleton: &BinaryImage) -> BTreeSet<usize> {
    g.edges
        .iter()
        .filter(|e| removal_keeps_components(skeleton, &e.pixels))
        .map(|e| e.id)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropResult {
    pub image: BinaryImage,
    /// Dropped edge ids in removal order.
    pub removed: Vec<usize>,
    /// Set when fewer edges than requested could be dropped.
    pub exhausted: bool,
}

/// Page ink to erase for a dropped edge: ink within `radius + 1` of the edge
/// that is strictly closer to it than to any remaining skeleton pixel.
pub fn erase_mask(page: &BinaryImage, skeleton: &BinaryImage, edge: &[Point], radius: usize) -> Vec<Point> {
    let reach = radius as isize + 1;
    let edge_set: HashSet<Point> = edge.iter().copied().collect();
    let mut out = BTreeSet::new();
    for &(er, ec) in edge {
        for dr in -reach..=reach {
            for dc in -reach..=reach {
                if dr * dr + dc * dc > reach * reach {
                    continue;
                }
                let (r, c) = (er as isize + dr, ec as isize + dc);
                if !page.get_signed(r, c) {
                    continue;
                }
                let p = (r as usize, c as usize);
                if out.contains(&p) {
                    continue;
                }
                let (mut d_edge, mut d_rest) = (isize::MAX, isize::MAX);
                for qr in -reach..=reach {
                    for qc in -reach..=reach {
                        let (sr, sc) = (r + qr, c + qc);
                        if !skeleton.get_signed(sr, sc) {
                            continue;
                        }
                        let d = qr * qr + qc * qc;
                        if edge_set.contains(&(sr as usize, sc as usize)) {
                            d_edge = d_edge.min(d);
                        } else {
                            d_rest = d_rest.min(d);
                        }
                    }
                }
                if d_edge < d_rest {
                    out.insert(p);
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Drops `ceil(alpha_d * n_d)` edges, or as many as remain possible.
///
/// `page` is the binarized sample, `g` its stroke graph over `skeleton`,
/// and `stroke_width` the mean stroke width used for the erase radius.
pub fn drop_strokes(
    page: &BinaryImage,
    g: &StrokeGraph,
    skeleton: &BinaryImage,
    n_d: usize,
    stroke_width: f64,
    cfg: &AugmentConfig,
) -> Result<DropResult> {
    if n_d == 0 {
        return Err(Error::InvalidArgument("character count must be >= 1".into()));
    }
    let target = (cfg.alpha_d * n_d as f64 - 1e-9).ceil().max(1.0) as usize;
    let radius = (stroke_width / 2.0).floor().max(0.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut image = page.clone();
    let mut skel = skeleton.clone();
    let mut page_count = count_components(&image);
    let mut removed = Vec::new();
    let mut rejected: BTreeSet<usize> = BTreeSet::new();

    while removed.len() < target {
        let candidates: Vec<usize> = g
            .edges
            .iter()
            .filter(|e| !removed.contains(&e.id) && !rejected.contains(&e.id))
            .filter(|e| removal_keeps_components(&skel, &e.pixels))
            .map(|e| e.id)
            .collect();
        let Some(&pick) = candidates.choose(&mut rng) else {
            break;
        };
        let edge = &g.edges[pick].pixels;
        let erase = erase_mask(&image, &skel, edge, radius);
        let mut next = image.clone();
        for &(r, c) in &erase {
            next.set(r, c, false);
        }
        let next_count = count_components(&next);
        if next_count != page_count {
            rejected.insert(pick);
            continue;
        }
        page_count = next_count;
        image = next;
        for &(r, c) in edge {
            skel.set(r, c, false);
        }
        removed.push(pick);
    }
    let exhausted = removed.len() < target;
    Ok(DropResult {
        image,
        removed,
        exhausted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Half {
    Top,
    Bottom,
    Full,
}

impl std::fmt::Display for Half {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Half::Top => "top",
            Half::Bottom => "bottom",
            Half::Full => "full",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandedSample {
    pub sample_id: String,
    pub parent_page_id: String,
    pub half: Half,
    /// 0 for the half itself, 1..=10 for DropStroke variants.
    pub variant_index: u32,
    pub image: BinaryImage,
    pub removed_edges: usize,
    pub exhausted: bool,
}

/// Row at which to split the page: the middle of the inter-line gap whose
/// middle is nearest the page's mid-height.
pub fn split_row(page: &PageAnalysis) -> Result<usize> {
    let lines = &page.segmentation.lines;
    if lines.len() < 2 {
        return Err(Error::TooShort);
    }
    let mid = page.binary.height() as f64 / 2.0;
    let mut best: Option<(f64, usize)> = None;
    for pair in lines.windows(2) {
        let lo = pair[0].bbox.bottom + 1;
        let hi = pair[1].bbox.top.max(lo);
        let row = (lo + hi) / 2;
        let d = (row as f64 - mid).abs();
        if best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, row));
        }
    }
    Ok(best.expect("at least one gap").1)
}

fn crop(img: &BinaryImage, top: usize, bottom: usize) -> BinaryImage {
    let mut out = BinaryImage::new(img.width(), bottom - top);
    for (r, c) in img.ink_points() {
        if r >= top && r < bottom {
            out.set(r - top, c, true);
        }
    }
    out
}

/// Sample id of a page half or variant.
pub fn sample_id(page_id: &str, half: Half, variant: u32) -> String {
    format!("{page_id}-{half}-{variant:02}")
}

fn expand_half(
    page_id: &str,
    half: Half,
    img: BinaryImage,
    seg: &SegmentConfig,
    cfg: &AugmentConfig,
) -> Result<Vec<ExpandedSample>> {
    let a = PageAnalysis::analyze_binary(&img, seg);
    let n_d = a.segmentation.characters.len().max(1);
    let width = a.stats.map_or(1.0, |s| s.mean_width);
    let mut out = vec![ExpandedSample {
        sample_id: sample_id(page_id, half, 0),
        parent_page_id: page_id.to_string(),
        half,
        variant_index: 0,
        image: img.clone(),
        removed_edges: 0,
        exhausted: false,
    }];
    let half_seed = seed::derive(cfg.seed, &format!("{page_id}/{half}"));
    for v in 1..=VARIANTS_PER_HALF as u32 {
        let vcfg = AugmentConfig {
            alpha_d: cfg.alpha_d,
            seed: seed::derive_index(half_seed, v as u64),
        };
        let d = drop_strokes(&img, &a.graph, &a.skeleton.image, n_d, width, &vcfg)?;
        out.push(ExpandedSample {
            sample_id: sample_id(page_id, half, v),
            parent_page_id: page_id.to_string(),
            half,
            variant_index: v,
            image: d.image,
            removed_edges: d.removed.len(),
            exhausted: d.exhausted,
        });
    }
    Ok(out)
}

/// Expands one page into its 22 samples: top half, ten top variants, bottom
/// half, ten bottom variants.
pub fn expand_page(
    page_id: &str,
    page: &PageAnalysis,
    seg: &SegmentConfig,
    cfg: &AugmentConfig,
) -> Result<Vec<ExpandedSample>> {
    let row = split_row(page)?;
    let img = &page.binary;
    let mut out = expand_half(page_id, Half::Top, crop(img, 0, row), seg, cfg)?;
    out.extend(expand_half(
        page_id,
        Half::Bottom,
        crop(img, row, img.height()),
        seg,
        cfg,
    )?);
    Ok(out)
}

/// Sample identity as needed by the split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleTag {
    pub sample_id: String,
    pub half: Half,
    pub variant_index: u32,
}

impl From<&ExpandedSample> for SampleTag {
    fn from(s: &ExpandedSample) -> Self {
        Self {
            sample_id: s.sample_id.clone(),
            half: s.half,
            variant_index: s.variant_index,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

fn check_page(writer: &str, idx: usize, page: &[SampleTag]) -> Result<()> {
    let count = |h: Half| page.iter().filter(|s| s.half == h).count();
    let per_half = 1 + VARIANTS_PER_HALF;
    if page.len() != SAMPLES_PER_PAGE || count(Half::Top) != per_half || count(Half::Bottom) != per_half {
        return Err(Error::IncompleteSet {
            writer: writer.to_string(),
            reason: format!(
                "page {} has {} samples ({} top, {} bottom), expected {} per half",
                idx + 1,
                page.len(),
                count(Half::Top),
                count(Half::Bottom),
                per_half
            ),
        });
    }
    Ok(())
}

/// The 2:1:1 split of one writer's two pages in one style set.
pub fn split211(writer: &str, pages: &[Vec<SampleTag>]) -> Result<Split> {
    if pages.len() != 2 {
        return Err(Error::IncompleteSet {
            writer: writer.to_string(),
            reason: format!("expected 2 pages, found {}", pages.len()),
        });
    }
    for (i, p) in pages.iter().enumerate() {
        check_page(writer, i, p)?;
    }
    let ids = |page: &[SampleTag], half: Half| -> Vec<String> {
        page.iter()
            .filter(|s| s.half == half)
            .map(|s| s.sample_id.clone())
            .collect()
    };
    Ok(Split {
        train: pages[0].iter().map(|s| s.sample_id.clone()).collect(),
        validation: ids(&pages[1], Half::Top),
        test: ids(&pages[1], Half::Bottom),
    })
}
