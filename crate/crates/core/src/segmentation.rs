//! Projection-profile baselines for text-line, word and character
//! segmentation.
//!
//! Lines come from valleys in the smoothed horizontal ink projection, words
//! from large within-line gaps and characters from connected components
//! merged when they overlap horizontally. Very small components (dots,
//! commas, specks) are dropped before any of this.

use serde::{Deserialize, Serialize};

use crate::imaging::{label_components, BinaryImage, Labels};

/// Inclusive pixel box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBox {
    pub top: usize,
    pub left: usize,
    pub bottom: usize,
    pub right: usize,
}

impl BBox {
    fn point(r: usize, c: usize) -> Self {
        Self {
            top: r,
            left: c,
            bottom: r,
            right: c,
        }
    }

    fn include(&mut self, other: &BBox) {
        self.top = self.top.min(other.top);
        self.left = self.left.min(other.left);
        self.bottom = self.bottom.max(other.bottom);
        self.right = self.right.max(other.right);
    }

    pub fn width(&self) -> usize {
        self.right - self.left + 1
    }

    pub fn height(&self) -> usize {
        self.bottom - self.top + 1
    }

    pub fn contains(&self, row: f64, col: f64) -> bool {
        row >= self.top as f64
            && row <= self.bottom as f64
            && col >= self.left as f64
            && col <= self.right as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextLine {
    pub bbox: BBox,
    pub component_ids: Vec<u32>,
    /// Slope (rows per column) of the least-squares line through the
    /// component centroids.
    pub skew_proxy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordBox {
    pub line: usize,
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterBox {
    pub line: usize,
    pub bbox: BBox,
    /// Mean ink coordinate `(row, col)`.
    pub center_of_gravity: (f64, f64),
    pub component_ids: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentConfig {
    /// Components smaller than this fraction of the median area are noise.
    pub min_area_ratio: f64,
    /// A gap wider than this multiple of the line's median gap starts a word.
    pub word_gap_factor: f64,
    /// A gap wider than this fraction of the line height also starts a word.
    pub word_gap_line_ratio: f64,
    /// Components overlapping horizontally by at least this fraction of the
    /// narrower one belong to one character.
    pub char_overlap: f64,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            min_area_ratio: 0.1,
            word_gap_factor: 1.5,
            word_gap_line_ratio: 0.5,
            char_overlap: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    pub lines: Vec<TextLine>,
    pub words: Vec<WordBox>,
    pub characters: Vec<CharacterBox>,
    /// Labels of the components dropped as too small.
    pub discarded: Vec<u32>,
}

struct Component {
    id: u32,
    bbox: BBox,
    area: usize,
    sum_r: f64,
    sum_c: f64,
}

fn components(labels: &Labels) -> Vec<Component> {
    let mut comps: Vec<Option<Component>> = (0..=labels.count).map(|_| None).collect();
    for r in 0..labels.height {
        for c in 0..labels.width {
            let l = labels.get(r, c);
            if l == 0 {
                continue;
            }
            let comp = comps[l as usize].get_or_insert_with(|| Component {
                id: l,
                bbox: BBox::point(r, c),
                area: 0,
                sum_r: 0.0,
                sum_c: 0.0,
            });
            comp.bbox.include(&BBox::point(r, c));
            comp.area += 1;
            comp.sum_r += r as f64;
            comp.sum_c += c as f64;
        }
    }
    comps.into_iter().flatten().collect()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Row bands of the 3-row moving average of the projection profile.
fn line_bands(comps: &[&Component], labels: &Labels) -> Vec<(usize, usize)> {
    let keep: std::collections::HashSet<u32> = comps.iter().map(|c| c.id).collect();
    let mut profile = vec![0usize; labels.height];
    for (r, p) in profile.iter_mut().enumerate() {
        *p = (0..labels.width)
            .filter(|&c| {
                let l = labels.get(r, c);
                l != 0 && keep.contains(&l)
            })
            .count();
    }
    let smoothed: Vec<usize> = (0..profile.len())
        .map(|r| {
            let lo = r.saturating_sub(1);
            let hi = (r + 1).min(profile.len() - 1);
            profile[lo..=hi].iter().sum()
        })
        .collect();
    let mut bands = Vec::new();
    let mut start = None;
    for (r, &v) in smoothed.iter().enumerate() {
        match (v > 0, start) {
            (true, None) => start = Some(r),
            (false, Some(s)) => {
                bands.push((s, r - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        bands.push((s, smoothed.len() - 1));
    }
    bands
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Segments a binarized page into lines, words and characters.
pub fn segment_page(img: &BinaryImage, cfg: &SegmentConfig) -> Segmentation {
    let labels = label_components(img);
    let all = components(&labels);
    if all.is_empty() {
        return Segmentation {
            lines: Vec::new(),
            words: Vec::new(),
            characters: Vec::new(),
            discarded: Vec::new(),
        };
    }
    let mut areas: Vec<f64> = all.iter().map(|c| c.area as f64).collect();
    let min_area = cfg.min_area_ratio * median(&mut areas);
    let (kept, dropped): (Vec<&Component>, Vec<&Component>) =
        all.iter().partition(|c| c.area as f64 >= min_area);
    let discarded = dropped.iter().map(|c| c.id).collect();

    let bands = line_bands(&kept, &labels);
    let mut members: Vec<Vec<&Component>> = vec![Vec::new(); bands.len()];
    for comp in &kept {
        let best = bands
            .iter()
            .enumerate()
            .map(|(i, &(t, b))| {
                let lo = t.max(comp.bbox.top);
                let hi = b.min(comp.bbox.bottom);
                (i, if hi >= lo { hi - lo + 1 } else { 0 })
            })
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .expect("every kept component lies in some band");
        members[best].push(comp);
    }

    let mut lines = Vec::new();
    let mut words = Vec::new();
    let mut characters = Vec::new();
    for mut comps in members.into_iter().filter(|m| !m.is_empty()) {
        comps.sort_by_key(|c| (c.bbox.left, c.bbox.top, c.id));
        let line_idx = lines.len();
        let mut bbox = comps[0].bbox;
        for c in &comps {
            bbox.include(&c.bbox);
        }

        // Least-squares slope through component centroids.
        let pts: Vec<(f64, f64)> = comps
            .iter()
            .map(|c| (c.sum_c / c.area as f64, c.sum_r / c.area as f64))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let skew_proxy = if sxx > 0.0 { sxy / sxx } else { 0.0 };

        // Words from gaps between running horizontal extents.
        let mut gaps = Vec::new();
        let mut right = comps[0].bbox.right;
        for c in &comps[1..] {
            if c.bbox.left > right + 1 {
                gaps.push((c.bbox.left - right - 1) as f64);
            }
            right = right.max(c.bbox.right);
        }
        let median_gap = if gaps.is_empty() {
            0.0
        } else {
            median(&mut gaps.clone())
        };
        let line_height = bbox.height() as f64;
        let mut word = comps[0].bbox;
        let mut right = comps[0].bbox.right;
        for c in &comps[1..] {
            let gap = c.bbox.left as f64 - right as f64 - 1.0;
            let split = gap > 0.0
                && (gap > cfg.word_gap_factor * median_gap
                    || gap > cfg.word_gap_line_ratio * line_height);
            if split {
                words.push(WordBox {
                    line: line_idx,
                    bbox: word,
                });
                word = c.bbox;
            } else {
                word.include(&c.bbox);
            }
            right = right.max(c.bbox.right);
        }
        words.push(WordBox {
            line: line_idx,
            bbox: word,
        });

        // Characters: merge horizontally overlapping components.
        let mut parent: Vec<usize> = (0..comps.len()).collect();
        for i in 0..comps.len() {
            for j in i + 1..comps.len() {
                let (a, b) = (&comps[i].bbox, &comps[j].bbox);
                let lo = a.left.max(b.left);
                let hi = a.right.min(b.right);
                if hi < lo {
                    continue;
                }
                let overlap = (hi - lo + 1) as f64;
                if overlap >= cfg.char_overlap * a.width().min(b.width()) as f64 {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..comps.len() {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
        for idxs in groups.values() {
            let mut cb = comps[idxs[0]].bbox;
            let (mut sr, mut sc, mut area) = (0.0, 0.0, 0usize);
            let mut ids = Vec::new();
            for &i in idxs {
                cb.include(&comps[i].bbox);
                sr += comps[i].sum_r;
                sc += comps[i].sum_c;
                area += comps[i].area;
                ids.push(comps[i].id);
            }
            characters.push(CharacterBox {
                line: line_idx,
                bbox: cb,
                center_of_gravity: (sr / area as f64, sc / area as f64),
                component_ids: ids,
            });
        }

        lines.push(TextLine {
            bbox,
            component_ids: comps.iter().map(|c| c.id).collect(),
            skew_proxy,
        });
    }

    Segmentation {
        lines,
        words,
        characters,
        discarded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(img: &mut BinaryImage, top: usize, left: usize, h: usize, w: usize) {
        for r in top..top + h {
            for c in left..left + w {
                img.set(r, c, true);
            }
        }
    }

    #[test]
    fn blank_page_is_empty() {
        let s = segment_page(&BinaryImage::new(40, 20), &SegmentConfig::default());
        assert!(s.lines.is_empty() && s.words.is_empty() && s.characters.is_empty());
    }

    #[test]
    fn five_spaced_glyphs() {
        let mut img = BinaryImage::new(120, 30);
        for i in 0..5 {
            block(&mut img, 10, 5 + i * 22, 10, 8);
        }
        let s = segment_page(&img, &SegmentConfig::default());
        assert_eq!(s.lines.len(), 1);
        assert_eq!(s.words.len(), 5);
        assert_eq!(s.characters.len(), 5);
    }

    #[test]
    fn two_bands_two_lines() {
        let mut img = BinaryImage::new(80, 60);
        for i in 0..4 {
            block(&mut img, 5, 5 + i * 15, 10, 6);
            block(&mut img, 40, 5 + i * 15, 10, 6);
        }
        let s = segment_page(&img, &SegmentConfig::default());
        assert_eq!(s.lines.len(), 2);
        assert!(s.lines[0].bbox.top < s.lines[1].bbox.top);
        assert!(s.lines.iter().all(|l| l.skew_proxy.abs() < 1e-12));
    }

    #[test]
    fn stacked_components_form_one_character() {
        let mut img = BinaryImage::new(40, 30);
        block(&mut img, 8, 10, 8, 8);
        block(&mut img, 18, 11, 4, 6);
        let s = segment_page(&img, &SegmentConfig::default());
        assert_eq!(s.characters.len(), 1);
        assert_eq!(s.characters[0].component_ids.len(), 2);
        let (r, c) = s.characters[0].center_of_gravity;
        assert!(s.characters[0].bbox.contains(r, c));
    }

    #[test]
    fn specks_are_discarded() {
        let mut img = BinaryImage::new(60, 30);
        for i in 0..3 {
            block(&mut img, 10, 5 + i * 15, 10, 8);
        }
        img.set(2, 55, true);
        let s = segment_page(&img, &SegmentConfig::default());
        assert_eq!(s.discarded.len(), 1);
        assert_eq!(s.characters.len(), 3);
    }
}
