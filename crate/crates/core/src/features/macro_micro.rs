use super::{MACRO_DIM, FMM_DIM};
use crate::imaging::{BinaryImage, ContourKind, RING};
use crate::page::PageAnalysis;
use crate::segmentation::BBox;

/// Per-character micro bits: gradient (192), structural (192), concavity (128).
pub const GSC_BITS: usize = 512;
const GRID: usize = 4;
const GRADIENT_DIRS: usize = 12;
const STRUCT_PATTERNS: usize = 12;
const CONCAVITY_CLASSES: usize = 8;

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

fn mean(values: &[f64]) -> f64 {
    ratio(values.iter().sum(), values.len() as f64)
}

/// The 16 macro ratios `f1..f16`.
pub fn macro_features(page: &PageAnalysis) -> [f64; MACRO_DIM] {
    let mut f = [0.0; MACRO_DIM];
    let (w, h) = (page.binary.width() as f64, page.binary.height() as f64);
    let seg = &page.segmentation;

    // f1: gray entropy in bits, scaled to [0, 1].
    let hist = page.gray.histogram();
    let total: u64 = hist.iter().sum();
    f[0] = -hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            p * p.log2()
        })
        .sum::<f64>()
        / 8.0;
    f[1] = page.threshold as f64 / 255.0;
    f[2] = page.binary.ink_count() as f64 / (w * h);

    // f4-f5: contour counts per character.
    let n_chars = seg.characters.len() as f64;
    let interior = page
        .contours
        .iter()
        .filter(|c| c.kind == ContourKind::Interior)
        .count() as f64;
    f[3] = ratio(interior, n_chars);
    f[4] = ratio(page.contours.len() as f64 - interior, n_chars);

    // f6-f9: chain-code slope classes (vertical, negative, positive,
    // horizontal), and f10 from 5-step chords within 45 degrees of vertical.
    let mut classes = [0.0f64; 4];
    let mut slant = Vec::new();
    for c in &page.contours {
        if c.len() < 2 {
            continue;
        }
        for i in 0..c.len() {
            let (a, b) = (c.at(i, 0), c.at(i, 1));
            let dr = b.0 as isize - a.0 as isize;
            let dc = b.1 as isize - a.1 as isize;
            let k = match (dr, dc) {
                (_, 0) => 0,
                (0, _) => 3,
                // Rows grow downward: same signs fall to the right.
                _ if dr * dc > 0 => 1,
                _ => 2,
            };
            classes[k] += 1.0;
            let e = c.at(i, 5);
            let dx = e.1 as f64 - a.1 as f64;
            let dy = a.0 as f64 - e.0 as f64;
            if dx != 0.0 || dy != 0.0 {
                let phi = dy.atan2(dx).to_degrees().rem_euclid(180.0);
                if (45.0..=135.0).contains(&phi) {
                    slant.push((phi - 90.0).abs() / 45.0);
                }
            }
        }
    }
    let n_codes: f64 = classes.iter().sum();
    for k in 0..4 {
        f[5 + k] = ratio(classes[k], n_codes);
    }
    f[9] = mean(&slant);

    if let Some(first) = seg.lines.first() {
        let mut block: BBox = first.bbox;
        for l in &seg.lines {
            block.top = block.top.min(l.bbox.top);
            block.left = block.left.min(l.bbox.left);
            block.bottom = block.bottom.max(l.bbox.bottom);
            block.right = block.right.max(l.bbox.right);
        }
        let heights: Vec<f64> = seg.lines.iter().map(|l| l.bbox.height() as f64).collect();
        f[10] = mean(&heights) / h;
        f[11] = block.width() as f64 / block.height() as f64;
        f[12] = block.left as f64 / w;

        let (mut upper, mut lower) = (Vec::new(), Vec::new());
        for l in &seg.lines {
            let b = l.bbox;
            let third = b.height() as f64 / 3.0;
            let (mut top, mut bottom, mut all) = (0.0, 0.0, 0.0);
            for r in b.top..=b.bottom {
                let ink = (b.left..=b.right).filter(|&c| page.binary.get(r, c)).count() as f64;
                let y = (r - b.top) as f64;
                if y < third {
                    top += ink;
                } else if y >= 2.0 * third {
                    bottom += ink;
                }
                all += ink;
            }
            upper.push(ratio(top, all));
            lower.push(ratio(bottom, all));
        }
        f[13] = mean(&upper);
        f[14] = mean(&lower);

        let words: Vec<f64> = seg
            .words
            .iter()
            .map(|wb| wb.bbox.width() as f64 / seg.lines[wb.line].bbox.height() as f64)
            .collect();
        f[15] = mean(&words);
    }
    f
}

fn cell_of(b: &BBox, r: usize, c: usize) -> usize {
    let gr = (r - b.top) * GRID / b.height();
    let gc = (c - b.left) * GRID / b.width();
    gr * GRID + gc
}

/// Bits set where a cell's count exceeds that cell's mean over the classes.
fn above_cell_mean(counts: &[f64], classes: usize, bits: &mut [bool]) {
    for (cell, chunk) in counts.chunks(classes).enumerate() {
        let m = mean(chunk);
        for (k, &v) in chunk.iter().enumerate() {
            bits[cell * classes + k] = v > 0.0 && v > m;
        }
    }
}

fn gradient_bits(img: &BinaryImage, b: &BBox, bits: &mut [bool]) {
    let mut counts = vec![0.0; GRID * GRID * GRADIENT_DIRS];
    let px = |r: isize, c: isize| -> f64 {
        let inside = r >= b.top as isize
            && r <= b.bottom as isize
            && c >= b.left as isize
            && c <= b.right as isize;
        if inside && img.get_signed(r, c) {
            1.0
        } else {
            0.0
        }
    };
    for r in b.top..=b.bottom {
        for c in b.left..=b.right {
            let (ri, ci) = (r as isize, c as isize);
            let gx = px(ri - 1, ci + 1) + 2.0 * px(ri, ci + 1) + px(ri + 1, ci + 1)
                - px(ri - 1, ci - 1)
                - 2.0 * px(ri, ci - 1)
                - px(ri + 1, ci - 1);
            // y points up.
            let gy = px(ri - 1, ci - 1) + 2.0 * px(ri - 1, ci) + px(ri - 1, ci + 1)
                - px(ri + 1, ci - 1)
                - 2.0 * px(ri + 1, ci)
                - px(ri + 1, ci + 1);
            if gx == 0.0 && gy == 0.0 {
                continue;
            }
            let a = gy.atan2(gx).to_degrees().rem_euclid(360.0);
            let d = ((a / 30.0) as usize).min(GRADIENT_DIRS - 1);
            counts[cell_of(b, r, c) * GRADIENT_DIRS + d] += 1.0;
        }
    }
    above_cell_mean(&counts, GRADIENT_DIRS, bits);
}

fn structural_bits(skel: &BinaryImage, b: &BBox, bits: &mut [bool]) {
    let mut counts = vec![0.0; GRID * GRID * STRUCT_PATTERNS];
    for r in b.top..=b.bottom {
        for c in b.left..=b.right {
            if !skel.get(r, c) {
                continue;
            }
            let n: Vec<bool> = RING
                .iter()
                .map(|&(dr, dc)| skel.get_signed(r as isize + dr, c as isize + dc))
                .collect();
            let (north, ne, east, se, south, sw, west, nw) =
                (n[0], n[1], n[2], n[3], n[4], n[5], n[6], n[7]);
            let single = n.iter().filter(|&&x| x).count() == 1;
            let patterns = [
                west && east,
                north && south,
                ne && sw,
                nw && se,
                north && east,
                east && south,
                south && west,
                west && north,
                single && (north || ne || nw),
                single && (south || se || sw),
                single && east,
                single && west,
            ];
            let cell = cell_of(b, r, c);
            for (k, &hit) in patterns.iter().enumerate() {
                if hit {
                    counts[cell * STRUCT_PATTERNS + k] += 1.0;
                }
            }
        }
    }
    above_cell_mean(&counts, STRUCT_PATTERNS, bits);
}

fn concavity_bits(img: &BinaryImage, b: &BBox, bits: &mut [bool]) {
    let (bw, bh) = (b.width(), b.height());
    let at = |r: usize, c: usize| img.get(r, c);
    let mut cell_ink = vec![0.0; GRID * GRID];
    let mut cell_area = vec![0.0; GRID * GRID];
    let mut long_h = vec![false; GRID * GRID];
    let mut long_v = vec![false; GRID * GRID];
    let mut classes = vec![false; GRID * GRID * 5];

    let min_h = (bw / 3).max(3);
    let min_v = (bh / 3).max(3);
    for r in b.top..=b.bottom {
        let mut c = b.left;
        while c <= b.right {
            if !at(r, c) {
                c += 1;
                continue;
            }
            let start = c;
            while c <= b.right && at(r, c) {
                c += 1;
            }
            if c - start >= min_h {
                for x in start..c {
                    long_h[cell_of(b, r, x)] = true;
                }
            }
        }
    }
    for c in b.left..=b.right {
        let mut r = b.top;
        while r <= b.bottom {
            if !at(r, c) {
                r += 1;
                continue;
            }
            let start = r;
            while r <= b.bottom && at(r, c) {
                r += 1;
            }
            if r - start >= min_v {
                for y in start..r {
                    long_v[cell_of(b, y, c)] = true;
                }
            }
        }
    }

    let mut ink_total = 0.0;
    for r in b.top..=b.bottom {
        for c in b.left..=b.right {
            let cell = cell_of(b, r, c);
            cell_area[cell] += 1.0;
            if at(r, c) {
                cell_ink[cell] += 1.0;
                ink_total += 1.0;
                continue;
            }
            let up = (b.top..r).any(|y| at(y, c));
            let down = (r + 1..=b.bottom).any(|y| at(y, c));
            let left = (b.left..c).any(|x| at(r, x));
            let right = (c + 1..=b.right).any(|x| at(r, x));
            let class = match (up, down, left, right) {
                (true, true, true, true) => Some(0),
                (false, true, true, true) => Some(1),
                (true, false, true, true) => Some(2),
                (true, true, false, true) => Some(3),
                (true, true, true, false) => Some(4),
                _ => None,
            };
            if let Some(k) = class {
                classes[cell * 5 + k] = true;
            }
        }
    }
    let density = ink_total / (bw * bh) as f64;
    for cell in 0..GRID * GRID {
        let base = cell * CONCAVITY_CLASSES;
        bits[base] = ratio(cell_ink[cell], cell_area[cell]) > density;
        bits[base + 1] = long_h[cell];
        bits[base + 2] = long_v[cell];
        bits[base + 3..base + 8].copy_from_slice(&classes[cell * 5..cell * 5 + 5]);
    }
}

/// Page-level micro histogram: per-character bit vectors summed and divided
/// by the character count. All zero when there are no characters.
pub fn micro_histogram(page: &PageAnalysis) -> Vec<f64> {
    let mut hist = vec![0.0; GSC_BITS];
    let chars = &page.segmentation.characters;
    let g = GRID * GRID * GRADIENT_DIRS;
    let s = GRID * GRID * STRUCT_PATTERNS;
    for ch in chars {
        let mut bits = vec![false; GSC_BITS];
        gradient_bits(&page.binary, &ch.bbox, &mut bits[..g]);
        structural_bits(&page.skeleton.image, &ch.bbox, &mut bits[g..g + s]);
        concavity_bits(&page.binary, &ch.bbox, &mut bits[g + s..]);
        for (h, &b) in hist.iter_mut().zip(&bits) {
            if b {
                *h += 1.0;
            }
        }
    }
    if !chars.is_empty() {
        hist.iter_mut().for_each(|v| *v /= chars.len() as f64);
    }
    hist
}

/// F_MM: the 16 macro ratios followed by the micro histogram.
pub fn extract_fmm(page: &PageAnalysis) -> Vec<f64> {
    let mut v = macro_features(page).to_vec();
    v.extend(micro_histogram(page));
    debug_assert_eq!(v.len(), FMM_DIM);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::GrayImage;
    use crate::segmentation::SegmentConfig;

    fn page_with_glyphs(thick: usize) -> GrayImage {
        let mut g = GrayImage::filled(120, 60, 255);
        for i in 0..4 {
            let left = 10 + i * 25;
            for r in 15..40 {
                for c in left..left + thick {
                    g.set(r, c, 0);
                }
            }
            for c in left..left + 12 {
                for r in 15..15 + thick {
                    g.set(r, c, 0);
                }
            }
        }
        g
    }

    #[test]
    fn blank_page() {
        let g = GrayImage::filled(40, 30, 255);
        let p = PageAnalysis::analyze(&g, &SegmentConfig::default());
        let v = extract_fmm(&p);
        assert_eq!(v.len(), FMM_DIM);
        assert_eq!(v[2], 0.0);
        assert!(v[MACRO_DIM..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn deterministic_and_bounded() {
        let g = page_with_glyphs(3);
        let cfg = SegmentConfig::default();
        let a = extract_fmm(&PageAnalysis::analyze(&g, &cfg));
        let b = extract_fmm(&PageAnalysis::analyze(&g.clone(), &cfg));
        assert_eq!(a, b);
        assert!(a[MACRO_DIM..].iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert!(a[MACRO_DIM..].iter().any(|&x| x > 0.0));
        let classes: f64 = a[5..9].iter().sum();
        assert!((classes - 1.0).abs() < 1e-9);
    }

    #[test]
    fn thicker_ink_raises_ink_fraction() {
        let cfg = SegmentConfig::default();
        let thin = extract_fmm(&PageAnalysis::analyze(&page_with_glyphs(2), &cfg));
        let thick = extract_fmm(&PageAnalysis::analyze(&page_with_glyphs(4), &cfg));
        assert!(thick[2] > thin[2]);
    }
}
