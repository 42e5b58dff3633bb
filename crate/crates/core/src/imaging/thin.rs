use super::{label::count_components, BinaryImage, Point, StrokeStats, RING};

/// A one-pixel-wide stroke raster together with its ink length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    pub image: BinaryImage,
    pub stroke_length_px: usize,
}

impl Skeleton {
    pub fn from_image(image: BinaryImage) -> Self {
        let stroke_length_px = image.ink_count();
        Self {
            image,
            stroke_length_px,
        }
    }

    pub fn component_count(&self) -> usize {
        count_components(&self.image)
    }
}

/// Neighborhood bits in [`RING`] order (N, NE, E, SE, S, SW, W, NW).
fn ring_bits(img: &BinaryImage, r: usize, c: usize) -> [bool; 8] {
    let mut bits = [false; 8];
    for (i, &(dr, dc)) in RING.iter().enumerate() {
        bits[i] = img.get_signed(r as isize + dr, c as isize + dc);
    }
    bits
}

/// Number of 0 -> 1 transitions around the cyclic ring.
fn crossings(bits: &[bool; 8]) -> usize {
    (0..8).filter(|&i| !bits[i] && bits[(i + 1) % 8]).count()
}

fn zhang_suen_deletable(bits: &[bool; 8], first: bool) -> bool {
    let b = bits.iter().filter(|&&x| x).count();
    if !(2..=6).contains(&b) || crossings(bits) != 1 {
        return false;
    }
    let [n, _, e, _, s, _, w, _] = *bits;
    if first {
        !(n && e && s) && !(e && s && w)
    } else {
        !(n && e && w) && !(n && s && w)
    }
}

/// Simple-point test for (8, 4) topology: the ink neighbors form one
/// 8-connected group and exactly one 4-connected background group touches
/// the center through an edge neighbor.
fn is_simple(bits: &[bool; 8]) -> bool {
    // Ink groups: consecutive ring entries are always 8-adjacent; edge
    // entries (even indices) also reach across a missing corner.
    let mut ink_groups = 0;
    let mut seen = [false; 8];
    for start in 0..8 {
        if !bits[start] || seen[start] {
            continue;
        }
        ink_groups += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            let mut adj = vec![(i + 1) % 8, (i + 7) % 8];
            if i % 2 == 0 {
                adj.push((i + 2) % 8);
                adj.push((i + 6) % 8);
            }
            for j in adj {
                if bits[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    if ink_groups != 1 {
        return false;
    }
    // Background groups that contain an edge neighbor; background cells are
    // 4-adjacent only to their ring predecessor and successor.
    let mut bg_groups = 0;
    let mut seen = [false; 8];
    for start in (0..8).step_by(2) {
        if bits[start] || seen[start] {
            continue;
        }
        bg_groups += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for j in [(i + 1) % 8, (i + 7) % 8] {
                if !bits[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    bg_groups == 1
}

/// One Zhang-Suen subiteration. Candidates are marked on a snapshot and then
/// confirmed one at a time against the current raster, which keeps the
/// parallel pass from erasing 2x2 blocks or breaking connectivity.
fn zhang_suen_pass(img: &mut BinaryImage, first: bool) -> bool {
    let candidates: Vec<Point> = img
        .ink_points()
        .filter(|&(r, c)| zhang_suen_deletable(&ring_bits(img, r, c), first))
        .collect();
    let mut changed = false;
    for (r, c) in candidates {
        if zhang_suen_deletable(&ring_bits(img, r, c), first) {
            img.set(r, c, false);
            changed = true;
        }
    }
    changed
}

/// Removes staircase corners: simple points that are not stroke ends.
fn remove_redundant(img: &mut BinaryImage) -> bool {
    let mut changed = false;
    let points: Vec<Point> = img.ink_points().collect();
    for (r, c) in points {
        let bits = ring_bits(img, r, c);
        let b = bits.iter().filter(|&&x| x).count();
        if b >= 2 && is_simple(&bits) {
            img.set(r, c, false);
            changed = true;
        }
    }
    changed
}

/// Zhang-Suen thinning followed by staircase cleanup, iterated to a joint
/// fixpoint. The result is 8-minimal and idempotent under `thin`.
pub fn thin(img: &BinaryImage) -> Skeleton {
    let mut out = img.clone();
    loop {
        let mut changed = false;
        while {
            let a = zhang_suen_pass(&mut out, true);
            let b = zhang_suen_pass(&mut out, false);
            a || b
        } {
            changed = true;
        }
        if remove_redundant(&mut out) {
            changed = true;
        }
        if !changed {
            break;
        }
    }
    Skeleton::from_image(out)
}

/// Removes redundant pixels left next to erased ones, following any cascade.
fn clean_around(img: &mut BinaryImage, erased: &[Point]) {
    let (h, w) = (img.height(), img.width());
    let mut queue: Vec<Point> = Vec::new();
    let push_neighbors = |queue: &mut Vec<Point>, (r, c): Point| {
        for &(dr, dc) in &RING {
            let (nr, nc) = (r as isize + dr, c as isize + dc);
            if nr >= 0 && nc >= 0 && (nr as usize) < h && (nc as usize) < w {
                queue.push((nr as usize, nc as usize));
            }
        }
    };
    for &p in erased {
        push_neighbors(&mut queue, p);
    }
    while let Some((r, c)) = queue.pop() {
        if !img.get(r, c) {
            continue;
        }
        let bits = ring_bits(img, r, c);
        if bits.iter().filter(|&&x| x).count() >= 2 && is_simple(&bits) {
            img.set(r, c, false);
            push_neighbors(&mut queue, (r, c));
        }
    }
}

/// Pixels from an end point up to (not including) the first junction pixel.
/// Returns `None` when the walk reaches another end instead of a junction.
fn spur_from(img: &BinaryImage, end: Point) -> Option<Vec<Point>> {
    let mut path = vec![end];
    let mut prev: Option<Point> = None;
    let mut cur = end;
    loop {
        let next = img
            .neighbors(cur.0, cur.1)
            .find(|&p| Some(p) != prev && !path.contains(&p))?;
        if img.neighbor_count(next.0, next.1) >= 3 {
            return Some(path);
        }
        if img.neighbor_count(next.0, next.1) == 1 {
            return None;
        }
        prev = Some(cur);
        cur = next;
        path.push(cur);
    }
}

/// Removes end-to-junction branches shorter than `ceil(mean_width / 2)`,
/// shortest first, recomputing after every removal until none remain.
pub fn prune_spurs(sk: &Skeleton, stats: &StrokeStats) -> Skeleton {
    let min_len = (stats.mean_width / 2.0).ceil() as usize;
    let mut img = sk.image.clone();
    loop {
        let shortest = img
            .ink_points()
            .filter(|&(r, c)| img.neighbor_count(r, c) == 1)
            .filter_map(|p| spur_from(&img, p))
            .filter(|path| path.len() < min_len)
            .min_by_key(|path| (path.len(), path[0]));
        match shortest {
            Some(path) => {
                for &(r, c) in &path {
                    img.set(r, c, false);
                }
                clean_around(&mut img, &path);
            }
            None => break,
        }
    }
    Skeleton::from_image(img)
}

/// Every end-to-junction branch length in the skeleton.
pub fn spur_lengths(img: &BinaryImage) -> Vec<usize> {
    img.ink_points()
        .filter(|&(r, c)| img.neighbor_count(r, c) == 1)
        .filter_map(|p| spur_from(img, p))
        .map(|p| p.len())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(mean: f64) -> StrokeStats {
        StrokeStats {
            mean_width: mean,
            std_width: 0.0,
        }
    }

    #[test]
    fn thick_bar_thins_to_line() {
        let mut img = BinaryImage::new(24, 7);
        for r in 2..5 {
            for c in 2..22 {
                img.set(r, c, true);
            }
        }
        let sk = thin(&img);
        assert!(
            (18..=20).contains(&sk.stroke_length_px),
            "length {}",
            sk.stroke_length_px
        );
        for (r, c) in sk.image.ink_points() {
            assert!(sk.image.neighbor_count(r, c) <= 2);
        }
        assert_eq!(sk.component_count(), 1);
        let rows: std::collections::BTreeSet<usize> = sk.image.ink_points().map(|p| p.0).collect();
        assert_eq!(rows.len(), 1, "skeleton must be one pixel tall");
    }

    #[test]
    fn single_pixel_survives() {
        let img = BinaryImage::from_ascii("...\n.#.\n...");
        assert_eq!(thin(&img).image, img);
    }

    #[test]
    fn two_by_two_block_keeps_its_component() {
        let img = BinaryImage::from_ascii("....\n.##.\n.##.\n....");
        let sk = thin(&img);
        assert_eq!(sk.component_count(), 1);
        assert!(sk.stroke_length_px >= 1);
    }

    #[test]
    fn simple_point_classification() {
        // Straight line interior: not simple.
        let line = [false, false, true, false, false, false, true, false];
        assert!(!is_simple(&line));
        // Staircase corner (W and S set): simple.
        let corner = [false, false, false, false, true, false, true, false];
        assert!(is_simple(&corner));
        // Fully surrounded: removing would punch a hole.
        assert!(!is_simple(&[true; 8]));
    }

    fn spur_skeleton(spur: usize) -> Skeleton {
        // Horizontal line with a vertical spur hanging from column 10.
        let mut img = BinaryImage::new(21, 12);
        for c in 0..21 {
            img.set(1, c, true);
        }
        for k in 1..=spur {
            img.set(1 + k, 10, true);
        }
        Skeleton::from_image(img)
    }

    #[test]
    fn short_spur_is_pruned() {
        let sk = spur_skeleton(2);
        let pruned = prune_spurs(&sk, &stats(8.0));
        assert_eq!(pruned.stroke_length_px, 21);
        assert_eq!(pruned.component_count(), 1);
    }

    #[test]
    fn long_spur_is_kept() {
        let sk = spur_skeleton(5);
        let pruned = prune_spurs(&sk, &stats(8.0));
        assert_eq!(pruned.stroke_length_px, 26);
    }
}
