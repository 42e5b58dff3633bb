use serde::{Deserialize, Serialize};

use super::{label_components, BinaryImage, Point, RING};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContourKind {
    Exterior,
    Interior,
}

/// A closed boundary chain; consecutive points (cyclically) are 8-adjacent.
/// The closing point is not repeated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contour {
    pub points: Vec<Point>,
    pub kind: ContourKind,
}

impl Contour {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Point `offset` steps from `i` along the closed chain.
    pub fn at(&self, i: usize, offset: isize) -> Point {
        let n = self.points.len() as isize;
        self.points[((i as isize + offset).rem_euclid(n)) as usize]
    }

    pub fn translated(&self, d_row: usize, d_col: usize) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|&(r, c)| (r + d_row, c + d_col))
                .collect(),
            kind: self.kind,
        }
    }
}

/// Moore-neighbor tracing from ink pixel `start` whose neighbor `back` is
/// background; terminates with Jacob's criterion.
fn moore_trace(img: &BinaryImage, start: Point, back: (isize, isize)) -> Vec<Point> {
    let mut contour = vec![start];
    let mut cur = start;
    let mut back = back;
    let mut first_move: Option<Point> = None;
    loop {
        let d = {
            let delta = (back.0 - cur.0 as isize, back.1 - cur.1 as isize);
            RING.iter()
                .position(|&x| x == delta)
                .expect("backtrack must be an 8-neighbor")
        };
        let mut step = None;
        for k in 1..=8 {
            let i = (d + k) % 8;
            let q = (cur.0 as isize + RING[i].0, cur.1 as isize + RING[i].1);
            if img.get_signed(q.0, q.1) {
                let j = (d + k - 1) % 8;
                let nb = (cur.0 as isize + RING[j].0, cur.1 as isize + RING[j].1);
                step = Some(((q.0 as usize, q.1 as usize), nb));
                break;
            }
        }
        let Some((next, new_back)) = step else {
            return contour;
        };
        match first_move {
            None => first_move = Some(next),
            Some(first) if cur == start && next == first => {
                contour.pop();
                return contour;
            }
            _ => {}
        }
        contour.push(next);
        cur = next;
        back = new_back;
    }
}

/// Labels 4-connected background regions that do not touch the border.
/// Returns the first raster pixel of each hole in raster order.
fn hole_starts(img: &BinaryImage) -> Vec<Point> {
    let (w, h) = (img.width(), img.height());
    let mut seen = vec![false; w * h];
    let mut starts = Vec::new();
    let mut stack = Vec::new();
    for r in 0..h {
        for c in 0..w {
            if img.get(r, c) || seen[r * w + c] {
                continue;
            }
            let mut touches_border = false;
            seen[r * w + c] = true;
            stack.push((r, c));
            while let Some((pr, pc)) = stack.pop() {
                if pr == 0 || pc == 0 || pr + 1 == h || pc + 1 == w {
                    touches_border = true;
                }
                let cand = [
                    (pr.wrapping_sub(1), pc),
                    (pr + 1, pc),
                    (pr, pc.wrapping_sub(1)),
                    (pr, pc + 1),
                ];
                for (nr, nc) in cand {
                    if nr < h && nc < w && !img.get(nr, nc) && !seen[nr * w + nc] {
                        seen[nr * w + nc] = true;
                        stack.push((nr, nc));
                    }
                }
            }
            if !touches_border {
                starts.push((r, c));
            }
        }
    }
    starts
}

/// Traces one exterior contour per 8-connected component and one interior
/// contour per hole. Exteriors come first, ordered by component label;
/// interiors follow in raster order of their holes.
pub fn trace_contours(img: &BinaryImage) -> Vec<Contour> {
    let labels = label_components(img);
    let mut firsts: Vec<Option<Point>> = vec![None; labels.count + 1];
    for (r, c) in img.ink_points() {
        let l = labels.get(r, c) as usize;
        if firsts[l].is_none() {
            firsts[l] = Some((r, c));
        }
    }
    let mut out = Vec::new();
    for start in firsts.into_iter().flatten() {
        let back = (start.0 as isize, start.1 as isize - 1);
        out.push(Contour {
            points: moore_trace(img, start, back),
            kind: ContourKind::Exterior,
        });
    }
    for (r, c) in hole_starts(img) {
        let start = (r - 1, c);
        debug_assert!(img.get(start.0, start.1));
        out.push(Contour {
            points: moore_trace(img, start, (r as isize, c as isize)),
            kind: ContourKind::Interior,
        });
    }
    out
}

/// Euler number (components minus holes) under 8-connectivity, by counting
/// 2x2 bit quads over the zero-padded raster.
pub fn euler_number(img: &BinaryImage) -> i64 {
    let (mut q1, mut q3, mut qd) = (0i64, 0i64, 0i64);
    for r in -1..img.height() as isize {
        for c in -1..img.width() as isize {
            let a = img.get_signed(r, c);
            let b = img.get_signed(r, c + 1);
            let cc = img.get_signed(r + 1, c);
            let d = img.get_signed(r + 1, c + 1);
            let n = [a, b, cc, d].iter().filter(|&&x| x).count();
            match n {
                1 => q1 += 1,
                3 => q3 += 1,
                2 if (a && d) || (b && cc) => qd += 1,
                _ => {}
            }
        }
    }
    (q1 - q3 - 2 * qd) / 4
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(contours: &[Contour]) -> (usize, usize) {
        let ext = contours
            .iter()
            .filter(|c| c.kind == ContourKind::Exterior)
            .count();
        (ext, contours.len() - ext)
    }

    fn assert_chain(c: &Contour) {
        for i in 0..c.len() {
            let (a, b) = (c.at(i, 0), c.at(i, 1));
            let dr = (a.0 as isize - b.0 as isize).abs();
            let dc = (a.1 as isize - b.1 as isize).abs();
            assert!(dr <= 1 && dc <= 1, "{a:?} -> {b:?} not adjacent");
        }
    }

    #[test]
    fn solid_square() {
        let img = BinaryImage::from_ascii(".....\n.###.\n.###.\n.###.\n.....");
        let cs = trace_contours(&img);
        assert_eq!(counts(&cs), (1, 0));
        assert_eq!(cs[0].len(), 8);
        assert_chain(&cs[0]);
    }

    #[test]
    fn ring_has_one_hole() {
        let img = BinaryImage::from_ascii(
            "......\n\
             .####.\n\
             .#..#.\n\
             .#..#.\n\
             .####.\n\
             ......",
        );
        let cs = trace_contours(&img);
        assert_eq!(counts(&cs), (1, 1));
        for c in &cs {
            assert_chain(c);
        }
        // The hole border follows the ink pixels 4-adjacent to the hole.
        assert_eq!(cs[1].len(), 8);
        assert_eq!(euler_number(&img), 0);
    }

    #[test]
    fn single_pixel_contour() {
        let img = BinaryImage::from_ascii("...\n.#.\n...");
        let cs = trace_contours(&img);
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].points, vec![(1, 1)]);
    }

    #[test]
    fn thin_line_contour_retraces() {
        let img = BinaryImage::from_ascii("#####");
        let cs = trace_contours(&img);
        assert_eq!(cs[0].len(), 8);
    }

    #[test]
    fn euler_of_figure_eight() {
        let img = BinaryImage::from_ascii(
            "###\n\
             #.#\n\
             ###\n\
             #.#\n\
             ###",
        );
        assert_eq!(euler_number(&img), -1);
        assert_eq!(counts(&trace_contours(&img)), (1, 2));
    }
}
