use super::{normalize, DH_BINS, FDH_DIM, HINGE_DIM};
use crate::imaging::{Contour, Point};

const HINGE_BINS: usize = 2 * DH_BINS;

/// Angle in degrees in `[0, 360)` of the leg from `a` to `b`, with `y` up.
/// `None` for a zero-length leg.
fn leg_angle(a: Point, b: Point) -> Option<f64> {
    let dx = b.1 as f64 - a.1 as f64;
    let dy = a.0 as f64 - b.0 as f64;
    if dx == 0.0 && dy == 0.0 {
        return None;
    }
    Some(dy.atan2(dx).to_degrees().rem_euclid(360.0))
}

fn bin_of(angle: f64, width: f64, bins: usize) -> usize {
    ((angle / width).floor() as usize).min(bins - 1)
}

/// Index of the unordered hinge bin pair `b1 <= b2` among the 300 cells.
pub fn hinge_bin(b1: usize, b2: usize) -> usize {
    let (b1, b2) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
    b1 * HINGE_BINS - b1 * b1.saturating_sub(1) / 2 + (b2 - b1)
}

/// Contour direction histogram f_cd: chord angles between each contour pixel
/// and the one `eps` steps ahead, folded into `[0, 180)`.
pub fn contour_direction_hist(contours: &[Contour], eps: usize) -> Vec<f64> {
    let mut hist = vec![0.0; DH_BINS];
    for c in contours {
        for i in 0..c.len() {
            if let Some(a) = leg_angle(c.at(i, 0), c.at(i, eps as isize)) {
                hist[bin_of(a.rem_euclid(180.0), 15.0, DH_BINS)] += 1.0;
            }
        }
    }
    normalize(&mut hist);
    hist
}

/// Contour hinge histogram f_ch: the two legs reaching `eps` steps back and
/// ahead of each contour pixel, binned over the full circle and counted as
/// an unordered pair. Contours shorter than `2 eps + 1` are skipped.
pub fn contour_hinge_hist(contours: &[Contour], eps: usize) -> Vec<f64> {
    let mut hist = vec![0.0; HINGE_DIM];
    for c in contours.iter().filter(|c| c.len() > 2 * eps) {
        for i in 0..c.len() {
            let p = c.at(i, 0);
            let (Some(a1), Some(a2)) = (
                leg_angle(p, c.at(i, eps as isize)),
                leg_angle(p, c.at(i, -(eps as isize))),
            ) else {
                continue;
            };
            let b1 = bin_of(a1, 15.0, HINGE_BINS);
            let b2 = bin_of(a2, 15.0, HINGE_BINS);
            hist[hinge_bin(b1, b2)] += 1.0;
        }
    }
    normalize(&mut hist);
    hist
}

/// F_DH: direction histogram followed by the hinge histogram.
pub fn extract_fdh(contours: &[Contour], eps: usize) -> Vec<f64> {
    let mut v = contour_direction_hist(contours, eps);
    v.extend(contour_hinge_hist(contours, eps));
    debug_assert_eq!(v.len(), FDH_DIM);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::ContourKind;

    #[test]
    fn hinge_bins_enumerate_all_pairs_once() {
        let mut seen = vec![false; HINGE_DIM];
        for b1 in 0..HINGE_BINS {
            for b2 in b1..HINGE_BINS {
                let i = hinge_bin(b1, b2);
                assert!(!seen[i], "({b1},{b2}) collides");
                seen[i] = true;
                assert_eq!(hinge_bin(b2, b1), i);
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn leg_angles_use_y_up() {
        assert_eq!(leg_angle((5, 5), (5, 9)), Some(0.0));
        assert_eq!(leg_angle((5, 5), (1, 5)), Some(90.0));
        assert_eq!(leg_angle((5, 5), (5, 1)), Some(180.0));
        assert_eq!(leg_angle((5, 5), (9, 5)), Some(270.0));
        assert_eq!(leg_angle((5, 5), (5, 5)), None);
    }

    #[test]
    fn empty_input_gives_zero_vectors() {
        assert!(contour_direction_hist(&[], 3).iter().all(|&v| v == 0.0));
        assert!(contour_hinge_hist(&[], 3).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn short_contours_are_skipped_by_the_hinge() {
        let c = Contour {
            points: vec![(0, 0), (0, 1), (0, 2), (0, 1)],
            kind: ContourKind::Exterior,
        };
        assert!(contour_hinge_hist(&[c], 2).iter().all(|&v| v == 0.0));
    }
}
