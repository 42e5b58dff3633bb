use std::collections::VecDeque;

use proptest::prelude::*;
use scriptrace::imaging::{
    build_stroke_graph, count_components, detect_keypoints, euler_number, label_components, prune_spurs,
    stroke_width_stats, thin, trace_contours, BinaryImage, ContourKind,
};

fn image(width: usize, height: usize, bits: Vec<bool>) -> BinaryImage {
    BinaryImage::from_bits(width, height, bits).unwrap()
}

fn raster() -> impl Strategy<Value = BinaryImage> {
    (4usize..20, 4usize..20).prop_flat_map(|(w, h)| {
        prop::collection::vec(prop::bool::weighted(0.45), w * h).prop_map(move |bits| image(w, h, bits))
    })
}

/// Glyph-like rasters: unions of thick axis-aligned bars.
fn glyph() -> impl Strategy<Value = BinaryImage> {
    prop::collection::vec((0usize..28, 0usize..28, 2usize..12, 1usize..5, any::<bool>()), 1..5).prop_map(|bars| {
        let mut img = BinaryImage::new(32, 32);
        for (r, c, len, thick, vertical) in bars {
            for i in 0..len {
                for t in 0..thick {
                    let (rr, cc) = if vertical { (r + i, c + t) } else { (r + t, c + i) };
                    if rr < 32 && cc < 32 {
                        img.set(rr, cc, true);
                    }
                }
            }
        }
        img
    })
}

/// 8-connected components by breadth-first flood fill.
fn components_oracle(img: &BinaryImage) -> usize {
    let (w, h) = (img.width(), img.height());
    let mut seen = vec![false; w * h];
    let mut count = 0;
    for (r, c) in img.ink_points() {
        if seen[r * w + c] {
            continue;
        }
        count += 1;
        seen[r * w + c] = true;
        let mut queue = VecDeque::from([(r, c)]);
        while let Some((pr, pc)) = queue.pop_front() {
            for dr in -1isize..=1 {
                for dc in -1isize..=1 {
                    let (nr, nc) = (pr as isize + dr, pc as isize + dc);
                    if img.get_signed(nr, nc) && !seen[nr as usize * w + nc as usize] {
                        seen[nr as usize * w + nc as usize] = true;
                        queue.push_back((nr as usize, nc as usize));
                    }
                }
            }
        }
    }
    count
}

/// Holes: 4-connected background regions that do not touch the border.
fn euler_oracle(img: &BinaryImage) -> i64 {
    let (w, h) = (img.width() + 2, img.height() + 2);
    let ink = |r: usize, c: usize| r > 0 && c > 0 && r < h - 1 && c < w - 1 && img.get(r - 1, c - 1);
    let mut seen = vec![false; w * h];
    let mut regions = 0i64;
    for r0 in 0..h {
        for c0 in 0..w {
            if ink(r0, c0) || seen[r0 * w + c0] {
                continue;
            }
            regions += 1;
            seen[r0 * w + c0] = true;
            let mut stack = vec![(r0, c0)];
            while let Some((r, c)) = stack.pop() {
                let next = [(r.wrapping_sub(1), c), (r + 1, c), (r, c.wrapping_sub(1)), (r, c + 1)];
                for (nr, nc) in next {
                    if nr < h && nc < w && !ink(nr, nc) && !seen[nr * w + nc] {
                        seen[nr * w + nc] = true;
                        stack.push((nr, nc));
                    }
                }
            }
        }
    }
    // The padded border region is the outside, not a hole.
    components_oracle(img) as i64 - (regions - 1)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn labeling_matches_flood_fill(img in raster()) {
        prop_assert_eq!(count_components(&img), components_oracle(&img));
        let labels = label_components(&img);
        prop_assert_eq!(labels.areas()[1..].iter().sum::<usize>(), img.ink_count());
    }

    #[test]
    fn thinning_is_idempotent(img in raster()) {
        let once = thin(&img);
        prop_assert_eq!(thin(&once.image).image, once.image);
    }

    #[test]
    fn thinning_and_pruning_keep_components(img in glyph()) {
        let sk = thin(&img);
        let n = count_components(&img);
        prop_assert_eq!(sk.component_count(), n);
        let stats = stroke_width_stats(&img, &sk).unwrap();
        prop_assert_eq!(prune_spurs(&sk, &stats).component_count(), n);
    }

    #[test]
    fn contours_agree_with_euler_number(img in raster()) {
        let contours = trace_contours(&img);
        let ext = contours.iter().filter(|c| c.kind == ContourKind::Exterior).count() as i64;
        let euler = euler_number(&img);
        prop_assert_eq!(ext - (contours.len() as i64 - ext), euler);
        prop_assert_eq!(euler, euler_oracle(&img));
    }

    #[test]
    fn graph_covers_skeleton(img in glyph()) {
        let sk = thin(&img);
        let kps = detect_keypoints(&sk);
        for (r, c) in sk.image.ink_points() {
            let n = sk.image.neighbor_count(r, c);
            if n == 1 || n == 0 || n >= 3 {
                prop_assert!(kps.iter().any(|k| k.pixels.contains(&(r, c))), "({}, {}) missing", r, c);
            }
        }
        let g = build_stroke_graph(&sk, &kps);
        prop_assert_eq!(g.edge_pixel_count() + g.node_pixel_count(), sk.stroke_length_px);
    }
}

#[test]
fn plus_sign_has_four_ends_and_a_branch() {
    let img = BinaryImage::from_ascii(
        "...#...\n\
         ...#...\n\
         ...#...\n\
         #######\n\
         ...#...\n\
         ...#...\n\
         ...#...",
    );
    let sk = thin(&img);
    let kps = detect_keypoints(&sk);
    let ends = kps.iter().filter(|k| k.kind == scriptrace::imaging::KeypointKind::End).count();
    let branches = kps.iter().filter(|k| k.kind == scriptrace::imaging::KeypointKind::Branch).count();
    assert_eq!((ends, branches), (4, 1));
    assert_eq!(build_stroke_graph(&sk, &kps).edges.len(), 4);
}
