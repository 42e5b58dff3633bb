use serde::{Deserialize, Serialize};

use super::{BinaryImage, Skeleton};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokeStats {
    pub mean_width: f64,
    pub std_width: f64,
}

/// 1-D squared distance transform of a sampled function (lower envelope of
/// parabolas).
fn edt_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let inter = |q: usize, p: usize| {
        ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64))
    };
    for q in 1..n {
        let mut s = inter(q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = inter(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact Euclidean distance from every pixel to the nearest background pixel
/// center. Pixels outside the raster count as background, so ink on the border
/// is at distance 1.
pub fn distance_transform(img: &BinaryImage) -> Vec<f64> {
    let (w, h) = (img.width() + 2, img.height() + 2);
    let inf = 1e20;
    let mut grid = vec![0f64; w * h];
    for r in 0..img.height() {
        for c in 0..img.width() {
            if img.get(r, c) {
                grid[(r + 1) * w + c + 1] = inf;
            }
        }
    }
    let mut col = vec![0f64; h];
    let mut col_out = vec![0f64; h];
    for c in 0..w {
        for r in 0..h {
            col[r] = grid[r * w + c];
        }
        edt_1d(&col, &mut col_out);
        for r in 0..h {
            grid[r * w + c] = col_out[r];
        }
    }
    let mut row_out = vec![0f64; w];
    for r in 0..h {
        edt_1d(&grid[r * w..(r + 1) * w], &mut row_out);
        grid[r * w..(r + 1) * w].copy_from_slice(&row_out);
    }
    let mut out = Vec::with_capacity(img.width() * img.height());
    for r in 0..img.height() {
        for c in 0..img.width() {
            out.push(grid[(r + 1) * w + c + 1].sqrt());
        }
    }
    out
}

/// Stroke width sampled on the skeleton. The distance to the nearest
/// background center is measured to the background pixel's edge (minus half a
/// pixel) and doubled, so a one-pixel line is width 1 and a five-pixel bar is
/// width 5.
pub fn stroke_width_stats(img: &BinaryImage, sk: &Skeleton) -> Result<StrokeStats> {
    let dt = distance_transform(img);
    let widths: Vec<f64> = sk
        .image
        .ink_points()
        .map(|(r, c)| {
            let d = dt[r * img.width() + c].max(1.0);
            (2.0 * d - 1.0).round()
        })
        .collect();
    if widths.is_empty() {
        return Err(Error::EmptyInk);
    }
    let n = widths.len() as f64;
    let mean = widths.iter().sum::<f64>() / n;
    let var = widths.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / n;
    Ok(StrokeStats {
        mean_width: mean.max(1.0),
        std_width: var.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::thin;

    fn bar(width: usize, len: usize, top: usize, canvas: &mut BinaryImage) {
        for r in top..top + width {
            for c in 2..2 + len {
                canvas.set(r, c, true);
            }
        }
    }

    #[test]
    fn distance_transform_matches_brute_force() {
        let img = BinaryImage::from_ascii(
            "..####..\n\
             .######.\n\
             ########\n\
             .######.\n\
             ..##....",
        );
        let dt = distance_transform(&img);
        for r in 0..img.height() as isize {
            for c in 0..img.width() as isize {
                if !img.get_signed(r, c) {
                    continue;
                }
                let mut best = f64::INFINITY;
                for br in -1..=img.height() as isize {
                    for bc in -1..=img.width() as isize {
                        if !img.get_signed(br, bc) {
                            let d = (((br - r).pow(2) + (bc - c).pow(2)) as f64).sqrt();
                            best = best.min(d);
                        }
                    }
                }
                let got = dt[r as usize * img.width() + c as usize];
                assert!((got - best).abs() < 1e-12, "({r},{c}) {got} vs {best}");
            }
        }
    }

    #[test]
    fn uniform_bar_width() {
        let mut img = BinaryImage::new(44, 12);
        bar(5, 40, 3, &mut img);
        let sk = thin(&img);
        let s = stroke_width_stats(&img, &sk).unwrap();
        assert!((s.mean_width - 5.0).abs() <= 1.0, "{s:?}");
        assert!(s.std_width < 1.0, "{s:?}");
    }

    #[test]
    fn one_pixel_line() {
        let mut img = BinaryImage::new(20, 3);
        bar(1, 15, 1, &mut img);
        let sk = thin(&img);
        let s = stroke_width_stats(&img, &sk).unwrap();
        assert_eq!(s.mean_width, 1.0);
        assert_eq!(s.std_width, 0.0);
    }

    #[test]
    fn mixture_of_widths() {
        let mut img = BinaryImage::new(64, 24);
        bar(3, 58, 2, &mut img);
        bar(7, 58, 12, &mut img);
        let sk = thin(&img);
        let s = stroke_width_stats(&img, &sk).unwrap();
        assert!((s.mean_width - 5.0).abs() <= 1.0, "{s:?}");
    }

    #[test]
    fn empty_skeleton_is_an_error() {
        let img = BinaryImage::new(4, 4);
        let sk = thin(&img);
        assert!(matches!(stroke_width_stats(&img, &sk), Err(Error::EmptyInk)));
    }
}
