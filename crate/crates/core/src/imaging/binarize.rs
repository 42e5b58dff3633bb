use super::{BinaryImage, GrayImage};

/// Otsu's threshold over the 256 candidates `t`, where class 0 holds the
/// intensities `< t`. Returns the first maximizer of the between-class
/// variance; a constant image returns its single intensity.
pub fn otsu_threshold(img: &GrayImage) -> u8 {
    let hist = img.histogram();
    let total: u64 = hist.iter().sum();
    let distinct = hist.iter().filter(|&&h| h > 0).count();
    if distinct <= 1 {
        return img.pixels()[0];
    }
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &h)| i as f64 * h as f64)
        .sum();

    let mut best_t = 0usize;
    let mut best_var = -1.0f64;
    let mut count_below = 0u64;
    let mut sum_below = 0.0f64;
    for t in 0..256usize {
        if t > 0 {
            count_below += hist[t - 1];
            sum_below += (t - 1) as f64 * hist[t - 1] as f64;
        }
        let count_above = total - count_below;
        let var = if count_below == 0 || count_above == 0 {
            0.0
        } else {
            let w0 = count_below as f64 / total as f64;
            let w1 = count_above as f64 / total as f64;
            let m0 = sum_below / count_below as f64;
            let m1 = (sum_all - sum_below) / count_above as f64;
            w0 * w1 * (m0 - m1) * (m0 - m1)
        };
        if var > best_var {
            best_var = var;
            best_t = t;
        }
    }
    best_t as u8
}

/// Binarizes with Otsu's threshold: ink where intensity < threshold.
pub fn binarize(img: &GrayImage) -> (BinaryImage, u8) {
    let t = otsu_threshold(img);
    let bits = img.pixels().iter().map(|&p| p < t).collect();
    let bin = BinaryImage::from_bits(img.width(), img.height(), bits)
        .expect("dimensions carried over from source image");
    (bin, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_page_has_no_ink() {
        let img = GrayImage::filled(16, 8, 255);
        let (bin, t) = binarize(&img);
        assert_eq!(t, 255);
        assert!(bin.is_blank());
    }

    #[test]
    fn two_level_image_splits_halves() {
        let (w, h) = (10, 4);
        let pixels = (0..w * h)
            .map(|i| if i % w < w / 2 { 0 } else { 255 })
            .collect();
        let img = GrayImage::new(w, h, pixels).unwrap();
        let (bin, t) = binarize(&img);
        assert!(t > 0);
        for r in 0..h {
            for c in 0..w {
                assert_eq!(bin.get(r, c), c < w / 2);
            }
        }
    }
}
