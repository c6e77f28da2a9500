use super::SlideImage;

/// Unnormalized between-class variance `D² / (n0·n1)` for threshold `t`,
/// where class 0 is `p ≤ t`. Zero when either class is empty.
pub fn between_class_variance(histogram: &[u64; 256], t: u8) -> f64 {
    let total: u64 = histogram.iter().sum();
    let sum: u128 = histogram
        .iter()
        .enumerate()
        .map(|(i, &c)| i as u128 * c as u128)
        .sum();
    let n0: u64 = histogram[..=t as usize].iter().sum();
    let s0: u128 = histogram[..=t as usize]
        .iter()
        .enumerate()
        .map(|(i, &c)| i as u128 * c as u128)
        .sum();
    class_variance(total, sum, n0, s0)
}

fn class_variance(total: u64, sum: u128, n0: u64, s0: u128) -> f64 {
    let n1 = total - n0;
    if n0 == 0 || n1 == 0 {
        return 0.0;
    }
    let d = total as i128 * s0 as i128 - n0 as i128 * sum as i128;
    let d = d as f64;
    d * d / (n0 as f64 * n1 as f64)
}

fn histogram(image: &SlideImage) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &p in image.pixels() {
        hist[p as usize] += 1;
    }
    hist
}

/// Otsu threshold over the 256-bin histogram. Ties resolve to the smallest
/// threshold; a constant image returns its single intensity.
pub fn otsu_threshold(image: &SlideImage) -> u8 {
    let hist = histogram(image);
    let distinct = hist.iter().filter(|&&c| c > 0).count();
    if distinct <= 1 {
        return image.pixels()[0];
    }
    let total: u64 = hist.iter().sum();
    let sum: u128 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| i as u128 * c as u128)
        .sum();

    let (mut n0, mut s0) = (0u64, 0u128);
    let (mut best_t, mut best) = (0u8, f64::NEG_INFINITY);
    for t in 0..=255u8 {
        n0 += hist[t as usize];
        s0 += t as u128 * hist[t as usize] as u128;
        let v = class_variance(total, sum, n0, s0);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    best_t
}

/// Returns the Otsu threshold and the binary image (`255` iff pixel > threshold).
pub fn otsu_binarize(image: &SlideImage) -> (u8, SlideImage) {
    let t = otsu_threshold(image);
    let pixels = image
        .pixels()
        .iter()
        .map(|&p| if p > t { 255 } else { 0 })
        .collect();
    let binary = SlideImage::new(image.width(), image.height(), pixels)
        .expect("same dimensions as input");
    (t, binary)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force: recompute class weights and means from raw pixels at every threshold.
    fn brute_force(pixels: &[u8]) -> u8 {
        let n = pixels.len() as f64;
        let mut best = (0u8, -1.0f64);
        for t in 0..=255u8 {
            let (lo, hi): (Vec<f64>, Vec<f64>) = {
                let lo = pixels.iter().filter(|&&p| p <= t).map(|&p| p as f64).collect();
                let hi = pixels.iter().filter(|&&p| p > t).map(|&p| p as f64).collect();
                (lo, hi)
            };
            let v = if lo.is_empty() || hi.is_empty() {
                0.0
            } else {
                let (w0, w1) = (lo.len() as f64 / n, hi.len() as f64 / n);
                let m0 = lo.iter().sum::<f64>() / lo.len() as f64;
                let m1 = hi.iter().sum::<f64>() / hi.len() as f64;
                w0 * w1 * (m0 - m1).powi(2)
            };
            if v > best.1 {
                best = (t, v);
            }
        }
        best.0
    }

    #[test]
    fn symmetric_two_point() {
        let img = SlideImage::new(4, 1, vec![0, 0, 255, 255]).unwrap();
        let (t, bin) = otsu_binarize(&img);
        assert_eq!(t, 0);
        assert_eq!(bin.pixels(), &[0, 0, 255, 255]);
    }

    #[test]
    fn constant_image_is_degenerate() {
        let img = SlideImage::filled(3, 3, 77).unwrap();
        let (t, bin) = otsu_binarize(&img);
        assert_eq!(t, 77);
        assert!(bin.pixels().iter().all(|&p| p == 0));
    }

    #[test]
    fn six_pixel_case_matches_brute_force() {
        let px = vec![10, 10, 10, 200, 200, 250];
        let img = SlideImage::new(6, 1, px.clone()).unwrap();
        assert_eq!(otsu_threshold(&img), brute_force(&px));
        assert_eq!(otsu_threshold(&img), 10);
    }

    #[test]
    fn histogram_variance_trait() {
        let mut hist = [0u64; 256];
        hist[0] = 2;
        hist[255] = 2;
        assert_eq!(between_class_variance(&hist, 255), 0.0);
        assert!(between_class_variance(&hist, 0) > 0.0);
        assert_eq!(between_class_variance(&hist, 0), between_class_variance(&hist, 254));
    }
}
