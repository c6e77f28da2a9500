use std::collections::VecDeque;

use super::SlideImage;

/// Square element side actually used: even sides are rounded up to the next odd value.
pub fn effective_side(side: usize) -> usize {
    let side = side.max(1);
    if side % 2 == 0 {
        side + 1
    } else {
        side
    }
}

/// Flat square dilation (max filter). Windows are clipped at the image border.
pub fn dilate(image: &SlideImage, elem_side: usize) -> SlideImage {
    let radius = effective_side(elem_side) / 2;
    let (w, h) = (image.width(), image.height());
    let src = image.pixels();

    let mut rows = vec![0u8; w * h];
    for y in 0..h {
        sliding_max(&src[y * w..(y + 1) * w], radius, &mut rows[y * w..(y + 1) * w]);
    }

    let mut column = vec![0u8; h];
    let mut column_out = vec![0u8; h];
    let mut out = vec![0u8; w * h];
    for x in 0..w {
        for y in 0..h {
            column[y] = rows[y * w + x];
        }
        sliding_max(&column, radius, &mut column_out);
        for y in 0..h {
            out[y * w + x] = column_out[y];
        }
    }
    SlideImage::new(w, h, out).expect("same dimensions as input")
}

/// `out[i] = max(line[i-r ..= i+r])` with the window clipped to the line.
fn sliding_max(line: &[u8], radius: usize, out: &mut [u8]) {
    let n = line.len();
    let mut window: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for (i, slot) in out.iter_mut().enumerate() {
        let hi = (i + radius).min(n - 1);
        while next <= hi {
            while window.back().is_some_and(|&j| line[j] <= line[next]) {
                window.pop_back();
            }
            window.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(radius);
        while window.front().is_some_and(|&j| j < lo) {
            window.pop_front();
        }
        *slot = line[*window.front().expect("window holds index i")];
    }
}
