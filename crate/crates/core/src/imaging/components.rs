use crate::geometry::PixelPoint;

use super::SlideImage;

/// 8-connected components of the nonzero pixels, ordered by their smallest
/// `(row, col)` member. Pixels inside a component are sorted row-major.
pub fn connected_components(binary: &SlideImage) -> Vec<Vec<PixelPoint>> {
    let (w, h) = (binary.width(), binary.height());
    let px = binary.pixels();
    let mut seen = vec![false; w * h];
    let mut components = Vec::new();
    let mut stack = Vec::new();

    for start in 0..w * h {
        if px[start] == 0 || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut members = Vec::new();
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            members.push(i);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if px[j] != 0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        members.sort_unstable();
        components.push(
            members
                .into_iter()
                .map(|i| PixelPoint::new((i % w) as i64, (i / w) as i64))
                .collect(),
        );
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjoint_blobs() {
        let mut img = SlideImage::filled(6, 3, 0).unwrap();
        img.fill_rect(0, 0, 2, 2, 255);
        img.fill_rect(4, 1, 6, 3, 255);
        let comps = connected_components(&img);
        assert_eq!(comps.len(), 2);
        assert_eq!(
            comps[0],
            vec![
                PixelPoint::new(0, 0),
                PixelPoint::new(1, 0),
                PixelPoint::new(0, 1),
                PixelPoint::new(1, 1)
            ]
        );
        assert_eq!(comps[1].len(), 4);
    }

    #[test]
    fn diagonal_neighbours_connect() {
        let mut img = SlideImage::filled(3, 3, 0).unwrap();
        img.set(0, 0, 255);
        img.set(1, 1, 255);
        img.set(2, 2, 255);
        assert_eq!(connected_components(&img).len(), 1);
    }

    #[test]
    fn empty_foreground() {
        let img = SlideImage::filled(4, 4, 0).unwrap();
        assert!(connected_components(&img).is_empty());
    }
}
