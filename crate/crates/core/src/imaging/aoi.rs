use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{convex_contains, polygon_area, polygon_centroid, PixelPoint, Point, Rect};

use super::{connected_components, convex_hull, dilate, effective_side, otsu_binarize, preprocess, SlideImage};

/// A detected area of interest.
///
/// `hull` vertices are pixel-corner coordinates in slide space, so a filled
/// `w × h` block of pixels at `(x, y)` yields the hull
/// `(x, y) (x+w, y) (x+w, y+h) (x, y+h)` with area `w·h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aoi {
    pub id: usize,
    pub hull: Vec<PixelPoint>,
    pub area: f64,
    pub bbox: Rect,
}

impl Aoi {
    /// Builds an AoI from arbitrary points, taking their convex hull.
    pub fn from_points(id: usize, points: &[PixelPoint]) -> Result<Self> {
        let hull = convex_hull(points)?;
        let area = polygon_area(&hull);
        let bbox = Rect::bounding(&hull).expect("hull is nonempty");
        Ok(Self { id, hull, area, bbox })
    }

    /// Axis-aligned rectangle AoI covering `[x, x+w] × [y, y+h]`.
    pub fn rect(id: usize, x: i64, y: i64, w: i64, h: i64) -> Result<Self> {
        Self::from_points(
            id,
            &[
                PixelPoint::new(x, y),
                PixelPoint::new(x + w, y),
                PixelPoint::new(x + w, y + h),
                PixelPoint::new(x, y + h),
            ],
        )
    }

    pub fn contains(&self, p: Point) -> bool {
        convex_contains(&self.hull, p)
    }

    pub fn centroid(&self) -> Point {
        polygon_centroid(&self.hull)
    }
}

/// Tunables of the hierarchical detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AoiParams {
    pub area_min_frac: f64,
    pub area_max_frac: f64,
    pub elem_start: usize,
    pub elem_end: usize,
    pub elem_step: usize,
    /// Working size every slide is resized to before detection.
    pub target_width: usize,
    pub target_height: usize,
}

impl Default for AoiParams {
    fn default() -> Self {
        Self {
            area_min_frac: 0.01,
            area_max_frac: 0.15,
            elem_start: 20,
            elem_end: 5,
            elem_step: 5,
            target_width: 960,
            target_height: 540,
        }
    }
}

impl AoiParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.area_min_frac > 0.0
            && self.area_min_frac < self.area_max_frac
            && self.area_max_frac <= 1.0)
        {
            return Err(Error::InvalidArgument(format!(
                "area fractions must satisfy 0 < min < max <= 1, got {} and {}",
                self.area_min_frac, self.area_max_frac
            )));
        }
        if self.elem_step == 0 {
            return Err(Error::InvalidArgument("elem_step must be positive".into()));
        }
        if self.elem_end > self.elem_start {
            return Err(Error::InvalidArgument(format!(
                "elem_end ({}) exceeds elem_start ({})",
                self.elem_end, self.elem_start
            )));
        }
        if self.target_width == 0 || self.target_height == 0 {
            return Err(Error::InvalidArgument("target size must be positive".into()));
        }
        Ok(())
    }

    /// Element sides per pass, before odd rounding: `start, start-step, …, ≥ end`.
    pub fn schedule(&self) -> Vec<usize> {
        let mut sizes = Vec::new();
        let mut s = self.elem_start as i64;
        while s >= self.elem_end as i64 && s > 0 {
            sizes.push(s as usize);
            s -= self.elem_step as i64;
        }
        sizes
    }
}

/// Hierarchical morphological AoI detection on a raw (dark-on-light) slide.
pub fn detect_aois(image: &SlideImage, params: &AoiParams) -> Result<Vec<Aoi>> {
    params.validate()?;
    let mut working = preprocess(image, params.target_width, params.target_height)?;
    let slide_area = (working.width() * working.height()) as f64;
    let (min_area, max_area) = (
        params.area_min_frac * slide_area,
        params.area_max_frac * slide_area,
    );

    let mut accepted: Vec<Aoi> = Vec::new();
    for side in params.schedule() {
        let dilated = dilate(&working, effective_side(side));
        let (threshold, binary) = otsu_binarize(&dilated);
        let mut this_pass = Vec::new();
        for component in connected_components(&binary) {
            let corners = content_corners(&working, &component, threshold);
            let Ok(hull) = convex_hull(&corners) else {
                continue;
            };
            let area = polygon_area(&hull);
            if area < min_area || area > max_area {
                continue;
            }
            let bbox = Rect::bounding(&hull).expect("hull is nonempty");
            this_pass.push(Aoi {
                id: accepted.len() + this_pass.len(),
                hull,
                area,
                bbox,
            });
        }
        for aoi in &this_pass {
            erase(&mut working, aoi);
        }
        accepted.extend(this_pass);
    }
    Ok(accepted)
}

/// Pixel-corner points spanning the undilated content of a dilated blob.
/// Only the leftmost and rightmost content pixel of each row matter for the hull.
fn content_corners(working: &SlideImage, component: &[PixelPoint], threshold: u8) -> Vec<PixelPoint> {
    let mut corners = Vec::new();
    let mut row: Option<(i64, i64, i64)> = None;
    let flush = |row: Option<(i64, i64, i64)>, corners: &mut Vec<PixelPoint>| {
        if let Some((y, x0, x1)) = row {
            corners.extend([
                PixelPoint::new(x0, y),
                PixelPoint::new(x0, y + 1),
                PixelPoint::new(x1 + 1, y),
                PixelPoint::new(x1 + 1, y + 1),
            ]);
        }
    };
    // components are sorted row-major
    for p in component {
        if working.get(p.x as usize, p.y as usize) <= threshold {
            continue;
        }
        row = match row {
            Some((y, x0, x1)) if y == p.y => Some((y, x0.min(p.x), x1.max(p.x))),
            other => {
                flush(other, &mut corners);
                Some((p.y, p.x, p.x))
            }
        };
    }
    flush(row, &mut corners);
    corners
}

/// Sets every pixel whose center lies in the AoI hull to background.
fn erase(working: &mut SlideImage, aoi: &Aoi) {
    let b = aoi.bbox;
    let x_end = ((b.x + b.w) as usize).min(working.width());
    let y_end = ((b.y + b.h) as usize).min(working.height());
    for y in b.y.max(0) as usize..y_end {
        for x in b.x.max(0) as usize..x_end {
            if aoi.contains(Point::new(x as f64 + 0.5, y as f64 + 0.5)) {
                working.set(x, y, 0);
            }
        }
    }
}
