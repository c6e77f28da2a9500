use crate::error::{Error, Result};
use crate::geometry::{cross, PixelPoint};

/// Convex hull by Andrew's monotone chain.
///
/// Output is counter-clockwise (positive shoelace orientation), drops
/// collinear boundary points and starts at the lexicographically smallest
/// `(x, y)` vertex.
pub fn convex_hull(points: &[PixelPoint]) -> Result<Vec<PixelPoint>> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "convex hull needs at least 3 distinct points, got {}",
            pts.len()
        )));
    }

    let mut hull: Vec<PixelPoint> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();

    if hull.len() < 3 {
        return Err(Error::DegenerateGeometry("all points are collinear".into()));
    }
    Ok(hull)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(i64, i64)]) -> Vec<PixelPoint> {
        v.iter().map(|&(x, y)| PixelPoint::new(x, y)).collect()
    }

    #[test]
    fn interior_point_excluded() {
        let hull = convex_hull(&pts(&[(0, 0), (2, 0), (2, 2), (0, 2), (1, 1)])).unwrap();
        assert_eq!(hull, pts(&[(0, 0), (2, 0), (2, 2), (0, 2)]));
    }

    #[test]
    fn triangle_is_identity() {
        let hull = convex_hull(&pts(&[(5, 1), (0, 0), (2, 4)])).unwrap();
        assert_eq!(hull, pts(&[(0, 0), (5, 1), (2, 4)]));
    }

    #[test]
    fn collinear_edge_points_removed() {
        let hull = convex_hull(&pts(&[(0, 0), (1, 0), (2, 0), (2, 2), (0, 2)])).unwrap();
        assert_eq!(hull, pts(&[(0, 0), (2, 0), (2, 2), (0, 2)]));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            convex_hull(&pts(&[(0, 0), (1, 1)])),
            Err(Error::DegenerateGeometry(_))
        ));
        assert!(matches!(
            convex_hull(&pts(&[(0, 0), (1, 1), (2, 2), (3, 3)])),
            Err(Error::DegenerateGeometry(_))
        ));
        assert!(convex_hull(&pts(&[(0, 0), (0, 0), (0, 0)])).is_err());
    }
}
