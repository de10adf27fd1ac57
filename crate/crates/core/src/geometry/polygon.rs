//! Convex polygons and their overlap.

use crate::geometry::linalg::Vec2;
use crate::scalar::Real;

/// Convex polygon with counterclockwise vertices.
///
/// Fewer than three vertices is allowed and denotes a degenerate polygon
/// (empty, a point or a segment) of zero area.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon2D<T> {
    vertices: Vec<Vec2<T>>,
}

impl<T: Real> ConvexPolygon2D<T> {
    pub fn empty() -> Self {
        Self { vertices: Vec::new() }
    }

    /// Convex hull of an arbitrary point cloud (Andrew's monotone chain).
    pub fn hull(points: &[Vec2<T>]) -> Self {
        let mut pts: Vec<Vec2<T>> = points.iter().copied().filter(|p| p.x.is_finite() && p.y.is_finite()).collect();
        pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
        pts.dedup();
        if pts.len() <= 2 {
            return Self { vertices: pts };
        }
        let mut lower: Vec<Vec2<T>> = Vec::with_capacity(pts.len());
        for &p in &pts {
            while lower.len() >= 2
                && (lower[lower.len() - 1] - lower[lower.len() - 2]).cross(p - lower[lower.len() - 2]) <= T::zero()
            {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Vec2<T>> = Vec::with_capacity(pts.len());
        for &p in pts.iter().rev() {
            while upper.len() >= 2
                && (upper[upper.len() - 1] - upper[upper.len() - 2]).cross(p - upper[upper.len() - 2]) <= T::zero()
            {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Self { vertices: lower }
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: T, y0: T, x1: T, y1: T) -> Self {
        Self::hull(&[Vec2::new(x0, y0), Vec2::new(x1, y0), Vec2::new(x1, y1), Vec2::new(x0, y1)])
    }

    /// Builds from vertices already known to be convex and counterclockwise.
    /// Returns `None` when that does not hold.
    pub fn from_ccw(vertices: Vec<Vec2<T>>) -> Option<Self> {
        let p = Self { vertices };
        p.is_convex_ccw().then_some(p)
    }

    pub fn vertices(&self) -> &[Vec2<T>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Shoelace area.
    pub fn area(&self) -> T {
        let n = self.vertices.len();
        if n < 3 {
            return T::zero();
        }
        let twice: T = (0..n).map(|i| self.vertices[i].cross(self.vertices[(i + 1) % n])).sum();
        (twice * T::lit(0.5)).abs()
    }

    pub fn is_convex_ccw(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return true;
        }
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            (b - a).cross(c - b) >= T::zero()
        })
    }

    pub fn contains(&self, p: Vec2<T>) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            (b - a).cross(p - a) >= T::zero()
        })
    }

    /// Sutherland–Hodgman clip of `self` against the convex `clipper`.
    ///
    /// Degenerate subjects (points, segments) are clipped as open chains so a
    /// point inside the clipper survives.
    pub fn clip(&self, clipper: &Self) -> Self {
        let m = clipper.vertices.len();
        if m < 3 || clipper.area() <= T::zero() {
            return Self::empty();
        }
        let mut output = self.vertices.clone();
        for i in 0..m {
            if output.is_empty() {
                break;
            }
            let a = clipper.vertices[i];
            let b = clipper.vertices[(i + 1) % m];
            let inside = |p: Vec2<T>| (b - a).cross(p - a) >= T::zero();
            let input = std::mem::take(&mut output);
            if input.len() == 1 {
                if inside(input[0]) {
                    output.push(input[0]);
                }
                continue;
            }
            let closed = input.len() >= 3;
            let edges = if closed { input.len() } else { input.len() - 1 };
            if !closed && inside(input[0]) {
                output.push(input[0]);
            }
            for k in 0..edges {
                let (prev, cur) = if closed {
                    (input[(k + input.len() - 1) % input.len()], input[k])
                } else {
                    (input[k], input[k + 1])
                };
                let (pin, cin) = (inside(prev), inside(cur));
                if cin {
                    if !pin {
                        output.push(line_intersection(prev, cur, a, b));
                    }
                    output.push(cur);
                } else if pin {
                    output.push(line_intersection(prev, cur, a, b));
                }
            }
        }
        // drop consecutive duplicates introduced by vertices lying on clip edges
        output.dedup();
        if output.len() > 1 && output.first() == output.last() {
            output.pop();
        }
        Self { vertices: output }
    }
}

fn line_intersection<T: Real>(p: Vec2<T>, q: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> Vec2<T> {
    let d = q - p;
    let e = b - a;
    let denom = d.cross(e);
    if denom.abs() <= T::epsilon() {
        return q;
    }
    let t = (a - p).cross(e) / denom;
    p + d * t
}

/// Overlap of two convex polygons: `(intersection_area, area_a, area_b)`.
///
/// The intersection is clamped so it never exceeds either input area.
pub fn polygon_overlap<T: Real>(a: &ConvexPolygon2D<T>, b: &ConvexPolygon2D<T>) -> (T, T, T) {
    let area_a = a.area();
    let area_b = b.area();
    if area_a <= T::zero() || area_b <= T::zero() {
        return (T::zero(), area_a, area_b);
    }
    // clip the smaller into the larger; the result is symmetric up to rounding
    let inter = if (area_a, a.len()) <= (area_b, b.len()) { a.clip(b).area() } else { b.clip(a).area() };
    (inter.min(area_a).min(area_b).max(T::zero()), area_a, area_b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: f64, y0: f64, x1: f64, y1: f64) -> ConvexPolygon2D<f64> {
        ConvexPolygon2D::rectangle(x0, y0, x1, y1)
    }

    #[test]
    fn identical_unit_squares() {
        let a = square(0.0, 0.0, 1.0, 1.0);
        assert_eq!(polygon_overlap(&a, &a), (1.0, 1.0, 1.0));
    }

    #[test]
    fn disjoint_squares() {
        let a = square(0.0, 0.0, 1.0, 1.0);
        let b = square(5.0, 5.0, 6.0, 6.0);
        assert_eq!(polygon_overlap(&a, &b), (0.0, 1.0, 1.0));
    }

    #[test]
    fn half_overlapping_squares() {
        let a = square(0.0, 0.0, 2.0, 2.0);
        let b = square(1.0, 0.0, 3.0, 2.0);
        assert_eq!(polygon_overlap(&a, &b), (2.0, 4.0, 4.0));
    }

    #[test]
    fn touching_squares_have_zero_overlap() {
        let a = square(0.0, 0.0, 1.0, 1.0);
        let b = square(1.0, 0.0, 2.0, 1.0);
        assert_eq!(polygon_overlap(&a, &b).0, 0.0);
    }

    #[test]
    fn hull_is_ccw_and_drops_interior_points() {
        let pts =
            [Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(2.0, 2.0), Vec2::new(0.0, 2.0)];
        let h = ConvexPolygon2D::hull(&pts);
        assert_eq!(h.len(), 4);
        assert!(h.is_convex_ccw());
        assert_eq!(h.area(), 4.0);
    }

    #[test]
    fn single_point_survives_clip_when_inside() {
        let p = ConvexPolygon2D::hull(&[Vec2::new(0.5, 0.5); 8]);
        assert_eq!(p.len(), 1);
        let c = p.clip(&square(0.0, 0.0, 1.0, 1.0));
        assert_eq!(c.vertices(), &[Vec2::new(0.5, 0.5)]);
        assert!(p.clip(&square(2.0, 2.0, 3.0, 3.0)).is_empty());
    }

    #[test]
    fn from_ccw_rejects_clockwise() {
        let cw = vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 1.0), Vec2::new(1.0, 0.0)];
        assert!(ConvexPolygon2D::from_ccw(cw).is_none());
    }

    #[test]
    fn rotated_square_in_square() {
        // diamond with vertices on the unit square's edge midpoints
        let d = ConvexPolygon2D::hull(&[
            Vec2::new(0.5, 0.0),
            Vec2::new(1.0, 0.5),
            Vec2::new(0.5, 1.0),
            Vec2::new(0.0, 0.5),
        ]);
        let s = square(0.0, 0.0, 1.0, 1.0);
        let (i, a, b) = polygon_overlap(&d, &s);
        assert!((i - 0.5).abs() < 1e-12);
        assert!((a - 0.5).abs() < 1e-12);
        assert_eq!(b, 1.0);
    }
}
