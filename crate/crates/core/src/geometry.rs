//! Ground-plane geometry: FOV and overlap polygons, road-aligned
//! coordinates, lateral normalization and directional zones.
//!
//! All coordinates are planar meters. Polygons may be non-convex but must be
//! simple; the closing edge from the last vertex back to the first is implicit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used for on-boundary tests and degenerate-area checks.
const GEOM_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid road frame: {0}")]
    InvalidFrame(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: Point2) -> Point2 {
        Point2::new(self.x - other.x, self.y - other.y)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Point2) -> Point2 {
        Point2::new(self.x + other.x, self.y + other.y)
    }

    pub fn scale(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        self.sub(other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2::new(x, y)
    }
}

/// A simple polygon with at least three vertices and non-zero area.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polygon {
    vertices: Vec<Point2>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidGeometry(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(GeometryError::InvalidGeometry(format!(
                "non-finite vertex ({}, {})",
                p.x, p.y
            )));
        }
        let poly = Polygon { vertices };
        if poly.signed_area().abs() <= GEOM_EPS {
            return Err(GeometryError::InvalidGeometry(
                "polygon has zero area".to_string(),
            ));
        }
        Ok(poly)
    }

    /// Axis-aligned rectangle spanning the two corners.
    pub fn rect(min: Point2, max: Point2) -> Result<Self, GeometryError> {
        Polygon::new(vec![
            Point2::new(min.x, min.y),
            Point2::new(max.x, min.y),
            Point2::new(max.x, max.y),
            Point2::new(min.x, max.y),
        ])
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    /// Iterates the closed edge list, including last -> first.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area; positive for counter-clockwise vertex order.
    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    pub fn translated(&self, offset: Point2) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|v| v.add(offset)).collect(),
        }
    }

    /// Boundary points count as inside.
    pub fn contains(&self, p: Point2) -> bool {
        if self.edges().any(|(a, b)| on_segment(p, a, b)) {
            return true;
        }
        // Crossing number with the half-open rule on edge endpoints.
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn intersects(&self, other: &Polygon) -> bool {
        for (a0, a1) in self.edges() {
            for (b0, b1) in other.edges() {
                if segments_intersect(a0, a1, b0, b1) {
                    return true;
                }
            }
        }
        // No edge contact: either disjoint or one strictly contains the other.
        self.contains(other.vertices[0]) || other.contains(self.vertices[0])
    }
}

impl<'de> Deserialize<'de> for Polygon {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw: Vec<[f64; 2]> = Vec::deserialize(deserializer)?;
        Polygon::new(raw.into_iter().map(|[x, y]| Point2::new(x, y)).collect())
            .map_err(serde::de::Error::custom)
    }
}

fn orientation(a: Point2, b: Point2, c: Point2) -> f64 {
    b.sub(a).cross(c.sub(a))
}

fn on_segment(p: Point2, a: Point2, b: Point2) -> bool {
    let ab = b.sub(a);
    let len = ab.norm();
    if len == 0.0 {
        return p.distance(a) <= GEOM_EPS;
    }
    // Perpendicular distance, then projection within the segment.
    if (ab.cross(p.sub(a)) / len).abs() > GEOM_EPS {
        return false;
    }
    let t = p.sub(a).dot(ab) / (len * len);
    (-GEOM_EPS..=1.0 + GEOM_EPS).contains(&t)
}

fn segments_intersect(a0: Point2, a1: Point2, b0: Point2, b1: Point2) -> bool {
    let d1 = orientation(b0, b1, a0);
    let d2 = orientation(b0, b1, a1);
    let d3 = orientation(a0, a1, b0);
    let d4 = orientation(a0, a1, b1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    on_segment(a0, b0, b1) || on_segment(a1, b0, b1) || on_segment(b0, a0, a1) || on_segment(b1, a0, a1)
}

pub fn point_in_polygon(p: Point2, poly: &Polygon) -> bool {
    poly.contains(p)
}

pub fn polygons_intersect(a: &Polygon, b: &Polygon) -> bool {
    a.intersects(b)
}

/// Directional zone. Upper carries traffic along `+axis` of the road frame,
/// Lower the opposing stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Zone {
    Upper,
    Lower,
}

impl Zone {
    pub const ALL: [Zone; 2] = [Zone::Upper, Zone::Lower];

    pub fn as_str(self) -> &'static str {
        match self {
            Zone::Upper => "upper",
            Zone::Lower => "lower",
        }
    }

    pub fn parse(s: &str) -> Option<Zone> {
        match s {
            "upper" => Some(Zone::Upper),
            "lower" => Some(Zone::Lower),
            _ => None,
        }
    }
}

/// Road-aligned coordinate frame.
///
/// `s` runs along `axis`, `y` along the axis rotated by +90°. The roadway
/// spans `y` in `[-width/2, width/2]`; `y_split` separates the two zones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoadFrame {
    origin: Point2,
    axis: Point2,
    width: f64,
    y_split: f64,
}

impl RoadFrame {
    pub fn new(origin: Point2, axis: Point2, width: f64, y_split: f64) -> Result<Self, GeometryError> {
        if !origin.is_finite() || !axis.is_finite() || !width.is_finite() || !y_split.is_finite() {
            return Err(GeometryError::InvalidFrame("non-finite parameter".into()));
        }
        if (axis.norm() - 1.0).abs() > 1e-9 {
            return Err(GeometryError::InvalidFrame(format!(
                "axis must be a unit vector, |axis| = {}",
                axis.norm()
            )));
        }
        if width <= 0.0 {
            return Err(GeometryError::InvalidFrame(format!("width must be > 0, got {width}")));
        }
        if y_split.abs() >= width / 2.0 {
            return Err(GeometryError::InvalidFrame(format!(
                "y_split {y_split} outside the lateral extent ±{}",
                width / 2.0
            )));
        }
        Ok(Self { origin, axis, width, y_split })
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn axis(&self) -> Point2 {
        self.axis
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn y_split(&self) -> f64 {
        self.y_split
    }

    pub fn perp(&self) -> Point2 {
        Point2::new(-self.axis.y, self.axis.x)
    }

    pub fn axis_angle(&self) -> f64 {
        self.axis.y.atan2(self.axis.x)
    }

    /// Inverse of [`to_road_frame`].
    pub fn to_world(&self, s: f64, y: f64) -> Point2 {
        self.origin.add(self.axis.scale(s)).add(self.perp().scale(y))
    }
}

impl<'de> Deserialize<'de> for RoadFrame {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            origin: [f64; 2],
            axis: [f64; 2],
            width: f64,
            y_split: f64,
        }
        let raw = Raw::deserialize(deserializer)?;
        RoadFrame::new(
            Point2::new(raw.origin[0], raw.origin[1]),
            Point2::new(raw.axis[0], raw.axis[1]),
            raw.width,
            raw.y_split,
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Longitudinal and lateral road coordinates of `p`.
pub fn to_road_frame(p: Point2, frame: &RoadFrame) -> (f64, f64) {
    let d = p.sub(frame.origin);
    (d.dot(frame.axis), d.dot(frame.perp()))
}

/// Lateral position normalized to road width, unclamped.
pub fn lateral_norm(p: Point2, frame: &RoadFrame) -> Result<f64, GeometryError> {
    if frame.width <= 0.0 {
        return Err(GeometryError::InvalidFrame(format!(
            "width must be > 0, got {}",
            frame.width
        )));
    }
    let (_, y) = to_road_frame(p, frame);
    Ok((y + frame.width / 2.0) / frame.width)
}

/// Position-only zone rule; a point exactly on `y_split` is Lower.
pub fn get_zone(p: Point2, frame: &RoadFrame) -> Zone {
    let (_, y) = to_road_frame(p, frame);
    if y < frame.y_split {
        Zone::Upper
    } else {
        Zone::Lower
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::rect(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)).unwrap()
    }

    fn l_shape() -> Polygon {
        Polygon::new(
            [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]
                .into_iter()
                .map(Point2::from)
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn square_interior_and_exterior() {
        let sq = unit_square();
        assert!(point_in_polygon(Point2::new(0.5, 0.5), &sq));
        assert!(!point_in_polygon(Point2::new(2.0, 0.5), &sq));
    }

    #[test]
    fn l_shape_notch() {
        let l = l_shape();
        assert!(point_in_polygon(Point2::new(0.5, 0.25), &l));
        assert!(!point_in_polygon(Point2::new(1.5, 1.5), &l));
    }

    #[test]
    fn boundary_counts_as_inside() {
        let sq = unit_square();
        assert!(point_in_polygon(Point2::new(0.0, 0.5), &sq));
        assert!(point_in_polygon(Point2::new(1.0, 1.0), &sq));
        assert!(point_in_polygon(Point2::new(0.3, 1.0), &sq));
        let l = l_shape();
        assert!(point_in_polygon(Point2::new(1.0, 1.5), &l));
        assert!(point_in_polygon(Point2::new(1.5, 1.0), &l));
    }

    #[test]
    fn degenerate_polygons_rejected() {
        let two = Polygon::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]);
        assert!(matches!(two, Err(GeometryError::InvalidGeometry(_))));
        let flat = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
        ]);
        assert!(matches!(flat, Err(GeometryError::InvalidGeometry(_))));
    }

    #[test]
    fn intersection_cases() {
        let sq = unit_square();
        assert!(polygons_intersect(&sq, &sq.translated(Point2::new(0.5, 0.0))));
        assert!(!polygons_intersect(&sq, &sq.translated(Point2::new(5.0, 0.0))));
        let big = Polygon::rect(Point2::new(-5.0, -5.0), Point2::new(5.0, 5.0)).unwrap();
        let small = Polygon::rect(Point2::new(0.2, 0.2), Point2::new(0.4, 0.4)).unwrap();
        assert!(polygons_intersect(&big, &small));
        assert!(polygons_intersect(&small, &big));
        // Touching along an edge shares points.
        assert!(polygons_intersect(&sq, &sq.translated(Point2::new(1.0, 0.0))));
    }

    #[test]
    fn road_frame_examples() {
        let f = RoadFrame::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), 8.0, 0.0).unwrap();
        assert_eq!(to_road_frame(Point2::new(3.0, 1.0), &f), (3.0, 1.0));

        let f = RoadFrame::new(Point2::new(10.0, 0.0), Point2::new(0.0, 1.0), 8.0, 0.0).unwrap();
        let (s, y) = to_road_frame(Point2::new(10.0, 5.0), &f);
        assert_eq!((s, y), (5.0, 0.0));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let f = RoadFrame::new(Point2::new(0.0, 0.0), Point2::new(h, h), 8.0, 0.0).unwrap();
        let (s, y) = to_road_frame(Point2::new(1.0, 0.0), &f);
        assert!((s - h).abs() < 1e-12 && (y + h).abs() < 1e-12);
    }

    #[test]
    fn road_frame_validation() {
        let o = Point2::new(0.0, 0.0);
        assert!(RoadFrame::new(o, Point2::new(2.0, 0.0), 8.0, 0.0).is_err());
        assert!(RoadFrame::new(o, Point2::new(1.0, 0.0), 0.0, 0.0).is_err());
        assert!(RoadFrame::new(o, Point2::new(1.0, 0.0), 8.0, 4.0).is_err());
        assert!(RoadFrame::new(o, Point2::new(1.0, 0.0), 8.0, 3.9).is_ok());
    }

    #[test]
    fn lateral_norm_examples() {
        let f = RoadFrame::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), 8.0, 0.0).unwrap();
        assert_eq!(lateral_norm(Point2::new(42.0, 0.0), &f).unwrap(), 0.5);
        assert_eq!(lateral_norm(Point2::new(1.0, -4.0), &f).unwrap(), 0.0);
        assert_eq!(lateral_norm(Point2::new(1.0, 4.0), &f).unwrap(), 1.0);
        assert_eq!(lateral_norm(Point2::new(1.0, 2.0), &f).unwrap(), 0.75);
        // Off-road values are not clamped.
        assert!(lateral_norm(Point2::new(0.0, -12.0), &f).unwrap() < 0.0);
    }

    #[test]
    fn zone_examples() {
        let f = RoadFrame::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), 8.0, 0.0).unwrap();
        assert_eq!(get_zone(Point2::new(5.0, -1.0), &f), Zone::Upper);
        assert_eq!(get_zone(Point2::new(5.0, 1.0), &f), Zone::Lower);
        assert_eq!(get_zone(Point2::new(5.0, 0.0), &f), Zone::Lower);
    }

    #[test]
    fn to_world_inverts_frame() {
        let f = RoadFrame::new(Point2::new(3.0, -2.0), Point2::new(0.6, 0.8), 10.0, 1.0).unwrap();
        let p = Point2::new(7.25, 4.5);
        let (s, y) = to_road_frame(p, &f);
        let q = f.to_world(s, y);
        assert!(p.distance(q) < 1e-12);
    }
}
