//! Domain types for vectorized local maps.
//!
//! All geometry lives in the ego frame: x forward, y left, meters. Maps are
//! per-frame local maps; no pose transforms happen inside this crate.
//!
//! A map element is a lane segment: a centerline plus left/right boundary
//! polylines with semantic boundary types. Canonical form is exactly
//! [`CANONICAL_POINTS`] points per polyline; inputs with other counts are
//! resampled at load time.

pub(crate) mod io;
mod validate;

pub use io::{load_map, load_map_with_warnings, save_map, LoadWarning, MapError};
pub use validate::{validate_map, PolylineRole, Violation};

use serde::{Deserialize, Serialize};

/// Canonical number of points per polyline after normalization.
pub const CANONICAL_POINTS: usize = 10;

/// A point in the ego frame (meters, x forward, y left).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Linear interpolation: `t = 0` is `self`, `t = 1` is `other`.
    pub fn lerp(&self, other: Point2, t: f64) -> Point2 {
        Point2::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Point2::new(v[0], v[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

/// An ordered open polyline with at least two points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct Polyline {
    points: Vec<Point2>,
}

impl Polyline {
    pub fn new(points: Vec<Point2>) -> Result<Self, MapError> {
        if points.len() < 2 {
            return Err(MapError::TooFewPoints { count: points.len() });
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> Point2 {
        self.points[0]
    }

    pub fn last(&self) -> Point2 {
        *self.points.last().expect("polyline has >= 2 points")
    }

    /// Total arclength (sum of segment lengths).
    pub fn arclength(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(w[1])).sum()
    }

    /// Point and unit tangent at a given arclength, clamped to the polyline
    /// extent. Zero-length polylines yield the first point and an x-forward
    /// tangent.
    pub fn point_and_tangent_at(&self, arclength: f64) -> (Point2, Point2) {
        let mut remaining = arclength.max(0.0);
        for w in self.points.windows(2) {
            let seg_len = w[0].dist(w[1]);
            if seg_len <= 0.0 {
                continue;
            }
            if remaining <= seg_len {
                let t = remaining / seg_len;
                let tangent =
                    Point2::new((w[1].x - w[0].x) / seg_len, (w[1].y - w[0].y) / seg_len);
                return (w[0].lerp(w[1], t), tangent);
            }
            remaining -= seg_len;
        }
        // Past the end: last point with the final segment's tangent.
        for w in self.points.windows(2).rev() {
            let seg_len = w[0].dist(w[1]);
            if seg_len > 0.0 {
                return (
                    self.last(),
                    Point2::new((w[1].x - w[0].x) / seg_len, (w[1].y - w[0].y) / seg_len),
                );
            }
        }
        (self.first(), Point2::new(1.0, 0.0))
    }

    /// Resample to `n` points at equal arclength spacing via linear
    /// interpolation. First and last points are preserved exactly.
    ///
    /// Resampling is a fixpoint (idempotent) whenever every interior vertex
    /// lies on a sample position; between sample positions the interpolation
    /// cuts corners, so arclength shrinks slightly for such inputs.
    pub fn resample(&self, n: usize) -> Result<Polyline, MapError> {
        assert!(n >= 2, "resample target must be >= 2 points");
        let total = self.arclength();
        if total <= 0.0 {
            return Err(MapError::ZeroLengthPolyline);
        }

        // Cumulative arclength at each vertex.
        let mut cum = Vec::with_capacity(self.points.len());
        cum.push(0.0);
        for w in self.points.windows(2) {
            cum.push(cum.last().unwrap() + w[0].dist(w[1]));
        }

        let mut out = Vec::with_capacity(n);
        out.push(self.first());
        let mut seg = 0usize;
        for i in 1..n - 1 {
            let target = total * i as f64 / (n - 1) as f64;
            while seg + 2 < cum.len() && cum[seg + 1] < target {
                seg += 1;
            }
            let seg_len = cum[seg + 1] - cum[seg];
            let t = if seg_len > 0.0 { (target - cum[seg]) / seg_len } else { 0.0 };
            out.push(self.points[seg].lerp(self.points[seg + 1], t));
        }
        out.push(self.last());
        Polyline::new(out)
    }
}

impl TryFrom<Vec<Point2>> for Polyline {
    type Error = MapError;
    fn try_from(points: Vec<Point2>) -> Result<Self, Self::Error> {
        Polyline::new(points)
    }
}

impl From<Polyline> for Vec<Point2> {
    fn from(p: Polyline) -> Self {
        p.points
    }
}

/// Lane boundary marking. Ordinal codes are frozen (0, 1, 2) and used in both
/// serialization and one-hot encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum BoundaryType {
    NonVisible,
    Dashed,
    Solid,
}

impl BoundaryType {
    pub const ALL: [BoundaryType; 3] =
        [BoundaryType::NonVisible, BoundaryType::Dashed, BoundaryType::Solid];

    pub fn code(&self) -> u8 {
        match self {
            BoundaryType::NonVisible => 0,
            BoundaryType::Dashed => 1,
            BoundaryType::Solid => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<BoundaryType> {
        match code {
            0 => Some(BoundaryType::NonVisible),
            1 => Some(BoundaryType::Dashed),
            2 => Some(BoundaryType::Solid),
            _ => None,
        }
    }
}

impl TryFrom<u8> for BoundaryType {
    type Error = MapError;
    fn try_from(code: u8) -> Result<Self, Self::Error> {
        BoundaryType::from_code(code).ok_or(MapError::Schema {
            field: "boundary type".into(),
            message: format!("unknown boundary type code {code} (expected 0, 1 or 2)"),
        })
    }
}

impl From<BoundaryType> for u8 {
    fn from(t: BoundaryType) -> u8 {
        t.code()
    }
}

/// Map element class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementClass {
    Lane,
    PedestrianCrossing,
}

impl ElementClass {
    pub const ALL: [ElementClass; 2] = [ElementClass::Lane, ElementClass::PedestrianCrossing];

    pub fn as_str(&self) -> &'static str {
        match self {
            ElementClass::Lane => "lane",
            ElementClass::PedestrianCrossing => "pedestrian_crossing",
        }
    }
}

/// A vectorized map element: centerline plus left/right boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneSegment {
    pub id: String,
    pub class: ElementClass,
    pub centerline: Polyline,
    pub left_boundary: Polyline,
    pub right_boundary: Polyline,
    pub left_type: BoundaryType,
    pub right_type: BoundaryType,
    #[serde(default)]
    pub successors: Vec<String>,
}

impl LaneSegment {
    /// Left and right boundary points concatenated into one unordered set.
    /// This is the point set used for boundary-based distance computation.
    pub fn boundary_points(&self) -> Vec<Point2> {
        let mut pts =
            Vec::with_capacity(self.left_boundary.len() + self.right_boundary.len());
        pts.extend_from_slice(self.left_boundary.points());
        pts.extend_from_slice(self.right_boundary.points());
        pts
    }
}

/// Axis-aligned field-of-view bounds in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Fov {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Fov {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Self { min_x, min_y, max_x, max_y }
    }

    /// The ego-centered square used throughout: [-25 m, +25 m] on both axes.
    pub fn standard() -> Self {
        Self::new(-25.0, -25.0, 25.0, 25.0)
    }

    pub fn is_well_formed(&self) -> bool {
        self.min_x < self.max_x
            && self.min_y < self.max_y
            && [self.min_x, self.min_y, self.max_x, self.max_y].iter().all(|v| v.is_finite())
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }
}

impl From<[f64; 4]> for Fov {
    fn from(v: [f64; 4]) -> Self {
        Fov::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Fov> for [f64; 4] {
    fn from(f: Fov) -> Self {
        [f.min_x, f.min_y, f.max_x, f.max_y]
    }
}

/// A per-frame local map: a set of lane segments inside a field of view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalMap {
    pub frame_id: String,
    pub fov: Fov,
    pub elements: Vec<LaneSegment>,
}

impl LocalMap {
    pub fn new(frame_id: impl Into<String>, fov: Fov, elements: Vec<LaneSegment>) -> Self {
        Self { frame_id: frame_id.into(), fov, elements }
    }

    pub fn element(&self, id: &str) -> Option<&LaneSegment> {
        self.elements.iter().find(|e| e.id == id)
    }

    /// Retain elements whose polygonized area intersects `bounds`. Elements
    /// straddling the boundary are kept whole; geometry is never clipped, so
    /// the canonical point count is preserved. Elements whose polygonization
    /// is degenerate fall back to a point-bounding-box test.
    pub fn crop_to_fov(&self, bounds: Fov) -> LocalMap {
        assert!(bounds.is_well_formed(), "crop bounds must satisfy min < max on both axes");
        let elements = self
            .elements
            .iter()
            .filter(|e| crate::geometry::element_intersects_rect(e, &bounds))
            .cloned()
            .collect();
        LocalMap { frame_id: self.frame_id.clone(), fov: bounds, elements }
    }

    /// Check every type invariant; returns one entry per violated rule.
    pub fn validate(&self) -> Vec<Violation> {
        validate_map(self)
    }
}
