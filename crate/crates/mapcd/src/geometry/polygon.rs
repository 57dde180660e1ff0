//! Simple polygons, point containment, rasterized IoU, and element
//! polygonization.

use crate::map::{Fov, LaneSegment, Point2};

use super::{GeometryError, DEGENERATE_AREA_M2};

/// A closed polygon stored as an open ring (first point != last point).
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    ring: Vec<Point2>,
}

impl Polygon {
    pub fn new(ring: Vec<Point2>) -> Result<Self, GeometryError> {
        if ring.len() < 3 {
            return Err(GeometryError::TooFewVertices { count: ring.len() });
        }
        if ring.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        Ok(Self { ring })
    }

    pub fn ring(&self) -> &[Point2] {
        &self.ring
    }

    /// Shoelace formula; positive for counter-clockwise rings.
    pub fn signed_area(&self) -> f64 {
        let mut acc = 0.0;
        let n = self.ring.len();
        for i in 0..n {
            let a = self.ring[i];
            let b = self.ring[(i + 1) % n];
            acc += a.x * b.y - b.x * a.y;
        }
        0.5 * acc
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn bbox(&self) -> (Point2, Point2) {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.ring {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        (min, max)
    }

    /// Even-odd rule point containment (ray crossing).
    pub fn contains(&self, p: Point2) -> bool {
        let n = self.ring.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let a = self.ring[i];
            let b = self.ring[j];
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }
}

/// Polygonize a lane segment: left boundary followed by the reversed right
/// boundary. Fails if the enclosed area is below the degeneracy threshold.
pub fn element_polygon(seg: &LaneSegment) -> Result<Polygon, GeometryError> {
    let mut ring: Vec<Point2> = seg.left_boundary.points().to_vec();
    ring.extend(seg.right_boundary.points().iter().rev());
    let poly = Polygon::new(ring)?;
    if poly.area() < DEGENERATE_AREA_M2 {
        return Err(GeometryError::DegenerateElement);
    }
    Ok(poly)
}

/// Rasterized intersection-over-union of two polygons.
///
/// Both polygons are scan-converted onto a shared grid of cell size
/// `resolution` anchored at their joint bounding box minimum; a cell counts
/// as covered when its center lies inside the polygon (even-odd rule).
/// Deterministic for fixed inputs. Returns 0.0 when no cell center falls in
/// either polygon.
pub fn polygon_iou(a: &Polygon, b: &Polygon, resolution: f64) -> Result<f64, GeometryError> {
    assert!(
        resolution.is_finite() && resolution > 0.0,
        "iou resolution must be positive"
    );
    if a.area() < DEGENERATE_AREA_M2 || b.area() < DEGENERATE_AREA_M2 {
        return Err(GeometryError::DegenerateElement);
    }

    let (a_min, a_max) = a.bbox();
    let (b_min, b_max) = b.bbox();
    let origin = Point2::new(a_min.x.min(b_min.x), a_min.y.min(b_min.y));
    let extent = Point2::new(a_max.x.max(b_max.x), a_max.y.max(b_max.y));
    let nx = cell_count(origin.x, extent.x, resolution);
    let ny = cell_count(origin.y, extent.y, resolution);

    // Count per-polygon covered cells only inside each polygon's own bbox
    // sub-range of the shared lattice; centers outside a bbox can never be
    // inside that polygon, so the counts equal a full-grid scan.
    let a_range = index_range(origin, a_min, a_max, resolution, nx, ny);
    let b_range = index_range(origin, b_min, b_max, resolution, nx, ny);

    let count_a = count_covered(a, origin, resolution, &a_range);
    let count_b = count_covered(b, origin, resolution, &b_range);
    let overlap = a_range.intersect(&b_range);
    let mut inter = 0usize;
    if let Some(r) = overlap {
        for iy in r.y_lo..r.y_hi {
            for ix in r.x_lo..r.x_hi {
                let c = cell_center(origin, resolution, ix, iy);
                if a.contains(c) && b.contains(c) {
                    inter += 1;
                }
            }
        }
    }

    let union = count_a + count_b - inter;
    if union == 0 {
        return Ok(0.0);
    }
    Ok(inter as f64 / union as f64)
}

#[derive(Debug, Clone, Copy)]
struct IndexRange {
    x_lo: usize,
    x_hi: usize,
    y_lo: usize,
    y_hi: usize,
}

impl IndexRange {
    fn intersect(&self, other: &IndexRange) -> Option<IndexRange> {
        let r = IndexRange {
            x_lo: self.x_lo.max(other.x_lo),
            x_hi: self.x_hi.min(other.x_hi),
            y_lo: self.y_lo.max(other.y_lo),
            y_hi: self.y_hi.min(other.y_hi),
        };
        (r.x_lo < r.x_hi && r.y_lo < r.y_hi).then_some(r)
    }
}

fn cell_count(lo: f64, hi: f64, resolution: f64) -> usize {
    (((hi - lo) / resolution).ceil() as usize).max(1)
}

fn cell_center(origin: Point2, resolution: f64, ix: usize, iy: usize) -> Point2 {
    Point2::new(
        origin.x + (ix as f64 + 0.5) * resolution,
        origin.y + (iy as f64 + 0.5) * resolution,
    )
}

fn index_range(
    origin: Point2,
    bmin: Point2,
    bmax: Point2,
    resolution: f64,
    nx: usize,
    ny: usize,
) -> IndexRange {
    // One cell of slack on each side; containment tests decide membership.
    let lo = |v: f64, o: f64| (((v - o) / resolution - 1.0).floor().max(0.0)) as usize;
    let hi = |v: f64, o: f64, n: usize| ((((v - o) / resolution + 1.0).ceil()) as usize).min(n);
    IndexRange {
        x_lo: lo(bmin.x, origin.x),
        x_hi: hi(bmax.x, origin.x, nx),
        y_lo: lo(bmin.y, origin.y),
        y_hi: hi(bmax.y, origin.y, ny),
    }
}

fn count_covered(poly: &Polygon, origin: Point2, resolution: f64, range: &IndexRange) -> usize {
    let mut count = 0;
    for iy in range.y_lo..range.y_hi {
        for ix in range.x_lo..range.x_hi {
            if poly.contains(cell_center(origin, resolution, ix, iy)) {
                count += 1;
            }
        }
    }
    count
}

/// True iff the polygon's area intersects the axis-aligned rectangle.
pub fn polygon_intersects_rect(poly: &Polygon, rect: &Fov) -> bool {
    if poly.ring().iter().any(|&p| rect.contains(p)) {
        return true;
    }
    let corners = [
        Point2::new(rect.min_x, rect.min_y),
        Point2::new(rect.max_x, rect.min_y),
        Point2::new(rect.max_x, rect.max_y),
        Point2::new(rect.min_x, rect.max_y),
    ];
    if corners.iter().any(|&c| poly.contains(c)) {
        return true;
    }
    let n = poly.ring().len();
    for i in 0..n {
        let a = poly.ring()[i];
        let b = poly.ring()[(i + 1) % n];
        for j in 0..4 {
            if segments_intersect(a, b, corners[j], corners[(j + 1) % 4]) {
                return true;
            }
        }
    }
    false
}

/// True iff an element's polygonized area intersects the rectangle. Elements
/// with degenerate polygons fall back to a point bounding-box test.
pub fn element_intersects_rect(e: &LaneSegment, rect: &Fov) -> bool {
    match element_polygon(e) {
        Ok(poly) => polygon_intersects_rect(&poly, rect),
        Err(_) => {
            let pts = e.boundary_points();
            let min_x = pts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
            let max_x = pts.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
            let min_y = pts.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
            let max_y = pts.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
            min_x <= rect.max_x && max_x >= rect.min_x && min_y <= rect.max_y && max_y >= rect.min_y
        }
    }
}

fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}
