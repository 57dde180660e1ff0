//! Distance functions and polygon support for element matching and
//! localization scoring.
//!
//! All functions are pure and operate on ego-frame coordinates in meters.

mod polygon;

pub use polygon::{
    element_intersects_rect, element_polygon, polygon_intersects_rect, polygon_iou, Polygon,
};

use thiserror::Error;

use crate::map::{ElementClass, LaneSegment, Point2};

/// Elements whose boundary polygon encloses less area than this are rejected.
pub const DEGENERATE_AREA_M2: f64 = 1e-6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("point set is empty")]
    EmptySet,
    #[error("polygon ring needs at least 3 points, got {count}")]
    TooFewVertices { count: usize },
    #[error("polygon ring contains non-finite coordinates")]
    NonFinite,
    #[error("element polygon is degenerate (area below threshold)")]
    DegenerateElement,
}

/// Symmetric Chamfer distance between two point sets: the mean of the two
/// directed mean-nearest-neighbor distances.
///
/// The mean (not sum) form keeps the value independent of element point
/// count. Zero iff every point of each set coincides with a point of the
/// other.
pub fn chamfer_distance(a: &[Point2], b: &[Point2]) -> Result<f64, GeometryError> {
    if a.is_empty() || b.is_empty() {
        return Err(GeometryError::EmptySet);
    }
    Ok(0.5 * (directed_mean_nn(a, b) + directed_mean_nn(b, a)))
}

fn directed_mean_nn(from: &[Point2], to: &[Point2]) -> f64 {
    let total: f64 = from
        .iter()
        .map(|p| to.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min))
        .sum();
    total / from.len() as f64
}

/// Shortest distance from a point to a polyline (segment projections, not
/// just vertices).
pub fn point_to_polyline_distance(p: Point2, poly: &[Point2]) -> f64 {
    assert!(!poly.is_empty(), "polyline must have at least one point");
    if poly.len() == 1 {
        return p.dist(poly[0]);
    }
    poly.windows(2)
        .map(|w| point_to_segment_distance(p, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

fn point_to_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let abx = b.x - a.x;
    let aby = b.y - a.y;
    let len2 = abx * abx + aby * aby;
    if len2 <= 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * abx + (p.y - a.y) * aby) / len2).clamp(0.0, 1.0);
    p.dist(Point2::new(a.x + t * abx, a.y + t * aby))
}

/// Discrete Fréchet distance between two polylines, computed by dynamic
/// programming over the monotone coupling lattice.
///
/// Both inputs must have at least 2 points. Symmetric, and bounded below by
/// `max(d(p_first, q_first), d(p_last, q_last))`.
pub fn frechet_distance(p: &[Point2], q: &[Point2]) -> f64 {
    assert!(p.len() >= 2 && q.len() >= 2, "polylines need >= 2 points");
    let m = q.len();
    let mut prev = vec![0.0f64; m];
    let mut cur = vec![0.0f64; m];
    for (i, pi) in p.iter().enumerate() {
        for (j, qj) in q.iter().enumerate() {
            let d = pi.dist(*qj);
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => cur[j - 1].max(d),
                (_, 0) => prev[0].max(d),
                (_, _) => prev[j].min(prev[j - 1]).min(cur[j - 1]).max(d),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

/// Distance between a predicted and a ground-truth element.
///
/// For lanes this is the mean of the boundary Chamfer distance and the
/// centerline Fréchet distance. Pedestrian crossings have no meaningful
/// direction, so only the Chamfer distance over the pooled boundary point
/// sets is used. The ground-truth class selects the form.
pub fn segment_distance(pred: &LaneSegment, gt: &LaneSegment) -> f64 {
    let boundary = chamfer_distance(&pred.boundary_points(), &gt.boundary_points())
        .expect("lane segments always carry boundary points");
    match gt.class {
        ElementClass::Lane => {
            let center = frechet_distance(pred.centerline.points(), gt.centerline.points());
            0.5 * (boundary + center)
        }
        ElementClass::PedestrianCrossing => boundary,
    }
}
