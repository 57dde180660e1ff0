//! Map invariant checking. Violations are data, not errors: callers decide
//! whether to reject, warn, or repair.

use std::fmt;

use super::{LaneSegment, LocalMap, CANONICAL_POINTS};
use crate::geometry;

/// Which polyline of a lane segment a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolylineRole {
    Centerline,
    LeftBoundary,
    RightBoundary,
}

impl fmt::Display for PolylineRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolylineRole::Centerline => "centerline",
            PolylineRole::LeftBoundary => "left_boundary",
            PolylineRole::RightBoundary => "right_boundary",
        })
    }
}

/// A single violated map invariant, naming the element and the rule.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Field of view does not satisfy min < max on both axes.
    MalformedFov,
    /// Two elements share an id.
    DuplicateId { id: String },
    /// A polyline does not have the canonical point count.
    PointCount { id: String, role: PolylineRole, count: usize },
    /// A polyline contains NaN or infinite coordinates.
    NonFinite { id: String, role: PolylineRole },
    /// Boundaries enclose (almost) no area, e.g. left and right coincide.
    DegenerateElement { id: String },
    /// A successor id does not reference an element of the same map.
    UnknownSuccessor { id: String, successor: String },
    /// The element's polygon does not intersect the map's field of view.
    OutsideFov { id: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MalformedFov => write!(f, "fov is malformed (min >= max)"),
            Violation::DuplicateId { id } => write!(f, "duplicate element id '{id}'"),
            Violation::PointCount { id, role, count } => write!(
                f,
                "element '{id}': {role} has {count} points (expected {CANONICAL_POINTS})"
            ),
            Violation::NonFinite { id, role } => {
                write!(f, "element '{id}': {role} contains non-finite coordinates")
            }
            Violation::DegenerateElement { id } => {
                write!(f, "element '{id}': boundaries enclose no area")
            }
            Violation::UnknownSuccessor { id, successor } => {
                write!(f, "element '{id}': successor '{successor}' not found in map")
            }
            Violation::OutsideFov { id } => {
                write!(f, "element '{id}' does not intersect the map fov")
            }
        }
    }
}

/// Check every invariant of `map`. Returns an empty list iff the map is valid.
pub fn validate_map(map: &LocalMap) -> Vec<Violation> {
    let mut out = Vec::new();

    if !map.fov.is_well_formed() {
        out.push(Violation::MalformedFov);
    }

    let mut seen = std::collections::BTreeSet::new();
    for e in &map.elements {
        if !seen.insert(e.id.as_str()) {
            out.push(Violation::DuplicateId { id: e.id.clone() });
        }
    }

    for e in &map.elements {
        validate_element(e, map, &mut out);
    }
    out
}

fn validate_element(e: &LaneSegment, map: &LocalMap, out: &mut Vec<Violation>) {
    let polys = [
        (PolylineRole::Centerline, &e.centerline),
        (PolylineRole::LeftBoundary, &e.left_boundary),
        (PolylineRole::RightBoundary, &e.right_boundary),
    ];
    let mut finite = true;
    for (role, poly) in polys {
        if poly.len() != CANONICAL_POINTS {
            out.push(Violation::PointCount { id: e.id.clone(), role, count: poly.len() });
        }
        if !poly.points().iter().all(|p| p.is_finite()) {
            out.push(Violation::NonFinite { id: e.id.clone(), role });
            finite = false;
        }
    }

    if finite {
        match geometry::element_polygon(e) {
            Ok(poly) => {
                if map.fov.is_well_formed()
                    && !geometry::polygon_intersects_rect(&poly, &map.fov)
                {
                    out.push(Violation::OutsideFov { id: e.id.clone() });
                }
            }
            Err(_) => out.push(Violation::DegenerateElement { id: e.id.clone() }),
        }
    }

    for s in &e.successors {
        if map.element(s).is_none() {
            out.push(Violation::UnknownSuccessor { id: e.id.clone(), successor: s.clone() });
        }
    }
}
