//! JSON exchange format for local maps.
//!
//! Schema (UTF-8):
//! ```json
//! {
//!   "frame_id": "f0",
//!   "fov": [-25.0, -25.0, 25.0, 25.0],
//!   "elements": [
//!     {
//!       "id": "lane_0",
//!       "class": "lane",
//!       "centerline": [[x, y], ...],
//!       "left_boundary": [[x, y], ...],
//!       "right_boundary": [[x, y], ...],
//!       "left_type": 1,
//!       "right_type": 2,
//!       "successors": ["lane_1"]
//!     }
//!   ]
//! }
//! ```
//! Coordinates are meters in the ego frame. Boundary type codes are 0
//! (non-visible), 1 (dashed), 2 (solid). Polylines with a point count other
//! than the canonical 10 are resampled on load and reported as warnings.
//! Serialization uses shortest-round-trip float formatting, so
//! `load(save(m)) == m` exactly.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    BoundaryType, ElementClass, Fov, LaneSegment, LocalMap, Point2, Polyline, PolylineRole,
    CANONICAL_POINTS,
};

/// Errors raised by map (de)serialization and polyline construction.
#[derive(Debug, Error)]
pub enum MapError {
    /// The input is not valid JSON for the documented schema.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    /// The JSON parsed but a field violates the schema.
    #[error("schema error in field '{field}': {message}")]
    Schema { field: String, message: String },
    /// A polyline was constructed with fewer than two points.
    #[error("polyline needs at least 2 points, got {count}")]
    TooFewPoints { count: usize },
    /// A polyline has zero total arclength and cannot be resampled.
    #[error("polyline has zero arclength")]
    ZeroLengthPolyline,
}

/// A non-fatal irregularity repaired during load.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadWarning {
    /// A polyline did not have the canonical point count and was resampled.
    Resampled { id: String, role: PolylineRole, original_count: usize },
}

impl fmt::Display for LoadWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadWarning::Resampled { id, role, original_count } => write!(
                f,
                "element '{id}': {role} resampled from {original_count} to {CANONICAL_POINTS} points"
            ),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawMap {
    frame_id: String,
    fov: [f64; 4],
    elements: Vec<RawElement>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct RawElement {
    id: String,
    class: String,
    centerline: Vec<[f64; 2]>,
    left_boundary: Vec<[f64; 2]>,
    right_boundary: Vec<[f64; 2]>,
    left_type: u8,
    right_type: u8,
    #[serde(default)]
    successors: Vec<String>,
}

pub(crate) fn parse_error(e: &serde_json::Error) -> MapError {
    MapError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
}

fn schema(field: &str, message: impl Into<String>) -> MapError {
    MapError::Schema { field: field.into(), message: message.into() }
}

pub(crate) fn class_from_str(s: &str, field: &str) -> Result<ElementClass, MapError> {
    match s {
        "lane" => Ok(ElementClass::Lane),
        "pedestrian_crossing" => Ok(ElementClass::PedestrianCrossing),
        other => Err(schema(field, format!("unknown class '{other}'"))),
    }
}

/// Convert raw polyline coordinates into a canonical 10-point polyline,
/// recording a resample warning when the input count differs.
pub(crate) fn canonical_polyline(
    raw: &[[f64; 2]],
    id: &str,
    role: PolylineRole,
    field: &str,
    warnings: &mut Vec<LoadWarning>,
) -> Result<Polyline, MapError> {
    if raw.len() < 2 {
        return Err(schema(field, format!("needs at least 2 points, got {}", raw.len())));
    }
    let pts: Vec<Point2> = raw.iter().map(|&c| Point2::from(c)).collect();
    if pts.iter().any(|p| !p.is_finite()) {
        return Err(schema(field, "non-finite coordinate"));
    }
    let poly = Polyline::new(pts).expect("length checked above");
    if poly.len() == CANONICAL_POINTS {
        return Ok(poly);
    }
    let resampled = poly
        .resample(CANONICAL_POINTS)
        .map_err(|_| schema(field, "zero arclength, cannot resample"))?;
    warnings.push(LoadWarning::Resampled {
        id: id.to_string(),
        role,
        original_count: raw.len(),
    });
    Ok(resampled)
}

pub(crate) fn element_from_raw(
    raw: &RawElement,
    warnings: &mut Vec<LoadWarning>,
) -> Result<LaneSegment, MapError> {
    let class = class_from_str(&raw.class, "class")?;
    let centerline =
        canonical_polyline(&raw.centerline, &raw.id, PolylineRole::Centerline, "centerline", warnings)?;
    let left_boundary = canonical_polyline(
        &raw.left_boundary,
        &raw.id,
        PolylineRole::LeftBoundary,
        "left_boundary",
        warnings,
    )?;
    let right_boundary = canonical_polyline(
        &raw.right_boundary,
        &raw.id,
        PolylineRole::RightBoundary,
        "right_boundary",
        warnings,
    )?;
    let left_type = BoundaryType::from_code(raw.left_type)
        .ok_or_else(|| schema("left_type", format!("unknown code {}", raw.left_type)))?;
    let right_type = BoundaryType::from_code(raw.right_type)
        .ok_or_else(|| schema("right_type", format!("unknown code {}", raw.right_type)))?;
    Ok(LaneSegment {
        id: raw.id.clone(),
        class,
        centerline,
        left_boundary,
        right_boundary,
        left_type,
        right_type,
        successors: raw.successors.clone(),
    })
}

pub(crate) fn element_to_raw(e: &LaneSegment) -> RawElement {
    RawElement {
        id: e.id.clone(),
        class: e.class.as_str().to_string(),
        centerline: e.centerline.points().iter().map(|&p| p.into()).collect(),
        left_boundary: e.left_boundary.points().iter().map(|&p| p.into()).collect(),
        right_boundary: e.right_boundary.points().iter().map(|&p| p.into()).collect(),
        left_type: e.left_type.code(),
        right_type: e.right_type.code(),
        successors: e.successors.clone(),
    }
}

/// Parse a local map from JSON bytes, collecting non-fatal repair warnings.
pub fn load_map_with_warnings(bytes: &[u8]) -> Result<(LocalMap, Vec<LoadWarning>), MapError> {
    let raw: RawMap = serde_json::from_slice(bytes).map_err(|e| parse_error(&e))?;
    let fov = Fov::from(raw.fov);
    if !fov.is_well_formed() {
        return Err(schema("fov", "requires min < max on both axes and finite bounds"));
    }
    let mut warnings = Vec::new();
    let mut elements = Vec::with_capacity(raw.elements.len());
    for e in &raw.elements {
        elements.push(element_from_raw(e, &mut warnings)?);
    }
    Ok((LocalMap { frame_id: raw.frame_id, fov, elements }, warnings))
}

/// Parse a local map from JSON bytes, discarding repair warnings.
pub fn load_map(bytes: &[u8]) -> Result<LocalMap, MapError> {
    load_map_with_warnings(bytes).map(|(m, _)| m)
}

/// Serialize a local map to pretty-printed JSON bytes.
pub fn save_map(map: &LocalMap) -> Vec<u8> {
    let raw = RawMap {
        frame_id: map.frame_id.clone(),
        fov: map.fov.into(),
        elements: map.elements.iter().map(element_to_raw).collect(),
    };
    let mut out = serde_json::to_vec_pretty(&raw).expect("map serialization cannot fail");
    out.push(b'\n');
    out
}
