//! Deterministic numeric encoding of a stale map into a per-element token
//! matrix.
//!
//! Each map element becomes one row of shape `30 * dim + 2 * ONE_HOT_DIM`:
//! the 30 polyline points (centerline, then left boundary, then right
//! boundary) each contribute `dim` sine/cosine positional features, followed
//! by the one-hot encoded left and right boundary types.
//!
//! The per-point budget `dim` is split evenly between the x and y
//! coordinates: each scalar is encoded with `dim / 2` entries alternating
//! `sin(v / w_j)`, `cos(v / w_j)` over a geometric frequency ladder
//! `w_j = frequency_base^(2j / dim_scalar)`. This keeps the x and y channels
//! separable while matching the aggregate row width.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::map::{BoundaryType, LocalMap, Point2, Violation, CANONICAL_POINTS};

/// One-hot dimension for boundary types (non-visible, dashed, solid).
pub const ONE_HOT_DIM: usize = 3;

/// Points per element feeding the encoder (centerline + both boundaries).
pub const POINTS_PER_ELEMENT: usize = 3 * CANONICAL_POINTS;

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("map failed validation: {0:?}")]
    InvalidMap(Vec<Violation>),
}

/// Configuration of the positional encoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// Positional embedding dimension per coordinate pair. Must be a
    /// positive multiple of 4 so each scalar gets an even sin/cos budget.
    pub dim: usize,
    /// Base of the geometric frequency ladder.
    pub frequency_base: f64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self { dim: 16, frequency_base: 1000.0 }
    }
}

impl EncoderConfig {
    pub fn new(dim: usize, frequency_base: f64) -> Self {
        let cfg = Self { dim, frequency_base };
        cfg.assert_valid();
        cfg
    }

    fn assert_valid(&self) {
        assert!(
            self.dim >= 4 && self.dim.is_multiple_of(4),
            "encoder dim must be a positive multiple of 4, got {}",
            self.dim
        );
        assert!(
            self.frequency_base.is_finite() && self.frequency_base > 0.0,
            "frequency base must be positive and finite"
        );
    }

    /// Number of columns of the encoded matrix.
    pub fn columns(&self) -> usize {
        POINTS_PER_ELEMENT * self.dim + 2 * ONE_HOT_DIM
    }

    /// Encode one scalar with the full per-pair budget.
    pub fn encode_scalar(&self, value: f64) -> Vec<f64> {
        positional_encode(value, self.dim, self.frequency_base)
    }

    /// Encode a point: x then y, each with half the per-pair budget.
    pub fn encode_point(&self, p: Point2) -> Vec<f64> {
        let half = self.dim / 2;
        let mut out = positional_encode(p.x, half, self.frequency_base);
        out.extend(positional_encode(p.y, half, self.frequency_base));
        out
    }
}

/// Sine/cosine positional encoding of a scalar coordinate.
///
/// Returns `dim` entries alternating `sin(value / w_j)`, `cos(value / w_j)`
/// for the `dim / 2` frequencies `w_j = frequency_base^(2j / dim)`.
pub fn positional_encode(value: f64, dim: usize, frequency_base: f64) -> Vec<f64> {
    assert!(dim >= 2 && dim.is_multiple_of(2), "positional encoding dim must be even, got {dim}");
    assert!(value.is_finite(), "cannot encode non-finite value");
    let mut out = Vec::with_capacity(dim);
    for j in 0..dim / 2 {
        let omega = frequency_base.powf(2.0 * j as f64 / dim as f64);
        out.push((value / omega).sin());
        out.push((value / omega).cos());
    }
    out
}

/// One-hot encoding of a boundary type at its frozen ordinal.
pub fn one_hot_boundary(t: BoundaryType) -> [f64; ONE_HOT_DIM] {
    let mut out = [0.0; ONE_HOT_DIM];
    out[t.code() as usize] = 1.0;
    out
}

/// The encoded stale map: one row per element, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorEncoding {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PriorEncoding {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// One CSV line per row, comma-separated, shortest round-trip floats.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            let mut first = true;
            for v in self.row(i) {
                if !first {
                    out.push(',');
                }
                out.push_str(&format!("{v}"));
                first = false;
            }
            out.push('\n');
        }
        out
    }

    /// Little-endian binary layout: rows u64, cols u64, then row-major f64s.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.data.len() * 8);
        out.extend_from_slice(&(self.rows as u64).to_le_bytes());
        out.extend_from_slice(&(self.cols as u64).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }
}

/// Encode every element of a valid map. Row `i` encodes element `i`; the
/// row count equals the element count. Fails if the map has validation
/// violations.
pub fn encode_prior(map: &LocalMap, cfg: &EncoderConfig) -> Result<PriorEncoding, EncodeError> {
    cfg.assert_valid();
    let violations = map.validate();
    if !violations.is_empty() {
        return Err(EncodeError::InvalidMap(violations));
    }
    let cols = cfg.columns();
    let mut data = Vec::with_capacity(map.elements.len() * cols);
    for e in &map.elements {
        for poly in [&e.centerline, &e.left_boundary, &e.right_boundary] {
            for &p in poly.points() {
                data.extend(cfg.encode_point(p));
            }
        }
        data.extend(one_hot_boundary(e.left_type));
        data.extend(one_hot_boundary(e.right_type));
    }
    Ok(PriorEncoding { rows: map.elements.len(), cols, data })
}
