//! Element-based change detection evaluation for vectorized HD maps.
//!
//! The crate covers the full evaluation pipeline for local lane-segment maps
//! paired with an outdated (stale) prior:
//!
//! - [`map`]: domain types, validation, FOV cropping, polyline resampling,
//!   and the JSON exchange format.
//! - [`geometry`]: Chamfer and discrete Fréchet distances, element
//!   polygonization, and rasterized polygon IoU.
//! - [`encoding`]: deterministic numeric encoding of a stale map into a
//!   per-element token matrix.
//! - [`perturb`]: synthetic change generation, producing (stale prior,
//!   ground truth, change label) triples.
//! - [`matching`]: one-to-one optimal assignment between predicted and
//!   ground-truth elements.
//! - [`metrics`]: the nine evaluation strategies (a)-(i): frame- and
//!   sequence-level change detection accuracy, change localization, and
//!   average precision of changed elements and of the updated map.
//! - [`sim`]: a configurable simulated detector and synthetic dataset
//!   builder, so the whole pipeline is testable end to end.
//! - [`dataset`]: dataset containers and the on-disk directory layout.
//! - [`render`]: SVG change-map rendering.

pub mod dataset;
pub mod encoding;
pub mod geometry;
pub mod map;
pub mod matching;
pub mod metrics;
pub mod perturb;
pub mod render;
pub(crate) mod seeding;
pub mod sim;
