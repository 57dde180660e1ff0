//! Synthetic change generation.
//!
//! Given an up-to-date world map, produce a (stale prior, ground truth)
//! pair with per-element change labels:
//!
//! - Removing a pedestrian crossing from the prior means the world gained
//!   one relative to the prior, so the element is labeled `Inserted`.
//! - Adding a synthetic crossing to the prior only means the world lost it,
//!   so the element is labeled `Deleted`. Deleted elements keep their full
//!   (stale) geometry in the ground truth so localization metrics can score
//!   them.
//!
//! Lanes are never touched; element shifts are out of scope (a shift is
//! expressible as a deletion plus an insertion). All randomness is driven by
//! the mandatory seed; identical inputs produce byte-identical outputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::point_to_polyline_distance;
use crate::map::{
    BoundaryType, ElementClass, Fov, LaneSegment, LocalMap, Point2, Polyline, CANONICAL_POINTS,
};

/// Per-element change status relative to the stale prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeLabel {
    Unchanged,
    Inserted,
    Deleted,
}

impl ChangeLabel {
    pub fn kind(&self) -> Option<ChangeKind> {
        match self {
            ChangeLabel::Unchanged => None,
            ChangeLabel::Inserted => Some(ChangeKind::Insertion),
            ChangeLabel::Deleted => Some(ChangeKind::Deletion),
        }
    }
}

/// Direction of a change, used by type-aware metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeKind {
    Insertion,
    Deletion,
}

impl ChangeKind {
    pub const ALL: [ChangeKind; 2] = [ChangeKind::Insertion, ChangeKind::Deletion];

    pub fn as_str(&self) -> &'static str {
        match self {
            ChangeKind::Insertion => "insertion",
            ChangeKind::Deletion => "deletion",
        }
    }
}

/// A ground-truth element with its change label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledElement {
    pub segment: LaneSegment,
    pub label: ChangeLabel,
}

/// Per-frame ground truth: the labeled union of world elements and deleted
/// stale elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameGroundTruth {
    pub frame_id: String,
    pub fov: Fov,
    pub elements: Vec<LabeledElement>,
}

impl FrameGroundTruth {
    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    /// True iff the frame contains a changed element (of the given kind,
    /// when a filter is supplied).
    pub fn has_change(&self, filter: Option<ChangeKind>) -> bool {
        self.elements.iter().any(|e| match filter {
            None => e.label != ChangeLabel::Unchanged,
            Some(kind) => e.label.kind() == Some(kind),
        })
    }

    pub fn changed(&self, filter: Option<ChangeKind>) -> impl Iterator<Item = &LabeledElement> {
        self.elements.iter().filter(move |e| match filter {
            None => e.label != ChangeLabel::Unchanged,
            Some(kind) => e.label.kind() == Some(kind),
        })
    }
}

/// Parameters of the synthetic change generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    /// Probability that each pedestrian crossing is removed from the prior
    /// (producing an `Inserted` label).
    pub deletion_probability: f64,
    /// Expected number of synthetic crossings added to the prior per frame
    /// (each producing a `Deleted` label).
    pub insertion_rate: f64,
    /// Extent of generated crossings along the host lane, meters.
    pub crossing_length: f64,
    /// Mandatory seed; there is no ambient randomness.
    pub rng_seed: u64,
    /// Optional target insertion:deletion label ratio for mixed generation.
    /// When set, the synthetic-crossing rate is rescaled so the expected
    /// ratio matches; `deletion_probability` stays authoritative for
    /// insertions.
    #[serde(default)]
    pub target_ratio: Option<f64>,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self {
            deletion_probability: 0.5,
            insertion_rate: 0.5,
            crossing_length: 3.5,
            rng_seed: 0,
            target_ratio: None,
        }
    }
}

impl PerturbationConfig {
    pub fn validate(&self) -> Result<(), PerturbError> {
        if !(0.0..=1.0).contains(&self.deletion_probability) {
            return Err(PerturbError::BadConfig("deletion_probability must be in [0, 1]"));
        }
        if !self.insertion_rate.is_finite() || self.insertion_rate < 0.0 {
            return Err(PerturbError::BadConfig("insertion_rate must be >= 0"));
        }
        if !self.crossing_length.is_finite() || self.crossing_length <= 0.0 {
            return Err(PerturbError::BadConfig("crossing_length must be > 0"));
        }
        if let Some(r) = self.target_ratio {
            if !r.is_finite() || r <= 0.0 {
                return Err(PerturbError::BadConfig("target_ratio must be > 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PerturbError {
    #[error("world has no lane to host a synthetic crossing")]
    NoHostLane,
    #[error("crossing host must be a lane")]
    HostNotLane,
    #[error("invalid perturbation config: {0}")]
    BadConfig(&'static str),
}

/// Build a pedestrian crossing spanning `host` from its right to its left
/// boundary, centered at centerline arclength fraction `s` and extended
/// `length` meters along the lane tangent. The crossing is clamped so it
/// lies fully within the host's arclength extent; hosts shorter than
/// `length` center it at the midpoint.
pub fn generate_crossing(
    host: &LaneSegment,
    s: f64,
    length: f64,
) -> Result<LaneSegment, PerturbError> {
    if host.class != ElementClass::Lane {
        return Err(PerturbError::HostNotLane);
    }
    if !length.is_finite() || length <= 0.0 {
        return Err(PerturbError::BadConfig("crossing length must be > 0"));
    }
    let total = host.centerline.arclength();
    let target = (s.clamp(0.0, 1.0) * total).clamp(
        (length / 2.0).min(total / 2.0),
        (total - length / 2.0).max(total / 2.0),
    );
    let (center, tangent) = host.centerline.point_and_tangent_at(target);
    let normal = Point2::new(-tangent.y, tangent.x);

    let width_left = point_to_polyline_distance(center, host.left_boundary.points());
    let width_right = point_to_polyline_distance(center, host.right_boundary.points());

    let offset = |p: Point2, dir: Point2, by: f64| Point2::new(p.x + dir.x * by, p.y + dir.y * by);
    // Pedestrian path: host right boundary to host left boundary.
    let path_start = offset(center, normal, -width_right);
    let path_end = offset(center, normal, width_left);
    let path = Polyline::new(vec![path_start, path_end])
        .expect("two endpoints")
        .resample(CANONICAL_POINTS)
        .map_err(|_| PerturbError::BadConfig("host boundaries coincide at crossing site"))?;

    let shifted = |by: f64| {
        let pts = path.points().iter().map(|&p| offset(p, tangent, by)).collect();
        Polyline::new(pts).expect("canonical point count")
    };
    Ok(LaneSegment {
        id: format!("{}_crossing", host.id),
        class: ElementClass::PedestrianCrossing,
        centerline: path.clone(),
        left_boundary: shifted(-length / 2.0),
        right_boundary: shifted(length / 2.0),
        left_type: BoundaryType::NonVisible,
        right_type: BoundaryType::NonVisible,
        successors: vec![],
    })
}

/// Remove pedestrian crossings from the prior copy, labeling them
/// `Inserted` in the ground truth (the world gained them relative to the
/// prior). Lanes are never removed.
pub fn make_insertion_examples(
    world: &LocalMap,
    cfg: &PerturbationConfig,
) -> (LocalMap, FrameGroundTruth) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    insertion_pass(world, cfg, &mut rng)
}

fn insertion_pass(
    world: &LocalMap,
    cfg: &PerturbationConfig,
    rng: &mut ChaCha8Rng,
) -> (LocalMap, FrameGroundTruth) {
    let mut stale_elements = Vec::with_capacity(world.elements.len());
    let mut gt_elements = Vec::with_capacity(world.elements.len());
    for e in &world.elements {
        let removed = e.class == ElementClass::PedestrianCrossing
            && rng.gen::<f64>() < cfg.deletion_probability;
        if removed {
            gt_elements.push(LabeledElement { segment: e.clone(), label: ChangeLabel::Inserted });
        } else {
            stale_elements.push(e.clone());
            gt_elements.push(LabeledElement { segment: e.clone(), label: ChangeLabel::Unchanged });
        }
    }
    (
        LocalMap::new(world.frame_id.clone(), world.fov, stale_elements),
        FrameGroundTruth { frame_id: world.frame_id.clone(), fov: world.fov, elements: gt_elements },
    )
}

/// Add synthetic crossings to the prior copy only, labeling them `Deleted`
/// in the ground truth (the world lost them relative to the prior).
pub fn make_deletion_examples(
    world: &LocalMap,
    cfg: &PerturbationConfig,
) -> Result<(LocalMap, FrameGroundTruth), PerturbError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    deletion_pass(world, cfg, cfg.insertion_rate, &mut rng)
}

fn deletion_pass(
    world: &LocalMap,
    cfg: &PerturbationConfig,
    rate: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(LocalMap, FrameGroundTruth), PerturbError> {
    let hosts: Vec<&LaneSegment> =
        world.elements.iter().filter(|e| e.class == ElementClass::Lane).collect();
    if hosts.is_empty() {
        return Err(PerturbError::NoHostLane);
    }
    let count = if rate > 0.0 {
        Poisson::new(rate).expect("positive rate").sample(rng) as usize
    } else {
        0
    };

    let mut stale = world.clone();
    let mut gt_elements: Vec<LabeledElement> = world
        .elements
        .iter()
        .map(|e| LabeledElement { segment: e.clone(), label: ChangeLabel::Unchanged })
        .collect();
    for k in 0..count {
        let host = hosts[rng.gen_range(0..hosts.len())];
        let s = rng.gen::<f64>();
        let mut crossing = generate_crossing(host, s, cfg.crossing_length)?;
        crossing.id = unique_id(&stale, &format!("synthetic_crossing_{k}"));
        stale.elements.push(crossing.clone());
        gt_elements.push(LabeledElement { segment: crossing, label: ChangeLabel::Deleted });
    }
    Ok((
        stale,
        FrameGroundTruth { frame_id: world.frame_id.clone(), fov: world.fov, elements: gt_elements },
    ))
}

/// Apply both directions in one pass: crossing removals (`Inserted` labels)
/// followed by synthetic additions (`Deleted` labels), sharing one seeded
/// stream. `target_ratio` rescales the addition rate so the expected label
/// ratio matches.
pub fn make_mixed_examples(
    world: &LocalMap,
    cfg: &PerturbationConfig,
) -> Result<(LocalMap, FrameGroundTruth), PerturbError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let (stale_after_removals, gt) = insertion_pass(world, cfg, &mut rng);

    let rate = match cfg.target_ratio {
        Some(ratio) => {
            let crossings = world
                .elements
                .iter()
                .filter(|e| e.class == ElementClass::PedestrianCrossing)
                .count();
            crossings as f64 * cfg.deletion_probability / ratio
        }
        None => cfg.insertion_rate,
    };

    // Additions run on the removal-reduced prior but label against the world.
    let (with_synthetic, synth_gt) =
        deletion_pass(&stale_after_removals, cfg, rate, &mut rng).or_else(|e| match e {
            // A world without lanes can still produce removal-only examples.
            PerturbError::NoHostLane if rate == 0.0 => {
                Ok((stale_after_removals.clone(), FrameGroundTruth {
                    frame_id: world.frame_id.clone(),
                    fov: world.fov,
                    elements: vec![],
                }))
            }
            other => Err(other),
        })?;

    let mut elements = gt.elements;
    elements.extend(
        synth_gt.elements.into_iter().filter(|e| e.label == ChangeLabel::Deleted),
    );
    Ok((
        with_synthetic,
        FrameGroundTruth { frame_id: world.frame_id.clone(), fov: world.fov, elements },
    ))
}

fn unique_id(map: &LocalMap, candidate: &str) -> String {
    if map.element(candidate).is_none() {
        return candidate.to_string();
    }
    let mut n = 1usize;
    loop {
        let next = format!("{candidate}_{n}");
        if map.element(&next).is_none() {
            return next;
        }
        n += 1;
    }
}
