//! Simulated detector and synthetic dataset builder.
//!
//! The simulator converts ground truth into predictions under controlled
//! corruption, providing the oracle needed to exercise every metric end to
//! end without a trained network. A zero-noise configuration reproduces the
//! ground truth exactly, so the full evaluation must come out perfect; each
//! noise knob degrades one aspect in a statistically predictable way.
//!
//! Noise semantics:
//! - `miss_rate`: each emitted prediction (including deleted pass-throughs)
//!   is dropped with this probability.
//! - `jitter_sigma`: i.i.d. Gaussian noise on every polyline coordinate.
//! - `flag_flip_rate`: each truly-changed element loses its change signal
//!   with this probability (both head probabilities fall below the 0.5
//!   cut). False-positive change signals come from clutter, which keeps the
//!   frame-level accuracy on single-change frames at exactly `1 - p` under
//!   pure flag-flip noise.
//! - `clutter_rate`: Poisson-distributed spurious elements per frame,
//!   sampled as copies of random real elements displaced at least 5 m,
//!   always flagged as changed (random direction) and scored from the
//!   clutter score model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Frame, FramePrediction, PredictedElement, Sequence};
use crate::map::{
    BoundaryType, ElementClass, Fov, LaneSegment, LocalMap, Point2, Polyline, CANONICAL_POINTS,
};
use crate::perturb::{
    generate_crossing, make_mixed_examples, ChangeKind, ChangeLabel, FrameGroundTruth,
    LabeledElement, PerturbError, PerturbationConfig,
};
use crate::seeding::derive_seed;

/// Score distribution of simulated detections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScoreModel {
    /// Every sample is exactly this value.
    Fixed { value: f64 },
    /// Beta-distributed scores in (0, 1).
    Beta { alpha: f64, beta: f64 },
}

impl ScoreModel {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            ScoreModel::Fixed { value } => value,
            ScoreModel::Beta { alpha, beta } => {
                Beta::new(alpha, beta).expect("valid beta parameters").sample(rng)
            }
        }
    }
}

/// Detector corruption parameters. The seed is mandatory; simulation has no
/// ambient randomness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub miss_rate: f64,
    pub clutter_rate: f64,
    pub jitter_sigma: f64,
    pub flag_flip_rate: f64,
    pub score_true: ScoreModel,
    pub score_clutter: ScoreModel,
    pub rng_seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            miss_rate: 0.0,
            clutter_rate: 0.0,
            jitter_sigma: 0.0,
            flag_flip_rate: 0.0,
            score_true: ScoreModel::Beta { alpha: 8.0, beta: 2.0 },
            score_clutter: ScoreModel::Beta { alpha: 2.0, beta: 8.0 },
            rng_seed: 0,
        }
    }
}

impl NoiseConfig {
    /// The identity detector: predictions reproduce ground truth exactly
    /// with score 1.0.
    pub fn zero(rng_seed: u64) -> Self {
        Self {
            miss_rate: 0.0,
            clutter_rate: 0.0,
            jitter_sigma: 0.0,
            flag_flip_rate: 0.0,
            score_true: ScoreModel::Fixed { value: 1.0 },
            score_clutter: ScoreModel::Fixed { value: 0.0 },
            rng_seed,
        }
    }

    pub fn with_seed(mut self, rng_seed: u64) -> Self {
        self.rng_seed = rng_seed;
        self
    }
}

/// Simulate one frame of detections from its ground truth and stale prior.
pub fn simulate_predictions(
    gt: &FrameGroundTruth,
    stale: &LocalMap,
    cfg: &NoiseConfig,
) -> FramePrediction {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut elements = Vec::with_capacity(gt.elements.len());

    for le in &gt.elements {
        if cfg.miss_rate > 0.0 && rng.gen::<f64>() < cfg.miss_rate {
            continue;
        }
        // Deleted elements exist only in the prior, so the simulated network
        // passes their stale geometry through.
        let source = if le.label == ChangeLabel::Deleted {
            stale.element(&le.segment.id).unwrap_or(&le.segment)
        } else {
            &le.segment
        };
        let segment = jitter_segment(source, cfg.jitter_sigma, &mut rng);

        let mut ins = le.label == ChangeLabel::Inserted;
        let mut del = le.label == ChangeLabel::Deleted;
        if (ins || del) && cfg.flag_flip_rate > 0.0 && rng.gen::<f64>() < cfg.flag_flip_rate {
            ins = false;
            del = false;
        }
        let ins_prob = head_probability(ins, &mut rng);
        let del_prob = head_probability(del, &mut rng);
        let score = cfg.score_true.sample(&mut rng).clamp(0.0, 1.0);
        elements.push(PredictedElement::new(segment, score, ins_prob, del_prob));
    }

    let clutter_count = if cfg.clutter_rate > 0.0 && !gt.elements.is_empty() {
        Poisson::new(cfg.clutter_rate).expect("positive rate").sample(&mut rng) as usize
    } else {
        0
    };
    for k in 0..clutter_count {
        let template = &gt.elements[rng.gen_range(0..gt.elements.len())].segment;
        let angle = rng.gen::<f64>() * std::f64::consts::TAU;
        let magnitude = 5.0 + 5.0 * rng.gen::<f64>();
        let offset = Point2::new(angle.cos() * magnitude, angle.sin() * magnitude);
        let mut segment = translate_segment(template, offset);
        segment = jitter_segment(&segment, cfg.jitter_sigma, &mut rng);
        segment.id = format!("clutter_{k}");
        segment.successors.clear();

        let as_insertion = rng.gen::<bool>();
        let ins_prob = head_probability(as_insertion, &mut rng);
        let del_prob = head_probability(!as_insertion, &mut rng);
        let score = cfg.score_clutter.sample(&mut rng).clamp(0.0, 1.0);
        elements.push(PredictedElement::new(segment, score, ins_prob, del_prob));
    }

    FramePrediction { frame_id: gt.frame_id.clone(), fov: gt.fov, elements }
}

/// Head probability consistent with the binary flag at the 0.5 cut:
/// [0.5, 1) when set, [0, 0.5) when clear.
fn head_probability(flag: bool, rng: &mut ChaCha8Rng) -> f64 {
    let u = rng.gen::<f64>();
    if flag {
        0.5 + 0.5 * u
    } else {
        0.5 * u
    }
}

fn jitter_segment(seg: &LaneSegment, sigma: f64, rng: &mut ChaCha8Rng) -> LaneSegment {
    if sigma <= 0.0 {
        return seg.clone();
    }
    let normal = Normal::new(0.0, sigma).expect("valid sigma");
    let mut out = seg.clone();
    for poly in [&mut out.centerline, &mut out.left_boundary, &mut out.right_boundary] {
        let pts: Vec<Point2> = poly
            .points()
            .iter()
            .map(|p| Point2::new(p.x + normal.sample(rng), p.y + normal.sample(rng)))
            .collect();
        *poly = Polyline::new(pts).expect("point count unchanged");
    }
    out
}

fn translate_segment(seg: &LaneSegment, by: Point2) -> LaneSegment {
    let mut out = seg.clone();
    for poly in [&mut out.centerline, &mut out.left_boundary, &mut out.right_boundary] {
        let pts: Vec<Point2> =
            poly.points().iter().map(|p| Point2::new(p.x + by.x, p.y + by.y)).collect();
        *poly = Polyline::new(pts).expect("point count unchanged");
    }
    out
}

/// Parameters of the procedural world generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    /// Number of parallel lanes.
    pub lanes: usize,
    /// Lane extent along x, meters (spans the standard FOV at 50).
    pub lane_length: f64,
    /// Lane width, meters.
    pub lane_width: f64,
    /// Unchanged pedestrian crossings placed mid-lane.
    pub background_crossings: usize,
    /// Peak sideways bend of the whole road, meters (0 = straight).
    pub curve_amplitude: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            lanes: 4,
            lane_length: 50.0,
            lane_width: 3.5,
            background_crossings: 1,
            curve_amplitude: 1.5,
        }
    }
}

/// Generate a valid world map: parallel (optionally gently curved) lanes
/// with a few unchanged crossings.
pub fn generate_world(frame_id: &str, cfg: &WorldConfig, seed: u64) -> LocalMap {
    assert!(cfg.lanes >= 1, "world needs at least one lane");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase = rng.gen::<f64>() * std::f64::consts::TAU;
    let amplitude = cfg.curve_amplitude * rng.gen::<f64>();

    // Shared boundary lines: line j sits j lane-widths above the road base.
    let half = cfg.lane_length / 2.0;
    let base = -(cfg.lanes as f64) * cfg.lane_width / 2.0;
    let line = |offset: f64| -> Polyline {
        let raw: Vec<Point2> = (0..24)
            .map(|i| {
                let x = -half + cfg.lane_length * i as f64 / 23.0;
                let bend =
                    amplitude * (x / cfg.lane_length * std::f64::consts::TAU + phase).sin();
                Point2::new(x, base + offset + bend)
            })
            .collect();
        Polyline::new(raw).unwrap().resample(CANONICAL_POINTS).unwrap()
    };

    let mut elements = Vec::new();
    for i in 0..cfg.lanes {
        let w = cfg.lane_width;
        elements.push(LaneSegment {
            id: format!("lane_{i}"),
            class: ElementClass::Lane,
            centerline: line((i as f64 + 0.5) * w),
            left_boundary: line((i as f64 + 1.0) * w),
            right_boundary: line(i as f64 * w),
            left_type: if i + 1 == cfg.lanes { BoundaryType::Solid } else { BoundaryType::Dashed },
            right_type: if i == 0 { BoundaryType::Solid } else { BoundaryType::Dashed },
            successors: vec![],
        });
    }

    let lane_count = cfg.lanes;
    for k in 0..cfg.background_crossings {
        let host_idx = rng.gen_range(0..lane_count);
        let host = elements[host_idx].clone();
        let mut crossing = generate_crossing(&host, 0.5, 3.5).expect("host is a lane");
        crossing.id = format!("crossing_{k}");
        elements.push(crossing);
    }

    LocalMap::new(frame_id, Fov::standard(), elements)
}

/// Configuration for the generic synthetic dataset builder: per frame, the
/// sequence world is perturbed and simulated with seeds derived from
/// (seed, sequence, frame).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub sequences: usize,
    pub frames_per_sequence: usize,
    pub world: WorldConfig,
    pub perturbation: PerturbationConfig,
    pub noise: NoiseConfig,
    pub seed: u64,
}

/// Build a dataset by generating one world per sequence and applying
/// per-frame perturbation and simulation under derived seeds.
pub fn build_synthetic_dataset(cfg: &SyntheticConfig) -> Result<Dataset, PerturbError> {
    assert!(cfg.sequences >= 1 && cfg.frames_per_sequence >= 1, "counts must be >= 1");
    cfg.perturbation.validate()?;
    let mut sequences = Vec::with_capacity(cfg.sequences);
    for s in 0..cfg.sequences {
        let sequence_id = format!("seq_{s:03}");
        let world = generate_world("world", &cfg.world, derive_seed(cfg.seed, &[0, s as u64]));
        let mut frames = Vec::with_capacity(cfg.frames_per_sequence);
        for f in 0..cfg.frames_per_sequence {
            let mut frame_world = world.clone();
            frame_world.frame_id = format!("f_{s:03}_{f:04}");
            let perturbation = PerturbationConfig {
                rng_seed: derive_seed(cfg.seed, &[1, s as u64, f as u64]),
                ..cfg.perturbation
            };
            let (stale, ground_truth) = make_mixed_examples(&frame_world, &perturbation)?;
            let noise = cfg.noise.with_seed(derive_seed(cfg.seed, &[2, s as u64, f as u64]));
            let prediction = simulate_predictions(&ground_truth, &stale, &noise);
            frames.push(Frame { stale, ground_truth, prediction });
        }
        sequences.push(Sequence { id: sequence_id, frames });
    }
    Ok(Dataset { sequences })
}

/// Shape of the reference benchmark preset (33 change sequences + 4 without
/// changes, 46 deletion changes, 20 insertion changes, ~3800 frames).
pub mod reference_preset {
    pub const CHANGE_SEQUENCES: usize = 33;
    pub const NO_CHANGE_SEQUENCES: usize = 4;
    pub const SEQUENCES: usize = CHANGE_SEQUENCES + NO_CHANGE_SEQUENCES;
    pub const FRAMES_PER_SEQUENCE: usize = 103;
    pub const DELETION_CHANGES: usize = 46;
    pub const INSERTION_CHANGES: usize = 20;
    /// Sequences carrying two deletions; the remaining change sequences
    /// carry one deletion and one insertion (2*13 + 20 = 46 deletions).
    pub const DOUBLE_DELETION_SEQUENCES: usize = 13;
}

/// Frame windows during which each planned change is visible (in view).
const CHANGE_WINDOWS: [(usize, usize); 2] = [(15, 45), (60, 90)];

/// Build the reference benchmark dataset: 37 sequences of 103 frames with
/// 46 deletion and 20 insertion changes, each visible in a window of frames
/// of its sequence. Change statistics land exactly on the preset constants.
pub fn reference_dataset(noise: &NoiseConfig, seed: u64) -> Dataset {
    use reference_preset::*;

    let world_cfg = WorldConfig::default();
    let mut sequences = Vec::with_capacity(SEQUENCES);
    for s in 0..SEQUENCES {
        let sequence_id = format!("seq_{s:03}");
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[10, s as u64]));
        let world = generate_world("world", &world_cfg, derive_seed(seed, &[0, s as u64]));

        // Plan this sequence's changes: kind plus a crossing away from the
        // background one (which sits at arclength fraction 0.5).
        let plan: Vec<ChangeKind> = if s < DOUBLE_DELETION_SEQUENCES {
            vec![ChangeKind::Deletion, ChangeKind::Deletion]
        } else if s < CHANGE_SEQUENCES {
            vec![ChangeKind::Deletion, ChangeKind::Insertion]
        } else {
            vec![]
        };
        let lanes: Vec<LaneSegment> = world
            .elements
            .iter()
            .filter(|e| e.class == ElementClass::Lane)
            .cloned()
            .collect();
        let changes: Vec<(ChangeKind, (usize, usize), LaneSegment)> = plan
            .iter()
            .enumerate()
            .map(|(c, &kind)| {
                let host = &lanes[rng.gen_range(0..lanes.len())];
                let along = if c == 0 { 0.2 } else { 0.8 };
                let mut crossing = generate_crossing(host, along, 3.5).expect("host is a lane");
                crossing.id = format!("change_{s:03}_{c}");
                (kind, CHANGE_WINDOWS[c], crossing)
            })
            .collect();

        let mut frames = Vec::with_capacity(FRAMES_PER_SEQUENCE);
        for f in 0..FRAMES_PER_SEQUENCE {
            let frame_id = format!("f_{s:03}_{f:04}");
            let mut stale_elements = world.elements.clone();
            let mut gt_elements: Vec<LabeledElement> = world
                .elements
                .iter()
                .map(|e| LabeledElement { segment: e.clone(), label: ChangeLabel::Unchanged })
                .collect();
            for (kind, (start, end), crossing) in &changes {
                if f < *start || f >= *end {
                    continue;
                }
                match kind {
                    // World gained the crossing: present in gt, absent from
                    // the prior.
                    ChangeKind::Insertion => gt_elements.push(LabeledElement {
                        segment: crossing.clone(),
                        label: ChangeLabel::Inserted,
                    }),
                    // World lost the crossing: present in the prior, kept in
                    // gt with its stale geometry.
                    ChangeKind::Deletion => {
                        stale_elements.push(crossing.clone());
                        gt_elements.push(LabeledElement {
                            segment: crossing.clone(),
                            label: ChangeLabel::Deleted,
                        });
                    }
                }
            }
            let stale = LocalMap::new(frame_id.clone(), world.fov, stale_elements);
            let ground_truth = FrameGroundTruth {
                frame_id: frame_id.clone(),
                fov: world.fov,
                elements: gt_elements,
            };
            let frame_noise = noise.with_seed(derive_seed(seed, &[2, s as u64, f as u64]));
            let prediction = simulate_predictions(&ground_truth, &stale, &frame_noise);
            frames.push(Frame { stale, ground_truth, prediction });
        }
        sequences.push(Sequence { id: sequence_id, frames });
    }
    Dataset { sequences }
}
