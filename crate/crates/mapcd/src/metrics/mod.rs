//! The nine evaluation strategies (a)-(i) over a dataset of (stale prior,
//! ground truth, prediction) frames.
//!
//! - (a)/(b): type-agnostic change detection accuracy, single frame (SF) and
//!   multi frame (MF, per sequence).
//! - (c)/(d): the type-aware variants, split by change direction.
//! - (e)/(f): change localization accuracy via polygon IoU, type-agnostic
//!   and type-aware.
//! - (g)/(h): average precision over changed elements, type-agnostic and
//!   type-aware.
//! - (i): average precision of the full updated map (change labels
//!   ignored).
//!
//! Empty denominators yield explicit [`MetricValue::Undefined`] markers;
//! they are never silently coerced to zero.

mod ap;
mod localization;
mod report;

pub use ap::{changed_element_ap, updated_map_ap};
pub use localization::{localization_accuracy, LocalizationOptions};
pub use report::{evaluate_all, EvalError, EvalReport};

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::dataset::{Dataset, FramePrediction};
use crate::perturb::ChangeKind;

/// Evaluation parameters. Defaults follow the reference protocol: score
/// thresholds {0.2, 0.3, 0.4}, IoU thresholds {0.3, 0.5, 0.8} at a fixed
/// localization score threshold of 0.3, matching thresholds {1, 2, 3} m for
/// lanes and {0.5, 1, 1.5} m for pedestrian crossings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    /// Element-score acceptance thresholds for strategies (a)-(d).
    pub epsilons: Vec<f64>,
    /// IoU thresholds for strategies (e)-(f).
    pub thetas: Vec<f64>,
    /// Matching thresholds in meters for lane AP.
    pub lane_thresholds: Vec<f64>,
    /// Matching thresholds in meters for pedestrian-crossing AP.
    pub crossing_thresholds: Vec<f64>,
    /// Cell size in meters for rasterized IoU.
    pub iou_resolution: f64,
    /// Score threshold applied by the localization strategies (e)-(f).
    pub localization_epsilon: f64,
    /// Whether localization only pairs elements of equal class.
    pub class_gated_localization: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![0.2, 0.3, 0.4],
            thetas: vec![0.3, 0.5, 0.8],
            lane_thresholds: vec![1.0, 2.0, 3.0],
            crossing_thresholds: vec![0.5, 1.0, 1.5],
            iou_resolution: 0.1,
            localization_epsilon: 0.3,
            class_gated_localization: true,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        fn ascending_in(list: &[f64], lo: f64, hi: f64, name: &'static str) -> Result<(), EvalError> {
            if list.is_empty() {
                return Err(EvalError::BadConfig(name, "must be non-empty"));
            }
            if !list.windows(2).all(|w| w[0] < w[1]) {
                return Err(EvalError::BadConfig(name, "must be strictly ascending"));
            }
            if !list.iter().all(|v| v.is_finite() && *v > lo && *v < hi) {
                return Err(EvalError::BadConfig(name, "values out of range"));
            }
            Ok(())
        }
        ascending_in(&self.epsilons, 0.0, 1.0, "epsilons")?;
        ascending_in(&self.thetas, 0.0, 1.0, "thetas")?;
        ascending_in(&self.lane_thresholds, 0.0, f64::INFINITY, "lane_thresholds")?;
        ascending_in(&self.crossing_thresholds, 0.0, f64::INFINITY, "crossing_thresholds")?;
        if !(self.iou_resolution.is_finite() && self.iou_resolution > 0.0) {
            return Err(EvalError::BadConfig("iou_resolution", "must be > 0"));
        }
        if !(self.localization_epsilon > 0.0 && self.localization_epsilon < 1.0) {
            return Err(EvalError::BadConfig("localization_epsilon", "must be in (0, 1)"));
        }
        Ok(())
    }

    pub fn thresholds_for(&self, class: crate::map::ElementClass) -> &[f64] {
        match class {
            crate::map::ElementClass::Lane => &self.lane_thresholds,
            crate::map::ElementClass::PedestrianCrossing => &self.crossing_thresholds,
        }
    }
}

/// Why a metric could not be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UndefinedReason {
    /// The denominator class is empty (e.g. no change frames exist).
    EmptyClass(&'static str),
    /// No predicted changed elements pass the gates.
    NoDetections,
    /// No ground-truth elements exist for the population.
    NoGroundTruth,
}

impl fmt::Display for UndefinedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UndefinedReason::EmptyClass(which) => write!(f, "empty denominator: no {which}"),
            UndefinedReason::NoDetections => write!(f, "no detections"),
            UndefinedReason::NoGroundTruth => write!(f, "no ground truth"),
        }
    }
}

/// A metric result that distinguishes "undefined" from zero.
///
/// Serializes as `{"value": 0.7}` when defined and
/// `{"value": null, "reason": "..."}` when not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricValue {
    Defined(f64),
    Undefined(UndefinedReason),
}

impl MetricValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            MetricValue::Defined(v) => Some(*v),
            MetricValue::Undefined(_) => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, MetricValue::Defined(_))
    }

    /// Defined and equal to 1.0 within `tol`, or explicitly undefined.
    /// The identity-detector check treats both as perfect.
    pub fn is_perfect(&self, tol: f64) -> bool {
        match self {
            MetricValue::Defined(v) => (v - 1.0).abs() <= tol,
            MetricValue::Undefined(_) => true,
        }
    }

    fn ratio(numerator: usize, denominator: usize, empty: UndefinedReason) -> MetricValue {
        if denominator == 0 {
            MetricValue::Undefined(empty)
        } else {
            MetricValue::Defined(numerator as f64 / denominator as f64)
        }
    }
}

impl Serialize for MetricValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            MetricValue::Defined(v) => {
                let mut s = serializer.serialize_struct("MetricValue", 1)?;
                s.serialize_field("value", v)?;
                s.end()
            }
            MetricValue::Undefined(reason) => {
                let mut s = serializer.serialize_struct("MetricValue", 2)?;
                s.serialize_field("value", &Option::<f64>::None)?;
                s.serialize_field("reason", &reason.to_string())?;
                s.end()
            }
        }
    }
}

/// Positive-class accuracy, negative-class accuracy, and their mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccuracyTriple {
    pub acc_pos: MetricValue,
    pub acc_neg: MetricValue,
    pub m_acc: MetricValue,
}

impl AccuracyTriple {
    fn from_counts(
        correct_pos: usize,
        total_pos: usize,
        correct_neg: usize,
        total_neg: usize,
        pos_name: &'static str,
        neg_name: &'static str,
    ) -> Self {
        let acc_pos = MetricValue::ratio(correct_pos, total_pos, UndefinedReason::EmptyClass(pos_name));
        let acc_neg = MetricValue::ratio(correct_neg, total_neg, UndefinedReason::EmptyClass(neg_name));
        let m_acc = match (acc_pos, acc_neg) {
            (MetricValue::Defined(p), MetricValue::Defined(n)) => {
                MetricValue::Defined((p + n) / 2.0)
            }
            (MetricValue::Undefined(r), _) | (_, MetricValue::Undefined(r)) => {
                MetricValue::Undefined(r)
            }
        };
        Self { acc_pos, acc_neg, m_acc }
    }
}

/// Per-frame change verdict: true iff any element signals a change (of the
/// filtered kind) with score at or above `epsilon`.
pub fn sf_frame_verdict(frame: &FramePrediction, epsilon: f64, filter: Option<ChangeKind>) -> bool {
    frame.elements.iter().any(|e| e.signals_change(filter) && e.score >= epsilon)
}

/// Single-frame change detection accuracy over all frames of the dataset.
/// `Acc+` is computed over frames whose ground truth contains a change (of
/// the filtered kind), `Acc-` over the remaining frames.
pub fn sf_change_accuracy(ds: &Dataset, epsilon: f64, filter: Option<ChangeKind>) -> AccuracyTriple {
    let mut counts = [0usize; 4]; // [correct_pos, total_pos, correct_neg, total_neg]
    for (_, frame) in ds.frames() {
        let truth = frame.ground_truth.has_change(filter);
        let verdict = sf_frame_verdict(&frame.prediction, epsilon, filter);
        tally(&mut counts, truth, verdict);
    }
    AccuracyTriple::from_counts(
        counts[0],
        counts[1],
        counts[2],
        counts[3],
        "change frames",
        "no-change frames",
    )
}

/// Multi-frame (per sequence) change detection accuracy. A sequence verdict
/// is the OR over its frame verdicts; sequence ground truth is the OR over
/// frame ground truths.
pub fn mf_change_accuracy(ds: &Dataset, epsilon: f64, filter: Option<ChangeKind>) -> AccuracyTriple {
    let mut counts = [0usize; 4];
    for seq in &ds.sequences {
        let truth = seq.has_change(filter);
        let verdict =
            seq.frames.iter().any(|f| sf_frame_verdict(&f.prediction, epsilon, filter));
        tally(&mut counts, truth, verdict);
    }
    AccuracyTriple::from_counts(
        counts[0],
        counts[1],
        counts[2],
        counts[3],
        "change sequences",
        "no-change sequences",
    )
}

fn tally(counts: &mut [usize; 4], truth: bool, verdict: bool) {
    if truth {
        counts[1] += 1;
        if verdict {
            counts[0] += 1;
        }
    } else {
        counts[3] += 1;
        if !verdict {
            counts[2] += 1;
        }
    }
}
