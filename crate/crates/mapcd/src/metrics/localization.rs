//! Change localization accuracy: the fraction of predicted changed elements
//! whose polygon overlaps a ground-truth changed element at or above an IoU
//! threshold.
//!
//! Localization is directional: an insertion-flagged prediction is scored
//! against inserted ground truth, a deletion-flagged one against deleted
//! ground truth. By default only elements of the same class are paired.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::geometry::{element_polygon, polygon_iou, Polygon};
use crate::map::ElementClass;
use crate::perturb::ChangeKind;

use super::{EvalConfig, MetricValue, UndefinedReason};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationOptions {
    pub iou_resolution: f64,
    pub class_gated: bool,
}

impl From<&EvalConfig> for LocalizationOptions {
    fn from(cfg: &EvalConfig) -> Self {
        Self { iou_resolution: cfg.iou_resolution, class_gated: cfg.class_gated_localization }
    }
}

/// Per-dataset cache of the IoU scores that localization queries share
/// across thresholds and filters.
pub(crate) struct LocalizationCache {
    frames: Vec<FrameCache>,
}

struct FrameCache {
    has_gt_insertion: bool,
    has_gt_deletion: bool,
    preds: Vec<PredCache>,
}

struct PredCache {
    ins: bool,
    del: bool,
    score: f64,
    best_iou_insertion: f64,
    best_iou_deletion: f64,
}

impl LocalizationCache {
    pub(crate) fn build(ds: &Dataset, options: &LocalizationOptions) -> Self {
        let frames = ds
            .frames()
            .map(|(_, frame)| {
                let gt_changed: Vec<(ChangeKind, ElementClass, Option<Polygon>)> = frame
                    .ground_truth
                    .changed(None)
                    .map(|e| {
                        (
                            e.label.kind().expect("changed elements carry a kind"),
                            e.segment.class,
                            element_polygon(&e.segment).ok(),
                        )
                    })
                    .collect();
                let has_gt_insertion =
                    gt_changed.iter().any(|(k, _, _)| *k == ChangeKind::Insertion);
                let has_gt_deletion =
                    gt_changed.iter().any(|(k, _, _)| *k == ChangeKind::Deletion);

                let preds = frame
                    .prediction
                    .elements
                    .iter()
                    .filter(|p| p.signals_change(None))
                    .map(|p| {
                        let poly = element_polygon(&p.segment).ok();
                        let best = |kind: ChangeKind| {
                            best_iou(&poly, &p.segment.class, kind, &gt_changed, options)
                        };
                        PredCache {
                            ins: p.ins_flag(),
                            del: p.del_flag(),
                            score: p.score,
                            best_iou_insertion: best(ChangeKind::Insertion),
                            best_iou_deletion: best(ChangeKind::Deletion),
                        }
                    })
                    .collect();
                FrameCache { has_gt_insertion, has_gt_deletion, preds }
            })
            .collect();
        Self { frames }
    }

    pub(crate) fn query(
        &self,
        epsilon: f64,
        theta: f64,
        filter: Option<ChangeKind>,
        changed_frames_only: bool,
    ) -> MetricValue {
        let mut detections = 0usize;
        let mut localized = 0usize;
        for f in &self.frames {
            let frame_has_gt = match filter {
                None => f.has_gt_insertion || f.has_gt_deletion,
                Some(ChangeKind::Insertion) => f.has_gt_insertion,
                Some(ChangeKind::Deletion) => f.has_gt_deletion,
            };
            if changed_frames_only && !frame_has_gt {
                continue;
            }
            for p in &f.preds {
                let flagged = match filter {
                    None => p.ins || p.del,
                    Some(ChangeKind::Insertion) => p.ins,
                    Some(ChangeKind::Deletion) => p.del,
                };
                if !flagged || p.score < epsilon {
                    continue;
                }
                detections += 1;
                let hit = match filter {
                    None => {
                        (p.ins && p.best_iou_insertion >= theta)
                            || (p.del && p.best_iou_deletion >= theta)
                    }
                    Some(ChangeKind::Insertion) => p.best_iou_insertion >= theta,
                    Some(ChangeKind::Deletion) => p.best_iou_deletion >= theta,
                };
                if hit {
                    localized += 1;
                }
            }
        }
        if detections == 0 {
            return MetricValue::Undefined(UndefinedReason::NoDetections);
        }
        MetricValue::Defined(localized as f64 / detections as f64)
    }
}

fn best_iou(
    pred_poly: &Option<Polygon>,
    pred_class: &ElementClass,
    kind: ChangeKind,
    gt_changed: &[(ChangeKind, ElementClass, Option<Polygon>)],
    options: &LocalizationOptions,
) -> f64 {
    let Some(pred_poly) = pred_poly else {
        return 0.0;
    };
    gt_changed
        .iter()
        .filter(|(k, class, _)| *k == kind && (!options.class_gated || class == pred_class))
        .filter_map(|(_, _, gt_poly)| {
            gt_poly
                .as_ref()
                .and_then(|g| polygon_iou(pred_poly, g, options.iou_resolution).ok())
        })
        .fold(0.0, f64::max)
}

/// Localization accuracy over the dataset.
///
/// The numerator counts predicted changed elements (flag per `filter`,
/// score >= `epsilon`) whose IoU with a same-direction ground-truth changed
/// element reaches `theta`. The denominator counts all such detections;
/// with `changed_frames_only` it is restricted to frames containing at
/// least one ground-truth changed element (of the filtered kind). Returns
/// an undefined marker when there are no detections.
pub fn localization_accuracy(
    ds: &Dataset,
    epsilon: f64,
    theta: f64,
    filter: Option<ChangeKind>,
    changed_frames_only: bool,
    options: &LocalizationOptions,
) -> MetricValue {
    LocalizationCache::build(ds, options).query(epsilon, theta, filter, changed_frames_only)
}
