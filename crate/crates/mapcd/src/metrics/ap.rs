//! Average precision of detected elements against ground truth.
//!
//! Detections are ranked by score; each is greedily assigned to the nearest
//! unconsumed ground-truth element of its frame (element distance at or
//! below the matching threshold). AP is the area under the all-point
//! precision/recall curve, averaged over the class's threshold set. This is
//! the ranked-greedy convention of detection metrics; the one-to-one
//! optimal assignment is reported separately in the matching audit.

use std::collections::BTreeMap;

use crate::dataset::Dataset;
use crate::geometry::segment_distance;
use crate::map::{ElementClass, LaneSegment};
use crate::perturb::ChangeKind;

use super::{EvalConfig, MetricValue, UndefinedReason};

/// Which sub-population of elements enters the AP computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pool {
    /// Elements flagged/labeled as changed (optionally of one direction).
    Changed(Option<ChangeKind>),
    /// Every element; change labels are ignored.
    All,
}

/// AP over changed elements per class, strategies (g) and (h). Predictions
/// enter when their change flags match `filter`; ground truth enters when
/// its label matches.
pub fn changed_element_ap(
    ds: &Dataset,
    filter: Option<ChangeKind>,
    cfg: &EvalConfig,
) -> BTreeMap<ElementClass, MetricValue> {
    per_class(ds, Pool::Changed(filter), cfg)
}

/// AP of the updated map per class, strategy (i): all predictions against
/// all ground-truth elements.
pub fn updated_map_ap(ds: &Dataset, cfg: &EvalConfig) -> BTreeMap<ElementClass, MetricValue> {
    per_class(ds, Pool::All, cfg)
}

fn per_class(ds: &Dataset, pool: Pool, cfg: &EvalConfig) -> BTreeMap<ElementClass, MetricValue> {
    ElementClass::ALL
        .iter()
        .map(|&class| (class, ap_for_class(ds, class, pool, cfg.thresholds_for(class))))
        .collect()
}

struct FrameSelection {
    /// Scores of the selected predictions, in element order.
    scores: Vec<f64>,
    gt_count: usize,
    /// Row-major pred x gt distance matrix; empty when either side is.
    distances: Vec<f64>,
}

impl FrameSelection {
    fn distance(&self, pred: usize, gt: usize) -> f64 {
        self.distances[pred * self.gt_count + gt]
    }
}

fn select_frame(
    frame: &crate::dataset::Frame,
    class: ElementClass,
    pool: Pool,
) -> FrameSelection {
    let preds: Vec<(f64, &LaneSegment)> = frame
        .prediction
        .elements
        .iter()
        .filter(|p| {
            p.segment.class == class
                && match pool {
                    Pool::Changed(filter) => p.signals_change(filter),
                    Pool::All => true,
                }
        })
        .map(|p| (p.score, &p.segment))
        .collect();
    let gts: Vec<&LaneSegment> = frame
        .ground_truth
        .elements
        .iter()
        .filter(|e| {
            e.segment.class == class
                && match pool {
                    Pool::Changed(None) => e.label.kind().is_some(),
                    Pool::Changed(Some(kind)) => e.label.kind() == Some(kind),
                    Pool::All => true,
                }
        })
        .map(|e| &e.segment)
        .collect();

    let mut distances = Vec::with_capacity(preds.len() * gts.len());
    for (_, p) in &preds {
        for g in &gts {
            distances.push(segment_distance(p, g));
        }
    }
    FrameSelection {
        scores: preds.into_iter().map(|(s, _)| s).collect(),
        gt_count: gts.len(),
        distances,
    }
}

fn ap_for_class(
    ds: &Dataset,
    class: ElementClass,
    pool: Pool,
    thresholds: &[f64],
) -> MetricValue {
    assert!(!thresholds.is_empty(), "threshold set must be non-empty");
    let frames: Vec<FrameSelection> =
        ds.frames().map(|(_, f)| select_frame(f, class, pool)).collect();
    let gt_total: usize = frames.iter().map(|f| f.gt_count).sum();
    if gt_total == 0 {
        return MetricValue::Undefined(UndefinedReason::NoGroundTruth);
    }

    // Global ranking: score descending, then (frame, element) order for a
    // deterministic tie-break.
    let mut detections: Vec<(usize, usize)> = frames
        .iter()
        .enumerate()
        .flat_map(|(fi, f)| (0..f.scores.len()).map(move |pi| (fi, pi)))
        .collect();
    detections.sort_by(|&(fa, pa), &(fb, pb)| {
        frames[fb].scores[pb]
            .partial_cmp(&frames[fa].scores[pa])
            .expect("scores are finite")
            .then(fa.cmp(&fb))
            .then(pa.cmp(&pb))
    });
    if detections.is_empty() {
        return MetricValue::Defined(0.0);
    }

    let mut ap_sum = 0.0;
    for &t in thresholds {
        let mut consumed: Vec<Vec<bool>> =
            frames.iter().map(|f| vec![false; f.gt_count]).collect();
        let mut true_positive = Vec::with_capacity(detections.len());
        for &(fi, pi) in &detections {
            let frame = &frames[fi];
            let mut best: Option<(f64, usize)> = None;
            for (gi, used) in consumed[fi].iter().enumerate() {
                if *used {
                    continue;
                }
                let d = frame.distance(pi, gi);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, gi));
                }
            }
            match best {
                Some((d, gi)) if d <= t => {
                    consumed[fi][gi] = true;
                    true_positive.push(true);
                }
                _ => true_positive.push(false),
            }
        }
        ap_sum += all_point_ap(&true_positive, gt_total);
    }
    MetricValue::Defined(ap_sum / thresholds.len() as f64)
}

/// Area under the all-point precision/recall curve for a ranked TP/FP
/// sequence: each true positive contributes (1 / gt_total) times the best
/// precision achieved at its recall level or beyond.
fn all_point_ap(true_positive: &[bool], gt_total: usize) -> f64 {
    let n = true_positive.len();
    if n == 0 {
        return 0.0;
    }
    let mut precision = Vec::with_capacity(n);
    let mut tp = 0usize;
    for (k, &hit) in true_positive.iter().enumerate() {
        if hit {
            tp += 1;
        }
        precision.push(tp as f64 / (k + 1) as f64);
    }
    // Precision envelope from the right.
    let mut envelope = precision;
    for k in (0..n.saturating_sub(1)).rev() {
        envelope[k] = envelope[k].max(envelope[k + 1]);
    }
    let recall_step = 1.0 / gt_total as f64;
    true_positive
        .iter()
        .zip(&envelope)
        .filter(|(hit, _)| **hit)
        .map(|(_, p)| recall_step * p)
        .sum()
}
