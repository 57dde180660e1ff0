//! Full-grid evaluation and report emission.
//!
//! [`evaluate_all`] runs every strategy over the configured parameter grid
//! and assembles a machine-readable report (JSON via serde) plus a Markdown
//! summary. Per-strategy failures surface as undefined markers; they never
//! abort the remaining strategies.

use serde::Serialize;
use thiserror::Error;

use crate::dataset::Dataset;
use crate::map::ElementClass;
use crate::matching::{build_cost_matrix, hungarian_assign};
use crate::perturb::ChangeKind;

use super::ap::{changed_element_ap, updated_map_ap};
use super::localization::{LocalizationCache, LocalizationOptions};
use super::{
    mf_change_accuracy, sf_change_accuracy, sf_frame_verdict, AccuracyTriple, EvalConfig,
    MetricValue,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("invalid config: {0} {1}")]
    BadConfig(&'static str, &'static str),
}

/// The complete evaluation output.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub config: EvalConfig,
    pub strategies: Strategies,
    pub verdict_audit: VerdictAudit,
    pub matching_audit: MatchingAudit,
}

#[derive(Debug, Clone, Serialize)]
pub struct Strategies {
    pub a: Strategy<EpsilonAccuracyRow>,
    pub b: Strategy<EpsilonAccuracyRow>,
    pub c: Strategy<TypedAccuracyRow>,
    pub d: Strategy<TypedAccuracyRow>,
    pub e: Strategy<LocalizationRow>,
    pub f: Strategy<TypedLocalizationRow>,
    pub g: Strategy<ApRow>,
    pub h: Strategy<TypedApRow>,
    pub i: Strategy<ApRow>,
}

/// One strategy block: metadata plus its result rows.
#[derive(Debug, Clone, Serialize)]
pub struct Strategy<R> {
    pub description: &'static str,
    /// "single_frame" or "multi_frame" (per-sequence OR of frame verdicts).
    pub modality: &'static str,
    /// Which matcher produced the numbers, where relevant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<&'static str>,
    /// Fixed score threshold for localization strategies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub rows: Vec<R>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonAccuracyRow {
    pub epsilon: f64,
    pub acc_pos: MetricValue,
    pub acc_neg: MetricValue,
    pub m_acc: MetricValue,
}

#[derive(Debug, Clone, Serialize)]
pub struct TypedAccuracyRow {
    pub change_kind: ChangeKind,
    pub epsilon: f64,
    pub acc_pos: MetricValue,
    pub acc_neg: MetricValue,
    pub m_acc: MetricValue,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizationRow {
    pub theta: f64,
    pub acc_loca: MetricValue,
    /// Restricted to frames containing at least one changed gt element.
    pub acc_loca_changed_frames: MetricValue,
}

#[derive(Debug, Clone, Serialize)]
pub struct TypedLocalizationRow {
    pub change_kind: ChangeKind,
    pub theta: f64,
    pub acc_loca: MetricValue,
    pub acc_loca_changed_frames: MetricValue,
}

#[derive(Debug, Clone, Serialize)]
pub struct ApRow {
    pub class: ElementClass,
    pub ap: MetricValue,
}

#[derive(Debug, Clone, Serialize)]
pub struct TypedApRow {
    pub change_kind: ChangeKind,
    pub class: ElementClass,
    pub ap: MetricValue,
}

/// Per-frame verdict table for auditing frame-level decisions.
#[derive(Debug, Clone, Serialize)]
pub struct VerdictAudit {
    pub epsilons: Vec<f64>,
    pub sequences: Vec<SequenceVerdicts>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceVerdicts {
    pub sequence_id: String,
    pub gt_change: bool,
    pub gt_insertion: bool,
    pub gt_deletion: bool,
    pub frames: Vec<FrameVerdicts>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameVerdicts {
    pub frame_id: String,
    pub gt_change: bool,
    pub gt_insertion: bool,
    pub gt_deletion: bool,
    /// Predicted verdicts, one entry per configured epsilon.
    pub predicted: Vec<VerdictAtEpsilon>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictAtEpsilon {
    pub epsilon: f64,
    pub change: bool,
    pub insertion: bool,
    pub deletion: bool,
}

/// One-to-one assignment audit of all predictions against all ground truth,
/// per frame (class-gated costs, optimal matching).
#[derive(Debug, Clone, Serialize)]
pub struct MatchingAudit {
    pub method: &'static str,
    pub totals: MatchingTotals,
    pub frames: Vec<FrameMatchingAudit>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct MatchingTotals {
    pub matched: usize,
    pub unmatched_predictions: usize,
    pub unmatched_ground_truth: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameMatchingAudit {
    pub sequence_id: String,
    pub frame_id: String,
    pub matched: usize,
    pub unmatched_predictions: usize,
    pub unmatched_ground_truth: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_matched_distance: Option<f64>,
}

/// Run all nine strategies over the full parameter grid.
pub fn evaluate_all(ds: &Dataset, cfg: &EvalConfig) -> Result<EvalReport, EvalError> {
    cfg.validate()?;

    let acc_rows = |mf: bool| -> Vec<EpsilonAccuracyRow> {
        cfg.epsilons
            .iter()
            .map(|&eps| {
                let acc = if mf {
                    mf_change_accuracy(ds, eps, None)
                } else {
                    sf_change_accuracy(ds, eps, None)
                };
                epsilon_row(eps, acc)
            })
            .collect()
    };
    let typed_acc_rows = |mf: bool| -> Vec<TypedAccuracyRow> {
        ChangeKind::ALL
            .iter()
            .flat_map(|&kind| {
                cfg.epsilons.iter().map(move |&eps| (kind, eps)).collect::<Vec<_>>()
            })
            .map(|(kind, eps)| {
                let acc = if mf {
                    mf_change_accuracy(ds, eps, Some(kind))
                } else {
                    sf_change_accuracy(ds, eps, Some(kind))
                };
                TypedAccuracyRow {
                    change_kind: kind,
                    epsilon: eps,
                    acc_pos: acc.acc_pos,
                    acc_neg: acc.acc_neg,
                    m_acc: acc.m_acc,
                }
            })
            .collect()
    };

    let loca_options = LocalizationOptions::from(cfg);
    let loca_cache = LocalizationCache::build(ds, &loca_options);
    let eps = cfg.localization_epsilon;
    let e_rows: Vec<LocalizationRow> = cfg
        .thetas
        .iter()
        .map(|&theta| LocalizationRow {
            theta,
            acc_loca: loca_cache.query(eps, theta, None, false),
            acc_loca_changed_frames: loca_cache.query(eps, theta, None, true),
        })
        .collect();
    let mut f_rows = Vec::with_capacity(ChangeKind::ALL.len() * cfg.thetas.len());
    for kind in ChangeKind::ALL {
        for &theta in &cfg.thetas {
            f_rows.push(TypedLocalizationRow {
                change_kind: kind,
                theta,
                acc_loca: loca_cache.query(eps, theta, Some(kind), false),
                acc_loca_changed_frames: loca_cache.query(eps, theta, Some(kind), true),
            });
        }
    }

    let ap_rows = |per_class: std::collections::BTreeMap<ElementClass, MetricValue>| {
        per_class.into_iter().map(|(class, ap)| ApRow { class, ap }).collect::<Vec<_>>()
    };
    let g_rows = ap_rows(changed_element_ap(ds, None, cfg));
    let h_rows: Vec<TypedApRow> = ChangeKind::ALL
        .iter()
        .flat_map(|&kind| {
            changed_element_ap(ds, Some(kind), cfg)
                .into_iter()
                .map(move |(class, ap)| TypedApRow { change_kind: kind, class, ap })
                .collect::<Vec<_>>()
        })
        .collect();
    let i_rows = ap_rows(updated_map_ap(ds, cfg));

    let strategies = Strategies {
        a: Strategy {
            description: "type-agnostic change detection accuracy",
            modality: "single_frame",
            method: None,
            epsilon: None,
            rows: acc_rows(false),
        },
        b: Strategy {
            description: "type-agnostic change detection accuracy",
            modality: "multi_frame",
            method: None,
            epsilon: None,
            rows: acc_rows(true),
        },
        c: Strategy {
            description: "type-aware change detection accuracy",
            modality: "single_frame",
            method: None,
            epsilon: None,
            rows: typed_acc_rows(false),
        },
        d: Strategy {
            description: "type-aware change detection accuracy",
            modality: "multi_frame",
            method: None,
            epsilon: None,
            rows: typed_acc_rows(true),
        },
        e: Strategy {
            description: "type-agnostic change localization accuracy",
            modality: "single_frame",
            method: None,
            epsilon: Some(eps),
            rows: e_rows,
        },
        f: Strategy {
            description: "type-aware change localization accuracy",
            modality: "single_frame",
            method: None,
            epsilon: Some(eps),
            rows: f_rows,
        },
        g: Strategy {
            description: "average precision of changed elements, type-agnostic",
            modality: "single_frame",
            method: Some("ranked_greedy"),
            epsilon: None,
            rows: g_rows,
        },
        h: Strategy {
            description: "average precision of changed elements, type-aware",
            modality: "single_frame",
            method: Some("ranked_greedy"),
            epsilon: None,
            rows: h_rows,
        },
        i: Strategy {
            description: "average precision of the updated map",
            modality: "single_frame",
            method: Some("ranked_greedy"),
            epsilon: None,
            rows: i_rows,
        },
    };

    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: cfg.clone(),
        strategies,
        verdict_audit: build_verdict_audit(ds, cfg),
        matching_audit: build_matching_audit(ds),
    })
}

fn epsilon_row(epsilon: f64, acc: AccuracyTriple) -> EpsilonAccuracyRow {
    EpsilonAccuracyRow { epsilon, acc_pos: acc.acc_pos, acc_neg: acc.acc_neg, m_acc: acc.m_acc }
}

fn build_verdict_audit(ds: &Dataset, cfg: &EvalConfig) -> VerdictAudit {
    let sequences = ds
        .sequences
        .iter()
        .map(|seq| SequenceVerdicts {
            sequence_id: seq.id.clone(),
            gt_change: seq.has_change(None),
            gt_insertion: seq.has_change(Some(ChangeKind::Insertion)),
            gt_deletion: seq.has_change(Some(ChangeKind::Deletion)),
            frames: seq
                .frames
                .iter()
                .map(|frame| FrameVerdicts {
                    frame_id: frame.ground_truth.frame_id.clone(),
                    gt_change: frame.ground_truth.has_change(None),
                    gt_insertion: frame.ground_truth.has_change(Some(ChangeKind::Insertion)),
                    gt_deletion: frame.ground_truth.has_change(Some(ChangeKind::Deletion)),
                    predicted: cfg
                        .epsilons
                        .iter()
                        .map(|&epsilon| VerdictAtEpsilon {
                            epsilon,
                            change: sf_frame_verdict(&frame.prediction, epsilon, None),
                            insertion: sf_frame_verdict(
                                &frame.prediction,
                                epsilon,
                                Some(ChangeKind::Insertion),
                            ),
                            deletion: sf_frame_verdict(
                                &frame.prediction,
                                epsilon,
                                Some(ChangeKind::Deletion),
                            ),
                        })
                        .collect(),
                })
                .collect(),
        })
        .collect();
    VerdictAudit { epsilons: cfg.epsilons.clone(), sequences }
}

fn build_matching_audit(ds: &Dataset) -> MatchingAudit {
    let mut totals = MatchingTotals::default();
    let frames = ds
        .frames()
        .map(|(seq, frame)| {
            let assignment =
                hungarian_assign(&build_cost_matrix(&frame.prediction, &frame.ground_truth));
            totals.matched += assignment.pairs.len();
            totals.unmatched_predictions += assignment.unmatched_preds.len();
            totals.unmatched_ground_truth += assignment.unmatched_gts.len();
            FrameMatchingAudit {
                sequence_id: seq.id.clone(),
                frame_id: frame.ground_truth.frame_id.clone(),
                matched: assignment.pairs.len(),
                unmatched_predictions: assignment.unmatched_preds.len(),
                unmatched_ground_truth: assignment.unmatched_gts.len(),
                mean_matched_distance: (!assignment.pairs.is_empty())
                    .then(|| assignment.total_cost / assignment.pairs.len() as f64),
            }
        })
        .collect();
    MatchingAudit { method: "hungarian", totals, frames }
}

impl EvalReport {
    /// Pretty-printed JSON bytes (stable field order, trailing newline).
    pub fn to_json(&self) -> Vec<u8> {
        let mut out =
            serde_json::to_vec_pretty(self).expect("report serialization cannot fail");
        out.push(b'\n');
        out
    }

    /// Markdown summary: one section per strategy, mirroring the tabular
    /// layout (strategy / modality / change class / parameter / values).
    pub fn to_markdown(&self) -> String {
        let mut md = String::from("# Change detection evaluation report\n");
        let s = &self.strategies;

        section_acc(&mut md, 'a', &s.a);
        section_acc(&mut md, 'b', &s.b);
        section_typed_acc(&mut md, 'c', &s.c);
        section_typed_acc(&mut md, 'd', &s.d);

        push_section(&mut md, 'e', s.e.description, s.e.modality);
        md.push_str("| theta | Acc_loca | Acc_loca (changed frames) |\n|---|---|---|\n");
        for r in &s.e.rows {
            md.push_str(&format!(
                "| {:.2} | {} | {} |\n",
                r.theta,
                fmt_metric(&r.acc_loca),
                fmt_metric(&r.acc_loca_changed_frames)
            ));
        }

        push_section(&mut md, 'f', s.f.description, s.f.modality);
        md.push_str(
            "| change kind | theta | Acc_loca | Acc_loca (changed frames) |\n|---|---|---|---|\n",
        );
        for r in &s.f.rows {
            md.push_str(&format!(
                "| {} | {:.2} | {} | {} |\n",
                r.change_kind.as_str(),
                r.theta,
                fmt_metric(&r.acc_loca),
                fmt_metric(&r.acc_loca_changed_frames)
            ));
        }

        push_section(&mut md, 'g', s.g.description, s.g.modality);
        md.push_str("| class | AP |\n|---|---|\n");
        for r in &s.g.rows {
            md.push_str(&format!("| {} | {} |\n", r.class.as_str(), fmt_metric(&r.ap)));
        }

        push_section(&mut md, 'h', s.h.description, s.h.modality);
        md.push_str("| change kind | class | AP |\n|---|---|---|\n");
        for r in &s.h.rows {
            md.push_str(&format!(
                "| {} | {} | {} |\n",
                r.change_kind.as_str(),
                r.class.as_str(),
                fmt_metric(&r.ap)
            ));
        }

        push_section(&mut md, 'i', s.i.description, s.i.modality);
        md.push_str("| class | AP |\n|---|---|\n");
        for r in &s.i.rows {
            md.push_str(&format!("| {} | {} |\n", r.class.as_str(), fmt_metric(&r.ap)));
        }

        md
    }
}

fn push_section(md: &mut String, key: char, description: &str, modality: &str) {
    md.push_str(&format!("\n## Strategy ({key}) - {description} [{modality}]\n\n"));
}

fn section_acc(md: &mut String, key: char, s: &Strategy<EpsilonAccuracyRow>) {
    push_section(md, key, s.description, s.modality);
    md.push_str("| epsilon | Acc+ | Acc- | mAcc |\n|---|---|---|---|\n");
    for r in &s.rows {
        md.push_str(&format!(
            "| {:.2} | {} | {} | {} |\n",
            r.epsilon,
            fmt_metric(&r.acc_pos),
            fmt_metric(&r.acc_neg),
            fmt_metric(&r.m_acc)
        ));
    }
}

fn section_typed_acc(md: &mut String, key: char, s: &Strategy<TypedAccuracyRow>) {
    push_section(md, key, s.description, s.modality);
    md.push_str("| change kind | epsilon | Acc+ | Acc- | mAcc |\n|---|---|---|---|---|\n");
    for r in &s.rows {
        md.push_str(&format!(
            "| {} | {:.2} | {} | {} | {} |\n",
            r.change_kind.as_str(),
            r.epsilon,
            fmt_metric(&r.acc_pos),
            fmt_metric(&r.acc_neg),
            fmt_metric(&r.m_acc)
        ));
    }
}

fn fmt_metric(m: &MetricValue) -> String {
    match m {
        MetricValue::Defined(v) => format!("{v:.4}"),
        MetricValue::Undefined(reason) => format!("undefined ({reason})"),
    }
}
