//! Dataset containers pairing stale priors, ground truth, and predictions,
//! plus the on-disk directory layout shared by the CLI tools.
//!
//! Layout:
//! ```text
//! <root>/manifest.json
//! <root>/<sequence_id>/stale/<frame_id>.json
//! <root>/<sequence_id>/gt/<frame_id>.json
//! <root>/<sequence_id>/pred/<frame_id>.json
//! ```
//! Ground-truth frames extend the map element schema with a `change` field
//! (`"unchanged" | "inserted" | "deleted"`); prediction frames extend it
//! with `score`, `ins_prob` and `del_prob` in [0, 1]. The manifest carries
//! sequence ids, ordered frame ids, and change tallies (distinct changed
//! element ids per sequence).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::map::{self, Fov, LaneSegment, LocalMap, MapError};
use crate::perturb::{ChangeKind, ChangeLabel, FrameGroundTruth, LabeledElement};

pub const DATASET_SCHEMA_VERSION: u32 = 1;

/// One detected element: geometry plus the detector head outputs.
///
/// The binary change flags are derived from the head probabilities at the
/// 0.5 cut, so flags and probabilities cannot drift apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedElement {
    pub segment: LaneSegment,
    /// Element existence confidence in [0, 1].
    pub score: f64,
    /// Insertion head probability in [0, 1].
    pub ins_prob: f64,
    /// Deletion head probability in [0, 1].
    pub del_prob: f64,
}

impl PredictedElement {
    pub fn new(segment: LaneSegment, score: f64, ins_prob: f64, del_prob: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&score));
        debug_assert!((0.0..=1.0).contains(&ins_prob));
        debug_assert!((0.0..=1.0).contains(&del_prob));
        Self { segment, score, ins_prob, del_prob }
    }

    pub fn ins_flag(&self) -> bool {
        self.ins_prob >= 0.5
    }

    pub fn del_flag(&self) -> bool {
        self.del_prob >= 0.5
    }

    /// True when the element signals a change (of the given kind, when a
    /// filter is supplied).
    pub fn signals_change(&self, filter: Option<ChangeKind>) -> bool {
        match filter {
            None => self.ins_flag() || self.del_flag(),
            Some(ChangeKind::Insertion) => self.ins_flag(),
            Some(ChangeKind::Deletion) => self.del_flag(),
        }
    }
}

/// Per-frame detector output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePrediction {
    pub frame_id: String,
    pub fov: Fov,
    pub elements: Vec<PredictedElement>,
}

impl FramePrediction {
    pub fn element_count(&self) -> usize {
        self.elements.len()
    }
}

/// One frame: stale prior, ground truth, and prediction with aligned ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub stale: LocalMap,
    pub ground_truth: FrameGroundTruth,
    pub prediction: FramePrediction,
}

/// A driving sequence of frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub id: String,
    pub frames: Vec<Frame>,
}

impl Sequence {
    /// Sequence-level ground truth: true iff any frame contains a change.
    pub fn has_change(&self, filter: Option<ChangeKind>) -> bool {
        self.frames.iter().any(|f| f.ground_truth.has_change(filter))
    }
}

/// The full evaluation input.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub sequences: Vec<Sequence>,
}

impl Dataset {
    pub fn frame_count(&self) -> usize {
        self.sequences.iter().map(|s| s.frames.len()).sum()
    }

    pub fn frames(&self) -> impl Iterator<Item = (&Sequence, &Frame)> {
        self.sequences.iter().flat_map(|s| s.frames.iter().map(move |f| (s, f)))
    }

    /// Distinct changed element ids of the given kind, summed per sequence.
    pub fn change_tally(&self, kind: ChangeKind) -> usize {
        self.sequences.iter().map(|s| distinct_changes(s, kind)).sum()
    }
}

fn distinct_changes(seq: &Sequence, kind: ChangeKind) -> usize {
    let mut ids = std::collections::BTreeSet::new();
    for f in &seq.frames {
        for e in f.ground_truth.changed(Some(kind)) {
            ids.insert(e.segment.id.as_str());
        }
    }
    ids.len()
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Map { path: String, source: MapError },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{path}: frame id '{found}' does not match manifest entry '{expected}'")]
    FrameIdMismatch { path: String, expected: String, found: String },
}

/// Dataset manifest: ids, frame order, and change tallies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub sequences: Vec<ManifestSequence>,
    pub totals: ManifestTotals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSequence {
    pub id: String,
    pub frames: Vec<String>,
    pub insertions: usize,
    pub deletions: usize,
    pub has_change: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ManifestTotals {
    pub sequences: usize,
    pub frames: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub change_sequences: usize,
    pub no_change_sequences: usize,
}

impl Manifest {
    pub fn for_dataset(ds: &Dataset) -> Manifest {
        let sequences: Vec<ManifestSequence> = ds
            .sequences
            .iter()
            .map(|s| ManifestSequence {
                id: s.id.clone(),
                frames: s.frames.iter().map(|f| f.ground_truth.frame_id.clone()).collect(),
                insertions: distinct_changes(s, ChangeKind::Insertion),
                deletions: distinct_changes(s, ChangeKind::Deletion),
                has_change: s.has_change(None),
            })
            .collect();
        let totals = ManifestTotals {
            sequences: sequences.len(),
            frames: sequences.iter().map(|s| s.frames.len()).sum(),
            insertions: sequences.iter().map(|s| s.insertions).sum(),
            deletions: sequences.iter().map(|s| s.deletions).sum(),
            change_sequences: sequences.iter().filter(|s| s.has_change).count(),
            no_change_sequences: sequences.iter().filter(|s| !s.has_change).count(),
        };
        Manifest { schema_version: DATASET_SCHEMA_VERSION, sequences, totals }
    }
}

// Raw file schemas for ground-truth and prediction frames. They extend the
// map element schema, so the shared fields parse identically.

#[derive(Serialize, Deserialize)]
struct RawGtFrame {
    frame_id: String,
    fov: [f64; 4],
    elements: Vec<RawGtElement>,
}

#[derive(Serialize, Deserialize)]
struct RawGtElement {
    #[serde(flatten)]
    base: map::io::RawElement,
    change: String,
}

#[derive(Serialize, Deserialize)]
struct RawPredFrame {
    frame_id: String,
    fov: [f64; 4],
    elements: Vec<RawPredElement>,
}

#[derive(Serialize, Deserialize)]
struct RawPredElement {
    #[serde(flatten)]
    base: map::io::RawElement,
    score: f64,
    ins_prob: f64,
    del_prob: f64,
}

fn label_from_str(s: &str) -> Result<ChangeLabel, MapError> {
    match s {
        "unchanged" => Ok(ChangeLabel::Unchanged),
        "inserted" => Ok(ChangeLabel::Inserted),
        "deleted" => Ok(ChangeLabel::Deleted),
        other => Err(MapError::Schema {
            field: "change".into(),
            message: format!("unknown change label '{other}'"),
        }),
    }
}

fn label_to_str(label: ChangeLabel) -> &'static str {
    match label {
        ChangeLabel::Unchanged => "unchanged",
        ChangeLabel::Inserted => "inserted",
        ChangeLabel::Deleted => "deleted",
    }
}

fn unit_interval(v: f64, field: &str) -> Result<f64, MapError> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(MapError::Schema { field: field.into(), message: format!("{v} not in [0, 1]") })
    }
}

/// Parse a ground-truth frame from JSON bytes.
pub fn load_gt_frame(bytes: &[u8]) -> Result<FrameGroundTruth, MapError> {
    let raw: RawGtFrame =
        serde_json::from_slice(bytes).map_err(|e| map::io::parse_error(&e))?;
    let mut warnings = Vec::new();
    let mut elements = Vec::with_capacity(raw.elements.len());
    for e in &raw.elements {
        elements.push(LabeledElement {
            segment: map::io::element_from_raw(&e.base, &mut warnings)?,
            label: label_from_str(&e.change)?,
        });
    }
    Ok(FrameGroundTruth { frame_id: raw.frame_id, fov: Fov::from(raw.fov), elements })
}

pub fn save_gt_frame(gt: &FrameGroundTruth) -> Vec<u8> {
    let raw = RawGtFrame {
        frame_id: gt.frame_id.clone(),
        fov: gt.fov.into(),
        elements: gt
            .elements
            .iter()
            .map(|e| RawGtElement {
                base: map::io::element_to_raw(&e.segment),
                change: label_to_str(e.label).to_string(),
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&raw).expect("gt serialization cannot fail");
    out.push(b'\n');
    out
}

/// Parse a prediction frame from JSON bytes.
pub fn load_pred_frame(bytes: &[u8]) -> Result<FramePrediction, MapError> {
    let raw: RawPredFrame =
        serde_json::from_slice(bytes).map_err(|e| map::io::parse_error(&e))?;
    let mut warnings = Vec::new();
    let mut elements = Vec::with_capacity(raw.elements.len());
    for e in &raw.elements {
        elements.push(PredictedElement {
            segment: map::io::element_from_raw(&e.base, &mut warnings)?,
            score: unit_interval(e.score, "score")?,
            ins_prob: unit_interval(e.ins_prob, "ins_prob")?,
            del_prob: unit_interval(e.del_prob, "del_prob")?,
        });
    }
    Ok(FramePrediction { frame_id: raw.frame_id, fov: Fov::from(raw.fov), elements })
}

pub fn save_pred_frame(pred: &FramePrediction) -> Vec<u8> {
    let raw = RawPredFrame {
        frame_id: pred.frame_id.clone(),
        fov: pred.fov.into(),
        elements: pred
            .elements
            .iter()
            .map(|e| RawPredElement {
                base: map::io::element_to_raw(&e.segment),
                score: e.score,
                ins_prob: e.ins_prob,
                del_prob: e.del_prob,
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&raw).expect("pred serialization cannot fail");
    out.push(b'\n');
    out
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), DatasetError> {
    fs::write(path, bytes)
        .map_err(|source| DatasetError::Io { path: path.display().to_string(), source })
}

fn read_file(path: &Path) -> Result<Vec<u8>, DatasetError> {
    fs::read(path).map_err(|source| DatasetError::Io { path: path.display().to_string(), source })
}

/// Write the dataset and its manifest under `root`.
pub fn save_dataset(ds: &Dataset, root: &Path) -> Result<Manifest, DatasetError> {
    let manifest = Manifest::for_dataset(ds);
    fs::create_dir_all(root)
        .map_err(|source| DatasetError::Io { path: root.display().to_string(), source })?;
    let mut manifest_bytes =
        serde_json::to_vec_pretty(&manifest).expect("manifest serialization cannot fail");
    manifest_bytes.push(b'\n');
    write_file(&root.join("manifest.json"), &manifest_bytes)?;

    for seq in &ds.sequences {
        let seq_dir = root.join(&seq.id);
        for sub in ["stale", "gt", "pred"] {
            fs::create_dir_all(seq_dir.join(sub)).map_err(|source| DatasetError::Io {
                path: seq_dir.join(sub).display().to_string(),
                source,
            })?;
        }
        for frame in &seq.frames {
            let name = format!("{}.json", frame.ground_truth.frame_id);
            write_file(&seq_dir.join("stale").join(&name), &map::save_map(&frame.stale))?;
            write_file(&seq_dir.join("gt").join(&name), &save_gt_frame(&frame.ground_truth))?;
            write_file(&seq_dir.join("pred").join(&name), &save_pred_frame(&frame.prediction))?;
        }
    }
    Ok(manifest)
}

/// Load a dataset from the directory layout written by [`save_dataset`].
pub fn load_dataset(root: &Path) -> Result<Dataset, DatasetError> {
    let manifest_path = root.join("manifest.json");
    let manifest: Manifest = serde_json::from_slice(&read_file(&manifest_path)?)
        .map_err(|e| DatasetError::Manifest(e.to_string()))?;
    if manifest.schema_version != DATASET_SCHEMA_VERSION {
        return Err(DatasetError::Manifest(format!(
            "unsupported schema_version {} (expected {DATASET_SCHEMA_VERSION})",
            manifest.schema_version
        )));
    }

    let mut sequences = Vec::with_capacity(manifest.sequences.len());
    for seq in &manifest.sequences {
        let seq_dir = root.join(&seq.id);
        let mut frames = Vec::with_capacity(seq.frames.len());
        for frame_id in &seq.frames {
            let name = format!("{frame_id}.json");
            let load = |sub: &str| -> Result<(PathBuf, Vec<u8>), DatasetError> {
                let path = seq_dir.join(sub).join(&name);
                let bytes = read_file(&path)?;
                Ok((path, bytes))
            };
            let (stale_path, stale_bytes) = load("stale")?;
            let stale = map::load_map(&stale_bytes).map_err(|source| DatasetError::Map {
                path: stale_path.display().to_string(),
                source,
            })?;
            let (gt_path, gt_bytes) = load("gt")?;
            let ground_truth = load_gt_frame(&gt_bytes).map_err(|source| DatasetError::Map {
                path: gt_path.display().to_string(),
                source,
            })?;
            let (pred_path, pred_bytes) = load("pred")?;
            let prediction = load_pred_frame(&pred_bytes).map_err(|source| DatasetError::Map {
                path: pred_path.display().to_string(),
                source,
            })?;

            for (path, found) in [
                (&stale_path, &stale.frame_id),
                (&gt_path, &ground_truth.frame_id),
                (&pred_path, &prediction.frame_id),
            ] {
                if found != frame_id {
                    return Err(DatasetError::FrameIdMismatch {
                        path: path.display().to_string(),
                        expected: frame_id.clone(),
                        found: found.clone(),
                    });
                }
            }
            frames.push(Frame { stale, ground_truth, prediction });
        }
        sequences.push(Sequence { id: seq.id.clone(), frames });
    }
    Ok(Dataset { sequences })
}
