//! SVG change-map rendering.
//!
//! Each element is drawn as its boundary polygon outline plus its
//! centerline, styled by change status: insertions green, deletions dashed
//! red, unchanged grey. Output is deterministic: elements are sorted by id
//! and coordinates printed with fixed precision.

use crate::dataset::FramePrediction;
use crate::geometry::element_polygon;
use crate::map::{Fov, LaneSegment, Point2};
use crate::perturb::{ChangeLabel, FrameGroundTruth};

/// Visual style per change status.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderStyle {
    pub inserted_color: String,
    pub deleted_color: String,
    pub unchanged_color: String,
    /// Dash pattern applied to deleted elements.
    pub deleted_dash: String,
    pub outline_width: f64,
    pub centerline_width: f64,
    /// Canvas scale in pixels per meter.
    pub scale: f64,
    pub background: String,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            inserted_color: "#2f9e44".into(),
            deleted_color: "#d32f2f".into(),
            unchanged_color: "#9e9e9e".into(),
            deleted_dash: "6,4".into(),
            outline_width: 0.9,
            centerline_width: 0.45,
            scale: 12.0,
            background: "#ffffff".into(),
        }
    }
}

impl RenderStyle {
    fn stroke(&self, label: ChangeLabel) -> (&str, Option<&str>) {
        match label {
            ChangeLabel::Inserted => (&self.inserted_color, None),
            ChangeLabel::Deleted => (&self.deleted_color, Some(&self.deleted_dash)),
            ChangeLabel::Unchanged => (&self.unchanged_color, None),
        }
    }
}

/// Render labeled elements into a standalone SVG document. Elements whose
/// polygonization is degenerate are skipped and reported in the warning
/// list.
pub fn render_change_map(
    fov: &Fov,
    elements: &[(&LaneSegment, ChangeLabel)],
    style: &RenderStyle,
) -> (String, Vec<String>) {
    let width = (fov.max_x - fov.min_x) * style.scale;
    let height = (fov.max_y - fov.min_y) * style.scale;
    // Ego frame is x forward / y left; the SVG y axis points down, so y is
    // flipped about the FOV.
    let tx = |p: Point2| (p.x - fov.min_x) * style.scale;
    let ty = |p: Point2| (fov.max_y - p.y) * style.scale;

    let mut sorted: Vec<&(&LaneSegment, ChangeLabel)> = elements.iter().collect();
    sorted.sort_by(|a, b| a.0.id.cmp(&b.0.id));

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect width=\"100%\" height=\"100%\" fill=\"{}\"/>\n",
        style.background
    ));

    let mut warnings = Vec::new();
    for (segment, label) in sorted {
        let polygon = match element_polygon(segment) {
            Ok(p) => p,
            Err(e) => {
                warnings.push(format!("element '{}' skipped: {e}", segment.id));
                continue;
            }
        };
        let (color, dash) = style.stroke(*label);
        let dash_attr =
            dash.map(|d| format!(" stroke-dasharray=\"{d}\"")).unwrap_or_default();

        let ring = polygon
            .ring()
            .iter()
            .map(|&p| format!("{:.3},{:.3}", tx(p), ty(p)))
            .collect::<Vec<_>>()
            .join(" ");
        svg.push_str(&format!(
            "  <polygon data-id=\"{}\" data-change=\"{}\" points=\"{ring}\" fill=\"none\" \
             stroke=\"{color}\" stroke-width=\"{:.2}\"{dash_attr}/>\n",
            xml_escape(&segment.id),
            label_str(*label),
            style.outline_width
        ));

        let center = segment
            .centerline
            .points()
            .iter()
            .map(|&p| format!("{:.3},{:.3}", tx(p), ty(p)))
            .collect::<Vec<_>>()
            .join(" ");
        svg.push_str(&format!(
            "  <polyline data-id=\"{}\" points=\"{center}\" fill=\"none\" stroke=\"{color}\" \
             stroke-width=\"{:.2}\"{dash_attr}/>\n",
            xml_escape(&segment.id),
            style.centerline_width
        ));
    }
    svg.push_str("</svg>\n");
    (svg, warnings)
}

/// Render a ground-truth frame using its change labels.
pub fn render_ground_truth(gt: &FrameGroundTruth, style: &RenderStyle) -> (String, Vec<String>) {
    let elements: Vec<(&LaneSegment, ChangeLabel)> =
        gt.elements.iter().map(|e| (&e.segment, e.label)).collect();
    render_change_map(&gt.fov, &elements, style)
}

/// Render a prediction frame; change status derives from the head flags
/// (deletion takes precedence when both are set).
pub fn render_prediction(pred: &FramePrediction, style: &RenderStyle) -> (String, Vec<String>) {
    let elements: Vec<(&LaneSegment, ChangeLabel)> = pred
        .elements
        .iter()
        .map(|e| {
            let label = if e.del_flag() {
                ChangeLabel::Deleted
            } else if e.ins_flag() {
                ChangeLabel::Inserted
            } else {
                ChangeLabel::Unchanged
            };
            (&e.segment, label)
        })
        .collect();
    render_change_map(&pred.fov, &elements, style)
}

fn label_str(label: ChangeLabel) -> &'static str {
    match label {
        ChangeLabel::Unchanged => "unchanged",
        ChangeLabel::Inserted => "inserted",
        ChangeLabel::Deleted => "deleted",
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturb::{generate_crossing, LabeledElement};
    use crate::sim::{generate_world, WorldConfig};

    fn gt_with_insertion() -> FrameGroundTruth {
        let world = generate_world("f", &WorldConfig { background_crossings: 0, ..Default::default() }, 2);
        let lane = world.elements[0].clone();
        let crossing = generate_crossing(&lane, 0.4, 3.5).unwrap();
        let mut elements: Vec<LabeledElement> = world
            .elements
            .iter()
            .map(|e| LabeledElement { segment: e.clone(), label: ChangeLabel::Unchanged })
            .collect();
        elements.push(LabeledElement { segment: crossing, label: ChangeLabel::Inserted });
        FrameGroundTruth { frame_id: "f".into(), fov: world.fov, elements }
    }

    #[test]
    fn inserted_crossing_renders_one_green_polygon() {
        let gt = gt_with_insertion();
        let (svg, warnings) = render_ground_truth(&gt, &RenderStyle::default());
        assert!(warnings.is_empty());
        let green_polygons = svg
            .lines()
            .filter(|l| l.contains("<polygon") && l.contains("data-change=\"inserted\""))
            .count();
        assert_eq!(green_polygons, 1);
        assert!(svg.contains("stroke=\"#2f9e44\""));
    }

    #[test]
    fn unchanged_frame_has_no_dashes_and_only_grey() {
        let mut gt = gt_with_insertion();
        for e in &mut gt.elements {
            e.label = ChangeLabel::Unchanged;
        }
        let (svg, _) = render_ground_truth(&gt, &RenderStyle::default());
        assert!(!svg.contains("stroke-dasharray"));
        assert!(!svg.contains("#2f9e44"));
        assert!(!svg.contains("#d32f2f"));
    }

    #[test]
    fn deleted_elements_are_dashed() {
        let mut gt = gt_with_insertion();
        gt.elements.last_mut().unwrap().label = ChangeLabel::Deleted;
        let (svg, _) = render_ground_truth(&gt, &RenderStyle::default());
        assert!(svg.contains("stroke-dasharray=\"6,4\""));
    }

    #[test]
    fn rendering_is_deterministic() {
        let gt = gt_with_insertion();
        let (a, _) = render_ground_truth(&gt, &RenderStyle::default());
        let (b, _) = render_ground_truth(&gt, &RenderStyle::default());
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_element_is_skipped_with_warning() {
        let mut gt = gt_with_insertion();
        let first = &mut gt.elements[0];
        first.segment.right_boundary = first.segment.left_boundary.clone();
        let (svg, warnings) = render_ground_truth(&gt, &RenderStyle::default());
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains(&gt.elements[0].segment.id));
        assert!(svg.starts_with("<svg"));
    }
}
