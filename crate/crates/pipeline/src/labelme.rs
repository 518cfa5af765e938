//! LabelMe annotation files.
//!
//! Only what the pipeline needs is read: the image reference, its declared
//! size and the shapes labelled as marginalia. Any label containing
//! "marginalia" (case-insensitive) counts; other shapes are ignored.

use marginalia_core::BBox;
use serde_json::{json, Value};

/// Annotation of one page as stored in its LabelMe file.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMePage {
    pub image_path: String,
    pub width: u32,
    pub height: u32,
    pub boxes: Vec<BBox>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub page: LabelMePage,
    /// Shapes that were skipped, with the reason.
    pub warnings: Vec<String>,
}

pub fn is_marginalia_label(label: &str) -> bool {
    label.to_lowercase().contains("marginalia")
}

fn key<'a>(obj: &'a Value, name: &str) -> Result<&'a Value, String> {
    obj.get(name).ok_or_else(|| format!("missing key `{name}`"))
}

fn dimension(obj: &Value, name: &str) -> Result<u32, String> {
    key(obj, name)?
        .as_u64()
        .filter(|&v| v > 0 && v <= u64::from(u32::MAX))
        .map(|v| v as u32)
        .ok_or_else(|| format!("`{name}` must be a positive integer"))
}

fn points(shape: &Value, idx: usize) -> Result<Vec<(f64, f64)>, String> {
    let pts = key(shape, "points")
        .map_err(|e| format!("shape {idx}: {e}"))?
        .as_array()
        .ok_or_else(|| format!("shape {idx}: `points` must be an array"))?;
    pts.iter()
        .map(|p| match p.as_array().map(Vec::as_slice) {
            Some([x, y]) => match (x.as_f64(), y.as_f64()) {
                (Some(x), Some(y)) if x.is_finite() && y.is_finite() => Ok((x, y)),
                _ => Err(format!("shape {idx}: point coordinates must be numbers")),
            },
            _ => Err(format!("shape {idx}: each point must be [x, y]")),
        })
        .collect()
}

/// Extent `(x0, y0, x1, y1)` of a shape's points. Circles are stored as
/// centre and a rim point; everything else uses the points' bounding box.
fn extent(shape_type: &str, pts: &[(f64, f64)]) -> Option<(f64, f64, f64, f64)> {
    if shape_type == "circle" && pts.len() == 2 {
        let ((cx, cy), (px, py)) = (pts[0], pts[1]);
        let r = (px - cx).hypot(py - cy);
        return Some((cx - r, cy - r, cx + r, cy + r));
    }
    let first = pts.first()?;
    Some(pts.iter().fold((first.0, first.1, first.0, first.1), |(a, b, c, d), &(x, y)| {
        (a.min(x), b.min(y), c.max(x), d.max(y))
    }))
}

/// Parses one LabelMe document. Corner coordinates are rounded to the pixel
/// grid and clamped to the declared image size; shapes with no area left
/// are skipped with a warning.
pub fn parse_labelme(text: &str) -> Result<Parsed, String> {
    let doc: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    if !doc.is_object() {
        return Err("top level must be an object".into());
    }
    let image_path = key(&doc, "imagePath")?
        .as_str()
        .ok_or("`imagePath` must be a string")?
        .to_string();
    let width = dimension(&doc, "imageWidth")?;
    let height = dimension(&doc, "imageHeight")?;
    let shapes = key(&doc, "shapes")?
        .as_array()
        .ok_or("`shapes` must be an array")?;

    let mut boxes = Vec::new();
    let mut warnings = Vec::new();
    for (idx, shape) in shapes.iter().enumerate() {
        let label = key(shape, "label")
            .map_err(|e| format!("shape {idx}: {e}"))?
            .as_str()
            .ok_or_else(|| format!("shape {idx}: `label` must be a string"))?;
        if !is_marginalia_label(label) {
            continue;
        }
        let shape_type = shape
            .get("shape_type")
            .and_then(Value::as_str)
            .unwrap_or("rectangle");
        let pts = points(shape, idx)?;
        let Some((x0, y0, x1, y1)) = extent(shape_type, &pts) else {
            warnings.push(format!("shape {idx} ({label}): no points, skipped"));
            continue;
        };
        let clamp = |v: f64, hi: u32| v.round().clamp(0.0, f64::from(hi)) as u32;
        let (x0, x1) = (clamp(x0, width), clamp(x1, width));
        let (y0, y1) = (clamp(y0, height), clamp(y1, height));
        match BBox::new(x0, y0, x1 - x0, y1 - y0) {
            Ok(b) => boxes.push(b),
            Err(_) => warnings.push(format!(
                "shape {idx} ({label}): zero area after clamping to {width}x{height}, skipped"
            )),
        }
    }
    Ok(Parsed {
        page: LabelMePage {
            image_path,
            width,
            height,
            boxes,
        },
        warnings,
    })
}

/// Writes a page back as a LabelMe document with one rectangle per box.
pub fn to_labelme(page: &LabelMePage) -> String {
    let shapes: Vec<Value> = page
        .boxes
        .iter()
        .map(|b| {
            json!({
                "label": "marginalia",
                "points": [[b.x(), b.y()], [b.right(), b.bottom()]],
                "group_id": null,
                "shape_type": "rectangle",
                "flags": {},
            })
        })
        .collect();
    let doc = json!({
        "version": "5.0.1",
        "flags": {},
        "shapes": shapes,
        "imagePath": page.image_path,
        "imageData": null,
        "imageHeight": page.height,
        "imageWidth": page.width,
    });
    serde_json::to_string_pretty(&doc).expect("valid JSON")
}
