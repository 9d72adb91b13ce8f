//! Trajectory data types and the JSON ink file format.
//!
//! An ink file looks like
//!
//! ```json
//! {"version": 1, "samples": [{"label": "ا", "strokes": [[[0, 0, 0.0], [0, 1, 16.0]]]}]}
//! ```
//!
//! Points are `[x, y]` or `[x, y, t]`; all points of one stroke must use the
//! same arity. Coordinates use the mathematical convention: y grows upward.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// Current ink file format version.
pub const INK_FORMAT_VERSION: u32 = 1;

/// Label carried by live input that has no ground truth.
pub const UNLABELED: &str = "unlabeled";

#[derive(Debug, Error)]
pub enum InkError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported ink format version {0}")]
    Version(u64),
    #[error("sample {sample}, stroke {stroke}: {message}")]
    Format {
        sample: usize,
        stroke: usize,
        message: String,
    },
    #[error("sample {sample}: invalid {field}: {reason}")]
    Validation {
        sample: usize,
        field: String,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InkPoint {
    pub x: f64,
    pub y: f64,
    /// Milliseconds; non-decreasing within a stroke when present.
    pub t: Option<f64>,
}

impl InkPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y, t: None }
    }

    pub fn timed(x: f64, y: f64, t: f64) -> Self {
        Self { x, y, t: Some(t) }
    }

    fn same_position(&self, other: &InkPoint) -> bool {
        self.x == other.x && self.y == other.y
    }
}

/// Axis-aligned bounding box of a point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl BoundingBox {
    /// Returns `None` for an empty slice.
    pub fn of(points: &[InkPoint]) -> Option<Self> {
        let first = points.first()?;
        let mut bb = BoundingBox {
            x_min: first.x,
            x_max: first.x,
            y_min: first.y,
            y_max: first.y,
        };
        for p in &points[1..] {
            bb.x_min = bb.x_min.min(p.x);
            bb.x_max = bb.x_max.max(p.x);
            bb.y_min = bb.y_min.min(p.y);
            bb.y_max = bb.y_max.max(p.y);
        }
        Some(bb)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x_max + self.x_min) / 2.0,
            (self.y_max + self.y_min) / 2.0,
        )
    }
}

/// A pen-down to pen-up trajectory: at least two points, no two consecutive
/// points at the same position.
#[derive(Debug, Clone, PartialEq)]
pub struct Stroke {
    points: Vec<InkPoint>,
}

impl Stroke {
    /// Builds a stroke, dropping consecutive points at an identical position.
    /// Returns the stroke and the number of points dropped.
    pub fn new(points: Vec<InkPoint>) -> Result<(Self, usize), StrokeError> {
        let mut kept: Vec<InkPoint> = Vec::with_capacity(points.len());
        let mut dropped = 0;
        for p in points {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(StrokeError::NonFinite);
            }
            if let (Some(t), Some(prev)) = (p.t, kept.last().and_then(|q| q.t)) {
                if t < prev {
                    return Err(StrokeError::TimeReversed);
                }
            }
            match kept.last() {
                Some(last) if last.same_position(&p) => dropped += 1,
                _ => kept.push(p),
            }
        }
        if kept.len() < 2 {
            return Err(StrokeError::TooShort(kept.len()));
        }
        Ok((Self { points: kept }, dropped))
    }

    /// Convenience constructor for untimed coordinates.
    pub fn from_xy(coords: &[(f64, f64)]) -> Result<Self, StrokeError> {
        Self::new(coords.iter().map(|&(x, y)| InkPoint::new(x, y)).collect()).map(|(s, _)| s)
    }

    /// Replaces coordinates without re-deduplicating. Used by filters that
    /// preserve point count.
    pub(crate) fn from_filtered(points: Vec<InkPoint>) -> Self {
        debug_assert!(points.len() >= 2);
        Self { points }
    }

    pub fn points(&self) -> &[InkPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bounding_box(&self) -> BoundingBox {
        BoundingBox::of(&self.points).expect("stroke has at least two points")
    }

    /// Swaps x and y of every point.
    pub fn transposed(&self) -> Stroke {
        Stroke {
            points: self
                .points
                .iter()
                .map(|p| InkPoint {
                    x: p.y,
                    y: p.x,
                    t: p.t,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrokeError {
    #[error("stroke has {0} distinct point(s), at least 2 required")]
    TooShort(usize),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("timestamps decrease along the stroke")]
    TimeReversed,
}

/// One labeled handwriting pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct InkSample {
    pub label: String,
    strokes: Vec<Stroke>,
}

impl InkSample {
    pub fn new(label: impl Into<String>, strokes: Vec<Stroke>) -> Result<Self, StrokeError> {
        if strokes.is_empty() {
            return Err(StrokeError::TooShort(0));
        }
        Ok(Self {
            label: label.into(),
            strokes,
        })
    }

    pub(crate) fn with_strokes(&self, strokes: Vec<Stroke>) -> Self {
        Self {
            label: self.label.clone(),
            strokes,
        }
    }

    pub fn strokes(&self) -> &[Stroke] {
        &self.strokes
    }

    pub fn stroke_count(&self) -> usize {
        self.strokes.len()
    }

    pub fn point_count(&self) -> usize {
        self.strokes.iter().map(Stroke::len).sum()
    }

    pub fn is_unlabeled(&self) -> bool {
        self.label == UNLABELED
    }

    /// Checks the label against a class inventory; `"unlabeled"` is always accepted.
    pub fn label_in(&self, inventory: &[String]) -> bool {
        self.is_unlabeled() || inventory.iter().any(|c| c == &self.label)
    }
}

/// A contiguous run of one stroke's points, `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub parent_stroke_index: usize,
    pub start_index: usize,
    pub end_index: usize,
}

impl Token {
    pub fn points<'a>(&self, stroke: &'a Stroke) -> &'a [InkPoint] {
        &stroke.points()[self.start_index..=self.end_index]
    }

    pub fn len(&self) -> usize {
        self.end_index - self.start_index + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Result of [`parse_ink_file`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedInk {
    pub samples: Vec<InkSample>,
    /// Consecutive duplicate points removed during ingest.
    pub duplicates_dropped: usize,
}

#[derive(Deserialize)]
struct RawFile {
    version: u64,
    samples: Vec<RawSample>,
}

#[derive(Deserialize)]
struct RawSample {
    label: String,
    strokes: Vec<Vec<Vec<Value>>>,
}

/// Parses and validates an ink file.
pub fn parse_ink_file(bytes: &[u8]) -> Result<ParsedInk, InkError> {
    let raw: RawFile = serde_json::from_slice(bytes).map_err(|e| InkError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if raw.version != u64::from(INK_FORMAT_VERSION) {
        return Err(InkError::Version(raw.version));
    }
    let mut samples = Vec::with_capacity(raw.samples.len());
    let mut duplicates_dropped = 0;
    for (si, rs) in raw.samples.into_iter().enumerate() {
        let (sample, dropped) = sample_from_raw(si, rs)?;
        duplicates_dropped += dropped;
        samples.push(sample);
    }
    Ok(ParsedInk {
        samples,
        duplicates_dropped,
    })
}

/// Parses the stroke arrays of one sample (the `strokes` member of the ink
/// format) into validated strokes.
pub fn strokes_from_json(
    sample: usize,
    strokes: &[Vec<Vec<Value>>],
) -> Result<(Vec<Stroke>, usize), InkError> {
    let mut out = Vec::with_capacity(strokes.len());
    let mut dropped = 0;
    for (ki, raw_stroke) in strokes.iter().enumerate() {
        let points = points_from_json(sample, ki, raw_stroke)?;
        let (stroke, d) = Stroke::new(points).map_err(|e| InkError::Validation {
            sample,
            field: format!("strokes[{ki}]"),
            reason: e.to_string(),
        })?;
        dropped += d;
        out.push(stroke);
    }
    if out.is_empty() {
        return Err(InkError::Validation {
            sample,
            field: "strokes".into(),
            reason: "at least one stroke required".into(),
        });
    }
    Ok((out, dropped))
}

fn sample_from_raw(si: usize, rs: RawSample) -> Result<(InkSample, usize), InkError> {
    let (strokes, dropped) = strokes_from_json(si, &rs.strokes)?;
    Ok((
        InkSample {
            label: rs.label,
            strokes,
        },
        dropped,
    ))
}

fn points_from_json(
    sample: usize,
    stroke: usize,
    raw: &[Vec<Value>],
) -> Result<Vec<InkPoint>, InkError> {
    let format_err = |message: String| InkError::Format {
        sample,
        stroke,
        message,
    };
    let arity = raw.first().map(Vec::len).unwrap_or(2);
    let mut points = Vec::with_capacity(raw.len());
    for (pi, p) in raw.iter().enumerate() {
        if p.len() != 2 && p.len() != 3 {
            return Err(format_err(format!(
                "point {pi} has {} elements, expected 2 or 3",
                p.len()
            )));
        }
        if p.len() != arity {
            return Err(format_err(format!(
                "point {pi} mixes {}-element and {arity}-element points",
                p.len()
            )));
        }
        let num = |v: &Value| {
            v.as_f64()
                .ok_or_else(|| format_err(format!("point {pi} has a non-numeric element")))
        };
        let x = num(&p[0])?;
        let y = num(&p[1])?;
        let t = if p.len() == 3 { Some(num(&p[2])?) } else { None };
        points.push(InkPoint { x, y, t });
    }
    Ok(points)
}

#[derive(Serialize)]
struct OutFile<'a> {
    version: u32,
    samples: Vec<OutSample<'a>>,
}

#[derive(Serialize)]
struct OutSample<'a> {
    label: &'a str,
    strokes: Vec<Vec<Vec<f64>>>,
}

/// Encodes strokes in the ink format's nested-array layout.
pub fn strokes_to_json(strokes: &[Stroke]) -> Vec<Vec<Vec<f64>>> {
    strokes
        .iter()
        .map(|s| {
            s.points()
                .iter()
                .map(|p| match p.t {
                    Some(t) => vec![p.x, p.y, t],
                    None => vec![p.x, p.y],
                })
                .collect()
        })
        .collect()
}

/// Serializes samples to the ink format. Floats are written in shortest
/// round-trip form, so parsing the output reproduces the input exactly.
pub fn write_ink_file(samples: &[InkSample]) -> Vec<u8> {
    let file = OutFile {
        version: INK_FORMAT_VERSION,
        samples: samples
            .iter()
            .map(|s| OutSample {
                label: &s.label,
                strokes: strokes_to_json(&s.strokes),
            })
            .collect(),
    };
    let mut out = serde_json::to_vec(&file).expect("ink samples always serialize");
    out.push(b'\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_file() {
        let src = r#"{"version":1,"samples":[{"label":"ا","strokes":[[[0,0],[0,1],[0,2]]]}]}"#;
        let parsed = parse_ink_file(src.as_bytes()).unwrap();
        assert_eq!(parsed.samples.len(), 1);
        let s = &parsed.samples[0];
        assert_eq!(s.label, "ا");
        assert_eq!(s.stroke_count(), 1);
        assert_eq!(s.strokes()[0].len(), 3);
        assert_eq!(parsed.duplicates_dropped, 0);
    }

    #[test]
    fn empty_samples() {
        let parsed = parse_ink_file(br#"{"version":1,"samples":[]}"#).unwrap();
        assert!(parsed.samples.is_empty());
    }

    #[test]
    fn drops_consecutive_duplicates() {
        let src = r#"{"version":1,"samples":[{"label":"x","strokes":[[[1,1],[1,1],[2,2]]]}]}"#;
        let parsed = parse_ink_file(src.as_bytes()).unwrap();
        assert_eq!(parsed.samples[0].strokes()[0].len(), 2);
        assert_eq!(parsed.duplicates_dropped, 1);
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_ink_file(b"{\"version\":1,\n\"samples\":[}").unwrap_err();
        match err {
            InkError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn one_point_stroke_names_sample_and_field() {
        let src = r#"{"version":1,"samples":[
            {"label":"a","strokes":[[[0,0],[1,1]]]},
            {"label":"b","strokes":[[[0,0],[1,1]],[[5,5]]]}]}"#;
        match parse_ink_file(src.as_bytes()).unwrap_err() {
            InkError::Validation { sample, field, .. } => {
                assert_eq!(sample, 1);
                assert_eq!(field, "strokes[1]");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn collapsed_duplicates_are_too_short() {
        let src = r#"{"version":1,"samples":[{"label":"a","strokes":[[[3,3],[3,3]]]}]}"#;
        assert!(matches!(
            parse_ink_file(src.as_bytes()),
            Err(InkError::Validation { .. })
        ));
    }

    #[test]
    fn mixed_arity_is_rejected() {
        let src = r#"{"version":1,"samples":[{"label":"a","strokes":[[[0,0,1],[1,1]]]}]}"#;
        assert!(matches!(
            parse_ink_file(src.as_bytes()),
            Err(InkError::Format { sample: 0, stroke: 0, .. })
        ));
    }

    #[test]
    fn rejects_unknown_version_and_reversed_time() {
        assert!(matches!(
            parse_ink_file(br#"{"version":2,"samples":[]}"#),
            Err(InkError::Version(2))
        ));
        let src = r#"{"version":1,"samples":[{"label":"a","strokes":[[[0,0,5],[1,1,4]]]}]}"#;
        assert!(matches!(
            parse_ink_file(src.as_bytes()),
            Err(InkError::Validation { .. })
        ));
    }

    #[test]
    fn empty_stroke_list_rejected() {
        let src = r#"{"version":1,"samples":[{"label":"a","strokes":[]}]}"#;
        assert!(matches!(
            parse_ink_file(src.as_bytes()),
            Err(InkError::Validation { .. })
        ));
    }

    #[test]
    fn write_empty_list() {
        let out = write_ink_file(&[]);
        assert_eq!(out, b"{\"version\":1,\"samples\":[]}\n");
    }

    #[test]
    fn untimed_points_omit_t() {
        let s = InkSample::new("a", vec![Stroke::from_xy(&[(0.0, 0.0), (1.5, 2.0)]).unwrap()]).unwrap();
        let text = String::from_utf8(write_ink_file(&[s])).unwrap();
        assert!(text.contains("[[[0.0,0.0],[1.5,2.0]]]"), "{text}");
        let back = parse_ink_file(text.as_bytes()).unwrap();
        assert!(back.samples[0].strokes()[0].points().iter().all(|p| p.t.is_none()));
    }

    #[test]
    fn label_inventory() {
        let s = InkSample::new(UNLABELED, vec![Stroke::from_xy(&[(0.0, 0.0), (1.0, 0.0)]).unwrap()])
            .unwrap();
        assert!(s.label_in(&[]));
        let t = InkSample::new("ب", s.strokes().to_vec()).unwrap();
        assert!(t.label_in(&["ب".to_string()]));
        assert!(!t.label_in(&["ا".to_string()]));
    }
}
