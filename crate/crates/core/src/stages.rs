//! File-level pipeline stages. Each stage maps the bytes of one artifact to
//! the bytes of the next, so every intermediate result can be inspected:
//!
//! ink --preprocess--> ink --segment--> segment JSON --featurize--> CSV
//!
//! Floats are written in shortest round-trip form, so chaining the stages
//! gives exactly what [`crate::pipeline::analyze`] computes in memory.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::features::TokenFeatures;
use crate::ink::{parse_ink_file, strokes_from_json, strokes_to_json, write_ink_file, InkSample, Token};
use crate::pipeline::{featurize_segmented, SampleAnalysis};
use crate::preprocess::{smooth_sample, PreprocessConfig};
use crate::segmentation::{
    segment_stroke, CriticalPoint, CriticalPointScan, DirectionLength, StrokeSegmentation,
};

pub const SEGMENT_FORMAT_VERSION: u32 = 1;

pub const FEATURE_CSV_HEADER: &str =
    "sample_id,stroke,token,start,end,ratio_pct,category,direction_deg,mid_x,mid_y,orientation";

/// Output of a stage plus the number of duplicate points dropped while
/// reading its input.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOutput {
    pub bytes: Vec<u8>,
    pub duplicates_dropped: usize,
}

/// Smooths every stroke of an ink file.
pub fn preprocess(ink: &[u8], config: &PreprocessConfig) -> Result<StageOutput> {
    let parsed = parse_ink_file(ink)?;
    let smoothed: Vec<InkSample> = parsed
        .samples
        .par_iter()
        .map(|s| smooth_sample(s, config))
        .collect();
    Ok(StageOutput {
        bytes: write_ink_file(&smoothed),
        duplicates_dropped: parsed.duplicates_dropped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentFile {
    pub version: u32,
    pub window_fraction: f64,
    pub samples: Vec<SegmentedSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentedSample {
    pub label: String,
    pub strokes: Vec<SegmentedStroke>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentedStroke {
    /// The stroke in ink-format point layout.
    pub points: Vec<Vec<f64>>,
    pub direction: DirectionLength,
    pub window: usize,
    pub too_short: bool,
    pub critical_points: Vec<CriticalPoint>,
    pub tokens: Vec<Token>,
}

/// Segments every stroke of an (already smoothed) ink file.
pub fn segment(ink: &[u8], window_fraction: f64) -> Result<StageOutput> {
    if !(window_fraction > 0.0 && window_fraction < 1.0) {
        return Err(Error::Config(format!(
            "window fraction must lie in (0, 1), got {window_fraction}"
        )));
    }
    let parsed = parse_ink_file(ink)?;
    let samples = parsed
        .samples
        .par_iter()
        .map(|s| segmented_sample(s, window_fraction))
        .collect();
    let file = SegmentFile {
        version: SEGMENT_FORMAT_VERSION,
        window_fraction,
        samples,
    };
    let mut bytes = serde_json::to_vec_pretty(&file).expect("segment file serializes");
    bytes.push(b'\n');
    Ok(StageOutput {
        bytes,
        duplicates_dropped: parsed.duplicates_dropped,
    })
}

fn segmented_sample(sample: &InkSample, window_fraction: f64) -> SegmentedSample {
    let points = strokes_to_json(sample.strokes());
    let strokes = sample
        .strokes()
        .iter()
        .zip(points)
        .enumerate()
        .map(|(i, (stroke, points))| {
            let seg = segment_stroke(stroke, i, window_fraction);
            SegmentedStroke {
                points,
                direction: seg.direction,
                window: seg.scan.window,
                too_short: seg.scan.too_short,
                critical_points: seg.scan.points,
                tokens: seg.tokens,
            }
        })
        .collect();
    SegmentedSample {
        label: sample.label.clone(),
        strokes,
    }
}

/// Reads a segment file back into samples and their segmentations,
/// checking that every stroke's tokens cover it exactly.
pub fn read_segment_file(bytes: &[u8]) -> Result<Vec<(InkSample, Vec<StrokeSegmentation>)>> {
    let file: SegmentFile = serde_json::from_slice(bytes).map_err(|e| Error::Format {
        what: "segment file",
        message: e.to_string(),
    })?;
    if file.version != SEGMENT_FORMAT_VERSION {
        return Err(Error::Format {
            what: "segment file",
            message: format!("unsupported version {}", file.version),
        });
    }
    file.samples
        .into_iter()
        .enumerate()
        .map(|(si, s)| {
            let raw: Vec<Vec<Vec<Value>>> = s
                .strokes
                .iter()
                .map(|st| {
                    st.points
                        .iter()
                        .map(|p| p.iter().map(|&v| Value::from(v)).collect())
                        .collect()
                })
                .collect();
            let (strokes, _) = strokes_from_json(si, &raw)?;
            let segs = s
                .strokes
                .into_iter()
                .zip(&strokes)
                .enumerate()
                .map(|(ki, (st, stroke))| {
                    check_cover(&st.tokens, stroke.len()).map_err(|message| Error::Format {
                        what: "segment file",
                        message: format!("sample {si} stroke {ki}: {message}"),
                    })?;
                    Ok(StrokeSegmentation {
                        direction: st.direction,
                        scan: CriticalPointScan {
                            points: st.critical_points,
                            window: st.window,
                            too_short: st.too_short,
                        },
                        tokens: st.tokens,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let sample = InkSample::new(s.label, strokes).expect("strokes_from_json returns at least one stroke");
            Ok((sample, segs))
        })
        .collect()
}

fn check_cover(tokens: &[Token], len: usize) -> std::result::Result<(), String> {
    let mut next = 0;
    for t in tokens {
        if t.start_index != next || t.end_index < t.start_index {
            return Err(format!("token {}..={} breaks the cover", t.start_index, t.end_index));
        }
        next = t.end_index + 1;
    }
    if next != len {
        return Err(format!("tokens cover {next} of {len} points"));
    }
    Ok(())
}

/// Computes token features for a segment file and renders them as CSV.
pub fn featurize(segments: &[u8]) -> Result<String> {
    let samples = read_segment_file(segments)?;
    let features = samples
        .par_iter()
        .map(|(sample, segs)| featurize_segmented(sample, segs).map_err(Error::from))
        .collect::<Result<Vec<_>>>()?;
    Ok(render_csv(features.iter().map(Vec::as_slice), samples.iter().map(|(_, s)| s.as_slice())))
}

/// The feature CSV for samples analyzed in memory.
pub fn features_csv(analyses: &[SampleAnalysis]) -> String {
    render_csv(
        analyses.iter().map(|a| a.features.as_slice()),
        analyses.iter().map(|a| a.strokes.as_slice()),
    )
}

fn render_csv<'a>(
    features: impl Iterator<Item = &'a [Vec<TokenFeatures>]>,
    segments: impl Iterator<Item = &'a [StrokeSegmentation]>,
) -> String {
    let mut out = String::from(FEATURE_CSV_HEADER);
    out.push('\n');
    for (sample_id, (feats, segs)) in features.zip(segments).enumerate() {
        for (stroke, (f_row, seg)) in feats.iter().zip(segs).enumerate() {
            for (token, (f, t)) in f_row.iter().zip(&seg.tokens).enumerate() {
                let _ = writeln!(
                    out,
                    "{sample_id},{stroke},{token},{},{},{},{},{},{},{},{}",
                    t.start_index,
                    t.end_index,
                    f.length_ratio_pct,
                    f.length_category.as_str(),
                    f.direction_deg,
                    f.midpoint.0,
                    f.midpoint.1,
                    f.orientation.as_str(),
                );
            }
        }
    }
    out
}
