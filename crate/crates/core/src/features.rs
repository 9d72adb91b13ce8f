//! Per-token features, the fixed-width binary encoding fed to the classifier,
//! and stroke-count clusters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ink::{BoundingBox, InkSample, Stroke, Token};
use crate::segmentation::{Direction, DirectionLength};

/// Bits per token slot: 4 length category + 8 direction bins + orientation +
/// midpoint-above-center + presence.
pub const BITS_PER_TOKEN: usize = 15;
pub const DEFAULT_MAX_TOKENS: usize = 8;
pub const DIRECTION_BINS: usize = 8;
const DIRECTION_BIN_DEG: f64 = 90.0 / DIRECTION_BINS as f64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("stroke {stroke} has zero extent along its dominant axis")]
    DegenerateStroke { stroke: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthCategory {
    Short,
    MiddleShort,
    MiddleLong,
    Long,
}

impl LengthCategory {
    /// Bins `[0,25)`, `[25,50)`, `[50,75)`, `[75,100]`.
    pub fn from_ratio(pct: f64) -> Self {
        if pct < 25.0 {
            Self::Short
        } else if pct < 50.0 {
            Self::MiddleShort
        } else if pct < 75.0 {
            Self::MiddleLong
        } else {
            Self::Long
        }
    }

    fn slot(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Short => "short",
            Self::MiddleShort => "middle_short",
            Self::MiddleLong => "middle_long",
            Self::Long => "long",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    OnClockwise,
    OnCounterClockwise,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::OnClockwise => "on_clockwise",
            Self::OnCounterClockwise => "on_counter_clockwise",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenFeatures {
    pub length_ratio_pct: f64,
    pub length_category: LengthCategory,
    pub direction_deg: f64,
    pub midpoint: (f64, f64),
    pub orientation: Orientation,
    /// Token box center at or above the stroke box center.
    pub above_stroke_center: bool,
}

fn dominant_extent(bb: &BoundingBox, direction: Direction) -> f64 {
    match direction {
        Direction::Horizontal => bb.width(),
        Direction::Vertical => bb.height(),
    }
}

/// Token extent as a percentage of the stroke extent, both measured along
/// the stroke's dominant axis.
pub fn length_ratio(
    token: &Token,
    stroke: &Stroke,
    dl: &DirectionLength,
) -> Result<(f64, LengthCategory), FeatureError> {
    let stroke_extent = dominant_extent(&stroke.bounding_box(), dl.value);
    if stroke_extent <= 0.0 {
        return Err(FeatureError::DegenerateStroke {
            stroke: token.parent_stroke_index,
        });
    }
    let token_bb = BoundingBox::of(token.points(stroke)).expect("tokens are non-empty");
    let pct = ratio_pct(dominant_extent(&token_bb, dl.value), stroke_extent);
    Ok((pct, LengthCategory::from_ratio(pct)))
}

fn ratio_pct(token_extent: f64, stroke_extent: f64) -> f64 {
    (100.0 * token_extent / stroke_extent).clamp(0.0, 100.0)
}

/// Slope of the token's bounding-box diagonal in degrees, `[0, 90]`.
pub fn direction(token_points: &[crate::ink::InkPoint]) -> f64 {
    let bb = BoundingBox::of(token_points).expect("tokens are non-empty");
    let dx = bb.width();
    if dx == 0.0 {
        return 90.0;
    }
    (bb.height() / dx).atan().to_degrees()
}

pub fn midpoint(token_points: &[crate::ink::InkPoint]) -> (f64, f64) {
    BoundingBox::of(token_points).expect("tokens are non-empty").center()
}

/// Clockwise when the trajectory point at the median index lies at or above
/// the box center (the arc bulges upward), counter-clockwise otherwise.
pub fn orientation(token_points: &[crate::ink::InkPoint]) -> Orientation {
    if token_points.len() < 3 {
        return Orientation::OnClockwise;
    }
    let (_, cy) = midpoint(token_points);
    let median = token_points[token_points.len() / 2];
    if median.y >= cy {
        Orientation::OnClockwise
    } else {
        Orientation::OnCounterClockwise
    }
}

pub fn token_features(
    token: &Token,
    stroke: &Stroke,
    dl: &DirectionLength,
) -> Result<TokenFeatures, FeatureError> {
    let (length_ratio_pct, length_category) = length_ratio(token, stroke, dl)?;
    let pts = token.points(stroke);
    let mid = midpoint(pts);
    let (_, stroke_cy) = stroke.bounding_box().center();
    Ok(TokenFeatures {
        length_ratio_pct,
        length_category,
        direction_deg: direction(pts),
        midpoint: mid,
        orientation: orientation(pts),
        above_stroke_center: mid.1 >= stroke_cy,
    })
}

/// Direction bin in `0..8`, each 11.25 degrees wide; 90 degrees falls in the last bin.
pub fn direction_bin(deg: f64) -> usize {
    ((deg / DIRECTION_BIN_DEG).floor().max(0.0) as usize).min(DIRECTION_BINS - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingLayout {
    pub max_tokens: usize,
    pub bits_per_token: usize,
}

impl EncodingLayout {
    pub fn new(max_tokens: usize) -> Self {
        Self {
            max_tokens,
            bits_per_token: BITS_PER_TOKEN,
        }
    }

    pub fn width(&self) -> usize {
        self.max_tokens * self.bits_per_token
    }
}

impl Default for EncodingLayout {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_TOKENS)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedVector {
    pub bits: Vec<u8>,
    pub layout: EncodingLayout,
    /// Tokens beyond `max_tokens` that were dropped.
    pub truncated: usize,
}

impl EncodedVector {
    pub fn to_reals(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| f64::from(b)).collect()
    }
}

/// Packs token features into fixed-width slots in token order. Unused
/// slots stay all-zero; tokens past `max_tokens` are dropped and counted.
pub fn encode(tokens: &[TokenFeatures], layout: EncodingLayout) -> EncodedVector {
    assert_eq!(
        layout.bits_per_token, BITS_PER_TOKEN,
        "unsupported bits per token"
    );
    let mut bits = vec![0u8; layout.width()];
    for (slot, f) in tokens.iter().take(layout.max_tokens).enumerate() {
        let b = &mut bits[slot * BITS_PER_TOKEN..(slot + 1) * BITS_PER_TOKEN];
        b[f.length_category.slot()] = 1;
        b[4 + direction_bin(f.direction_deg)] = 1;
        b[12] = u8::from(f.orientation == Orientation::OnClockwise);
        b[13] = u8::from(f.above_stroke_center);
        b[14] = 1;
    }
    EncodedVector {
        bits,
        layout,
        truncated: tokens.len().saturating_sub(layout.max_tokens),
    }
}

/// Stroke-count cluster: 1, 2, 3, or 4 (four or more strokes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StrokeCountGroup {
    pub cluster_id: u8,
    pub stroke_count: usize,
}

pub const CLUSTER_COUNT: usize = 4;

pub fn cluster_for(stroke_count: usize) -> u8 {
    stroke_count.clamp(1, CLUSTER_COUNT) as u8
}

pub fn group_of(sample: &InkSample) -> StrokeCountGroup {
    StrokeCountGroup {
        cluster_id: cluster_for(sample.stroke_count()),
        stroke_count: sample.stroke_count(),
    }
}
